#include <cmath>
#include <numbers>
#include <utility>

#include "ak/errors.hpp"
#include "ak/scalar_cm.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace ak;
using ak::test::rel_err;

namespace {

constexpr double kGrid[] = {0.1, 0.5, 1.0, 2.0, 5.0, 10.0};

std::vector<std::pair<std::string, Params>> catalog_samples() {
  return {
      {"constant", {}},
      {"constant", {{"value", 5.0}}},
      {"exp_neg", {}},
      {"exp_neg", {{"rate", 0.3}}},
      {"exp_neg_power", {{"gamma", 0.5}}},
      {"exp_neg_power", {{"gamma", 0.3}}},
      {"exp_neg_power", {{"gamma", 1.0}}},
      {"gen_cauchy", {{"c", 1.0}, {"nu", 2.0}, {"gamma", 1.0}}},
      {"gen_cauchy", {{"c", 0.5}, {"nu", 0.7}, {"gamma", 1.0}}},
      {"gen_cauchy", {{"c", 2.0}, {"nu", 1.5}, {"gamma", 0.6}}},
      {"inverse_power", {{"nu", 1.0}}},
      {"inverse_power", {{"nu", 3.5}}},
  };
}

/// Closed form 2^{1-nu} z^nu K_nu(z) / Gamma(nu).
double matern_closed(double nu, double z) {
  return std::pow(2.0, 1.0 - nu) * std::pow(z, nu) * std::cyl_bessel_k(nu, z) / std::tgamma(nu);
}

}  // namespace

TEST_CASE("catalog values") {
  CHECK(catalog_get("exp_neg")(0.0) == 1.0);
  CHECK(catalog_get("gen_cauchy", {{"c", 1.0}, {"nu", 2.0}, {"gamma", 1.0}})(1.0) == doctest::Approx(0.25));

  // e^{-2} from its alternating series, independent of std::exp.
  double series = 0.0, term = 1.0;
  for (int k = 0; k < 40; ++k) {
    series += term;
    term *= -2.0 / (k + 1);
  }
  CHECK(catalog_get("exp_neg_power", {{"gamma", 0.5}})(4.0) == doctest::Approx(series).epsilon(1e-14));
}

TEST_CASE("catalog rejects unknown names and bad parameters") {
  CHECK_THROWS_AS(catalog_get("bessel"), CatalogMiss);
  CHECK_THROWS_AS(catalog_get("exp_neg", {{"rate", -1.0}}), ParamError);
  CHECK_THROWS_AS(catalog_get("exp_neg", {{"speed", 1.0}}), ParamError);
  CHECK_THROWS_AS(catalog_get("exp_neg_power", {{"gamma", 1.5}}), ParamError);
  CHECK_THROWS_AS(catalog_get("gen_cauchy", {{"c", 1.0}}), ParamError);
  CHECK(catalog_entries().size() >= 5);
}

TEST_CASE("cm_check") {
  const double grid[] = {0.5, 1.0, 2.0, 5.0};
  CHECK(cm_check([](double t) { return std::exp(-t); }, 4, grid).pass);
  CHECK(cm_check([](double t) { return 1.0 / (1.0 + t); }, 4, grid).pass);

  const auto bad = cm_check([](double t) { return std::sin(t) + 2.0; }, 4, grid);
  CHECK_FALSE(bad.pass);
  REQUIRE(bad.witness_order >= 1);
  // The reported witness really has the wrong sign: recompute the difference.
  const double t = bad.witness_t, h = std::max(1e-3, 1e-2 * t);
  double d = 0.0, binom = 1.0;
  const int n = bad.witness_order;
  for (int k = 0; k <= n; ++k) {
    d += ((k % 2 == 0) ? 1.0 : -1.0) * binom * (std::sin(t + (0.5 * n - k) * h) + 2.0);
    binom = binom * (n - k) / (k + 1);
  }
  CHECK(((n % 2 == 0) ? d : -d) < 0.0);

  CHECK_THROWS_AS(cm_check([](double) { return 1.0; }, 5, grid), ParamError);
}

TEST_CASE("every catalog function is completely monotone and bounded") {
  for (const auto& [name, params] : catalog_samples()) {
    CAPTURE(name);
    const auto f = catalog_get(name, params);
    CHECK(cm_check(f, 4, kGrid).pass);
    CHECK(f(1e-12) <= f.bound_at_zero() * (1.0 + 1e-6));
  }
}

TEST_CASE("reconstruct_from_measure") {
  CHECK(reconstruct_from_measure(catalog_get("exp_neg"), 3.0) == doctest::Approx(std::exp(-3.0)).epsilon(1e-15));
  const auto gc = catalog_get("gen_cauchy", {{"c", 1.0}, {"nu", 2.0}, {"gamma", 1.0}});
  CHECK(rel_err(reconstruct_from_measure(gc, 2.0), 1.0 / 9.0) < 1e-6);
  const auto five = catalog_get("constant", {{"value", 5.0}});
  for (double t : {0.0, 0.7, 100.0}) CHECK(reconstruct_from_measure(five, t) == 5.0);
  CHECK_THROWS_AS(reconstruct_from_measure(catalog_get("exp_neg_power", {{"gamma", 0.3}}), 1.0), NoMeasure);
}

TEST_CASE("measures reproduce their functions at 20 log-spaced points") {
  for (const auto& [name, params] : catalog_samples()) {
    const auto f = catalog_get(name, params);
    if (!f.measure()) continue;
    CAPTURE(name);
    for (int k = 0; k < 20; ++k) {
      const double t = std::pow(10.0, -2.0 + 4.0 * k / 19.0);
      CAPTURE(t);
      CHECK(rel_err(reconstruct_from_measure(f, t), f(t)) < 1e-6);
    }
  }
}

TEST_CASE("matern_eval against the Bessel closed form") {
  for (double nu : {0.25, 0.5, 1.0, 1.5, 2.5, 5.0})
    for (double z : {1e-3, 0.01, 0.3, 1.0, 4.0, 12.0, 30.0}) {
      CAPTURE(nu);
      CAPTURE(z);
      CHECK(rel_err(matern_eval(nu, 2.0, z * z / 4.0), matern_closed(nu, z)) < 1e-8);
    }
}

TEST_CASE("matern_eval at nu = 1/2 is proportional to exp(-r sqrt(u))") {
  double lo = INFINITY, hi = 0.0;
  for (double r : {0.2, 0.5, 1.0, 2.0, 5.0})
    for (double u : {0.01, 0.1, 1.0, 3.0, 10.0}) {
      const double ratio = matern_eval(0.5, r, u) / std::exp(-r * std::sqrt(u));
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  CHECK(hi / lo - 1.0 < 1e-10);
}

TEST_CASE("matern_eval is positive, decreasing in u and self-convergent") {
  for (double nu : {0.3, 1.0, 2.5})
    for (double r : {0.5, 3.0}) {
      double prev = INFINITY;
      for (int k = 0; k < 30; ++k) {
        const double u = std::pow(10.0, -4.0 + 0.2 * k);
        const double v = matern_eval(nu, r, u);
        CHECK(v > 0.0);
        CHECK(v < prev);
        prev = v;
      }
      CHECK(matern_eval(nu, r, 0.0) == 1.0);
    }
  CHECK(rel_err(matern_eval(1.5, 2.0, 1.0, 64), matern_eval(1.5, 2.0, 1.0, 128)) < 1e-8);
  CHECK_THROWS_AS(matern_eval(0.0, 1.0, 1.0), ParamError);
  CHECK_THROWS_AS(matern_eval(1.0, -1.0, 1.0), ParamError);
}

TEST_CASE("Bernstein functions have completely monotone derivatives") {
  for (const auto& [name, params] : std::vector<std::pair<std::string, Params>>{
           {"affine", {}}, {"affine", {{"a", 2.0}, {"b", 0.5}}}, {"power", {{"alpha", 0.5}, {"beta", 0.7}}}, {"log", {{"a", 2.0}}}}) {
    CAPTURE(name);
    const auto f = bernstein_get(name, params);
    CHECK(f(0.0) > 0.0);
    CHECK(check_bernstein(f, kGrid).pass);
    // The analytic derivative matches a central difference.
    for (double t : kGrid) CHECK(rel_err(f.derivative(t), (f(t + 1e-5) - f(t - 1e-5)) / 2e-5) < 1e-6);
  }
  CHECK_THROWS_AS(bernstein_get("power", {{"alpha", 2.0}}), ParamError);
  CHECK_THROWS_AS(bernstein_get("nope"), CatalogMiss);
}

#include "ak/oracle_suites.hpp"

#include <algorithm>
#include <cmath>

#include "ak/builders.hpp"
#include "ak/errors.hpp"
#include "ak/families.hpp"
#include "ak/parallel.hpp"
#include "ak/scalar_cm.hpp"
#include "ak/verify.hpp"

namespace ak {

using nlohmann::json;

namespace {

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

json aitken_suite(std::uint64_t seed, int trials) {
  if (trials < 1) throw ParamError("aitken suite needs trials >= 1");
  const auto n = static_cast<std::size_t>(trials);
  struct Row {
    double rel{0.0};
    double imag{0.0};
    bool mc_within{false};
  };
  std::vector<Row> rows(n);
  CounterRng root(seed, 0x6169746b);
  parallel_for(n, [&](std::size_t t) {
    CounterRng rng = root.split(t);
    const int q = 1 + static_cast<int>(t % 3);
    const auto inst = random_aitken_instance(rng, q);
    const double rhs = aitken_rhs(inst);
    const auto lhs = aitken_lhs(inst, TensorHermite{64});
    const auto mc = aitken_lhs(inst, MonteCarlo{20000, splitmix64(seed + t)});
    rows[t] = {rel_err(lhs.real, rhs), std::abs(lhs.imag), std::abs(mc.real - rhs) <= 3.0 * mc.error_estimate};
  });
  double max_rel = 0.0, max_imag = 0.0;
  std::size_t within = 0;
  for (const auto& r : rows) {
    max_rel = std::max(max_rel, r.rel);
    max_imag = std::max(max_imag, r.imag);
    within += r.mc_within ? 1 : 0;
  }
  const std::size_t need = (99 * n + 99) / 100;
  return json::array({
      {{"name", "tensor_hermite_vs_closed_form"}, {"pass", max_rel < 1e-8}, {"max_rel_error", max_rel},
       {"tolerance", 1e-8}, {"instances", n}},
      {{"name", "imaginary_part_vanishes"}, {"pass", max_imag < 1e-10}, {"max_abs_imag", max_imag},
       {"tolerance", 1e-10}},
      {{"name", "monte_carlo_within_3_se"}, {"pass", within >= need}, {"within", within},
       {"required", need}, {"instances", n}},
  });
}

json matern_suite() {
  json checks = json::array();

  // nu = 1/2: M(r sqrt(u)) = exp(-r sqrt(u)), so the ratio is constant.
  {
    double lo = INFINITY, hi = 0.0;
    for (double r : {0.5, 1.0, 2.0})
      for (double u : {0.1, 0.5, 1.0, 2.0, 4.0}) {
        const double ratio = matern_eval(0.5, r, u) / std::exp(-r * std::sqrt(u));
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      }
    const double dev = hi / lo - 1.0;
    checks.push_back({{"name", "half_integer_proportionality"}, {"pass", dev < 1e-6},
                      {"max_min_ratio_deviation", dev}, {"ratio", hi}, {"tolerance", 1e-6}});
  }

  // Closed form 2^{1-nu} z^nu K_nu(z) / Gamma(nu) with z = r sqrt(u).
  {
    double worst = 0.0;
    for (double nu : {0.25, 0.5, 1.0, 1.5, 2.5, 4.0})
      for (double z : {0.05, 0.3, 1.0, 2.5, 6.0, 12.0}) {
        const double want = std::pow(2.0, 1.0 - nu) * std::pow(z, nu) * std::cyl_bessel_k(nu, z) / std::tgamma(nu);
        worst = std::max(worst, rel_err(matern_eval(nu, 1.0, z * z), want));
      }
    checks.push_back({{"name", "bessel_closed_form"}, {"pass", worst < 1e-6}, {"max_rel_error", worst},
                      {"tolerance", 1e-6}});
  }

  // Scale mixture of exp(-a s) against Gamma(nu) M_nu(r sqrt(a)).
  {
    const auto phi = catalog_get("exp_neg");
    const auto g = make_G_constant(1, SymMatrix::identity(1));
    const auto h = make_H_identity(1, 1);
    const auto space = PointSpace::euclidean(1);
    double worst = 0.0;
    for (double nu : {0.5, 1.5})
      for (double r : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        const auto k = build_scale_mixture(phi, g, h, mixture_matern({nu}, r), space);
        for (double lag : {0.0, 0.1, 0.5, 1.0, 2.0}) {
          const double got = k.entry(0, 0, {0.0}, {lag});
          const double want = std::tgamma(nu) * matern_eval(nu, r, lag * lag);
          worst = std::max(worst, rel_err(got, want));
        }
      }
    checks.push_back({{"name", "scale_mixture_reproduction"}, {"pass", worst < 1e-6},
                      {"max_rel_error", worst}, {"tolerance", 1e-6}});
  }
  return checks;
}

json cauchy_suite(std::uint64_t seed) {
  json checks = json::array();
  {
    const auto f = catalog_get("gen_cauchy", {{"c", 1.0}, {"nu", 2.0}, {"gamma", 1.0}});
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const double u = std::pow(10.0, -2.0 + 4.0 * k / 19.0);
      worst = std::max(worst, rel_err(reconstruct_from_measure(f, u), std::pow(1.0 + u, -2.0)));
    }
    checks.push_back({{"name", "measure_reconstruction"}, {"pass", worst < 1e-6},
                      {"max_rel_error", worst}, {"tolerance", 1e-6}});
  }
  {
    const std::vector<double> v = {0.75, 1.25, 2.0};
    const auto g = make_G_sum_identity(2, {0.5, 1.0, 1.5});
    const auto h = make_H_identity(3, 2);
    const auto x_space = PointSpace::euclidean(2), y_space = PointSpace::euclidean(2);
    const auto k = build_cauchy_cross(g, h, 1.0, 0.8, constant_smoothness(v), v,
                                      CrossDomain::product_of(x_space, y_space));
    CounterRng rng(seed, 0x63617563);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      const auto x = x_space.random_point(rng);
      const auto y = y_space.random_point(rng), yp = y_space.random_point(rng);
      const Point z = k.domain().join(x, y), zp = k.domain().join(x, yp);
      for (int m = 0; m < 3; ++m)
        for (int n = 0; n < 3; ++n) {
          const double det = det_and_inverse(g(m, n, y, yp)).determinant;
          const double want = std::tgamma(v[m] + v[n]) / std::sqrt(det);
          worst = std::max(worst, rel_err(k.entry(m, n, z, zp), want));
        }
    }
    checks.push_back({{"name", "cross_zero_lag"}, {"pass", worst < 1e-10}, {"max_rel_error", worst},
                      {"tolerance", 1e-10}});
  }
  return checks;
}

json cm_suite() {
  static constexpr double kGrid[] = {0.1, 0.5, 1.0, 2.0, 5.0, 10.0};
  const std::vector<std::pair<std::string, Params>> samples = {
      {"constant", {{"value", 2.0}}},
      {"exp_neg", {{"rate", 1.5}}},
      {"exp_neg_power", {{"gamma", 0.5}}},
      {"exp_neg_power", {{"gamma", 0.8}}},
      {"gen_cauchy", {{"c", 1.0}, {"nu", 2.0}, {"gamma", 1.0}}},
      {"gen_cauchy", {{"c", 2.0}, {"nu", 0.5}, {"gamma", 0.7}}},
      {"inverse_power", {{"nu", 1.5}}},
  };
  json checks = json::array();
  bool all = true;
  json per = json::array();
  for (const auto& [name, params] : samples) {
    const auto f = catalog_get(name, params);
    const auto rep = cm_check(f, 4, kGrid);
    all = all && rep.pass;
    json row = {{"phi", name}, {"params", params}, {"pass", rep.pass},
                {"worst_violation", rep.worst_violation}};
    if (f.measure()) {
      double worst = 0.0;
      for (double t : kGrid) worst = std::max(worst, rel_err(reconstruct_from_measure(f, t), f(t)));
      row["measure_max_rel_error"] = worst;
      const bool ok = worst < 1e-6;
      row["pass"] = rep.pass && ok;
      all = all && ok;
    }
    per.push_back(row);
  }
  checks.push_back({{"name", "catalog_complete_monotonicity"}, {"pass", all}, {"functions", per}});

  // 1/(1 + t^2) has f''(t) < 0 near 0 and must be rejected.
  const auto control = cm_check([](double t) { return 1.0 / (1.0 + t * t); }, 4, kGrid);
  checks.push_back({{"name", "non_cm_control_rejected"}, {"pass", !control.pass},
                    {"witness_order", control.witness_order}, {"witness_t", control.witness_t}});
  return checks;
}

}  // namespace

std::vector<std::string> oracle_suite_names() { return {"aitken", "matern", "cauchy", "cm", "all"}; }

json run_oracle_suite(const std::string& name, std::uint64_t seed, int trials) {
  json checks;
  if (name == "aitken") {
    checks = aitken_suite(seed, trials);
  } else if (name == "matern") {
    checks = matern_suite();
  } else if (name == "cauchy") {
    checks = cauchy_suite(seed);
  } else if (name == "cm") {
    checks = cm_suite();
  } else if (name == "all") {
    json suites = json::array();
    bool pass = true;
    for (const char* s : {"aitken", "matern", "cauchy", "cm"}) {
      auto r = run_oracle_suite(s, seed, trials);
      pass = pass && r.at("pass").get<bool>();
      suites.push_back(std::move(r));
    }
    return {{"suite", "all"}, {"pass", pass}, {"seed", seed}, {"suites", suites}};
  } else {
    throw ParamError("unknown oracle suite '" + name + "'");
  }
  bool pass = true;
  for (const auto& c : checks) pass = pass && c.at("pass").get<bool>();
  return {{"suite", name}, {"pass", pass}, {"seed", seed}, {"checks", checks}};
}

}  // namespace ak

// Acceptance gate: ten criteria, one PASS/FAIL line each. Every tolerance is
// pinned below; the exit status is non-zero when any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ak/builders.hpp"
#include "ak/errors.hpp"
#include "ak/families.hpp"
#include "ak/linalg.hpp"
#include "ak/scalar_cm.hpp"
#include "ak/verify.hpp"

using namespace ak;

namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kSeed = 20240601;

constexpr double kAitkenRelTol = 1e-8;
constexpr double kAitkenSeconds = 10.0;
constexpr double kPsdRelTol = 1e-8;
constexpr double kPsdSuiteSeconds = 30.0;
constexpr double kReductionAbsTol = 1e-12;
constexpr double kMaternRelTol = 1e-6;
constexpr double kMaternRatioTol = 1e-6;
constexpr double kCauchyMeasureRelTol = 1e-6;
constexpr double kCauchyZeroLagRelTol = 1e-10;
constexpr double kZeroEigTol = 1e-8;

const double kCmGrid[] = {0.1, 0.5, 1.0, 2.0, 5.0, 10.0};

struct Outcome {
  bool pass{true};
  std::string detail;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

double rel_err(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

bool psd_within(const SpectralReport& r) { return r.min_eig >= -kPsdRelTol * std::max(1.0, r.max_abs_eig); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// One representative parameter set per catalog name. Criterion 7 fails if a
/// catalog entry has no sample here.
std::vector<std::pair<std::string, Params>> catalog_samples() {
  return {{"constant", {{"value", 2.0}}},
          {"exp_neg", {{"rate", 0.7}}},
          {"exp_neg_power", {{"gamma", 0.5}}},
          {"exp_neg_power", {{"gamma", 0.8}}},
          {"gen_cauchy", {{"c", 1.0}, {"nu", 2.0}, {"gamma", 1.0}}},
          {"gen_cauchy", {{"c", 0.5}, {"nu", 0.7}, {"gamma", 0.6}}},
          {"inverse_power", {{"nu", 1.5}}}};
}

CMFunction random_phi(CounterRng& rng, bool allow_constant = true) {
  const auto samples = catalog_samples();
  for (;;) {
    const auto& [name, params] = samples[rng() % samples.size()];
    if (allow_constant || name != "constant") return catalog_get(name, params);
  }
}

Matrix random_map(CounterRng& rng, int rows, int cols) {
  Matrix a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = rng.normal();
  return a;
}

/// Difference-type H on a space of ambient dimension dim: h_m(x) = A_m x + b_m.
VectorFieldFamily random_difference_h(CounterRng& rng, int p, int q, int dim) {
  std::vector<Matrix> maps;
  std::vector<std::vector<double>> shifts;
  for (int m = 0; m < p; ++m) {
    maps.push_back(random_map(rng, q, dim));
    shifts.push_back(rng.normal_vector(q));
  }
  return make_H_difference_linear(std::move(maps), std::move(shifts));
}

std::vector<double> uniform_vector(CounterRng& rng, int n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

double max_entry_gap(const MatrixKernel& a, const MatrixKernel& b, const Point& z, const Point& zp) {
  double worst = 0.0;
  for (int m = 0; m < a.p(); ++m)
    for (int n = 0; n < a.p(); ++n) worst = std::max(worst, std::abs(a.entry(m, n, z, zp) - b.entry(m, n, z, zp)));
  return worst;
}

// ------------------------------------------------------------ criteria

Outcome aitken_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  CounterRng rng(kSeed, 1);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto inst = random_aitken_instance(rng, 1 + t % 3, 100.0, 5.0);
    worst = std::max(worst, rel_err(aitken_lhs(inst, TensorHermite{64}).real, aitken_rhs(inst)));
  }
  const double secs = seconds_since(t0);
  return {worst < kAitkenRelTol && secs < kAitkenSeconds,
          "100 instances, max rel err " + fmt(worst) + " (< " + fmt(kAitkenRelTol) + "), " + fmt(secs) + " s (< " +
              fmt(kAitkenSeconds) + " s)"};
}

Outcome psd_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = INFINITY;
  int failures = 0;
  std::string first;
  for (int t = 0; t < 100; ++t) {
    CounterRng rng = CounterRng(kSeed, 2).split(t);
    const int p = 1 + static_cast<int>(rng() % 3), q = 1 + static_cast<int>(rng() % 3);
    const int n_points = 2 + static_cast<int>(rng() % 7);
    const auto phi = random_phi(rng);

    PointSpace space = PointSpace::euclidean(1 + static_cast<int>(rng() % 3));
    MatrixFieldFamily g = make_G_sum_identity(q, uniform_vector(rng, p, 0.1, 2.0), rng.uniform(0.0, 1.0));
    switch (t % 3) {
      case 0:
        break;
      case 1:
        g = make_G_scalar_diag(rng() % 2 ? cnd_sqdist(rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0))
                                         : cnd_bernstein(bernstein_get("power", {{"alpha", rng.uniform(0.2, 1.0)}})),
                               p, q);
        break;
      case 2:
        space = PointSpace::sphere(2);
        g = make_G_sphere(p, q, 2, rng() % 2 ? 0.0 : rng.uniform(0.0, 1.0));
        break;
    }
    const int dim = static_cast<int>(space.ambient_dim());
    const VectorFieldFamily h = rng() % 4 == 0 ? make_H_first_coord(p, q) : random_difference_h(rng, p, q, dim);

    const auto k = build_cm_quadratic(phi, g, h, space);
    const auto pts = sample_points(space, n_points, rng);
    const auto r = classify_gram(assemble_gram(k, pts));
    worst = std::min(worst, r.min_eig / std::max(1.0, r.max_abs_eig));
    if (!psd_within(r) && failures++ == 0) first = " first failure at configuration " + std::to_string(t);
  }
  const double secs = seconds_since(t0);
  return {failures == 0 && secs < kPsdSuiteSeconds,
          "100 configurations, worst min_eig/max(1,max_abs) " + fmt(worst) + " (>= -" + fmt(kPsdRelTol) + "), " +
              std::to_string(failures) + " failures, " + fmt(secs) + " s (< " + fmt(kPsdSuiteSeconds) + " s)" + first};
}

Outcome strictness_suite() {
  double worst = INFINITY;
  int failures = 0;
  const auto s2 = PointSpace::sphere(2);
  for (int t = 0; t < 25; ++t) {
    CounterRng rng = CounterRng(kSeed, 3).split(t);
    const int p = 1 + t % 3, q = 1 + static_cast<int>(rng() % 3);
    // p = 1 needs no separation; with p > 1 it separates components at a shared point.
    const auto g = make_G_sphere(p, q, 2, p == 1 ? 0.0 : rng.uniform(0.25, 1.0));
    const auto strict = check_strictness_condition(g, s2, 6, 16, kSeed + t);
    const auto h = rng() % 3 == 0 ? make_H_zero(p, q) : random_difference_h(rng, p, q, 3);
    const auto k = build_cm_quadratic(random_phi(rng), g, h, s2);
    const auto r = classify_gram(assemble_gram(k, sample_points(s2, 2 + static_cast<int>(rng() % 6), rng)));
    worst = std::min(worst, r.min_eig);
    if (!strict.pass || r.min_eig <= kDefaultTolPd) ++failures;
  }
  const auto control = check_strictness_condition(make_G_constant(2, SymMatrix::identity(2)), s2, 6, 16, kSeed);
  const bool control_fails = !control.pass && control.margin >= 0.0;
  return {failures == 0 && control_fails,
          "25 sphere configurations, min eig " + fmt(worst) + " (> " + fmt(kDefaultTolPd) + "), " +
              std::to_string(failures) + " failures; constant-G strictness check " +
              (control.pass ? "passed (unexpected)" : "fails with margin " + fmt(control.margin))};
}

Outcome reduction_suite() {
  double gaps[3] = {0.0, 0.0, 0.0};
  for (int t = 0; t < 20; ++t) {
    CounterRng rng = CounterRng(kSeed, 4).split(t);
    const int p = 1 + static_cast<int>(rng() % 3), q = 1 + static_cast<int>(rng() % 3);
    const int d = 1 + static_cast<int>(rng() % 3);
    const auto space = PointSpace::euclidean(d);
    const auto phi = random_phi(rng);
    const auto h = random_difference_h(rng, p, q, d);
    const Point z = space.random_point(rng), zp = space.random_point(rng);

    // Single scalar kernel versus the same kernel through the scalar-diagonal G.
    const auto sc = rng() % 2 ? cnd_sqdist(rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0))
                              : cnd_bernstein(bernstein_get("log", {{"a", rng.uniform(1.5, 3.0)}}));
    gaps[0] = std::max(gaps[0], max_entry_gap(build_gneiting_single(phi, sc, h, space),
                                              build_cm_quadratic(phi, make_G_scalar_diag(sc, p, q), h, space), z, zp));

    // Unit-atom mixture versus the plain construction.
    const auto g = make_G_sum_identity(q, uniform_vector(rng, p, 0.1, 2.0), rng.uniform(0.0, 1.0));
    gaps[1] = std::max(gaps[1], max_entry_gap(build_scale_mixture(phi, g, h, mixture_unit(p), space),
                                              build_cm_quadratic(phi, g, h, space), z, zp));

    // The same reduction on a product space X x Y.
    const auto ys = PointSpace::euclidean(1 + static_cast<int>(rng() % 2));
    const auto gy = make_G_scalar_diag(cnd_sqdist(rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0)), p, q);
    const auto prod = build_product(phi, gy, h, space, ys);
    const Point w = prod.domain().join(z, ys.random_point(rng)), wp = prod.domain().join(zp, ys.random_point(rng));
    gaps[2] = std::max(gaps[2],
                       max_entry_gap(build_product_mixture(phi, gy, h, mixture_unit(p), space, ys), prod, w, wp));
  }
  const bool pass = gaps[0] <= kReductionAbsTol && gaps[1] <= kReductionAbsTol && gaps[2] <= kReductionAbsTol;
  return {pass, "20 pairs each, max |diff| single-scalar " + fmt(gaps[0]) + ", unit mixture " + fmt(gaps[1]) +
                    ", product unit mixture " + fmt(gaps[2]) + " (<= " + fmt(kReductionAbsTol) + ")"};
}

Outcome matern_suite() {
  const auto e1 = PointSpace::euclidean(1);
  const std::vector<double> v = {0.5, 1.5};
  const auto g = make_G_constant(2, SymMatrix::identity(1));
  const auto h = make_H_identity(2, 1);
  const double rs[] = {0.3, 0.7, 1.0, 2.0, 4.0};
  const double lags[] = {0.05, 0.2, 0.5, 1.0, 2.0};
  double worst = 0.0;
  for (double r : rs) {
    // With phi = exp(-u) the mixture integrates to Gamma(nu) M_nu(r |lag|).
    const auto k = build_scale_mixture(catalog_get("exp_neg"), g, h, mixture_matern(v, r), e1);
    for (double lag : lags)
      for (int m = 0; m < 2; ++m)
        for (int n = 0; n < 2; ++n) {
          const double nu = 0.5 * (v[m] + v[n]);
          worst = std::max(worst, rel_err(k.entry(m, n, {0.0}, {lag}), std::tgamma(nu) * matern_eval(nu, r, lag * lag)));
        }
  }
  double lo = INFINITY, hi = 0.0;
  for (double r : rs)
    for (double u : {0.01, 0.1, 1.0, 3.0, 10.0}) {
      const double ratio = matern_eval(0.5, r, u) / std::exp(-r * std::sqrt(u));
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  const double spread = hi / lo - 1.0;
  return {worst < kMaternRelTol && spread < kMaternRatioTol,
          "5x5 (r, lag) grid max rel err " + fmt(worst) + " (< " + fmt(kMaternRelTol) + "), nu=1/2 ratio spread " +
              fmt(spread) + " (< " + fmt(kMaternRatioTol) + ")"};
}

Outcome cauchy_suite() {
  const auto phi = catalog_get("gen_cauchy", {{"c", 1.0}, {"nu", 2.0}, {"gamma", 1.0}});
  double measure_err = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double u = std::pow(10.0, -2.0 + 4.0 * k / 19.0);
    measure_err = std::max(measure_err, rel_err(reconstruct_from_measure(phi, u), 1.0 / ((1.0 + u) * (1.0 + u))));
  }

  // At zero lag H vanishes and K_mn(z, z) = Gamma(v_m + v_n) det(G_mn(z, z))^{-1/2},
  // where G_mn(z, z) = (o_m + o_n + 2 s |z|^2) I_q.
  double zero_lag_err = 0.0;
  for (int t = 0; t < 20; ++t) {
    CounterRng rng = CounterRng(kSeed, 6).split(t);
    const int p = 1 + static_cast<int>(rng() % 3), q = 1 + static_cast<int>(rng() % 3);
    const auto space = PointSpace::euclidean(q);
    const auto offsets = uniform_vector(rng, p, 0.1, 2.0);
    const double scale = rng.uniform(0.0, 1.0);
    const auto v = uniform_vector(rng, p, 0.2, 3.0);
    const auto k = build_cauchy_cross(make_G_sum_identity(q, offsets, scale), make_H_identity(p, q),
                                      rng.uniform(0.2, 3.0), rng.uniform(0.2, 1.0), constant_smoothness(v), v,
                                      CrossDomain::single(space));
    const Point z = space.random_point(rng);
    double zz = 0.0;
    for (double x : z) zz += x * x;
    for (int m = 0; m < p; ++m)
      for (int n = 0; n < p; ++n) {
        const double diag = offsets[m] + offsets[n] + 2.0 * scale * zz;
        zero_lag_err = std::max(zero_lag_err, rel_err(k.entry(m, n, z, z), std::tgamma(v[m] + v[n]) / std::pow(diag, 0.5 * q)));
      }
  }
  return {measure_err < kCauchyMeasureRelTol && zero_lag_err < kCauchyZeroLagRelTol,
          "measure vs (1+u)^-2 max rel err " + fmt(measure_err) + " (< " + fmt(kCauchyMeasureRelTol) +
              "), zero-lag max rel err " + fmt(zero_lag_err) + " (< " + fmt(kCauchyZeroLagRelTol) + ")"};
}

Outcome cm_suite() {
  std::set<std::string> covered;
  int failures = 0;
  for (const auto& [name, params] : catalog_samples()) {
    covered.insert(name);
    if (!cm_check(catalog_get(name, params), 4, kCmGrid).pass) ++failures;
  }
  int missing = 0;
  for (const auto& e : catalog_entries()) missing += covered.count(e.name) ? 0 : 1;
  // 1/(1+t^2) is decreasing but concave near 0: its second difference has the wrong sign.
  const auto control = cm_check([](double t) { return 1.0 / (1.0 + t * t); }, 4, kCmGrid);
  return {failures == 0 && missing == 0 && !control.pass,
          std::to_string(catalog_samples().size()) + " catalog samples, " + std::to_string(failures) + " failures, " +
              std::to_string(missing) + " catalog entries unsampled; control " +
              (control.pass ? "passed (unexpected)" : "fails at order " + std::to_string(control.witness_order) +
                                                          ", t = " + fmt(control.witness_t))};
}

/// Negative-type matrix A_ij = a_i + a_j + psi(z_i, z_j) for one of four
/// conditionally negative definite psi.
SymMatrix negative_type_matrix(const std::vector<Point>& z, const std::vector<double>& a, int kind) {
  const std::size_t n = z.size();
  Matrix m(n, n);
  const auto f = bernstein_get("power", {{"alpha", 0.5}, {"beta", 0.7}});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double d2 = squared_distance(z[i], z[j]);
      double psi = 0.0;
      switch (kind) {
        case 0: psi = d2; break;
        case 1: psi = std::sqrt(d2); break;
        case 2: psi = f(d2) - f(0.0); break;
        default: psi = geodesic_distance(z[i], z[j]); break;
      }
      m(i, j) = a[i] + a[j] + psi;
    }
  return SymMatrix(m);
}

Outcome hadamard_suite() {
  int bad_type = 0, not_psd = 0, not_pd = 0, no_zero = 0;
  double worst_pd = INFINITY, worst_zero = 0.0;
  for (int t = 0; t < 100; ++t) {
    CounterRng rng = CounterRng(kSeed, 8).split(t);
    const int kind = t % 4;
    const std::size_t n = 2 + t % 7;
    const auto space = kind == 3 ? PointSpace::sphere(2) : PointSpace::euclidean(1 + static_cast<int>(rng() % 3));
    auto z = sample_points(space, static_cast<int>(n), rng);
    const auto a = uniform_vector(rng, static_cast<int>(n), 0.0, 1.0);

    const auto strict = negative_type_matrix(z, a, kind);
    if (!negative_type_check(strict, 32, kSeed + t).pass) ++bad_type;
    // Distinct points: A_ii + A_jj < 2 A_ij for every i != j.
    bool condition = true;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && !(strict(i, i) + strict(j, j) < 2.0 * strict(i, j))) condition = false;
    const auto rs = eig_sym(hadamard_exp_neg(strict));
    if (!psd_within(rs)) ++not_psd;
    worst_pd = std::min(worst_pd, rs.min_eig);
    if (!condition || rs.min_eig <= kDefaultTolPd) ++not_pd;

    // Equality: repeat a point, so A_00 + A_11 = 2 A_01.
    z[1] = z[0];
    auto a_eq = a;
    a_eq[1] = a_eq[0];
    const auto equal = negative_type_matrix(z, a_eq, kind);
    if (!negative_type_check(equal, 32, kSeed + t).pass) ++bad_type;
    const auto re = eig_sym(hadamard_exp_neg(equal));
    if (!psd_within(re)) ++not_psd;
    worst_zero = std::max(worst_zero, std::abs(re.min_eig));
    if (std::abs(re.min_eig) > kZeroEigTol) ++no_zero;
  }
  return {bad_type + not_psd + not_pd + no_zero == 0,
          "100 matrices (+100 equality variants): negative-type failures " + std::to_string(bad_type) +
              ", PSD failures " + std::to_string(not_psd) + ", strict min eig " + fmt(worst_pd) + " (> " +
              fmt(kDefaultTolPd) + "), equality |min eig| " + fmt(worst_zero) + " (<= " + fmt(kZeroEigTol) + ")"};
}

struct ValidatedPair {
  std::string name;
  MatrixFieldFamily g;
  VectorFieldFamily h;
  PointSpace space;
  bool strict{false};
};

Outcome schur_chain_suite() {
  CounterRng build_rng(kSeed, 9);
  std::vector<ValidatedPair> pairs = {
      {"sphere p=1", make_G_sphere(1, 2, 2), random_difference_h(build_rng, 1, 2, 3), PointSpace::sphere(2)},
      {"sphere p=2 separated", make_G_sphere(2, 2, 2, 0.5), random_difference_h(build_rng, 2, 2, 3),
       PointSpace::sphere(2)},
      {"sum", make_G_sum_identity(2, {0.5, 1.0}, 0.5), make_H_identity(2, 2), PointSpace::euclidean(2)},
      {"scalar sqdist p=1", make_G_scalar_diag(cnd_sqdist(0.5, 1.0), 1, 3), random_difference_h(build_rng, 1, 3, 2),
       PointSpace::euclidean(2)},
      {"scalar sqdist p=2", make_G_scalar_diag(cnd_sqdist(0.5, 1.0), 2, 2), make_H_first_coord(2, 2),
       PointSpace::euclidean(2)},
  };
  std::string invalid;
  int strict_pairs = 0;
  for (auto& pr : pairs) {
    if (!check_G_validity(pr.g, pr.space, 6, 16, kSeed).pass || !check_H_validity(pr.h, pr.space, 6, 16, kSeed).pass)
      invalid += " " + pr.name;
    pr.strict = check_strictness_condition(pr.g, pr.space, 6, 16, kSeed).pass;
    strict_pairs += pr.strict ? 1 : 0;
  }

  int failures = 0, pd_checked = 0;
  for (int t = 0; t < 50; ++t) {
    CounterRng rng = CounterRng(kSeed, 10).split(t);
    const auto& pr = pairs[t % pairs.size()];
    const auto pts = sample_points(pr.space, 2 + static_cast<int>(rng() % 6), rng);
    auto u = rng.unit_vector(pr.g.q());
    const double radius = rng.uniform(0.3, 1.0);
    for (auto& x : u) x *= radius;
    const double s = t % 10 == 0 ? 0.0 : rng.uniform(0.0, 5.0);
    const auto r = schur_chain_check(pr.g, pr.h, pts, u, s);
    bool ok = r.e_u_psd && r.unit_diagonal && r.product_psd;
    if (pr.strict) {
      ++pd_checked;
      ok = ok && r.product_pd;
    }
    failures += ok ? 0 : 1;
  }
  return {invalid.empty() && strict_pairs > 0 && failures == 0,
          "50 (u, s) samples over " + std::to_string(pairs.size()) + " validated pairs (" +
              std::to_string(strict_pairs) + " strict, " + std::to_string(pd_checked) + " PD checks), " +
              std::to_string(failures) + " failures" + (invalid.empty() ? "" : "; failed validation:" + invalid)};
}

// -------------------------------------------------------------- CLI

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + AK_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

Outcome cli_suite() {
  const fs::path data = AK_TEST_DATA_DIR;
  const fs::path dir = fs::temp_directory_path() / ("ak_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);

  std::string detail;
  bool identical = true;
  for (const auto& [spec, points] : {std::pair{"gaussian.json", "points3.csv"}, {"sphere.json", "sphere_points.csv"}}) {
    const auto a = dir / "a.json", b = dir / "b.json";
    const std::string in = quoted(data / spec) + " " + quoted(data / points) + " ";
    const int ra = run_cli("build-gram " + in + quoted(a));
    const int rb = run_cli("build-gram " + in + quoted(b));
    const bool same = ra == 0 && rb == 0 && !slurp(a).empty() && slurp(a) == slurp(b);
    identical = identical && same;
    if (!same) detail += std::string(" non-deterministic ") + spec + ";";
  }

  // Malformed or failing inputs and the exit code each must produce.
  spit(dir / "truncated.json", "{\n  \"theorem\": \"cm_quadratic\",\n  \"phi\": {\"name\": \"exp_neg\"\n");
  spit(dir / "unknown_key.json", R"({"theorem": "cm_quadratic", "phi": {"name": "exp_neg"}, "colour": "blue",
    "family_G": {"recipe": "sum_identity", "params": {"offsets": [1.0]}},
    "family_H": {"recipe": "difference_identity"}, "dims": {"p": 1, "q": 2, "space": "euclidean:2"}})");
  spit(dir / "off_sphere.csv", "sphere:2,x,y,z\na,0,0,1\nb,0,0,1.1\n");
  spit(dir / "overflow.json", R"({"theorem": "cauchy_cross",
    "family_G": {"recipe": "sum_identity", "params": {"offsets": [0.5, 1.0]}},
    "family_H": {"recipe": "difference_identity"},
    "mixture": {"recipe": "cauchy_cross", "params": {"v": [100.0, 100.0], "c": 2.0, "gamma": 0.5}},
    "dims": {"p": 2, "q": 2, "space": "euclidean:2"}})");
  const auto out = quoted(dir / "out.json");
  const std::vector<std::tuple<std::string, std::string, int>> cases = {
      {"truncated JSON", "build-gram " + quoted(dir / "truncated.json") + " " + quoted(data / "points3.csv") + " " + out, 2},
      {"unknown key", "build-gram " + quoted(dir / "unknown_key.json") + " " + quoted(data / "points3.csv") + " " + out, 2},
      {"point off the sphere", "build-gram " + quoted(data / "sphere.json") + " " + quoted(dir / "off_sphere.csv") + " " + out, 2},
      {"missing points file", "build-gram " + quoted(data / "gaussian.json") + " " + quoted(dir / "absent.csv") + " " + out, 2},
      {"non-finite kernel values", "build-gram " + quoted(dir / "overflow.json") + " " + quoted(data / "points3.csv") + " " + out, 3},
      {"family fails validity", "check-validity " + quoted(data / "adversarial.json"), 1},
  };
  int matched = 0;
  for (const auto& [name, args, want] : cases) {
    const int got = run_cli(args);
    if (got == want)
      ++matched;
    else
      detail += " " + name + ": exit " + std::to_string(got) + " (want " + std::to_string(want) + ");";
  }
  fs::remove_all(dir);
  return {identical && matched == static_cast<int>(cases.size()),
          std::string("build-gram twice on 2 inputs ") + (identical ? "byte-identical" : "differs") + ", exit codes " +
              std::to_string(matched) + "/" + std::to_string(cases.size()) + " as expected" + detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"aitken identity", aitken_suite},
      {"quadratic-form PSD", psd_suite},
      {"strictness", strictness_suite},
      {"reduction identities", reduction_suite},
      {"matern oracle", matern_suite},
      {"cauchy oracle", cauchy_suite},
      {"complete monotonicity", cm_suite},
      {"hadamard exponential", hadamard_suite},
      {"schur chain", schur_chain_suite},
      {"cli determinism and exit codes", cli_suite},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << (i + 1 < 10 ? " " : "") << i + 1 << "] "
              << criteria[i].first << ": " << o.detail << "\n";
  }
  std::cout << criteria.size() - failed << "/" << criteria.size() << " acceptance criteria passed\n";
  return failed == 0 ? 0 : 1;
}

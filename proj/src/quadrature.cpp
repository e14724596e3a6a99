#include "ak/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>
#include <utility>

#include "ak/errors.hpp"
#include "ak/linalg.hpp"

namespace ak {

namespace {

// Gauss rule from the three-term recurrence of the orthonormal polynomials,
//   x p_k = sqrt(b_{k+1}) p_{k+1} + a_k p_k + sqrt(b_k) p_{k-1},  p_0 = 1/sqrt(mu0).
// Golub-Welsch supplies starting nodes; Newton polishes them and the weights
// come from the Christoffel function 1 / sum_k p_k(x)^2.
template <class A, class B>
QuadratureRule gauss_from_recurrence(int n, A a, B b, double mu0) {
  if (n < 1) throw ParamError("quadrature: node count must be >= 1");
  Matrix jac(n, n);
  for (int k = 0; k < n; ++k) {
    jac(k, k) = a(k);
    if (k + 1 < n) {
      jac(k, k + 1) = std::sqrt(b(k + 1));
      jac(k + 1, k) = jac(k, k + 1);
    }
  }
  auto dec = eigh(SymMatrix(jac));

  const double p0 = 1.0 / std::sqrt(mu0);
  // Returns (p_n(x), p_n'(x), sum_{k<n} p_k(x)^2).
  auto evaluate = [&](double x) {
    double pm1 = 0.0, p = p0, dpm1 = 0.0, dp = 0.0, sq = 0.0;
    for (int k = 0; k < n; ++k) {
      sq += p * p;
      const double sbk = k > 0 ? std::sqrt(b(k)) : 0.0;
      const double sbk1 = std::sqrt(b(k + 1));
      const double pn = ((x - a(k)) * p - sbk * pm1) / sbk1;
      const double dpn = (p + (x - a(k)) * dp - sbk * dpm1) / sbk1;
      pm1 = p;
      p = pn;
      dpm1 = dp;
      dp = dpn;
    }
    return std::tuple{p, dp, sq};
  };

  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = dec.values[i];
    for (int it = 0; it < 3; ++it) {
      auto [pn, dpn, sq] = evaluate(x);
      if (dpn == 0.0 || !std::isfinite(pn / dpn)) break;
      const double dx = pn / dpn;
      x -= dx;
      if (std::abs(dx) <= 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 1.0 / std::get<2>(evaluate(x));
  }
  return rule;
}

}  // namespace

QuadratureRule gauss_hermite(int n) {
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  auto rule = gauss_from_recurrence(
      n, [](int) { return 0.0; }, [](int k) { return 0.5 * k; }, std::sqrt(std::numbers::pi));
  // Exact symmetry.
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[n - 1 - i] + rule.weights[i]);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  cache.emplace(n, rule);
  return rule;
}

QuadratureRule gauss_laguerre(int n, double alpha) {
  if (!(alpha > -1.0)) throw ParamError("gauss_laguerre: alpha must exceed -1");
  static std::mutex mutex;
  static std::map<std::pair<int, double>, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find({n, alpha}); it != cache.end()) return it->second;
  auto rule = gauss_from_recurrence(
      n, [alpha](int k) { return 2.0 * k + alpha + 1.0; },
      [alpha](int k) { return k * (k + alpha); }, std::tgamma(alpha + 1.0));
  cache.emplace(std::pair{n, alpha}, rule);
  return rule;
}

double tanh_sinh(const std::function<double(double)>& f, double a, double b, int nodes) {
  if (nodes < 3) throw ParamError("tanh_sinh: need at least 3 nodes");
  constexpr double kTMax = 4.0;
  const int half = nodes / 2;
  const double h = kTMax / half;
  const double c = 0.5 * (a + b);
  const double d = 0.5 * (b - a);
  CompensatedSum sum;
  for (int k = -half; k <= half; ++k) {
    const double t = k * h;
    const double u = 0.5 * std::numbers::pi * std::sinh(t);
    const double ch = std::cosh(u);
    const double w = d * 0.5 * std::numbers::pi * std::cosh(t) / (ch * ch);
    const double x = c + d * std::tanh(u);
    if (w == 0.0 || x <= a || x >= b) continue;
    sum.add(w * f(x));
  }
  return h * sum.value();
}

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    comp_ += (sum_ - t) + x;
  else
    comp_ += (x - t) + sum_;
  sum_ = t;
}

}  // namespace ak

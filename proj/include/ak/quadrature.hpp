#pragma once

#include <functional>
#include <vector>

namespace ak {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Hermite rule for weight exp(-x^2) on R.
QuadratureRule gauss_hermite(int n);

/// Generalized Gauss-Laguerre rule for weight x^alpha exp(-x) on (0, inf).
QuadratureRule gauss_laguerre(int n, double alpha = 0.0);

/// Double-exponential (tanh-sinh) quadrature of f over [a, b] with about
/// `nodes` abscissae (step h = 4 / (nodes / 2) in the transformed variable,
/// which reaches endpoint distances near 1e-37 relative to b - a).
double tanh_sinh(const std::function<double(double)>& f, double a, double b, int nodes);

/// Neumaier-compensated running sum; summation order is the call order.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_{0.0};
  double comp_{0.0};
};

}  // namespace ak

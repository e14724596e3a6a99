#pragma once

// Matrix-valued kernel constructions. Every builder produces a MatrixKernel
// whose (m, n) entry has the shape
//
//   det(G_mn)^{-l/2} * [ phi(a_mn) | sum_k w_k phi(a_mn s_k) P^{s_k}_mn ],
//   a_mn = H_mn^T G_mn^{-1} H_mn,
//
// with l = 1 unless BuildOptions::power_l says otherwise. The quadratic form
// and determinant come from one Cholesky factorization of G_mn.

#include <functional>
#include <string>
#include <vector>

#include "ak/families.hpp"
#include "ak/linalg.hpp"
#include "ak/points.hpp"
#include "ak/scalar_cm.hpp"
#include "json.hpp"

namespace ak {

using KernelEntryFn = std::function<double(int m, int n, const Point& z, const Point& zp)>;

class MatrixKernel {
 public:
  MatrixKernel(int p, PointSpace domain, KernelEntryFn entry, nlohmann::json provenance);

  int p() const noexcept { return p_; }
  const PointSpace& domain() const noexcept { return domain_; }
  double entry(int m, int n, const Point& z, const Point& zp) const { return entry_(m, n, z, zp); }
  /// The p x p matrix K(z, z').
  Matrix operator()(const Point& z, const Point& zp) const;
  const nlohmann::json& provenance() const noexcept { return provenance_; }

 private:
  int p_;
  PointSpace domain_;
  KernelEntryFn entry_;
  nlohmann::json provenance_;
};

struct BuildOptions {
  /// Determinant exponent: det^{-power_l / 2}. Must be >= 1.
  int power_l{1};
  /// Build even when an input lacks a passing certificate; recorded in provenance.
  bool unsafe{false};
};

/// K_mn(y, y') = phi(H^T G^{-1} H) / sqrt(det G) on a single set Y.
MatrixKernel build_cm_quadratic(const CMFunction& phi, const MatrixFieldFamily& g,
                                const VectorFieldFamily& h, const PointSpace& domain,
                                const BuildOptions& opts = {});

/// K_mn(y, y') = g(y, y')^{-q/2} phi(|H_mn(y, y')|^2 / g(y, y')).
MatrixKernel build_gneiting_single(const CMFunction& phi, const ScalarCNDKernel& g,
                                   const VectorFieldFamily& h, const PointSpace& domain,
                                   const BuildOptions& opts = {});

/// Scalar space-time kernel on R^qs x R^d:
///   f(|y - y'|^2)^{-r} phi(|x - x'|^2 / f(|y - y'|^2)),
/// where f is a Bernstein function. Requires r >= qs / 2.
MatrixKernel build_gneiting_classic(const CMFunction& phi, const BernsteinFunction& f, double r,
                                    int qs, int d, const BuildOptions& opts = {});

/// K_mn(y, y') = det(G)^{-1/2} sum_k w_k phi(a s_k) P^{s_k}_mn(y, y') on Y.
MatrixKernel build_scale_mixture(const CMFunction& phi, const MatrixFieldFamily& g,
                                 const VectorFieldFamily& h, const MixtureSpec& mix,
                                 const PointSpace& domain, const BuildOptions& opts = {});

/// Product-space version of build_cm_quadratic on X x Y: H reads x, G reads y.
MatrixKernel build_product(const CMFunction& phi, const MatrixFieldFamily& g,
                           const VectorFieldFamily& h, const PointSpace& x_space,
                           const PointSpace& y_space, const BuildOptions& opts = {});

/// Product-space version of build_scale_mixture; P reads the full (x, y) pair.
MatrixKernel build_product_mixture(const CMFunction& phi, const MatrixFieldFamily& g,
                                   const VectorFieldFamily& h, const MixtureSpec& mix,
                                   const PointSpace& x_space, const PointSpace& y_space,
                                   const BuildOptions& opts = {});

/// Where the cross-covariance builders read H and G: on a product space H
/// reads x and G reads y; on a single set both read the whole point.
struct CrossDomain {
  PointSpace space;
  bool product{false};

  static CrossDomain single(PointSpace y);
  static CrossDomain product_of(PointSpace x, PointSpace y);
};

/// K_mn = Gamma(v_mn) det(G)^{-1/2} M_{v_mn}(r_mn sqrt(a)), v_mn = (v_m + v_n) / 2.
/// The coefficient matrix [r_mn^{v_m+v_n} / 2^{v_m+v_n}] must be PSD (ParamError
/// with its minimum eigenvalue otherwise); r must be symmetric and positive.
MatrixKernel build_matern_cross(const MatrixFieldFamily& g, const VectorFieldFamily& h,
                                const std::vector<double>& v, const Matrix& r,
                                const CrossDomain& domain, const BuildOptions& opts = {});

/// Smoothness v_m(z) of component m at point z; must be positive.
using SmoothnessFn = std::function<double(int m, const Point& z)>;

/// K_mn = Gamma(V) det(G)^{-1/2} (1 + c a^gamma)^{-V}, V = v_m(z) + v_n(z').
MatrixKernel build_cauchy_cross(const MatrixFieldFamily& g, const VectorFieldFamily& h, double c,
                                double gamma, SmoothnessFn v, nlohmann::json v_descriptor,
                                const CrossDomain& domain, const BuildOptions& opts = {});

/// Constant smoothness per component.
SmoothnessFn constant_smoothness(std::vector<double> v);

/// build_cm_quadratic with every det^{-1/2} replaced by det^{-l/2}.
MatrixKernel build_det_power(const CMFunction& phi, const MatrixFieldFamily& g,
                             const VectorFieldFamily& h, const PointSpace& domain, int l,
                             BuildOptions opts = {});

}  // namespace ak

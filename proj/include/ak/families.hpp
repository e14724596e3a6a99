#pragma once

// Inputs to the kernel constructions: matrix fields G_mn, vector fields H_mn,
// scalar conditionally negative definite kernels g, and scale mixtures
// (rho, P^s_mn). Each comes with a sampling checker for the structural
// property the constructions rely on.
//
// Component indices m, n are 0-based in the API. Recipes whose formulas use
// the 1-based component number (make_G_sphere) say so explicitly.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ak/linalg.hpp"
#include "ak/points.hpp"
#include "ak/scalar_cm.hpp"
#include "json.hpp"

namespace ak {

/// Why a family is believed to satisfy its hypothesis: either it holds by
/// construction for a known recipe, or a sampled checker passed.
struct Certificate {
  std::string source;  // "construction" or "sampled"
  bool pass{false};
  std::string note;

  nlohmann::json to_json() const;
};

/// Outcome of a sampling-based checker. Reports are certificates at the
/// sampled scale only, and always carry the seed that reproduces them.
struct ValidityReport {
  std::string check;
  std::string hypothesis;
  bool pass{true};
  /// Worst value of the checked quantity (sign convention per check).
  double margin{0.0};
  std::uint64_t seed{0};
  nlohmann::json witness;
  bool skipped{false};

  nlohmann::json to_json() const;
  Certificate certificate() const;
};

// ---------------------------------------------------------------------------

using MatrixFieldFn = std::function<SymMatrix(int m, int n, const Point& y, const Point& yp)>;

class MatrixFieldFamily {
 public:
  MatrixFieldFamily(int p, int q, MatrixFieldFn fn, nlohmann::json descriptor,
                    std::optional<Certificate> cert = std::nullopt);

  int p() const noexcept { return p_; }
  int q() const noexcept { return q_; }
  /// G_mn(y, y'); a q x q matrix that the constructions require to be PD.
  SymMatrix operator()(int m, int n, const Point& y, const Point& yp) const;
  const nlohmann::json& descriptor() const noexcept { return descriptor_; }
  const std::optional<Certificate>& certificate() const noexcept { return cert_; }
  MatrixFieldFamily with_certificate(Certificate c) const;

 private:
  int p_;
  int q_;
  MatrixFieldFn fn_;
  nlohmann::json descriptor_;
  std::optional<Certificate> cert_;
};

using VectorFieldFn =
    std::function<std::vector<double>(int m, int n, const Point& x, const Point& xp)>;

class VectorFieldFamily {
 public:
  VectorFieldFamily(int p, int q, VectorFieldFn fn, nlohmann::json descriptor,
                    std::optional<Certificate> cert = std::nullopt);

  int p() const noexcept { return p_; }
  int q() const noexcept { return q_; }
  /// H_mn(x, x'); throws ShapeError when the field returns a vector of the wrong length.
  std::vector<double> operator()(int m, int n, const Point& x, const Point& xp) const;
  const nlohmann::json& descriptor() const noexcept { return descriptor_; }
  const std::optional<Certificate>& certificate() const noexcept { return cert_; }
  VectorFieldFamily with_certificate(Certificate c) const;

 private:
  int p_;
  int q_;
  VectorFieldFn fn_;
  nlohmann::json descriptor_;
  std::optional<Certificate> cert_;
};

class ScalarCNDKernel {
 public:
  ScalarCNDKernel(std::function<double(const Point&, const Point&)> fn, bool positive,
                  nlohmann::json descriptor, std::optional<Certificate> cert = std::nullopt);

  double operator()(const Point& y, const Point& yp) const { return fn_(y, yp); }
  /// Whether the range is declared to lie in (0, inf).
  bool positive() const noexcept { return positive_; }
  const nlohmann::json& descriptor() const noexcept { return descriptor_; }
  const std::optional<Certificate>& certificate() const noexcept { return cert_; }
  ScalarCNDKernel with_certificate(Certificate c) const;

 private:
  std::function<double(const Point&, const Point&)> fn_;
  bool positive_;
  nlohmann::json descriptor_;
  std::optional<Certificate> cert_;
};

using MixtureKernelFn =
    std::function<double(int m, int n, double s, const Point& z, const Point& zp)>;

/// A finite positive measure rho on (0, inf), stored as atoms (exact or the
/// nodes of a quadrature approximation fixed at build time), and the kernels
/// P^s_mn evaluated at those atoms.
class MixtureSpec {
 public:
  MixtureSpec(int p, std::vector<Atom> rho, MixtureKernelFn kernel, nlohmann::json descriptor,
              std::optional<Certificate> cert = std::nullopt);

  int p() const noexcept { return p_; }
  const std::vector<Atom>& rho() const noexcept { return rho_; }
  double P(int m, int n, double s, const Point& z, const Point& zp) const {
    return kernel_(m, n, s, z, zp);
  }
  const nlohmann::json& descriptor() const noexcept { return descriptor_; }
  const std::optional<Certificate>& certificate() const noexcept { return cert_; }
  MixtureSpec with_certificate(Certificate c) const;

 private:
  int p_;
  std::vector<Atom> rho_;
  MixtureKernelFn kernel_;
  nlohmann::json descriptor_;
  std::optional<Certificate> cert_;
};

// --------------------------------------------------------------- G recipes

/// G_mn(y, y') = g_m(y) + g_n(y'). Every g_m is evaluated on `probe` and a
/// non-PD value raises FamilyInvalid naming (m, probe index).
MatrixFieldFamily make_G_sum(int q, std::vector<std::function<SymMatrix(const Point&)>> g,
                             std::span<const Point> probe = {});

/// make_G_sum with g_m(y) = (offsets[m] + scale |y|^2) I_q.
MatrixFieldFamily make_G_sum_identity(int q, std::vector<double> offsets, double scale = 1.0);

/// G_mn(y, y') = g(y, y') I_q for every (m, n). g must be declared positive.
MatrixFieldFamily make_G_scalar_diag(const ScalarCNDKernel& g, int p, int q);

/// G_mn(y, y') = g_mn(y, y') I_q with a component-dependent scalar kernel.
MatrixFieldFamily make_G_entrywise_diag(int p, int q,
                                        std::function<double(int, int, const Point&, const Point&)> g,
                                        nlohmann::json descriptor);

/// G_mn(y, y') = (m + n + separation [m != n] + delta(y, y')) I_q on the sphere
/// S^d, with 1-based m, n and geodesic distance delta. separation = 0 is the
/// plain recipe; separation > 0 makes the strict inequality hold also for
/// m != n at a shared point.
MatrixFieldFamily make_G_sphere(int p, int q, int d, double separation = 0.0);

/// G_mn(y, y') = A for all arguments.
MatrixFieldFamily make_G_constant(int p, const SymMatrix& a);

/// G_mn = 0 for m != n and G_mm(y, y') = g(m, y, y'). Only for exercising the
/// CND checker: the zero off-diagonal blocks are not valid builder input.
MatrixFieldFamily make_G_block_diagonal(int p, int q,
                                        std::function<SymMatrix(int, const Point&, const Point&)> g);

/// G_mn(y, y') = exp(-|y - y'|^2 / scale) I_q. PD valued but not CND; a
/// negative control for check_G_validity.
MatrixFieldFamily make_G_adversarial(int p, int q, double scale = 1.0);

// --------------------------------------------------------------- H recipes

/// H_mn(x, x') = h_m(x) - h_n(x').
VectorFieldFamily make_H_difference(int q, std::vector<std::function<std::vector<double>(const Point&)>> h);

/// make_H_difference with h_m(x) = maps[m] x + shifts[m] (maps[m] is q x dim(x)).
VectorFieldFamily make_H_difference_linear(std::vector<Matrix> maps,
                                           std::vector<std::vector<double>> shifts = {});

/// h_m(x) = (x_0, 0, ..., 0) in R^q for every m.
VectorFieldFamily make_H_first_coord(int p, int q);

/// h_m(x) = x for every m, so H_mn(x, x') = x - x' and q = dim.
VectorFieldFamily make_H_identity(int p, int dim);

VectorFieldFamily make_H_zero(int p, int q);

// ------------------------------------------------------ scalar CND kernels

/// c0 + c1 |y - y'|^2; CND for c1 >= 0, positive when c0 > 0.
ScalarCNDKernel cnd_sqdist(double c0, double c1 = 1.0);
/// f(|y - y'|^2) for a Bernstein function f.
ScalarCNDKernel cnd_bernstein(BernsteinFunction f);
/// c0 + c1 delta(y, y') on a sphere.
ScalarCNDKernel cnd_geodesic(double c0, double c1 = 1.0);
ScalarCNDKernel cnd_constant(double c);

// ------------------------------------------------------- mixture recipes

/// rho = unit atom at s = 1 and P = 1.
MixtureSpec mixture_unit(int p);
/// P^s_mn = c_mn for every s; c must be PSD (ParamError otherwise).
MixtureSpec mixture_constant(std::vector<Atom> rho, const SymMatrix& c);
/// P^s_mn(z, z') = [m == n] exp(-s |z - z'|^2 / scale): strictly PD for every s.
MixtureSpec mixture_gaussian_diag(int p, std::vector<Atom> rho, double scale = 1.0);

struct LogGrid {
  double below{4.5};  // nodes start at log(b) - below
  double above{60.0};  // and end at log(b) + above
  double step{0.05};
};

/// Matern scale mixture: drho(s) = exp(-r^2 / 4s) s^-1 ds discretized by the
/// trapezoid rule in log s, with P^s_mn = (r^2 / 4s)^{(v_m + v_n) / 2}. With
/// phi = exp(-u) the mixture integrates to Gamma(v_mn) M_{v_mn}(r sqrt(a)).
MixtureSpec mixture_matern(std::vector<double> v, double r, LogGrid grid = {});

// ---------------------------------------------------------------- checks

/// Distinct random points from `space` (opaque spaces cap the count).
std::vector<Point> sample_points(const PointSpace& space, int n, CounterRng& rng);

/// For n_freq random u, the N p x N p matrix [u^T G_mn(y_mu, y_nu) u] must be
/// of negative type under the per-component zero-sum constraint.
ValidityReport check_G_validity(const MatrixFieldFamily& g, const PointSpace& space, int n_points,
                                int n_freq, std::uint64_t seed);

/// Anti-symmetry filter, then for n_freq random u the Hermitian matrix
/// [exp(i H_mn(x_mu, x_nu)^T u)] must be PSD (checked via its real embedding).
ValidityReport check_H_validity(const VectorFieldFamily& h, const PointSpace& space, int n_points,
                                int n_freq, std::uint64_t seed);

struct Shell {
  double inner{0.5};
  double outer{1.5};
};

/// u^T [G_mm(y,y) + G_nn(y',y') - 2 G_mn(y,y')] u < 0 for all sampled
/// (m, y) != (n, y') and u drawn from the shell inner < |u| < outer.
/// margin is the largest value found (must be negative to pass).
ValidityReport check_strictness_condition(const MatrixFieldFamily& g, const PointSpace& space,
                                          int n_points, int u_samples, std::uint64_t seed,
                                          Shell shell = {});

/// Symmetry, declared positivity, and negative type over random point sets.
ValidityReport check_scalar_cnd(const ScalarCNDKernel& g, const PointSpace& space, int n_points,
                                int trials, std::uint64_t seed);

/// For (up to 64 evenly spaced) atoms s, [P^s_mn(z_mu, z_nu)] must be PSD.
ValidityReport check_mixture(const MixtureSpec& mix, const PointSpace& space, int n_points,
                             std::uint64_t seed);

/// Anti-symmetry H_mn(x, x') = -H_nm(x', x) and H_mm(x, x) = 0 on the points.
ValidityReport check_H_antisymmetry(const VectorFieldFamily& h, std::span<const Point> points);

}  // namespace ak

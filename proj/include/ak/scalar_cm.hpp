#pragma once

// Bounded completely monotone functions phi: [0, inf) -> R together with their
// representing measures, phi(t) = int exp(-t s) dsigma(s).

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace ak {

using Params = std::map<std::string, double>;

struct Atom {
  double location;
  double weight;
};

enum class MeasureRule {
  /// Generalized Gauss-Laguerre after s = x / (t + rate); exact when the
  /// density is s^alpha exp(-rate s) times a smooth factor.
  GaussLaguerre,
  /// Trapezoid rule in x = log s over [log_lo, log_hi].
  LogTrapezoid,
};

struct MeasureQuadrature {
  MeasureRule family{MeasureRule::GaussLaguerre};
  int nodes{64};
  double alpha{0.0};
  double rate{1.0};
  double log_lo{0.0};
  double log_hi{0.0};
};

/// Finite positive measure on [0, inf): either point masses or a density with
/// a quadrature descriptor. Node counts stay a runtime knob (see with_nodes).
class RepresentingMeasure {
 public:
  enum class Kind { PointMasses, Density };

  static RepresentingMeasure point_masses(std::vector<Atom> atoms);
  static RepresentingMeasure density(std::function<double(double)> density,
                                     MeasureQuadrature rule);

  Kind kind() const noexcept { return kind_; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const MeasureQuadrature& rule() const noexcept { return rule_; }
  double density_at(double s) const { return density_(s); }

  RepresentingMeasure with_nodes(int nodes) const;

  /// int exp(-t s) dsigma(s).
  double laplace(double t) const;
  double total_mass() const { return laplace(0.0); }

  nlohmann::json describe() const;

 private:
  Kind kind_{Kind::PointMasses};
  std::vector<Atom> atoms_;
  std::function<double(double)> density_;
  MeasureQuadrature rule_;
};

class CMFunction {
 public:
  CMFunction(std::string name, Params params, std::function<double(double)> eval,
             double bound_at_zero, std::optional<RepresentingMeasure> measure,
             std::vector<std::string> flags = {});

  const std::string& name() const noexcept { return name_; }
  const Params& params() const noexcept { return params_; }
  double operator()(double t) const { return eval_(t); }
  double bound_at_zero() const noexcept { return bound_at_zero_; }
  const std::optional<RepresentingMeasure>& measure() const noexcept { return measure_; }
  bool identically_zero() const noexcept { return bound_at_zero_ == 0.0; }
  /// Usage warnings, e.g. parameters outside the range a mixture identity was stated for.
  const std::vector<std::string>& flags() const noexcept { return flags_; }

  nlohmann::json describe() const;

 private:
  std::string name_;
  Params params_;
  std::function<double(double)> eval_;
  double bound_at_zero_;
  std::optional<RepresentingMeasure> measure_;
  std::vector<std::string> flags_;
};

struct CatalogEntry {
  std::string name;
  std::string formula;
  std::vector<std::string> params;
  std::string measure;
  std::string usage;
};

/// Built-in bounded CM functions:
///   constant {value}          phi = value                 atom (0, value)
///   exp_neg {rate=1}          exp(-rate t)                atom (rate, 1)
///   exp_neg_power {gamma}     exp(-t^gamma)               atom for gamma=1, Levy density for 1/2
///   gen_cauchy {c, nu, gamma} (1 + c t^gamma)^-nu          Gamma density for gamma=1
///   inverse_power {nu}        (1 + t)^-nu                 Gamma density
/// Throws CatalogMiss for unknown names, ParamError for invalid parameters.
CMFunction catalog_get(const std::string& name, const Params& params = {});
std::vector<CatalogEntry> catalog_entries();

struct CMCheckReport {
  bool pass{true};
  /// Largest wrong-sign normalized finite difference (<= 0 when everything alternates).
  double worst_violation{0.0};
  int witness_order{-1};
  double witness_t{0.0};
  int orders{0};
};

/// Central finite differences of orders 0..orders, step h = max(1e-3, 1e-2 t),
/// normalized by h^n, must satisfy (-1)^n D^n f(t) >= -1e-6 |f(t)|.
CMCheckReport cm_check(const std::function<double(double)>& f, int orders,
                       std::span<const double> grid);
CMCheckReport cm_check(const CMFunction& f, int orders, std::span<const double> grid);

/// int exp(-t s) dsigma(s) for the function's representing measure.
double reconstruct_from_measure(const CMFunction& f, double t);

/// Matern function M_nu(r sqrt(u)) through its scale-mixture integral
///   r^{2nu} / (2^{2nu} Gamma(nu)) int_0^inf exp(-s u) exp(-r^2 / 4s) s^{-nu-1} ds,
/// computed by tanh-sinh quadrature in x = log s. Starting from `nodes`, the
/// node count doubles until successive results agree to 1e-11 relative;
/// QuadratureError past 16384 nodes. u = 0 returns the limit value 1.
double matern_eval(double nu, double r, double u, int nodes = 64);

/// Positive function on [0, inf) with a completely monotone derivative
/// (a Bernstein function). f(|y - y'|^2) is then conditionally negative definite.
class BernsteinFunction {
 public:
  BernsteinFunction(std::string name, Params params, std::function<double(double)> value,
                    std::function<double(double)> derivative);

  const std::string& name() const noexcept { return name_; }
  const Params& params() const noexcept { return params_; }
  double operator()(double t) const { return value_(t); }
  double derivative(double t) const { return derivative_(t); }
  nlohmann::json describe() const;

 private:
  std::string name_;
  Params params_;
  std::function<double(double)> value_;
  std::function<double(double)> derivative_;
};

///   affine {a, b=1}            a + b t
///   power {a=1, alpha, beta}   (1 + a t^alpha)^beta, alpha, beta in (0, 1]
///   log {a=1}                  1 + log(1 + a t)
BernsteinFunction bernstein_get(const std::string& name, const Params& params = {});

/// Positivity at 0 and on the grid plus cm_check of the derivative to order 4.
CMCheckReport check_bernstein(const BernsteinFunction& f, std::span<const double> grid);

/// Parameter lookup with default; ParamError naming the family when absent.
double param_or(const Params& params, const std::string& key, std::optional<double> fallback,
                const std::string& family);

}  // namespace ak

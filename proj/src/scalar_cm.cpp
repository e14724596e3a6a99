#include "ak/scalar_cm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "ak/errors.hpp"
#include "ak/quadrature.hpp"

namespace ak {

double param_or(const Params& params, const std::string& key, std::optional<double> fallback,
                const std::string& family) {
  if (auto it = params.find(key); it != params.end()) {
    if (!std::isfinite(it->second))
      throw ParamError(family + ": parameter '" + key + "' must be finite");
    return it->second;
  }
  if (fallback) return *fallback;
  throw ParamError(family + ": missing parameter '" + key + "'");
}

namespace {

void reject_unknown(const Params& params, std::initializer_list<const char*> allowed,
                    const std::string& family) {
  for (const auto& [k, v] : params) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
      throw ParamError(family + ": unknown parameter '" + k + "'");
  }
}

const char* rule_name(MeasureRule r) {
  return r == MeasureRule::GaussLaguerre ? "gauss_laguerre" : "log_trapezoid";
}

}  // namespace

// ---------------------------------------------------------------------------

RepresentingMeasure RepresentingMeasure::point_masses(std::vector<Atom> atoms) {
  if (atoms.empty()) throw ParamError("representing measure: need at least one atom");
  for (const auto& a : atoms)
    if (!(a.location >= 0.0) || !(a.weight > 0.0) || !std::isfinite(a.location) ||
        !std::isfinite(a.weight))
      throw ParamError("representing measure: atoms need location >= 0 and weight > 0");
  RepresentingMeasure m;
  m.kind_ = Kind::PointMasses;
  m.atoms_ = std::move(atoms);
  return m;
}

RepresentingMeasure RepresentingMeasure::density(std::function<double(double)> density,
                                                 MeasureQuadrature rule) {
  if (rule.nodes < 2) throw ParamError("representing measure: need at least 2 nodes");
  if (rule.family == MeasureRule::GaussLaguerre) {
    if (!(rule.rate > 0.0) || !(rule.alpha > -1.0))
      throw ParamError("representing measure: Gauss-Laguerre needs rate > 0 and alpha > -1");
    if (rule.nodes > 150) throw ParamError("representing measure: at most 150 Laguerre nodes");
  } else if (!(rule.log_hi > rule.log_lo)) {
    throw ParamError("representing measure: empty log-trapezoid range");
  }
  RepresentingMeasure m;
  m.kind_ = Kind::Density;
  m.density_ = std::move(density);
  m.rule_ = rule;
  return m;
}

RepresentingMeasure RepresentingMeasure::with_nodes(int nodes) const {
  if (kind_ == Kind::PointMasses) return *this;
  MeasureQuadrature r = rule_;
  r.nodes = nodes;
  return density(density_, r);
}

double RepresentingMeasure::laplace(double t) const {
  if (!(t >= 0.0)) throw ParamError("laplace: t must be >= 0");
  CompensatedSum sum;
  if (kind_ == Kind::PointMasses) {
    for (const auto& a : atoms_) sum.add(a.weight * std::exp(-t * a.location));
    return sum.value();
  }
  if (rule_.family == MeasureRule::GaussLaguerre) {
    const auto gl = gauss_laguerre(rule_.nodes, rule_.alpha);
    const double lambda = t + rule_.rate;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double s = gl.nodes[i] / lambda;
      const double smooth =
          density_(s) * std::exp(rule_.rate * s) * std::pow(s, -rule_.alpha);
      sum.add(gl.weights[i] * smooth);
    }
    return sum.value() * std::pow(lambda, -1.0 - rule_.alpha);
  }
  const int n = rule_.nodes;
  const double h = (rule_.log_hi - rule_.log_lo) / (n - 1);
  for (int k = 0; k < n; ++k) {
    const double x = rule_.log_lo + k * h;
    const double s = std::exp(x);
    const double w = (k == 0 || k == n - 1) ? 0.5 * h : h;
    sum.add(w * s * density_(s) * std::exp(-t * s));
  }
  return sum.value();
}

nlohmann::json RepresentingMeasure::describe() const {
  nlohmann::json j;
  if (kind_ == Kind::PointMasses) {
    j["kind"] = "point_masses";
    j["atoms"] = nlohmann::json::array();
    for (const auto& a : atoms_) j["atoms"].push_back({a.location, a.weight});
  } else {
    j["kind"] = "density_with_quadrature";
    j["rule"] = {{"family", rule_name(rule_.family)}, {"nodes", rule_.nodes}};
    if (rule_.family == MeasureRule::GaussLaguerre) {
      j["rule"]["alpha"] = rule_.alpha;
      j["rule"]["rate"] = rule_.rate;
      j["rule"]["transform"] = "s = x / (t + rate)";
    } else {
      j["rule"]["log_lo"] = rule_.log_lo;
      j["rule"]["log_hi"] = rule_.log_hi;
      j["rule"]["transform"] = "s = exp(x)";
    }
  }
  return j;
}

// ---------------------------------------------------------------------------

CMFunction::CMFunction(std::string name, Params params, std::function<double(double)> eval,
                       double bound_at_zero, std::optional<RepresentingMeasure> measure,
                       std::vector<std::string> flags)
    : name_(std::move(name)),
      params_(std::move(params)),
      eval_(std::move(eval)),
      bound_at_zero_(bound_at_zero),
      measure_(std::move(measure)),
      flags_(std::move(flags)) {
  if (!std::isfinite(bound_at_zero_))
    throw ParamError(name_ + ": completely monotone function must be bounded at 0");
}

nlohmann::json CMFunction::describe() const {
  nlohmann::json j = {{"name", name_}, {"params", params_}, {"bound_at_zero", bound_at_zero_}};
  if (measure_) j["measure"] = measure_->describe();
  if (!flags_.empty()) j["flags"] = flags_;
  return j;
}

namespace {

RepresentingMeasure gamma_measure(double c, double nu) {
  // (1 + c t)^-nu = int exp(-t s) s^{nu-1} exp(-s/c) / (c^nu Gamma(nu)) ds
  const double log_norm = nu * std::log(c) + std::lgamma(nu);
  auto dens = [c, nu, log_norm](double s) {
    if (s <= 0.0) return 0.0;
    return std::exp((nu - 1.0) * std::log(s) - s / c - log_norm);
  };
  MeasureQuadrature rule;
  rule.family = MeasureRule::GaussLaguerre;
  rule.nodes = 64;
  rule.alpha = nu - 1.0;
  rule.rate = 1.0 / c;
  return RepresentingMeasure::density(dens, rule);
}

RepresentingMeasure levy_measure() {
  // exp(-sqrt t) = int exp(-t s) s^{-3/2} exp(-1/(4s)) / (2 sqrt(pi)) ds
  auto dens = [](double s) {
    if (s <= 0.0) return 0.0;
    return std::exp(-1.5 * std::log(s) - 0.25 / s) / (2.0 * std::sqrt(std::numbers::pi));
  };
  MeasureQuadrature rule;
  rule.family = MeasureRule::LogTrapezoid;
  rule.nodes = 1441;
  rule.log_lo = -8.0;
  rule.log_hi = 64.0;
  return RepresentingMeasure::density(dens, rule);
}

CMFunction make_gen_cauchy(const std::string& label, double c, double nu, double gamma,
                           Params params) {
  if (!(c > 0.0)) throw ParamError(label + ": c must be > 0");
  if (!(nu > 0.0)) throw ParamError(label + ": nu must be > 0 (bounded functions only)");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ParamError(label + ": gamma must lie in (0, 1]");
  auto eval = [c, nu, gamma](double t) { return std::pow(1.0 + c * std::pow(t, gamma), -nu); };
  std::optional<RepresentingMeasure> measure;
  if (gamma == 1.0) measure = gamma_measure(c, nu);
  std::vector<std::string> flags;
  if (nu <= 1.0) flags.emplace_back("nu<=1: outside the range stated for the Gamma scale-mixture identity");
  return CMFunction(label, std::move(params), eval, 1.0, std::move(measure), std::move(flags));
}

}  // namespace

CMFunction catalog_get(const std::string& name, const Params& params) {
  if (name == "constant") {
    reject_unknown(params, {"value"}, name);
    const double v = param_or(params, "value", 1.0, name);
    if (!(v >= 0.0)) throw ParamError("constant: value must be >= 0");
    std::optional<RepresentingMeasure> measure;
    if (v > 0.0) measure = RepresentingMeasure::point_masses({{0.0, v}});
    return CMFunction(name, params, [v](double) { return v; }, v, std::move(measure));
  }
  if (name == "exp_neg") {
    reject_unknown(params, {"rate"}, name);
    const double rate = param_or(params, "rate", 1.0, name);
    if (!(rate > 0.0)) throw ParamError("exp_neg: rate must be > 0");
    return CMFunction(name, params, [rate](double t) { return std::exp(-rate * t); }, 1.0,
                      RepresentingMeasure::point_masses({{rate, 1.0}}));
  }
  if (name == "exp_neg_power") {
    reject_unknown(params, {"gamma"}, name);
    const double gamma = param_or(params, "gamma", std::nullopt, name);
    if (!(gamma > 0.0 && gamma <= 1.0))
      throw ParamError("exp_neg_power: gamma must lie in (0, 1]");
    std::optional<RepresentingMeasure> measure;
    if (gamma == 1.0)
      measure = RepresentingMeasure::point_masses({{1.0, 1.0}});
    else if (gamma == 0.5)
      measure = levy_measure();
    return CMFunction(name, params, [gamma](double t) { return std::exp(-std::pow(t, gamma)); },
                      1.0, std::move(measure));
  }
  if (name == "gen_cauchy") {
    reject_unknown(params, {"c", "nu", "gamma"}, name);
    return make_gen_cauchy(name, param_or(params, "c", 1.0, name),
                           param_or(params, "nu", std::nullopt, name),
                           param_or(params, "gamma", 1.0, name), params);
  }
  if (name == "inverse_power") {
    reject_unknown(params, {"nu"}, name);
    return make_gen_cauchy(name, 1.0, param_or(params, "nu", std::nullopt, name), 1.0, params);
  }
  throw CatalogMiss("unknown completely monotone function '" + name + "'");
}

std::vector<CatalogEntry> catalog_entries() {
  return {
      {"constant", "phi(t) = value", {"value>=0 (default 1)"}, "atom at s=0",
       "determinant-only kernels"},
      {"exp_neg", "phi(t) = exp(-rate t)", {"rate>0 (default 1)"}, "atom at s=rate",
       "Gaussian-type kernels and the Matern scale mixture"},
      {"exp_neg_power", "phi(t) = exp(-t^gamma)", {"gamma in (0,1]"},
       "atom (gamma=1), Levy density (gamma=1/2), none otherwise", "stretched exponential behind the Cauchy mixture"},
      {"gen_cauchy", "phi(t) = (1 + c t^gamma)^-nu", {"c>0 (default 1)", "nu>0", "gamma in (0,1] (default 1)"},
       "Gamma density s^{nu-1} exp(-s/c) / (c^nu Gamma(nu)) (gamma=1)", "generalized Cauchy kernels"},
      {"inverse_power", "phi(t) = (1 + t)^-nu", {"nu>0"}, "Gamma density (c=1)",
       "generalized Cauchy with c=1, gamma=1"},
  };
}

// ---------------------------------------------------------------------------

CMCheckReport cm_check(const std::function<double(double)>& f, int orders,
                       std::span<const double> grid) {
  if (orders < 0 || orders > 4) throw ParamError("cm_check: orders must lie in [0, 4]");
  CMCheckReport rep;
  rep.orders = orders;
  rep.worst_violation = -std::numeric_limits<double>::infinity();
  double worst_excess = -std::numeric_limits<double>::infinity();
  for (double t : grid) {
    const double h = std::max(1e-3, 1e-2 * t);
    if (!(t >= 5.0 * h)) throw ParamError("cm_check: grid point too close to 0");
    const double f0 = f(t);
    const double slack = 1e-6 * std::abs(f0);
    for (int n = 0; n <= orders; ++n) {
      double d = 0.0;
      double binom = 1.0;
      for (int k = 0; k <= n; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        d += sign * binom * f(t + (0.5 * n - k) * h);
        binom = binom * (n - k) / (k + 1);
      }
      d /= std::pow(h, n);
      const double alternating = (n % 2 == 0) ? d : -d;
      const double violation = -alternating;
      rep.worst_violation = std::max(rep.worst_violation, violation);
      if (violation - slack > worst_excess) {
        worst_excess = violation - slack;
        rep.witness_order = n;
        rep.witness_t = t;
      }
      if (violation > slack) rep.pass = false;
    }
  }
  if (rep.pass) {
    rep.witness_order = -1;
    rep.witness_t = 0.0;
  }
  return rep;
}

CMCheckReport cm_check(const CMFunction& f, int orders, std::span<const double> grid) {
  return cm_check([&f](double t) { return f(t); }, orders, grid);
}

double reconstruct_from_measure(const CMFunction& f, double t) {
  if (!f.measure()) throw NoMeasure(f.name() + ": no representing measure available");
  return f.measure()->laplace(t);
}

// ---------------------------------------------------------------------------

double matern_eval(double nu, double r, double u, int nodes) {
  if (!(nu > 0.0) || !(r > 0.0) || !(u >= 0.0) || !std::isfinite(nu) || !std::isfinite(r) ||
      !std::isfinite(u))
    throw ParamError("matern_eval: need nu > 0, r > 0, u >= 0");
  if (nodes < 32) throw ParamError("matern_eval: nodes must be >= 32");
  if (u == 0.0) return 1.0;

  const double b = 0.25 * r * r;
  // Integrand in x = log s is exp(g(x)); g is strictly concave.
  auto g = [=](double x) { return -u * std::exp(x) - b * std::exp(-x) - nu * x; };
  const double x_peak = std::log(2.0 * b / (nu + std::sqrt(nu * nu + 4.0 * u * b)));
  const double g_peak = g(x_peak);
  constexpr double kDrop = 45.0;

  auto edge = [&](double direction) {
    double step = 1.0;
    while (g_peak - g(x_peak + direction * step) < kDrop) step *= 2.0;
    double lo = 0.0, hi = step;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (g_peak - g(x_peak + direction * mid) < kDrop ? lo : hi) = mid;
    }
    return x_peak + direction * hi;
  };
  const double x_lo = edge(-1.0);
  const double x_hi = edge(1.0);

  auto integrand = [&](double x) { return std::exp(g(x) - g_peak); };
  // Double the node count until successive estimates agree; wide windows
  // (large nu or small u) need several doublings.
  constexpr int kMaxNodes = 16384;
  double coarse = tanh_sinh(integrand, x_lo, x_hi, nodes);
  double fine = coarse;
  for (int n = 2 * nodes;; n *= 2) {
    fine = tanh_sinh(integrand, x_lo, x_hi, n);
    if (std::abs(coarse - fine) <= 1e-11 * std::abs(fine)) break;
    if (n >= kMaxNodes) throw QuadratureError("matern_eval: no convergence under node doubling");
    coarse = fine;
  }

  const double log_prefactor = 2.0 * nu * (std::log(r) - std::numbers::ln2) - std::lgamma(nu);
  return std::exp(log_prefactor + g_peak) * fine;
}

// ---------------------------------------------------------------------------

BernsteinFunction::BernsteinFunction(std::string name, Params params,
                                     std::function<double(double)> value,
                                     std::function<double(double)> derivative)
    : name_(std::move(name)),
      params_(std::move(params)),
      value_(std::move(value)),
      derivative_(std::move(derivative)) {}

nlohmann::json BernsteinFunction::describe() const {
  return {{"name", name_}, {"params", params_}};
}

BernsteinFunction bernstein_get(const std::string& name, const Params& params) {
  if (name == "affine") {
    reject_unknown(params, {"a", "b"}, name);
    const double a = param_or(params, "a", 1.0, name);
    const double b = param_or(params, "b", 1.0, name);
    if (!(a > 0.0) || !(b >= 0.0)) throw ParamError("affine: need a > 0 and b >= 0");
    return BernsteinFunction(name, params, [a, b](double t) { return a + b * t; },
                             [b](double) { return b; });
  }
  if (name == "power") {
    reject_unknown(params, {"a", "alpha", "beta"}, name);
    const double a = param_or(params, "a", 1.0, name);
    const double alpha = param_or(params, "alpha", 1.0, name);
    const double beta = param_or(params, "beta", 1.0, name);
    if (!(a > 0.0) || !(alpha > 0.0 && alpha <= 1.0) || !(beta > 0.0 && beta <= 1.0))
      throw ParamError("power: need a > 0 and alpha, beta in (0, 1]");
    return BernsteinFunction(
        name, params,
        [=](double t) { return std::pow(1.0 + a * std::pow(t, alpha), beta); },
        [=](double t) {
          return beta * std::pow(1.0 + a * std::pow(t, alpha), beta - 1.0) * a * alpha *
                 std::pow(t, alpha - 1.0);
        });
  }
  if (name == "log") {
    reject_unknown(params, {"a"}, name);
    const double a = param_or(params, "a", 1.0, name);
    if (!(a > 0.0)) throw ParamError("log: need a > 0");
    return BernsteinFunction(name, params, [a](double t) { return 1.0 + std::log1p(a * t); },
                             [a](double t) { return a / (1.0 + a * t); });
  }
  throw CatalogMiss("unknown Bernstein function '" + name + "'");
}

CMCheckReport check_bernstein(const BernsteinFunction& f, std::span<const double> grid) {
  auto rep = cm_check([&f](double t) { return f.derivative(t); }, 4, grid);
  bool positive = f(0.0) > 0.0;
  for (double t : grid) positive = positive && f(t) > 0.0;
  if (!positive) {
    rep.pass = false;
    rep.witness_order = -1;
  }
  return rep;
}

}  // namespace ak

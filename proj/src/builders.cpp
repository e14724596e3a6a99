#include "ak/builders.hpp"

#include <cmath>

#include "ak/errors.hpp"
#include "ak/quadrature.hpp"

namespace ak {

using nlohmann::json;

MatrixKernel::MatrixKernel(int p, PointSpace domain, KernelEntryFn entry, json provenance)
    : p_(p), domain_(std::move(domain)), entry_(std::move(entry)), provenance_(std::move(provenance)) {
  if (p < 1) throw ParamError("kernel needs p >= 1");
}

Matrix MatrixKernel::operator()(const Point& z, const Point& zp) const {
  const auto p = static_cast<std::size_t>(p_);
  Matrix k(p, p);
  for (std::size_t m = 0; m < p; ++m)
    for (std::size_t n = 0; n < p; ++n)
      k(m, n) = entry_(static_cast<int>(m), static_cast<int>(n), z, zp);
  return k;
}

CrossDomain CrossDomain::single(PointSpace y) { return {std::move(y), false}; }

CrossDomain CrossDomain::product_of(PointSpace x, PointSpace y) {
  return {PointSpace::product(std::move(x), std::move(y)), true};
}

namespace {

/// Collects certificate decisions into the provenance record and refuses
/// uncertified inputs unless the caller opted into unsafe mode.
class Gate {
 public:
  Gate(std::string construction, const BuildOptions& opts) : opts_(opts) {
    if (opts.power_l < 1) throw ParamError("power_l must be an integer >= 1");
    prov_ = {{"construction", std::move(construction)},
             {"power_l", opts.power_l},
             {"unsafe_override", false},
             {"certificates", json::object()},
             {"warnings", json::array()}};
  }

  void require(const std::string& what, const std::optional<Certificate>& cert,
               const json& descriptor) {
    prov_["inputs"][what] = descriptor;
    if (descriptor.is_object() && descriptor.value("builder_input", true) == false)
      throw ParamError(what + " recipe '" + descriptor.value("recipe", std::string("?")) +
                       "' is not a valid builder input");
    prov_["certificates"][what] = cert ? cert->to_json() : json(nullptr);
    if (cert && cert->pass) return;
    if (!opts_.unsafe)
      throw ParamError(what + " has no passing validity certificate; run its checker or build unsafe");
    prov_["unsafe_override"] = true;
    prov_["warnings"].push_back(what + " used without a passing certificate");
  }

  void phi(const CMFunction& f) {
    prov_["inputs"]["phi"] = f.describe();
    for (const auto& flag : f.flags()) prov_["warnings"].push_back("phi: " + flag);
  }

  void note(const std::string& key, json value) { prov_[key] = std::move(value); }
  json& provenance() { return prov_; }

 private:
  BuildOptions opts_;
  json prov_;
};

void require_shapes(const MatrixFieldFamily& g, const VectorFieldFamily& h) {
  if (g.p() != h.p() || g.q() != h.q())
    throw ShapeError("G is p=" + std::to_string(g.p()) + ", q=" + std::to_string(g.q()) +
                     " but H is p=" + std::to_string(h.p()) + ", q=" + std::to_string(h.q()));
}

struct FormDet {
  double a;        // H^T G^{-1} H
  double log_det;  // log det G
};

FormDet form_and_log_det(const MatrixFieldFamily& g, const VectorFieldFamily& h, int m, int n,
                         const Point& x, const Point& xp, const Point& y, const Point& yp) {
  const SymMatrix gm = g(m, n, y, yp);
  const auto hv = h(m, n, x, xp);
  const auto chol = try_cholesky(gm);
  if (!chol)
    throw KernelEvalError("G_mn is not positive definite at m=" + std::to_string(m) +
                          ", n=" + std::to_string(n) + ", y=" + json(y).dump() +
                          ", y'=" + json(yp).dump());
  const auto z = forward_solve(*chol, hv);
  double a = 0.0, log_det = 0.0;
  for (double v : z) a += v * v;
  for (std::size_t i = 0; i < chol->rows(); ++i) log_det += 2.0 * std::log((*chol)(i, i));
  return {a, log_det};
}

double det_factor(double log_det, int l) { return std::exp(-0.5 * l * log_det); }

double mixture_sum(const CMFunction& phi, const MixtureSpec& mix, double a, int m, int n,
                   const Point& z, const Point& zp) {
  CompensatedSum acc;
  for (const auto& atom : mix.rho())
    acc.add(atom.weight * phi(a * atom.location) * mix.P(m, n, atom.location, z, zp));
  const double v = acc.value();
  if (!std::isfinite(v))
    throw IntegrabilityError("mixture sum is not finite at m=" + std::to_string(m) +
                             ", n=" + std::to_string(n) + ", z=" + json(z).dump());
  return v;
}

}  // namespace

MatrixKernel build_cm_quadratic(const CMFunction& phi, const MatrixFieldFamily& g,
                                const VectorFieldFamily& h, const PointSpace& domain,
                                const BuildOptions& opts) {
  require_shapes(g, h);
  Gate gate("cm_quadratic", opts);
  gate.phi(phi);
  gate.require("G", g.certificate(), g.descriptor());
  gate.require("H", h.certificate(), h.descriptor());
  gate.note("domain", domain.descriptor());
  const int l = opts.power_l;
  return MatrixKernel(
      g.p(), domain,
      [phi, g, h, l](int m, int n, const Point& z, const Point& zp) {
        const auto fd = form_and_log_det(g, h, m, n, z, zp, z, zp);
        return phi(fd.a) * det_factor(fd.log_det, l);
      },
      gate.provenance());
}

MatrixKernel build_det_power(const CMFunction& phi, const MatrixFieldFamily& g,
                             const VectorFieldFamily& h, const PointSpace& domain, int l,
                             BuildOptions opts) {
  opts.power_l = l;
  return build_cm_quadratic(phi, g, h, domain, opts);
}

MatrixKernel build_gneiting_single(const CMFunction& phi, const ScalarCNDKernel& g,
                                   const VectorFieldFamily& h, const PointSpace& domain,
                                   const BuildOptions& opts) {
  if (!g.positive()) throw ParamError("gneiting_single needs a positive valued scalar kernel");
  Gate gate("gneiting_single", opts);
  gate.phi(phi);
  gate.require("g", g.certificate(), g.descriptor());
  gate.require("H", h.certificate(), h.descriptor());
  gate.note("domain", domain.descriptor());
  const double expo = -0.5 * h.q() * opts.power_l;
  return MatrixKernel(
      h.p(), domain,
      [phi, g, h, expo](int m, int n, const Point& z, const Point& zp) {
        const double gv = g(z, zp);
        if (!(gv > 0.0) || !std::isfinite(gv))
          throw KernelEvalError("scalar kernel value " + std::to_string(gv) +
                                " is not positive at y=" + json(z).dump() +
                                ", y'=" + json(zp).dump());
        const auto hv = h(m, n, z, zp);
        double t = 0.0;
        for (double x : hv) t += x * x;
        return std::pow(gv, expo) * phi(t / gv);
      },
      gate.provenance());
}

MatrixKernel build_gneiting_classic(const CMFunction& phi, const BernsteinFunction& f, double r,
                                    int qs, int d, const BuildOptions& opts) {
  if (qs < 1 || d < 1) throw ParamError("gneiting_classic needs qs >= 1 and d >= 1");
  if (!(r >= 0.5 * qs))
    throw ParamError("gneiting_classic needs r >= qs/2 = " + std::to_string(0.5 * qs) +
                     ", got " + std::to_string(r));
  if (opts.power_l != 1)
    throw ParamError("gneiting_classic takes its determinant exponent from r; power_l must be 1");
  Gate gate("gneiting_classic", opts);
  gate.phi(phi);
  static constexpr double kGrid[] = {0.1, 0.5, 1.0, 2.0, 5.0, 10.0};
  const auto rep = check_bernstein(f, kGrid);
  const Certificate cert{"sampled", rep.pass,
                         "positivity and complete monotonicity of f' to order 4"};
  gate.require("f", cert, f.describe());
  gate.note("r", r);
  gate.note("dims", {{"qs", qs}, {"d", d}});
  const PointSpace x_space = PointSpace::euclidean(qs), y_space = PointSpace::euclidean(d);
  const PointSpace domain = PointSpace::product(x_space, y_space);
  gate.note("domain", domain.descriptor());
  return MatrixKernel(
      1, domain,
      [phi, f, r, domain](int, int, const Point& z, const Point& zp) {
        const auto [x, y] = domain.split(z);
        const auto [xp, yp] = domain.split(zp);
        const double fv = f(squared_distance(y, yp));
        if (!(fv > 0.0) || !std::isfinite(fv))
          throw KernelEvalError("f is not positive at |y - y'|^2 = " +
                                std::to_string(squared_distance(y, yp)));
        return std::pow(fv, -r) * phi(squared_distance(x, xp) / fv);
      },
      gate.provenance());
}

MatrixKernel build_scale_mixture(const CMFunction& phi, const MatrixFieldFamily& g,
                                 const VectorFieldFamily& h, const MixtureSpec& mix,
                                 const PointSpace& domain, const BuildOptions& opts) {
  require_shapes(g, h);
  if (mix.p() != g.p()) throw ShapeError("mixture p does not match G and H");
  Gate gate("scale_mixture", opts);
  gate.phi(phi);
  gate.require("G", g.certificate(), g.descriptor());
  gate.require("H", h.certificate(), h.descriptor());
  gate.require("mixture", mix.certificate(), mix.descriptor());
  gate.note("domain", domain.descriptor());
  gate.note("mixture_atoms", mix.rho().size());
  const int l = opts.power_l;
  return MatrixKernel(
      g.p(), domain,
      [phi, g, h, mix, l](int m, int n, const Point& z, const Point& zp) {
        const auto fd = form_and_log_det(g, h, m, n, z, zp, z, zp);
        return det_factor(fd.log_det, l) * mixture_sum(phi, mix, fd.a, m, n, z, zp);
      },
      gate.provenance());
}

MatrixKernel build_product(const CMFunction& phi, const MatrixFieldFamily& g,
                           const VectorFieldFamily& h, const PointSpace& x_space,
                           const PointSpace& y_space, const BuildOptions& opts) {
  require_shapes(g, h);
  Gate gate("product", opts);
  gate.phi(phi);
  gate.require("G", g.certificate(), g.descriptor());
  gate.require("H", h.certificate(), h.descriptor());
  const PointSpace domain = PointSpace::product(x_space, y_space);
  gate.note("domain", domain.descriptor());
  const int l = opts.power_l;
  return MatrixKernel(
      g.p(), domain,
      [phi, g, h, l, domain](int m, int n, const Point& z, const Point& zp) {
        const auto [x, y] = domain.split(z);
        const auto [xp, yp] = domain.split(zp);
        const auto fd = form_and_log_det(g, h, m, n, x, xp, y, yp);
        return phi(fd.a) * det_factor(fd.log_det, l);
      },
      gate.provenance());
}

MatrixKernel build_product_mixture(const CMFunction& phi, const MatrixFieldFamily& g,
                                   const VectorFieldFamily& h, const MixtureSpec& mix,
                                   const PointSpace& x_space, const PointSpace& y_space,
                                   const BuildOptions& opts) {
  require_shapes(g, h);
  if (mix.p() != g.p()) throw ShapeError("mixture p does not match G and H");
  Gate gate("product_mixture", opts);
  gate.phi(phi);
  gate.require("G", g.certificate(), g.descriptor());
  gate.require("H", h.certificate(), h.descriptor());
  gate.require("mixture", mix.certificate(), mix.descriptor());
  const PointSpace domain = PointSpace::product(x_space, y_space);
  gate.note("domain", domain.descriptor());
  gate.note("mixture_atoms", mix.rho().size());
  const int l = opts.power_l;
  return MatrixKernel(
      g.p(), domain,
      [phi, g, h, mix, l, domain](int m, int n, const Point& z, const Point& zp) {
        const auto [x, y] = domain.split(z);
        const auto [xp, yp] = domain.split(zp);
        const auto fd = form_and_log_det(g, h, m, n, x, xp, y, yp);
        return det_factor(fd.log_det, l) * mixture_sum(phi, mix, fd.a, m, n, z, zp);
      },
      gate.provenance());
}

namespace {

/// (x, x', y, y') for a cross-covariance entry.
struct CrossArgs {
  Point x, xp, y, yp;
};

CrossArgs cross_args(const CrossDomain& d, const Point& z, const Point& zp) {
  if (!d.product) return {z, zp, z, zp};
  auto [x, y] = d.space.split(z);
  auto [xp, yp] = d.space.split(zp);
  return {std::move(x), std::move(xp), std::move(y), std::move(yp)};
}

json matrix_json(const Matrix& a) {
  json rows = json::array();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

MatrixKernel build_matern_cross(const MatrixFieldFamily& g, const VectorFieldFamily& h,
                                const std::vector<double>& v, const Matrix& r,
                                const CrossDomain& domain, const BuildOptions& opts) {
  require_shapes(g, h);
  const auto p = static_cast<std::size_t>(g.p());
  if (v.size() != p) throw ShapeError("matern_cross needs one smoothness per component");
  if (r.rows() != p || r.cols() != p) throw ShapeError("matern_cross r must be p x p");
  for (double x : v)
    if (!(x > 0.0) || !std::isfinite(x)) throw ParamError("matern_cross smoothness must be positive");
  Matrix coef(p, p);
  for (std::size_t m = 0; m < p; ++m)
    for (std::size_t n = 0; n < p; ++n) {
      if (!(r(m, n) > 0.0) || !std::isfinite(r(m, n)))
        throw ParamError("matern_cross r entries must be positive");
      if (r(m, n) != r(n, m)) throw ParamError("matern_cross r must be symmetric");
      coef(m, n) = std::pow(0.5 * r(m, n), v[m] + v[n]);
    }
  const auto spec = eig_sym(SymMatrix(coef));
  if (spec.classification == Definiteness::Indefinite)
    throw ParamError("matern_cross coefficient matrix [(r_mn/2)^(v_m+v_n)] is not PSD (min eigenvalue " +
                     std::to_string(spec.min_eig) + ")");

  Gate gate("matern_cross", opts);
  gate.require("G", g.certificate(), g.descriptor());
  gate.require("H", h.certificate(), h.descriptor());
  gate.note("v", v);
  gate.note("r", matrix_json(r));
  gate.note("coefficient_min_eig", spec.min_eig);
  gate.note("domain", domain.space.descriptor());
  const int l = opts.power_l;
  return MatrixKernel(
      g.p(), domain.space,
      [g, h, v, r, l, domain](int m, int n, const Point& z, const Point& zp) {
        const auto a = cross_args(domain, z, zp);
        const auto fd = form_and_log_det(g, h, m, n, a.x, a.xp, a.y, a.yp);
        const double nu = 0.5 * (v[m] + v[n]);
        return std::tgamma(nu) * det_factor(fd.log_det, l) * matern_eval(nu, r(m, n), fd.a);
      },
      gate.provenance());
}

SmoothnessFn constant_smoothness(std::vector<double> v) {
  for (double x : v)
    if (!(x > 0.0) || !std::isfinite(x)) throw ParamError("smoothness must be positive");
  return [v = std::move(v)](int m, const Point&) { return v.at(static_cast<std::size_t>(m)); };
}

MatrixKernel build_cauchy_cross(const MatrixFieldFamily& g, const VectorFieldFamily& h, double c,
                                double gamma, SmoothnessFn v, json v_descriptor,
                                const CrossDomain& domain, const BuildOptions& opts) {
  require_shapes(g, h);
  if (!(c > 0.0) || !std::isfinite(c)) throw ParamError("cauchy_cross needs c > 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ParamError("cauchy_cross needs gamma in (0, 1]");
  Gate gate("cauchy_cross", opts);
  gate.require("G", g.certificate(), g.descriptor());
  gate.require("H", h.certificate(), h.descriptor());
  gate.note("c", c);
  gate.note("gamma", gamma);
  gate.note("v", std::move(v_descriptor));
  gate.note("domain", domain.space.descriptor());
  const int l = opts.power_l;
  return MatrixKernel(
      g.p(), domain.space,
      [g, h, c, gamma, v = std::move(v), l, domain](int m, int n, const Point& z, const Point& zp) {
        const auto a = cross_args(domain, z, zp);
        const auto fd = form_and_log_det(g, h, m, n, a.x, a.xp, a.y, a.yp);
        const double vm = v(m, z), vn = v(n, zp);
        if (!(vm > 0.0) || !(vn > 0.0))
          throw KernelEvalError("cauchy_cross smoothness must be positive");
        const double big_v = vm + vn;
        return std::tgamma(big_v) * det_factor(fd.log_det, l) *
               std::pow(1.0 + c * std::pow(fd.a, gamma), -big_v);
      },
      gate.provenance());
}

}  // namespace ak

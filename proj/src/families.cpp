#include "ak/families.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ak/errors.hpp"
#include "ak/parallel.hpp"

namespace ak {

using nlohmann::json;

json Certificate::to_json() const { return {{"source", source}, {"pass", pass}, {"note", note}}; }

json ValidityReport::to_json() const {
  json j = {{"check", check},   {"hypothesis", hypothesis}, {"pass", pass},
            {"margin", margin}, {"seed", seed}};
  if (skipped) j["skipped"] = true;
  if (!witness.is_null()) j["witness"] = witness;
  return j;
}

Certificate ValidityReport::certificate() const {
  return {"sampled", pass && !skipped, check + " (seed " + std::to_string(seed) + ")"};
}

namespace {

SymMatrix scaled_identity(int q, double c) {
  Matrix m(static_cast<std::size_t>(q), static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i) m(i, i) = c;
  return SymMatrix(m);
}

Certificate by_construction(std::string note) { return {"construction", true, std::move(note)}; }

void require_component(int m, int p, const char* who) {
  if (m < 0 || m >= p)
    throw ShapeError(std::string(who) + ": component index " + std::to_string(m) +
                     " outside [0, " + std::to_string(p) + ")");
}

double quad_form(const Matrix& a, std::span<const double> u) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) row += a(i, j) * u[j];
    s += u[i] * row;
  }
  return s;
}

json point_list(std::span<const Point> pts) {
  json j = json::array();
  for (const auto& p : pts) j.push_back(p);
  return j;
}

}  // namespace

// ------------------------------------------------------------------ types

MatrixFieldFamily::MatrixFieldFamily(int p, int q, MatrixFieldFn fn, json descriptor,
                                     std::optional<Certificate> cert)
    : p_(p), q_(q), fn_(std::move(fn)), descriptor_(std::move(descriptor)), cert_(std::move(cert)) {
  if (p < 1 || q < 1) throw ParamError("matrix field family needs p >= 1 and q >= 1");
}

SymMatrix MatrixFieldFamily::operator()(int m, int n, const Point& y, const Point& yp) const {
  require_component(m, p_, "G");
  require_component(n, p_, "G");
  SymMatrix g = fn_(m, n, y, yp);
  if (g.dim() != static_cast<std::size_t>(q_))
    throw ShapeError("G returned a " + std::to_string(g.dim()) + "x" + std::to_string(g.dim()) +
                     " matrix, expected q = " + std::to_string(q_));
  return g;
}

MatrixFieldFamily MatrixFieldFamily::with_certificate(Certificate c) const {
  MatrixFieldFamily out = *this;
  out.cert_ = std::move(c);
  return out;
}

VectorFieldFamily::VectorFieldFamily(int p, int q, VectorFieldFn fn, json descriptor,
                                     std::optional<Certificate> cert)
    : p_(p), q_(q), fn_(std::move(fn)), descriptor_(std::move(descriptor)), cert_(std::move(cert)) {
  if (p < 1 || q < 1) throw ParamError("vector field family needs p >= 1 and q >= 1");
}

std::vector<double> VectorFieldFamily::operator()(int m, int n, const Point& x,
                                                  const Point& xp) const {
  require_component(m, p_, "H");
  require_component(n, p_, "H");
  auto h = fn_(m, n, x, xp);
  if (h.size() != static_cast<std::size_t>(q_))
    throw ShapeError("H returned length " + std::to_string(h.size()) + ", expected q = " +
                     std::to_string(q_));
  return h;
}

VectorFieldFamily VectorFieldFamily::with_certificate(Certificate c) const {
  VectorFieldFamily out = *this;
  out.cert_ = std::move(c);
  return out;
}

ScalarCNDKernel::ScalarCNDKernel(std::function<double(const Point&, const Point&)> fn,
                                 bool positive, json descriptor, std::optional<Certificate> cert)
    : fn_(std::move(fn)), positive_(positive), descriptor_(std::move(descriptor)),
      cert_(std::move(cert)) {}

ScalarCNDKernel ScalarCNDKernel::with_certificate(Certificate c) const {
  ScalarCNDKernel out = *this;
  out.cert_ = std::move(c);
  return out;
}

MixtureSpec::MixtureSpec(int p, std::vector<Atom> rho, MixtureKernelFn kernel, json descriptor,
                         std::optional<Certificate> cert)
    : p_(p), rho_(std::move(rho)), kernel_(std::move(kernel)), descriptor_(std::move(descriptor)),
      cert_(std::move(cert)) {
  if (p < 1) throw ParamError("mixture needs p >= 1");
  if (rho_.empty()) throw ParamError("mixture measure needs at least one atom");
  for (const auto& a : rho_)
    if (!(a.location > 0.0) || !(a.weight > 0.0) || !std::isfinite(a.location) ||
        !std::isfinite(a.weight))
      throw ParamError("mixture atoms need s > 0 and weight > 0");
}

MixtureSpec MixtureSpec::with_certificate(Certificate c) const {
  MixtureSpec out = *this;
  out.cert_ = std::move(c);
  return out;
}

// -------------------------------------------------------------- G recipes

MatrixFieldFamily make_G_sum(int q, std::vector<std::function<SymMatrix(const Point&)>> g,
                             std::span<const Point> probe) {
  if (g.empty()) throw ParamError("make_G_sum needs at least one g_m");
  for (std::size_t m = 0; m < g.size(); ++m)
    for (std::size_t k = 0; k < probe.size(); ++k) {
      const SymMatrix v = g[m](probe[k]);
      if (v.dim() != static_cast<std::size_t>(q))
        throw ShapeError("g_" + std::to_string(m) + " has the wrong dimension");
      if (!try_cholesky(v))
        throw FamilyInvalid("g_" + std::to_string(m) + " is not positive definite at probe point " +
                            std::to_string(k) + " " + json(probe[k]).dump());
    }
  const int p = static_cast<int>(g.size());
  return MatrixFieldFamily(
      p, q,
      [g = std::move(g)](int m, int n, const Point& y, const Point& yp) {
        return SymMatrix(g[m](y).matrix() + g[n](yp).matrix());
      },
      {{"recipe", "sum"}, {"params", {{"q", q}, {"p", p}}}},
      by_construction("u^T(g_m(y) + g_n(y'))u is a sum kernel, of negative type with form 0"));
}

MatrixFieldFamily make_G_sum_identity(int q, std::vector<double> offsets, double scale) {
  if (offsets.empty()) throw ParamError("sum_identity needs at least one offset");
  for (double o : offsets)
    if (!(o > 0.0)) throw ParamError("sum_identity offsets must be positive");
  if (!(scale >= 0.0)) throw ParamError("sum_identity scale must be >= 0");
  const int p = static_cast<int>(offsets.size());
  auto fam = MatrixFieldFamily(
      p, q,
      [q, offsets, scale](int m, int n, const Point& y, const Point& yp) {
        const double v = offsets[m] + offsets[n] + scale * (dot(y, y) + dot(yp, yp));
        return scaled_identity(q, v);
      },
      {{"recipe", "sum_identity"}, {"params", {{"q", q}, {"offsets", offsets}, {"scale", scale}}}},
      by_construction("sum of positive definite g_m(y) + g_n(y')"));
  return fam;
}

MatrixFieldFamily make_G_scalar_diag(const ScalarCNDKernel& g, int p, int q) {
  if (!g.positive())
    throw FamilyInvalid("scalar diagonal family needs a positive valued CND kernel");
  std::optional<Certificate> cert;
  if (g.certificate() && g.certificate()->pass)
    cert = Certificate{g.certificate()->source, true, "g(y, y') I_q with certified scalar kernel"};
  return MatrixFieldFamily(
      p, q,
      [g, q](int, int, const Point& y, const Point& yp) {
        const double v = g(y, yp);
        if (!(v > 0.0) || !std::isfinite(v))
          throw FamilyInvalid("scalar kernel value " + std::to_string(v) + " is not positive at " +
                              json(y).dump() + ", " + json(yp).dump());
        return scaled_identity(q, v);
      },
      {{"recipe", "scalar_diag"}, {"params", {{"p", p}, {"q", q}, {"g", g.descriptor()}}}},
      cert);
}

MatrixFieldFamily make_G_entrywise_diag(
    int p, int q, std::function<double(int, int, const Point&, const Point&)> g, json descriptor) {
  return MatrixFieldFamily(
      p, q,
      [g = std::move(g), q](int m, int n, const Point& y, const Point& yp) {
        const double v = g(m, n, y, yp);
        if (!(v > 0.0) || !std::isfinite(v))
          throw FamilyInvalid("entrywise scalar kernel value " + std::to_string(v) +
                              " is not positive");
        return scaled_identity(q, v);
      },
      {{"recipe", "entrywise_diag"}, {"params", std::move(descriptor)}});
}

MatrixFieldFamily make_G_sphere(int p, int q, int d, double separation) {
  if (d < 1) throw ParamError("sphere family needs d >= 1");
  if (!(separation >= 0.0)) throw ParamError("sphere family separation must be >= 0");
  const PointSpace sphere = PointSpace::sphere(d);
  return MatrixFieldFamily(
      p, q,
      [sphere, q, separation](int m, int n, const Point& y, const Point& yp) {
        sphere.validate(y);
        sphere.validate(yp);
        const double v = static_cast<double>(m + 1 + n + 1) + (m != n ? separation : 0.0) +
                         geodesic_distance(y, yp);
        return scaled_identity(q, v);
      },
      {{"recipe", "sphere"},
       {"params", {{"p", p}, {"q", q}, {"d", d}, {"separation", separation}}}},
      by_construction("component sum plus geodesic distance, both of negative type"));
}

MatrixFieldFamily make_G_constant(int p, const SymMatrix& a) {
  if (!try_cholesky(a)) throw FamilyInvalid("constant family needs a positive definite matrix");
  const int q = static_cast<int>(a.dim());
  json rows = json::array();
  for (std::size_t i = 0; i < a.dim(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < a.dim(); ++j) row.push_back(a(i, j));
    rows.push_back(row);
  }
  return MatrixFieldFamily(
      p, q, [a](int, int, const Point&, const Point&) { return a; },
      {{"recipe", "constant"}, {"params", {{"p", p}, {"matrix", rows}}}},
      by_construction("constant kernels are of negative type"));
}

MatrixFieldFamily make_G_block_diagonal(int p, int q,
                                        std::function<SymMatrix(int, const Point&, const Point&)> g) {
  return MatrixFieldFamily(
      p, q,
      [g = std::move(g), q](int m, int n, const Point& y, const Point& yp) {
        if (m != n) return SymMatrix(Matrix(static_cast<std::size_t>(q), static_cast<std::size_t>(q)));
        return g(m, y, yp);
      },
      {{"recipe", "block_diagonal"}, {"params", {{"p", p}, {"q", q}}}, {"builder_input", false}});
}

MatrixFieldFamily make_G_adversarial(int p, int q, double scale) {
  if (!(scale > 0.0)) throw ParamError("adversarial family scale must be positive");
  return MatrixFieldFamily(
      p, q,
      [q, scale](int, int, const Point& y, const Point& yp) {
        return scaled_identity(q, std::exp(-squared_distance(y, yp) / scale));
      },
      {{"recipe", "adversarial_gaussian"}, {"params", {{"p", p}, {"q", q}, {"scale", scale}}}});
}

// -------------------------------------------------------------- H recipes

VectorFieldFamily make_H_difference(
    int q, std::vector<std::function<std::vector<double>(const Point&)>> h) {
  if (h.empty()) throw ParamError("make_H_difference needs at least one h_m");
  const int p = static_cast<int>(h.size());
  return VectorFieldFamily(
      p, q,
      [h = std::move(h), q](int m, int n, const Point& x, const Point& xp) {
        auto a = h[m](x);
        const auto b = h[n](xp);
        if (a.size() != static_cast<std::size_t>(q) || b.size() != static_cast<std::size_t>(q))
          throw ShapeError("h_m returned a vector of the wrong length");
        for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
        return a;
      },
      {{"recipe", "difference"}, {"params", {{"p", p}, {"q", q}}}},
      by_construction("h_m(x) - h_n(x') gives a rank-one exponential Gram"));
}

VectorFieldFamily make_H_difference_linear(std::vector<Matrix> maps,
                                           std::vector<std::vector<double>> shifts) {
  if (maps.empty()) throw ParamError("difference_linear needs at least one map");
  const std::size_t q = maps[0].rows();
  const std::size_t dim = maps[0].cols();
  for (const auto& a : maps)
    if (a.rows() != q || a.cols() != dim) throw ShapeError("difference_linear maps differ in shape");
  if (shifts.empty()) shifts.assign(maps.size(), std::vector<double>(q, 0.0));
  if (shifts.size() != maps.size()) throw ShapeError("difference_linear needs one shift per map");
  for (const auto& s : shifts)
    if (s.size() != q) throw ShapeError("difference_linear shift has the wrong length");

  json jm = json::array();
  for (const auto& a : maps) {
    json rows = json::array();
    for (std::size_t i = 0; i < q; ++i) {
      json row = json::array();
      for (std::size_t j = 0; j < dim; ++j) row.push_back(a(i, j));
      rows.push_back(row);
    }
    jm.push_back(rows);
  }
  std::vector<std::function<std::vector<double>(const Point&)>> h;
  for (std::size_t m = 0; m < maps.size(); ++m)
    h.push_back([a = maps[m], s = shifts[m], dim](const Point& x) {
      if (x.size() != dim) throw ShapeError("difference_linear: point has the wrong length");
      auto v = a * std::span<const double>(x);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] += s[i];
      return v;
    });
  auto fam = make_H_difference(static_cast<int>(q), std::move(h));
  return VectorFieldFamily(fam.p(), fam.q(),
                           [fam](int m, int n, const Point& x, const Point& xp) {
                             return fam(m, n, x, xp);
                           },
                           {{"recipe", "difference_linear"}, {"params", {{"maps", jm}, {"shifts", shifts}}}},
                           fam.certificate());
}

VectorFieldFamily make_H_first_coord(int p, int q) {
  return VectorFieldFamily(
      p, q,
      [q](int, int, const Point& x, const Point& xp) {
        if (x.empty() || xp.empty()) throw ShapeError("first_coord: empty point");
        std::vector<double> v(static_cast<std::size_t>(q), 0.0);
        v[0] = x[0] - xp[0];
        return v;
      },
      {{"recipe", "difference_first_coord"}, {"params", {{"p", p}, {"q", q}}}},
      by_construction("h_m(x) = (x_0, 0, ..., 0) difference family"));
}

VectorFieldFamily make_H_identity(int p, int dim) {
  return VectorFieldFamily(
      p, dim,
      [dim](int, int, const Point& x, const Point& xp) {
        if (x.size() != static_cast<std::size_t>(dim) || xp.size() != static_cast<std::size_t>(dim))
          throw ShapeError("difference_identity: point has the wrong length");
        std::vector<double> v(x.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = x[i] - xp[i];
        return v;
      },
      {{"recipe", "difference_identity"}, {"params", {{"p", p}, {"q", dim}}}},
      by_construction("translation difference x - x'"));
}

VectorFieldFamily make_H_zero(int p, int q) {
  return VectorFieldFamily(
      p, q,
      [q](int, int, const Point&, const Point&) {
        return std::vector<double>(static_cast<std::size_t>(q), 0.0);
      },
      {{"recipe", "zero"}, {"params", {{"p", p}, {"q", q}}}},
      by_construction("H = 0 gives the all-ones matrix"));
}

// ---------------------------------------------------------- scalar kernels

ScalarCNDKernel cnd_sqdist(double c0, double c1) {
  if (!(c0 >= 0.0) || !(c1 >= 0.0)) throw ParamError("sqdist kernel needs c0, c1 >= 0");
  return ScalarCNDKernel([c0, c1](const Point& y, const Point& yp) {
    return c0 + c1 * squared_distance(y, yp);
  },
                         c0 > 0.0, {{"recipe", "sqdist"}, {"params", {{"c0", c0}, {"c1", c1}}}},
                         by_construction("shifted squared Euclidean distance"));
}

ScalarCNDKernel cnd_bernstein(BernsteinFunction f) {
  const bool positive = f(0.0) > 0.0;
  json d = {{"recipe", "bernstein"}, {"params", f.describe()}};
  return ScalarCNDKernel([f](const Point& y, const Point& yp) { return f(squared_distance(y, yp)); },
                         positive, std::move(d),
                         by_construction("Bernstein function of the squared distance"));
}

ScalarCNDKernel cnd_geodesic(double c0, double c1) {
  if (!(c0 >= 0.0) || !(c1 >= 0.0)) throw ParamError("geodesic kernel needs c0, c1 >= 0");
  return ScalarCNDKernel([c0, c1](const Point& y, const Point& yp) {
    return c0 + c1 * geodesic_distance(y, yp);
  },
                         c0 > 0.0, {{"recipe", "geodesic"}, {"params", {{"c0", c0}, {"c1", c1}}}},
                         by_construction("shifted great-circle distance"));
}

ScalarCNDKernel cnd_constant(double c) {
  if (!std::isfinite(c)) throw ParamError("constant kernel needs a finite value");
  return ScalarCNDKernel([c](const Point&, const Point&) { return c; }, c > 0.0,
                         {{"recipe", "constant"}, {"params", {{"c", c}}}},
                         by_construction("constant kernels are of negative type"));
}

// ------------------------------------------------------------ mixtures

namespace {

json atoms_json(const std::vector<Atom>& rho) {
  json j = json::array();
  for (const auto& a : rho) j.push_back({a.location, a.weight});
  return j;
}

}  // namespace

MixtureSpec mixture_unit(int p) {
  return MixtureSpec(p, {{1.0, 1.0}}, [](int, int, double, const Point&, const Point&) { return 1.0; },
                     {{"recipe", "unit"}, {"params", {{"p", p}}}},
                     by_construction("all-ones matrices are PSD"));
}

MixtureSpec mixture_constant(std::vector<Atom> rho, const SymMatrix& c) {
  const auto rep = eig_sym(c);
  if (rep.classification == Definiteness::Indefinite)
    throw ParamError("constant mixture matrix is not PSD (min eigenvalue " +
                     std::to_string(rep.min_eig) + ")");
  const int p = static_cast<int>(c.dim());
  json rows = json::array();
  for (std::size_t i = 0; i < c.dim(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < c.dim(); ++j) row.push_back(c(i, j));
    rows.push_back(row);
  }
  json d = {{"recipe", "constant"}, {"params", {{"matrix", rows}, {"atoms", atoms_json(rho)}}}};
  return MixtureSpec(p, std::move(rho),
                     [c](int m, int n, double, const Point&, const Point&) { return c(m, n); },
                     std::move(d), by_construction("constant PSD coefficient matrix"));
}

MixtureSpec mixture_gaussian_diag(int p, std::vector<Atom> rho, double scale) {
  if (!(scale > 0.0)) throw ParamError("gaussian mixture scale must be positive");
  json d = {{"recipe", "gaussian_diag"},
            {"params", {{"p", p}, {"scale", scale}, {"atoms", atoms_json(rho)}}}};
  return MixtureSpec(p, std::move(rho),
                     [scale](int m, int n, double s, const Point& z, const Point& zp) {
                       if (m != n) return 0.0;
                       return std::exp(-s * squared_distance(z, zp) / scale);
                     },
                     std::move(d), by_construction("diagonal of Gaussian kernels, strictly PD"));
}

MixtureSpec mixture_matern(std::vector<double> v, double r, LogGrid grid) {
  if (v.empty()) throw ParamError("matern mixture needs at least one smoothness");
  for (double x : v)
    if (!(x > 0.0) || !std::isfinite(x)) throw ParamError("matern smoothness must be positive");
  if (!(r > 0.0) || !std::isfinite(r)) throw ParamError("matern scale r must be positive");
  if (!(grid.step > 0.0) || !(grid.below > 0.0) || !(grid.above > 0.0))
    throw ParamError("matern log grid needs positive step and extent");
  const double b = r * r / 4.0;
  const double x0 = std::log(b) - grid.below;
  const auto count = static_cast<std::size_t>(std::floor((grid.below + grid.above) / grid.step)) + 1;
  std::vector<Atom> rho;
  rho.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double s = std::exp(x0 + static_cast<double>(k) * grid.step);
    // ds / s = dx, so the density exp(-b/s)/s becomes exp(-b/s) dx.
    const double w = grid.step * std::exp(-b / s);
    if (w > 0.0) rho.push_back({s, w});
  }
  json d = {{"recipe", "matern"},
            {"params",
             {{"v", v}, {"r", r}, {"grid", {{"below", grid.below}, {"above", grid.above}, {"step", grid.step}}}}}};
  const int p = static_cast<int>(v.size());
  return MixtureSpec(p, std::move(rho),
                     [v = std::move(v), b](int m, int n, double s, const Point&, const Point&) {
                       return std::pow(b / s, 0.5 * (v[m] + v[n]));
                     },
                     std::move(d), by_construction("rank-one (b/s)^{v_m/2} (b/s)^{v_n/2}"));
}

// --------------------------------------------------------------- checks

std::vector<Point> sample_points(const PointSpace& space, int n, CounterRng& rng) {
  if (n < 1) throw ParamError("need at least one sample point");
  std::vector<Point> pts;
  if (space.kind() == PointSpace::Kind::Opaque) {
    const int count = std::min(n, space.dim());
    std::vector<int> idx(static_cast<std::size_t>(space.dim()));
    for (int i = 0; i < space.dim(); ++i) idx[i] = i;
    for (int i = 0; i < count; ++i) {
      const auto j = i + static_cast<int>(rng() % static_cast<std::uint64_t>(space.dim() - i));
      std::swap(idx[i], idx[j]);
      pts.push_back({static_cast<double>(idx[i])});
    }
    return pts;
  }
  int attempts = 0;
  while (static_cast<int>(pts.size()) < n) {
    Point x = space.random_point(rng);
    const bool fresh = std::none_of(pts.begin(), pts.end(), [&](const Point& y) {
      return squared_distance(x, y) < 1e-12;
    });
    if (fresh) pts.push_back(std::move(x));
    if (++attempts > 100 * n) throw ParamError("could not sample distinct points");
  }
  return pts;
}

namespace {

constexpr std::uint64_t kStreamPoints = 0x70747321;
constexpr std::uint64_t kStreamFreq = 0x66726571;

/// Largest |a - b^T| relative to the entry scale; 0 for symmetric families.
double family_asymmetry(const SymMatrix& a, const SymMatrix& b) {
  double diff = 0.0, scale = 1.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) {
      diff = std::max(diff, std::abs(a(i, j) - b(j, i)));
      scale = std::max(scale, std::abs(a(i, j)));
    }
  return diff / scale;
}

}  // namespace

ValidityReport check_G_validity(const MatrixFieldFamily& g, const PointSpace& space, int n_points,
                                int n_freq, std::uint64_t seed) {
  ValidityReport rep{"G_cnd", "u^T G_mn u conditionally negative definite for every u (CND_p)",
                     true, -std::numeric_limits<double>::infinity(), seed, nullptr};
  if (n_freq < 1) throw ParamError("check_G_validity needs n_freq >= 1");
  CounterRng prng(seed, kStreamPoints);
  const auto pts = sample_points(space, n_points, prng);
  const std::size_t N = pts.size(), p = static_cast<std::size_t>(g.p());
  const std::size_t q = static_cast<std::size_t>(g.q());

  std::vector<SymMatrix> cache(N * N * p * p);
  auto at = [&](std::size_t mu, std::size_t nu, std::size_t m, std::size_t n) -> SymMatrix& {
    return cache[((mu * N + nu) * p + m) * p + n];
  };
  for (std::size_t mu = 0; mu < N; ++mu)
    for (std::size_t nu = 0; nu < N; ++nu)
      for (std::size_t m = 0; m < p; ++m)
        for (std::size_t n = 0; n < p; ++n)
          at(mu, nu, m, n) = g(static_cast<int>(m), static_cast<int>(n), pts[mu], pts[nu]);

  for (std::size_t mu = 0; mu < N; ++mu)
    for (std::size_t nu = 0; nu < N; ++nu)
      for (std::size_t m = 0; m < p; ++m)
        for (std::size_t n = 0; n < p; ++n)
          if (family_asymmetry(at(mu, nu, m, n), at(nu, mu, n, m)) > 1e-12) {
            rep.pass = false;
            rep.margin = std::numeric_limits<double>::infinity();
            rep.witness = {{"reason", "G_mn(y, y') != G_nm(y', y)^T"},
                           {"m", m}, {"n", n}, {"y", pts[mu]}, {"y_prime", pts[nu]}};
            return rep;
          }

  CounterRng frng(seed, kStreamFreq);
  std::vector<std::vector<double>> us(static_cast<std::size_t>(n_freq));
  for (auto& u : us) u = frng.normal_vector(q);

  std::vector<NegativeTypeReport> results(us.size());
  parallel_for(us.size(), [&](std::size_t f) {
    Matrix M(N * p, N * p);
    for (std::size_t mu = 0; mu < N; ++mu)
      for (std::size_t nu = 0; nu < N; ++nu)
        for (std::size_t m = 0; m < p; ++m)
          for (std::size_t n = 0; n < p; ++n)
            M(BlockGram::index(mu, m, p), BlockGram::index(nu, n, p)) =
                quad_form(at(mu, nu, m, n).matrix(), us[f]);
    results[f] = negative_type_check(SymMatrix(M), 16, splitmix64(seed + f), p);
  });

  std::size_t worst = 0;
  std::optional<std::size_t> first_fail;
  for (std::size_t f = 0; f < results.size(); ++f) {
    if (results[f].max_form > results[worst].max_form) worst = f;
    if (!results[f].pass && !first_fail) first_fail = f;
  }
  rep.margin = results[worst].max_form;
  rep.pass = !first_fail;
  const std::size_t w = first_fail.value_or(worst);
  rep.witness = {{"u", us[w]}, {"c", results[w].witness}, {"points", point_list(pts)},
                 {"value", results[w].max_form}, {"tolerance", results[w].tolerance_used}};
  return rep;
}

ValidityReport check_H_antisymmetry(const VectorFieldFamily& h, std::span<const Point> points) {
  ValidityReport rep{"H_antisymmetry", "H_mn(x, x') = -H_nm(x', x) and H_mm(x, x) = 0", true, 0.0,
                     0, nullptr};
  const int p = h.p();
  for (std::size_t mu = 0; mu < points.size(); ++mu)
    for (std::size_t nu = mu; nu < points.size(); ++nu)
      for (int m = 0; m < p; ++m)
        for (int n = 0; n < p; ++n) {
          if (mu == nu && n < m) continue;
          const auto a = h(m, n, points[mu], points[nu]);
          const auto b = h(n, m, points[nu], points[mu]);
          double dev = 0.0, scale = 1.0;
          for (std::size_t i = 0; i < a.size(); ++i) {
            dev = std::max(dev, std::abs(a[i] + b[i]));
            scale = std::max(scale, std::abs(a[i]));
          }
          if (mu == nu && m == n)
            for (double x : a) dev = std::max(dev, std::abs(x));
          rep.margin = std::max(rep.margin, dev / scale);
          if (dev > 1e-12 * scale && rep.pass) {
            rep.pass = false;
            rep.witness = {{"m", m}, {"n", n}, {"x", points[mu]}, {"x_prime", points[nu]},
                           {"H_mn", a}, {"H_nm_swapped", b}};
          }
        }
  return rep;
}

ValidityReport check_H_validity(const VectorFieldFamily& h, const PointSpace& space, int n_points,
                                int n_freq, std::uint64_t seed) {
  if (n_freq < 1) throw ParamError("check_H_validity needs n_freq >= 1");
  CounterRng prng(seed, kStreamPoints);
  const auto pts = sample_points(space, n_points, prng);
  auto anti = check_H_antisymmetry(h, pts);
  anti.seed = seed;
  if (!anti.pass) return anti;

  ValidityReport rep{"H_exp_pd", "[exp(i H_mn^T u)] positive definite for every u (PD_p)", true,
                     std::numeric_limits<double>::infinity(), seed, nullptr};
  const std::size_t N = pts.size(), p = static_cast<std::size_t>(h.p());
  const std::size_t q = static_cast<std::size_t>(h.q());
  std::vector<std::vector<double>> cache(N * N * p * p);
  for (std::size_t mu = 0; mu < N; ++mu)
    for (std::size_t nu = 0; nu < N; ++nu)
      for (std::size_t m = 0; m < p; ++m)
        for (std::size_t n = 0; n < p; ++n)
          cache[((mu * N + nu) * p + m) * p + n] =
              h(static_cast<int>(m), static_cast<int>(n), pts[mu], pts[nu]);

  CounterRng frng(seed, kStreamFreq);
  std::vector<std::vector<double>> us(static_cast<std::size_t>(n_freq));
  for (auto& u : us) {
    u = frng.normal_vector(q);
    for (double& x : u) x *= 1.5;
  }
  std::vector<SpectralReport> results(us.size());
  parallel_for(us.size(), [&](std::size_t f) {
    Matrix re(N * p, N * p), im(N * p, N * p);
    for (std::size_t mu = 0; mu < N; ++mu)
      for (std::size_t nu = 0; nu < N; ++nu)
        for (std::size_t m = 0; m < p; ++m)
          for (std::size_t n = 0; n < p; ++n) {
            const double t = dot(cache[((mu * N + nu) * p + m) * p + n], us[f]);
            const auto i = BlockGram::index(mu, m, p), j = BlockGram::index(nu, n, p);
            re(i, j) = std::cos(t);
            im(i, j) = std::sin(t);
          }
    results[f] = eig_sym(hermitian_embedding(re, im));
  });
  for (std::size_t f = 0; f < results.size(); ++f) {
    const auto& r = results[f];
    if (r.min_eig < rep.margin) rep.margin = r.min_eig;
    if (r.classification == Definiteness::Indefinite && rep.pass) {
      rep.pass = false;
      rep.witness = {{"u", us[f]}, {"points", point_list(pts)}, {"min_eig", r.min_eig},
                     {"tolerance", r.tolerance_used}};
    }
  }
  return rep;
}

ValidityReport check_strictness_condition(const MatrixFieldFamily& g, const PointSpace& space,
                                          int n_points, int u_samples, std::uint64_t seed,
                                          Shell shell) {
  if (u_samples < 1) throw ParamError("strictness check needs u_samples >= 1");
  if (!(shell.inner > 0.0) || !(shell.outer > shell.inner))
    throw ParamError("strictness shell needs 0 < inner < outer");
  ValidityReport rep{"G_strict",
                     "u^T[G_mm(y,y) + G_nn(y',y') - 2 G_mn(y,y')]u < 0 for (m,y) != (n,y')", true,
                     -std::numeric_limits<double>::infinity(), seed, nullptr};
  CounterRng prng(seed, kStreamPoints);
  const auto pts = sample_points(space, n_points, prng);
  CounterRng frng(seed, kStreamFreq);
  const std::size_t q = static_cast<std::size_t>(g.q());
  std::vector<std::vector<double>> us(static_cast<std::size_t>(u_samples));
  for (auto& u : us) {
    u = frng.unit_vector(q);
    const double radius = frng.uniform(shell.inner, shell.outer);
    for (double& x : u) x *= radius;
  }
  const int p = g.p();
  const std::size_t N = pts.size();
  std::vector<SymMatrix> diag(N * static_cast<std::size_t>(p));
  for (std::size_t mu = 0; mu < N; ++mu)
    for (int m = 0; m < p; ++m) diag[mu * p + m] = g(m, m, pts[mu], pts[mu]);

  for (std::size_t mu = 0; mu < N; ++mu)
    for (std::size_t nu = mu; nu < N; ++nu)
      for (int m = 0; m < p; ++m)
        for (int n = 0; n < p; ++n) {
          if (mu == nu && n <= m) continue;
          const Matrix e = diag[mu * p + m].matrix() + diag[nu * p + n].matrix() -
                           2.0 * g(m, n, pts[mu], pts[nu]).matrix();
          const double scale =
              std::max({max_abs(diag[mu * p + m].matrix()), max_abs(diag[nu * p + n].matrix()), 1.0});
          for (const auto& u : us) {
            const double v = quad_form(e, u);
            const double thr = -1e-12 * scale * dot(u, u);
            if (v > rep.margin) rep.margin = v;
            if (v >= thr && rep.pass) {
              rep.pass = false;
              rep.witness = {{"m", m}, {"n", n}, {"y", pts[mu]}, {"y_prime", pts[nu]},
                             {"u", u}, {"value", v}};
            }
          }
        }
  if (N == 1 && p == 1) rep.margin = 0.0;
  return rep;
}

ValidityReport check_scalar_cnd(const ScalarCNDKernel& g, const PointSpace& space, int n_points,
                                int trials, std::uint64_t seed) {
  if (trials < 1) throw ParamError("check_scalar_cnd needs trials >= 1");
  ValidityReport rep{"scalar_cnd", "g conditionally negative definite (CND_1)", true,
                     -std::numeric_limits<double>::infinity(), seed, nullptr};
  CounterRng base(seed, kStreamPoints);
  for (int t = 0; t < trials && rep.pass; ++t) {
    CounterRng rng = base.split(static_cast<std::uint64_t>(t));
    const auto pts = sample_points(space, n_points, rng);
    const std::size_t N = pts.size();
    Matrix M(N, N);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) {
        M(i, j) = g(pts[i], pts[j]);
        if (g.positive() && !(M(i, j) > 0.0)) {
          rep.pass = false;
          rep.witness = {{"reason", "declared positive kernel is not positive"},
                         {"y", pts[i]}, {"y_prime", pts[j]}, {"value", M(i, j)}};
          return rep;
        }
      }
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (std::abs(M(i, j) - M(j, i)) > 1e-12 * std::max(1.0, std::abs(M(i, j)))) {
          rep.pass = false;
          rep.margin = std::numeric_limits<double>::infinity();
          rep.witness = {{"reason", "kernel is not symmetric"}, {"y", pts[i]}, {"y_prime", pts[j]}};
          return rep;
        }
    const auto r = negative_type_check(SymMatrix(M), 16, splitmix64(seed ^ static_cast<std::uint64_t>(t)));
    rep.margin = std::max(rep.margin, r.max_form);
    if (!r.pass) {
      rep.pass = false;
      rep.witness = {{"points", point_list(pts)}, {"c", r.witness}, {"value", r.max_form},
                     {"tolerance", r.tolerance_used}};
    }
  }
  return rep;
}

ValidityReport check_mixture(const MixtureSpec& mix, const PointSpace& space, int n_points,
                             std::uint64_t seed) {
  ValidityReport rep{"mixture_psd", "[P^s_mn] positive definite for every atom s (PD_p)", true,
                     std::numeric_limits<double>::infinity(), seed, nullptr};
  CounterRng prng(seed, kStreamPoints);
  const auto pts = sample_points(space, n_points, prng);
  const auto& rho = mix.rho();
  const std::size_t n_atoms = std::min<std::size_t>(rho.size(), 64);
  std::vector<std::size_t> picks(n_atoms);
  for (std::size_t k = 0; k < n_atoms; ++k)
    picks[k] = n_atoms == 1 ? 0 : k * (rho.size() - 1) / (n_atoms - 1);

  const std::size_t N = pts.size(), p = static_cast<std::size_t>(mix.p());
  std::vector<SpectralReport> results(n_atoms);
  parallel_for(n_atoms, [&](std::size_t k) {
    const double s = rho[picks[k]].location;
    Matrix M(N * p, N * p);
    for (std::size_t mu = 0; mu < N; ++mu)
      for (std::size_t nu = 0; nu < N; ++nu)
        for (std::size_t m = 0; m < p; ++m)
          for (std::size_t n = 0; n < p; ++n)
            M(BlockGram::index(mu, m, p), BlockGram::index(nu, n, p)) =
                mix.P(static_cast<int>(m), static_cast<int>(n), s, pts[mu], pts[nu]);
    results[k] = eig_sym(SymMatrix(M));
  });
  for (std::size_t k = 0; k < n_atoms; ++k) {
    rep.margin = std::min(rep.margin, results[k].min_eig);
    if (results[k].classification == Definiteness::Indefinite && rep.pass) {
      rep.pass = false;
      rep.witness = {{"s", rho[picks[k]].location}, {"points", point_list(pts)},
                     {"min_eig", results[k].min_eig}};
    }
  }
  return rep;
}

}  // namespace ak

#include "ak/verify.hpp"

#include <cmath>
#include <numbers>

#include "ak/errors.hpp"
#include "ak/parallel.hpp"
#include "ak/quadrature.hpp"

namespace ak {

using nlohmann::json;

namespace {

/// Orthonormal columns from Gram-Schmidt on a Gaussian matrix.
Matrix random_orthogonal(CounterRng& rng, std::size_t q) {
  Matrix z(q, q);
  for (double& x : z.data()) x = rng.normal();
  for (std::size_t j = 0; j < q; ++j) {
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t k = 0; k < j; ++k) {
        double d = 0.0;
        for (std::size_t i = 0; i < q; ++i) d += z(i, j) * z(i, k);
        for (std::size_t i = 0; i < q; ++i) z(i, j) -= d * z(i, k);
      }
    double n = 0.0;
    for (std::size_t i = 0; i < q; ++i) n += z(i, j) * z(i, j);
    n = std::sqrt(n);
    for (std::size_t i = 0; i < q; ++i) z(i, j) /= n;
  }
  return z;
}

/// Solves L^T x = b for lower-triangular L.
std::vector<double> backward_solve_transposed(const Matrix& l, std::span<const double> b) {
  const std::size_t n = l.rows();
  std::vector<double> x(b.begin(), b.end());
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
    x[ii] = s / l(ii, ii);
  }
  return x;
}

double log_det_from_cholesky(const Matrix& l) {
  double s = 0.0;
  for (std::size_t i = 0; i < l.rows(); ++i) s += 2.0 * std::log(l(i, i));
  return s;
}

struct TensorSum {
  double re;
  double im;
};

TensorSum tensor_hermite_sum(std::span<const double> bp, int nodes) {
  const auto& rule = gauss_hermite(nodes);
  const std::size_t q = bp.size();
  const auto n = static_cast<std::size_t>(nodes);
  std::size_t total = 1;
  for (std::size_t k = 0; k < q; ++k) total *= n;
  CompensatedSum re, im;
  std::vector<std::size_t> idx(q, 0);
  for (std::size_t t = 0; t < total; ++t) {
    double w = 1.0, phase = 0.0;
    for (std::size_t k = 0; k < q; ++k) {
      w *= rule.weights[idx[k]];
      phase += bp[k] * rule.nodes[idx[k]];
    }
    re.add(w * std::cos(phase));
    im.add(w * std::sin(phase));
    for (std::size_t k = 0; k < q; ++k) {
      if (++idx[k] < n) break;
      idx[k] = 0;
    }
  }
  return {re.value(), im.value()};
}

}  // namespace

AitkenInstance random_aitken_instance(CounterRng& rng, int q, double cond_max, double b_max) {
  if (q < 1) throw ParamError("Aitken instance needs q >= 1");
  if (!(cond_max >= 1.0) || !(b_max >= 0.0)) throw ParamError("bad Aitken instance bounds");
  const auto n = static_cast<std::size_t>(q);
  const Matrix qm = random_orthogonal(rng, n);
  const double lo = 0.5, hi = 0.5 * cond_max;
  std::vector<double> lambda(n);
  for (double& l : lambda) l = std::exp(rng.uniform(std::log(lo), std::log(hi)));
  const Matrix a = qm * Matrix::diagonal(lambda) * qm.transpose();
  auto b = rng.unit_vector(n);
  const double radius = b_max * std::pow(rng.uniform(), 1.0 / static_cast<double>(q));
  for (double& x : b) x *= radius;
  return {SymMatrix(a), std::move(b)};
}

double aitken_rhs(const AitkenInstance& inst) {
  if (inst.b.size() != inst.a.dim()) throw ShapeError("Aitken instance: b has the wrong length");
  const Matrix l = cholesky_pd(inst.a);
  // b^T (4A)^{-1} b = |L^{-1} b|^2 / 4.
  const auto z = forward_solve(l, inst.b);
  double quad = 0.0;
  for (double v : z) quad += v * v;
  const double q = static_cast<double>(inst.a.dim());
  return std::exp(0.5 * q * std::log(std::numbers::pi) - 0.5 * log_det_from_cholesky(l) -
                  0.25 * quad);
}

AitkenLhs aitken_lhs(const AitkenInstance& inst, const TensorHermite& method) {
  const std::size_t q = inst.a.dim();
  if (q > 4) throw ParamError("tensor Gauss-Hermite supports q <= 4");
  if (inst.b.size() != q) throw ShapeError("Aitken instance: b has the wrong length");
  if (method.nodes < 4) throw ParamError("tensor Gauss-Hermite needs at least 4 nodes");
  const Matrix l = cholesky_pd(inst.a);
  // u = L^{-T} v turns u^T A u into |v|^2 and b^T u into (L^{-1} b)^T v.
  const auto bp = forward_solve(l, inst.b);
  const double jac = std::exp(-0.5 * log_det_from_cholesky(l));
  const auto fine = tensor_hermite_sum(bp, method.nodes);
  const auto coarse = tensor_hermite_sum(bp, method.nodes / 2);
  AitkenLhs out{jac * fine.re, jac * fine.im, jac * std::abs(fine.re - coarse.re)};
  const double mass = jac * std::pow(std::numbers::pi, 0.5 * static_cast<double>(q));
  if (!std::isfinite(out.real) || out.error_estimate > 1e-4 * mass)
    throw QuadratureError("tensor Gauss-Hermite did not converge (estimate " +
                          std::to_string(out.error_estimate) + ")");
  return out;
}

AitkenLhs aitken_lhs(const AitkenInstance& inst, const MonteCarlo& method) {
  const std::size_t q = inst.a.dim();
  if (inst.b.size() != q) throw ShapeError("Aitken instance: b has the wrong length");
  if (method.samples < 2) throw ParamError("Monte Carlo needs at least 2 samples");
  const Matrix l = cholesky_pd(inst.a);
  const double mass =
      std::exp(0.5 * static_cast<double>(q) * std::log(std::numbers::pi) - 0.5 * log_det_from_cholesky(l));
  CounterRng rng(method.seed, 0x6d63);
  CompensatedSum sum_c, sum_c2, sum_s;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::size_t k = 0; k < method.samples; ++k) {
    auto z = rng.normal_vector(q);
    for (double& x : z) x *= inv_sqrt2;
    // Covariance of u = L^{-T} z is (L L^T)^{-1} / 2 = (2A)^{-1}.
    const auto u = backward_solve_transposed(l, z);
    const double phase = dot(inst.b, u);
    const double c = std::cos(phase);
    sum_c.add(c);
    sum_c2.add(c * c);
    sum_s.add(std::sin(phase));
  }
  const double n = static_cast<double>(method.samples);
  const double mean = sum_c.value() / n;
  const double var = std::max(0.0, (sum_c2.value() / n - mean * mean) * n / (n - 1.0));
  return {mass * mean, mass * sum_s.value() / n, mass * std::sqrt(var / n)};
}

BlockGram assemble_gram(const MatrixKernel& k, std::span<const Point> points) {
  const std::size_t N = points.size();
  if (N == 0) throw ParamError("assemble_gram needs at least one point");
  for (std::size_t i = 0; i < N; ++i) {
    try {
      k.domain().validate(points[i]);
    } catch (const DomainError& e) {
      throw DomainError("point " + std::to_string(i) + ": " + e.what());
    }
  }
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (points[i] == points[j])
        throw DuplicatePoints("points " + std::to_string(j) + " and " + std::to_string(i) +
                              " coincide");

  const std::size_t p = static_cast<std::size_t>(k.p());
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(N * (N + 1) / 2);
  for (std::size_t mu = 0; mu < N; ++mu)
    for (std::size_t nu = mu; nu < N; ++nu) pairs.emplace_back(mu, nu);

  Matrix flat(N * p, N * p);
  parallel_for(pairs.size(), [&](std::size_t t) {
    const auto [mu, nu] = pairs[t];
    const Matrix block = k(points[mu], points[nu]);
    for (std::size_t m = 0; m < p; ++m)
      for (std::size_t n = 0; n < p; ++n) {
        const double v = block(m, n);
        flat(BlockGram::index(mu, m, p), BlockGram::index(nu, n, p)) = v;
        if (mu != nu) flat(BlockGram::index(nu, n, p), BlockGram::index(mu, m, p)) = v;
      }
  });
  if (!all_finite(flat)) throw KernelEvalError("kernel produced non-finite Gram entries");
  return {p, N, SymMatrix(flat)};
}

SpectralReport classify_gram(const BlockGram& g, double tol_psd, double tol_pd) {
  return eig_sym(g.flattened, tol_psd, tol_pd);
}

json SchurChainReport::to_json() const {
  return {{"e_u_psd", e_u_psd},
          {"e_u_min_eig", e_u_min_eig},
          {"unit_diagonal", unit_diagonal},
          {"diagonal_deviation", diagonal_deviation},
          {"product_psd", product_psd},
          {"product_pd", product_pd},
          {"product_min_eig", product_min_eig}};
}

SchurChainReport schur_chain_check(const MatrixFieldFamily& g, const VectorFieldFamily& h,
                                   std::span<const Point> points, std::span<const double> u,
                                   double s, double tol_psd, double tol_pd) {
  if (g.p() != h.p() || g.q() != h.q()) throw ShapeError("G and H disagree on p or q");
  if (u.size() != static_cast<std::size_t>(g.q())) throw ShapeError("u must have length q");
  if (!(s >= 0.0)) throw ParamError("schur_chain_check needs s >= 0");
  const std::size_t N = points.size(), p = static_cast<std::size_t>(g.p());
  const std::size_t dim = N * p;

  Matrix form(dim, dim), phase(dim, dim);
  for (std::size_t mu = 0; mu < N; ++mu)
    for (std::size_t nu = 0; nu < N; ++nu)
      for (std::size_t m = 0; m < p; ++m)
        for (std::size_t n = 0; n < p; ++n) {
          const auto i = BlockGram::index(mu, m, p), j = BlockGram::index(nu, n, p);
          const auto gm = g(static_cast<int>(m), static_cast<int>(n), points[mu], points[nu]);
          double f = 0.0;
          for (std::size_t a = 0; a < u.size(); ++a)
            for (std::size_t b = 0; b < u.size(); ++b) f += u[a] * gm(a, b) * u[b];
          form(i, j) = f;
          phase(i, j) = 2.0 * std::sqrt(s) *
                        dot(h(static_cast<int>(m), static_cast<int>(n), points[mu], points[nu]), u);
        }

  SchurChainReport rep;
  const SymMatrix e_u = hadamard_exp_neg(SymMatrix(form));
  const auto spec_u = eig_sym(e_u, tol_psd, tol_pd);
  rep.e_u_min_eig = spec_u.min_eig;
  rep.e_u_psd = spec_u.classification != Definiteness::Indefinite;

  Matrix es_re(dim, dim), es_im(dim, dim), prod_re(dim, dim), prod_im(dim, dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) {
      es_re(i, j) = std::cos(phase(i, j));
      es_im(i, j) = std::sin(phase(i, j));
      prod_re(i, j) = e_u(i, j) * es_re(i, j);
      prod_im(i, j) = e_u(i, j) * es_im(i, j);
    }
  rep.diagonal_deviation = 0.0;
  for (std::size_t i = 0; i < dim; ++i)
    rep.diagonal_deviation =
        std::max({rep.diagonal_deviation, std::abs(es_re(i, i) - 1.0), std::abs(es_im(i, i))});
  rep.unit_diagonal = rep.diagonal_deviation == 0.0;

  const auto spec_p = eig_sym(hermitian_embedding(prod_re, prod_im), tol_psd, tol_pd);
  rep.product_min_eig = spec_p.min_eig;
  rep.product_psd = spec_p.classification != Definiteness::Indefinite;
  rep.product_pd = spec_p.classification == Definiteness::PD;
  return rep;
}

}  // namespace ak

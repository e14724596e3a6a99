#include "ak/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ak/errors.hpp"
#include "ak/random.hpp"

namespace ak {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("ragged initializer list");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
}

}  // namespace

Matrix operator+(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "operator+");
  Matrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] += bd[i];
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "operator-");
  Matrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] -= bd[i];
  return c;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("operator*: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  for (auto& x : c.data()) x *= s;
  return c;
}

std::vector<double> operator*(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw ShapeError("matrix-vector: dimension mismatch");
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
  return y;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double x : a.data()) s += x * x;
  return std::sqrt(s);
}

double max_abs(const Matrix& a) {
  double s = 0.0;
  for (double x : a.data()) s = std::max(s, std::abs(x));
  return s;
}

double trace(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) s += a(i, i);
  return s;
}

bool all_finite(const Matrix& a) {
  return std::all_of(a.data().begin(), a.data().end(), [](double x) { return std::isfinite(x); });
}

// ---------------------------------------------------------------------------

SymMatrix::SymMatrix(const Matrix& m) : m_(m.rows(), m.cols()) {
  if (!m.is_square()) throw ShapeError("SymMatrix requires a square matrix");
  if (m.rows() == 0) throw ShapeError("SymMatrix requires dim >= 1");
  const std::size_t n = m.rows();
  double asym = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    m_(i, i) = m(i, i);
    for (std::size_t j = i + 1; j < n; ++j) {
      asym = std::max(asym, std::abs(m(i, j) - m(j, i)));
      const double avg = 0.5 * (m(i, j) + m(j, i));
      m_(i, j) = avg;
      m_(j, i) = avg;
    }
  }
  asymmetry_ = asym;
  // Non-finite inputs pass through here and are rejected by the solvers.
  if (all_finite(m) && asym > kAsymmetryTolerance * frobenius_norm(m))
    throw InvalidMatrix("matrix is not symmetric: max asymmetry " + std::to_string(asym));
}

SymMatrix::SymMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : SymMatrix(Matrix(rows)) {}

SymMatrix SymMatrix::identity(std::size_t n) { return SymMatrix(Matrix::identity(n)); }

std::string to_string(Definiteness d) {
  switch (d) {
    case Definiteness::PD: return "PD";
    case Definiteness::PSD: return "PSD";
    case Definiteness::Indefinite: return "INDEFINITE";
  }
  return "INDEFINITE";
}

// ---------------------------------------------------------------------------

EigenDecomposition eigh(const SymMatrix& sym) {
  if (!all_finite(sym.matrix())) throw InvalidMatrix("eigh: non-finite entries");
  const std::size_t n = sym.dim();
  Matrix a = sym.matrix();
  Matrix v = Matrix::identity(n);

  const double scale = frobenius_norm(a);
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps && scale > 0.0; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-18 * scale) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // Rotations this small cannot move the diagonal in floating point.
        if (sweep > 3 && std::abs(apq) < 1e-19 * (std::abs(app) + std::abs(aqq))) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  EigenDecomposition out{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

SpectralReport eig_sym(const SymMatrix& m, double tol_psd, double tol_pd) {
  if (!(tol_psd > 0.0) || !(tol_pd > 0.0)) throw ParamError("eig_sym: tolerances must be > 0");
  auto dec = eigh(m);
  SpectralReport r;
  r.eigenvalues = std::move(dec.values);
  r.min_eig = r.eigenvalues.front();
  r.max_abs_eig = std::max(std::abs(r.eigenvalues.front()), std::abs(r.eigenvalues.back()));
  r.tolerance_used = tol_psd * std::max(1.0, r.max_abs_eig);
  if (r.min_eig > tol_pd)
    r.classification = Definiteness::PD;
  else if (r.min_eig >= -r.tolerance_used)
    r.classification = Definiteness::PSD;
  else
    r.classification = Definiteness::Indefinite;
  return r;
}

// ---------------------------------------------------------------------------

std::optional<Matrix> try_cholesky(const SymMatrix& m) {
  if (!all_finite(m.matrix())) throw InvalidMatrix("cholesky: non-finite entries");
  const std::size_t n = m.dim();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) return std::nullopt;
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

Matrix cholesky_pd(const SymMatrix& m) {
  auto l = try_cholesky(m);
  if (!l) throw NotPositiveDefinite("cholesky: non-positive pivot");
  return *std::move(l);
}

std::vector<double> forward_solve(const Matrix& lower, std::span<const double> b) {
  const std::size_t n = lower.rows();
  if (b.size() != n) throw ShapeError("forward_solve: dimension mismatch");
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= lower(i, k) * z[k];
    z[i] = s / lower(i, i);
  }
  return z;
}

DetInverse det_and_inverse(const SymMatrix& m) {
  const Matrix l = cholesky_pd(m);
  const std::size_t n = m.dim();
  double det = 1.0;
  for (std::size_t i = 0; i < n; ++i) det *= l(i, i) * l(i, i);

  // inverse = L^{-T} L^{-1}, column by column.
  Matrix linv(n, n);
  std::vector<double> e(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    auto col = forward_solve(l, e);
    for (std::size_t i = 0; i < n; ++i) linv(i, j) = col[i];
  }
  return {det, SymMatrix(linv.transpose() * linv)};
}

// ---------------------------------------------------------------------------

Matrix schur_product(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "schur_product");
  Matrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] *= bd[i];
  return c;
}

SymMatrix schur_product(const SymMatrix& a, const SymMatrix& b) {
  return SymMatrix(schur_product(a.matrix(), b.matrix()));
}

SymMatrix hadamard_exp_neg(const SymMatrix& a) {
  Matrix e(a.dim(), a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) {
      const double x = a(i, j);
      if (!std::isfinite(x)) throw InvalidMatrix("hadamard_exp_neg: non-finite entry");
      if (x < -700.0) throw RangeError("hadamard_exp_neg: exp overflow at entry " +
                                       std::to_string(i) + "," + std::to_string(j));
      e(i, j) = std::exp(-x);
    }
  return SymMatrix(e);
}

SymMatrix hermitian_embedding(const Matrix& re, const Matrix& im) {
  require_same_shape(re, im, "hermitian_embedding");
  const std::size_t n = re.rows();
  Matrix e(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      e(i, j) = re(i, j);
      e(i + n, j + n) = re(i, j);
      e(i, j + n) = -im(i, j);
      e(i + n, j) = im(i, j);
    }
  return SymMatrix(e);
}

// ---------------------------------------------------------------------------

namespace {

double quadratic_form(const Matrix& m, std::span<const double> c) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) row += m(i, j) * c[j];
    s += c[i] * row;
  }
  return s;
}

// Orthonormal basis of {c : sum_mu c_{mu,m} = 0 for all m}, as columns.
Matrix constrained_basis(std::size_t n_points, std::size_t block) {
  const std::size_t dim = n_points * block;
  const std::size_t k_count = (n_points - 1) * block;
  Matrix v(dim, k_count);
  for (std::size_t k = 1; k < n_points; ++k) {
    const double norm = std::sqrt(static_cast<double>(k * (k + 1)));
    for (std::size_t m = 0; m < block; ++m) {
      const std::size_t col = (k - 1) * block + m;
      for (std::size_t mu = 0; mu < k; ++mu) v(mu * block + m, col) = 1.0 / norm;
      v(k * block + m, col) = -static_cast<double>(k) / norm;
    }
  }
  return v;
}

}  // namespace

NegativeTypeReport negative_type_check(const SymMatrix& m, int trials, std::uint64_t rng_seed,
                                       std::size_t block_size, double tol_rel) {
  if (!all_finite(m.matrix())) throw InvalidMatrix("negative_type_check: non-finite entries");
  if (trials < 1) throw ParamError("negative_type_check: trials must be >= 1");
  if (block_size == 0 || m.dim() % block_size != 0)
    throw ShapeError("negative_type_check: dim is not a multiple of block_size");

  NegativeTypeReport rep;
  rep.trials = trials;
  rep.tolerance_used = tol_rel * std::max(1.0, max_abs(m.matrix()));
  rep.max_form = -std::numeric_limits<double>::infinity();

  const std::size_t n_points = m.dim() / block_size;
  if (n_points < 2) {
    rep.max_form = 0.0;
    return rep;
  }
  const Matrix basis = constrained_basis(n_points, block_size);
  const std::size_t dim = m.dim();
  const std::size_t k_count = basis.cols();

  auto consider = [&](std::vector<double> c) {
    double nrm = 0.0;
    for (double x : c) nrm += x * x;
    if (nrm <= 0.0) return;
    nrm = std::sqrt(nrm);
    for (auto& x : c) x /= nrm;
    const double f = quadratic_form(m.matrix(), c);
    if (f > rep.max_form) {
      rep.max_form = f;
      rep.witness = std::move(c);
    }
  };

  // Deterministic basis vectors of the hyperplane.
  for (std::size_t k = 0; k < k_count; ++k) {
    std::vector<double> c(dim);
    for (std::size_t i = 0; i < dim; ++i) c[i] = basis(i, k);
    consider(std::move(c));
  }
  // Random vectors projected onto the hyperplane.
  CounterRng rng(rng_seed, 0x6e74);
  for (int t = 0; t < trials; ++t) {
    auto w = rng.normal_vector(k_count);
    consider(basis * w);
  }
  // Exact maximum from the compressed matrix V^T M V. The product is only
  // symmetric up to rounding, which can dominate when M nearly vanishes on
  // the hyperplane, so it is symmetrized explicitly.
  const Matrix c = basis.transpose() * m.matrix() * basis;
  const auto dec = eigh(SymMatrix(0.5 * (c + c.transpose())));
  std::vector<double> top(k_count);
  for (std::size_t k = 0; k < k_count; ++k) top[k] = dec.vectors(k, k_count - 1);
  consider(basis * top);

  rep.pass = rep.max_form <= rep.tolerance_used;
  return rep;
}

Matrix BlockGram::block(std::size_t m, std::size_t n) const {
  Matrix b(n_points, n_points);
  for (std::size_t mu = 0; mu < n_points; ++mu)
    for (std::size_t nu = 0; nu < n_points; ++nu)
      b(mu, nu) = flattened(index(mu, m, p), index(nu, n, p));
  return b;
}

}  // namespace ak

#pragma once

// Dense small-matrix arithmetic plus the Schur/Hadamard calculus used by the
// kernel constructions. Everything here is a pure function of its inputs.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ak {

/// Row-major dense real matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  Matrix transpose() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_{0};
  std::size_t cols_{0};
  std::vector<double> data_;
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
std::vector<double> operator*(const Matrix& a, std::span<const double> x);

double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
double trace(const Matrix& a);
bool all_finite(const Matrix& a);

/// Symmetric matrix. Construction averages M and its transpose and rejects
/// inputs whose largest asymmetry exceeds 1e-8 times the Frobenius norm.
class SymMatrix {
 public:
  static constexpr double kAsymmetryTolerance = 1e-8;

  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);
  SymMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static SymMatrix identity(std::size_t n);

  std::size_t dim() const noexcept { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const Matrix& matrix() const noexcept { return m_; }

  /// max |M_ij - M_ji| of the matrix this was built from.
  double asymmetry() const noexcept { return asymmetry_; }

 private:
  Matrix m_;
  double asymmetry_{0.0};
};

enum class Definiteness { PD, PSD, Indefinite };

std::string to_string(Definiteness d);

struct SpectralReport {
  std::vector<double> eigenvalues;  // ascending
  double min_eig{0.0};
  double max_abs_eig{0.0};
  Definiteness classification{Definiteness::Indefinite};
  /// Absolute PSD threshold actually applied: tol_psd * max(1, max_abs_eig).
  double tolerance_used{0.0};
};

inline constexpr double kDefaultTolPsd = 1e-8;
inline constexpr double kDefaultTolPd = 1e-10;

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column k belongs to values[k]
};

/// Cyclic Jacobi eigen-decomposition.
EigenDecomposition eigh(const SymMatrix& m);

/// PD iff min_eig > tol_pd; PSD iff min_eig >= -tol_psd * max(1, max_abs_eig).
SpectralReport eig_sym(const SymMatrix& m, double tol_psd = kDefaultTolPsd,
                       double tol_pd = kDefaultTolPd);

/// Lower Cholesky factor, or nullopt if some pivot is not strictly positive.
std::optional<Matrix> try_cholesky(const SymMatrix& m);

/// Throws NotPositiveDefinite on failure.
Matrix cholesky_pd(const SymMatrix& m);

/// Solves L z = b for lower-triangular L.
std::vector<double> forward_solve(const Matrix& lower, std::span<const double> b);

struct DetInverse {
  double determinant;
  SymMatrix inverse;
};

DetInverse det_and_inverse(const SymMatrix& m);

Matrix schur_product(const Matrix& a, const Matrix& b);
SymMatrix schur_product(const SymMatrix& a, const SymMatrix& b);

/// Entrywise exp(-A). Throws RangeError when some -A_ij exceeds 700.
SymMatrix hadamard_exp_neg(const SymMatrix& a);

/// Real symmetric embedding [[Re, -Im], [Im, Re]] of a Hermitian matrix. Its
/// spectrum is the Hermitian spectrum with every eigenvalue doubled.
SymMatrix hermitian_embedding(const Matrix& re, const Matrix& im);

struct NegativeTypeReport {
  bool pass{true};
  /// Largest c^T M c over unit vectors c in the constrained subspace.
  double max_form{0.0};
  /// Unit vector attaining max_form (empty when the subspace is trivial).
  std::vector<double> witness;
  double tolerance_used{0.0};
  int trials{0};
};

/// Checks c^T M c <= 0 over vectors with zero sum. With block_size p > 1 the
/// index layout is point-major (index = mu * p + m) and the constraint is
/// sum_mu c_{mu,m} = 0 for every component m. Random projected trials and a
/// deterministic Helmert basis are evaluated, and the compressed matrix is
/// analysed spectrally so the reported maximum is exact up to rounding.
NegativeTypeReport negative_type_check(const SymMatrix& m, int trials, std::uint64_t rng_seed,
                                       std::size_t block_size = 1, double tol_rel = 1e-10);

/// Block Gram matrix [[K_mn(x_mu, x_nu)]] in point-major layout.
struct BlockGram {
  std::size_t p{0};
  std::size_t n_points{0};
  SymMatrix flattened;

  static constexpr const char* kLayout = "point-major";

  static std::size_t index(std::size_t mu, std::size_t m, std::size_t p) { return mu * p + m; }

  /// N x N block [K_mn(x_mu, x_nu)]_{mu,nu}.
  Matrix block(std::size_t m, std::size_t n) const;
};

}  // namespace ak

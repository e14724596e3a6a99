#pragma once

// Shared generators for the unit tests. Everything is seeded.

#include <cmath>
#include <vector>

#include "ak/linalg.hpp"
#include "ak/random.hpp"

namespace ak::test {

inline Matrix random_matrix(CounterRng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

/// B B^T with B of shape n x rank, so PSD with rank <= rank.
inline SymMatrix random_psd(CounterRng& rng, std::size_t n, std::size_t rank) {
  const Matrix b = random_matrix(rng, n, rank);
  return SymMatrix(b * b.transpose());
}

inline SymMatrix random_pd(CounterRng& rng, std::size_t n) {
  return SymMatrix(random_psd(rng, n, n).matrix() + 0.1 * Matrix::identity(n));
}

/// Gram matrix of unit vectors: PSD with unit diagonal.
inline SymMatrix random_correlation(CounterRng& rng, std::size_t n, std::size_t rank) {
  Matrix v(n, rank);
  for (std::size_t i = 0; i < n; ++i) {
    const auto u = rng.unit_vector(rank);
    for (std::size_t k = 0; k < rank; ++k) v(i, k) = u[k];
  }
  Matrix c = v * v.transpose();
  for (std::size_t i = 0; i < n; ++i) c(i, i) = 1.0;
  return SymMatrix(c);
}

/// A_{mu nu} = |z_mu - z_nu|^2 for the given rows.
inline SymMatrix squared_distance_matrix(const std::vector<std::vector<double>>& z) {
  const std::size_t n = z.size();
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < z[i].size(); ++k) s += (z[i][k] - z[j][k]) * (z[i][k] - z[j][k]);
      a(i, j) = s;
    }
  return SymMatrix(a);
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

}  // namespace ak::test

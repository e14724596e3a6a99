#pragma once

// Numerical oracles for the analytic identities behind the constructions and
// the block Gram pipeline that checks their conclusions.

#include <cstdint>
#include <span>
#include <vector>

#include "ak/builders.hpp"
#include "ak/families.hpp"
#include "ak/linalg.hpp"
#include "ak/random.hpp"
#include "json.hpp"

namespace ak {

/// Integrand data for int exp(-u^T A u + i b^T u) du over R^q.
struct AitkenInstance {
  SymMatrix a;
  std::vector<double> b;
};

/// A = Q diag(lambda) Q^T with Haar-like Q, lambda log-uniform in
/// [0.5, 0.5 cond_max], and b uniform in the ball of radius b_max.
AitkenInstance random_aitken_instance(CounterRng& rng, int q, double cond_max = 100.0,
                                      double b_max = 5.0);

/// pi^{q/2} / sqrt(det A) * exp(-b^T (4A)^{-1} b).
double aitken_rhs(const AitkenInstance& inst);

struct TensorHermite {
  int nodes{64};
};

struct MonteCarlo {
  std::size_t samples{20000};
  std::uint64_t seed{42};
};

struct AitkenLhs {
  double real{0.0};
  double imag{0.0};
  /// Tensor rule: |I_n - I_{n/2}|. Monte Carlo: one standard error.
  double error_estimate{0.0};
};

/// Tensor Gauss-Hermite after the change of variables v = L^T u (A = L L^T).
/// q <= 4. Throws QuadratureError when the halved rule disagrees by more than
/// 1e-4 of the b = 0 mass.
AitkenLhs aitken_lhs(const AitkenInstance& inst, const TensorHermite& method);

/// Importance sampling from the Gaussian density proportional to exp(-u^T A u).
AitkenLhs aitken_lhs(const AitkenInstance& inst, const MonteCarlo& method);

/// [[K_mn(z_mu, z_nu)]] in point-major layout. Points are validated against
/// the kernel's domain (DomainError naming the index) and must be pairwise
/// distinct (DuplicatePoints naming both indices).
BlockGram assemble_gram(const MatrixKernel& k, std::span<const Point> points);

SpectralReport classify_gram(const BlockGram& g, double tol_psd = kDefaultTolPsd,
                             double tol_pd = kDefaultTolPd);

struct SchurChainReport {
  /// E_u = [exp(-u^T G_mn u)] is PSD.
  bool e_u_psd{false};
  double e_u_min_eig{0.0};
  /// E_u^s = [exp(2i sqrt(s) H_mn^T u)] has diagonal entries exactly 1.
  bool unit_diagonal{false};
  double diagonal_deviation{0.0};
  /// E_u o E_u^s is PSD; product_pd additionally asks min_eig > tol_pd.
  bool product_psd{false};
  bool product_pd{false};
  double product_min_eig{0.0};

  nlohmann::json to_json() const;
};

/// The Schur/Hadamard chain of the quadratic-form construction for one (u, s)
/// on a single set: G and H are both evaluated at the same points.
SchurChainReport schur_chain_check(const MatrixFieldFamily& g, const VectorFieldFamily& h,
                                   std::span<const Point> points, std::span<const double> u,
                                   double s, double tol_psd = kDefaultTolPsd,
                                   double tol_pd = kDefaultTolPd);

}  // namespace ak

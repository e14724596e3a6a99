#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace ak {

/// Counter-based generator: output k of stream (seed, stream) is a SplitMix64
/// finalisation of a keyed counter, so child streams can be split off
/// deterministically without sharing state.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Independent child stream keyed by (this key, child).
  CounterRng split(std::uint64_t child) const;

  result_type operator()();

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  std::uint64_t seed() const noexcept { return seed_; }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  double normal();
  std::vector<double> normal_vector(std::size_t n);
  /// Uniform direction on the unit sphere in R^n.
  std::vector<double> unit_vector(std::size_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_{0};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace ak

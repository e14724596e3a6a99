#include "ak/random.hpp"

#include <cmath>
#include <numbers>

namespace ak {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), key_(splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL))) {}

CounterRng CounterRng::split(std::uint64_t child) const {
  CounterRng r(seed_);
  r.key_ = splitmix64(key_ ^ splitmix64(child + 0xd1b54a32d192ed03ULL));
  return r;
}

CounterRng::result_type CounterRng::operator()() {
  return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_);
}

double CounterRng::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

// Box-Muller; written out so streams are identical across standard libraries.
double CounterRng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<double> CounterRng::normal_vector(std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = normal();
  return v;
}

std::vector<double> CounterRng::unit_vector(std::size_t n) {
  for (;;) {
    auto v = normal_vector(n);
    double s = 0.0;
    for (double x : v) s += x * x;
    if (s > 1e-24) {
      s = std::sqrt(s);
      for (auto& x : v) x /= s;
      return v;
    }
  }
}

}  // namespace ak

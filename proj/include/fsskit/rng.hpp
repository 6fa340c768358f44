// Deterministic counter-based pseudo-randomness. All stochastic code in the
// library draws from RngStream so that a fixed seed gives bit-identical
// output on every platform (the standard library distributions are
// implementation-defined and cannot be used here).
#pragma once

#include <cmath>
#include <cstdint>

#include "fsskit/core.hpp"

namespace fsskit {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {
    // decorrelate trivially related seeds
    detail::splitmix64(state_);
  }

  /// Derive an independent substream, e.g. one per emitter or trial.
  RngStream split(std::uint64_t index) const {
    std::uint64_t s = state_ ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    return RngStream(s);
  }

  std::uint64_t next_u64() { return detail::splitmix64(state_); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * pi * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * pi * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  /// Poisson sample. Inverse transform for small means, normal approximation
  /// above 50 where the distributions are indistinguishable for our purposes.
  double poisson(double mean) {
    if (mean <= 0.0) return 0.0;
    if (mean < 50.0) {
      const double l = std::exp(-mean);
      double p = 1.0;
      long k = 0;
      do {
        ++k;
        p *= uniform();
      } while (p > l);
      return static_cast<double>(k - 1);
    }
    const double n = std::round(normal(mean, std::sqrt(mean)));
    return n < 0.0 ? 0.0 : n;
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fsskit

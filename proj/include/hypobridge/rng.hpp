#pragma once

#include <cmath>
#include <cstdint>

#include "hypobridge/matcore.hpp"

namespace hypobridge {

/// Deterministic normal generator with cheap independent substreams
/// (splitmix64 state advance + Box-Muller). Substream k of a seed is
/// decorrelated from substream l != k, so per-path sampling can run in any
/// order (or in parallel) and still reproduce the serial output.
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint64_t substream) {
    state_ = seed ^ (0x9E3779B97F4A7C15ULL * (substream + 1));
    next_u64();
    next_u64();
  }

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1], u2 in [0, 1).
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  Vector next_vector(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = next();
    return v;
  }

 private:
  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hypobridge

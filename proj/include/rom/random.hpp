#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace rom {

/// Seedable generator with a fully specified output stream.
///
/// Raw bits come from std::mt19937_64 (whose sequence is fixed by the C++
/// standard). Conversions are done here rather than through the standard
/// distributions, whose algorithms are implementation-defined:
///   uniform()  = (bits >> 11) * 2^-53, a double in [0, 1)
///   normal()   = Box-Muller on two uniforms, the second variate cached
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lower, double upper) {
    return lower + (upper - lower) * uniform();
  }

  /// Integer in [0, bound) by multiply-shift on 53 uniform bits.
  std::size_t below(std::size_t bound) {
    auto value = static_cast<std::size_t>(uniform() * static_cast<double>(bound));
    return value < bound ? value : bound - 1;
  }

  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// SplitMix64 finalizer applied to (seed, stream); used to derive independent
/// per-task seeds (per output, per chunk) from one user seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace rom

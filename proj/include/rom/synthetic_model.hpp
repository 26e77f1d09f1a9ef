#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rom/io.hpp"
#include "rom/param_space.hpp"
#include "rom/signal.hpp"

namespace rom {

/// coefficient * prod x[dim]^power over the listed factors.
struct Monomial {
  double coefficient = 0.0;
  std::vector<std::pair<int, int>> factors;  // (dimension, power)
};

/// Sparse multivariate polynomial over normalized parameters.
struct Polynomial {
  std::vector<Monomial> terms;

  double operator()(std::span<const double> x) const;
  /// Guaranteed lower bound over [-1, 1]^P (constant minus the sum of |other terms|).
  double lower_bound_on_box() const;
  int max_dimension() const;
};

/// One in-band harmonic: amplitude(x) * cos(2 pi h n / N + phase(x)).
/// Order 0 is the mean torque and ignores its phase.
struct HarmonicTerm {
  int order = 0;
  Polynomial amplitude;
  Polynomial phase;
};

/// Out-of-band content: weight * sin(frequency * (direction . x) + offset) *
/// cos(2 pi bin n / N + phase). Rough in x by construction.
struct OutOfBandTerm {
  int bin = 0;
  double weight = 0.0;
  std::vector<double> direction;
  double frequency = 0.0;
  double offset = 0.0;
  double phase = 0.0;
};

struct SyntheticModelConfig {
  std::size_t input_dim = 0;
  std::vector<HarmonicTerm> harmonics;  // ascending order
  std::vector<OutOfBandTerm> out_of_band;
  double noise_floor = 0.0;
  std::uint64_t seed = 0;

  std::vector<int> harmonic_orders() const;
  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

enum class NoiseVariant { band_limited, noisy };

/// Eleven harmonics {0,1,2,3,4,5,6,8,10,12,14} over the 20 default
/// parameters with strictly decreasing mean power, mean torque around 5 N m
/// and positive torque everywhere on the box. The noisy variant adds
/// out-of-band content with noise_floor = 0.02.
SyntheticModelConfig default_config(NoiseVariant variant = NoiseVariant::band_limited);

/// Drops harmonics and out-of-band terms that the given signal length cannot
/// represent (order >= N/2).
SyntheticModelConfig restrict_to_length(const SyntheticModelConfig& config, std::size_t n);

/// Smallest valid signal length for the config (even, >= 2 * max order + 2).
std::size_t minimum_signal_length(const SyntheticModelConfig& config);

TorqueSignal evaluate_torque(const SyntheticModelConfig& config, const ParameterSpace& space,
                             const DesignPoint& point, std::size_t n);

json to_json(const SyntheticModelConfig& config);
SyntheticModelConfig synthetic_config_from_json(const json& j);
std::string config_digest(const SyntheticModelConfig& config);

}  // namespace rom

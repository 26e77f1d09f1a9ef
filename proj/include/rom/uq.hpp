#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rom/io.hpp"
#include "rom/param_space.hpp"
#include "rom/surrogate.hpp"
#include "rom/synthetic_model.hpp"

namespace rom {

/// Maps a batch of design points to one signal row each.
using BatchEvaluator = std::function<Eigen::MatrixXd(const std::vector<DesignPoint>&)>;

BatchEvaluator synthetic_evaluator(const SyntheticModelConfig& config, const ParameterSpace& space,
                                   std::size_t n);
BatchEvaluator surrogate_evaluator(const Surrogate& surrogate);

struct McStatistics {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;  // divisor n - 1
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  double period_degrees = 30.0;
};

/// Running (count, mean, M2) per angle. Welford within a chunk, Chan et al.
/// pairwise merge across chunks.
struct MomentAccumulator {
  std::size_t count = 0;
  Eigen::VectorXd mean;
  Eigen::VectorXd m2;

  void add(const Eigen::Ref<const Eigen::VectorXd>& x);
  void merge(const MomentAccumulator& other);
};

inline constexpr std::size_t kDefaultMcSamples = 11000;

/// Samples `n_samples` uniform designs from `seed`, evaluates them in chunks of
/// `chunk` (in parallel) and accumulates per-angle moments in chunk order, so
/// the result does not depend on the thread count. An evaluator failure is
/// reported with the sample index and design point.
McStatistics monte_carlo(const BatchEvaluator& evaluator, const ParameterSpace& space,
                         std::size_t n_samples = kDefaultMcSamples, std::uint64_t seed = 1,
                         std::size_t chunk = 500);

struct UqComparison {
  Eigen::VectorXd ape_mean;
  Eigen::VectorXd ape_std;
  double signal_ape_mean = 0.0;
  double signal_ape_std = 0.0;
  double period_degrees = 30.0;
};

/// Per-angle |candidate - reference| / |reference| for the mean and the std.
/// Throws DataError when a reference entry is zero.
UqComparison compare_stats(const McStatistics& candidate, const McStatistics& reference);

json to_json(const McStatistics& stats);
McStatistics mc_statistics_from_json(const json& j);
std::string stats_csv(const McStatistics& stats);  // angle_deg,mean,std
json to_json(const UqComparison& comparison);
std::string comparison_csv(const UqComparison& comparison);  // angle_deg,ape_mean,ape_std

}  // namespace rom

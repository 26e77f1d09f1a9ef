#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rom/dataset.hpp"
#include "rom/surrogate.hpp"
#include "rom/synthetic_model.hpp"

namespace rom {

/// Training-size study: one dataset, a fixed validation block taken from its
/// last rows, and training sets taken from its first rows.
struct BenchmarkProfile {
  std::size_t m = 2000;
  std::size_t n = 120;
  std::size_t validation = 200;
  std::vector<std::size_t> training_sizes{600, 1200, 1800};
  NoiseVariant variant = NoiseVariant::noisy;
  std::uint64_t data_seed = 20240917;
  std::vector<ReductionKind> reductions{ReductionKind::dft, ReductionKind::pca, ReductionKind::none};
  std::vector<RsmKind> rsms{RsmKind::pce, RsmKind::fnn, RsmKind::gp};
  /// reduction, rsm and their hyperparameters; reduction/rsm are overridden per run.
  SurrogateConfig surrogate;

  /// Throws ConfigError unless every training size fits next to the validation block.
  void validate() const;
};

json to_json(const BenchmarkProfile& profile);
BenchmarkProfile benchmark_profile_from_json(const json& j, const BenchmarkProfile& base = {});

struct BenchmarkSplit {
  Dataset validation;
  Dataset pool;  // rows available for training, in order
};

Dataset benchmark_dataset(const BenchmarkProfile& profile);
BenchmarkSplit split_benchmark(const Dataset& dataset, const BenchmarkProfile& profile);

struct RunResult {
  ReductionKind reduction = ReductionKind::dft;
  RsmKind rsm = RsmKind::gp;
  std::size_t training_size = 0;
  EvaluationReport report;
  double seconds = 0.0;  // wall time; never written to report files

  std::string name() const;  // e.g. dft_gp_600
};

RunResult run_benchmark_case(const BenchmarkSplit& split, const BenchmarkProfile& profile,
                             ReductionKind reduction, RsmKind rsm, std::size_t training_size);

/// Every (reduction, rsm, training size) combination of the profile. When
/// `output_dir` is non-empty, writes <name>.json/.csv per run and summary.csv.
std::vector<RunResult> run_benchmark_matrix(const BenchmarkProfile& profile,
                                            const std::filesystem::path& output_dir = {});

/// reduction,rsm,m_t,signal_mape,max_mape,max_sdape
std::string benchmark_summary_csv(const std::vector<RunResult>& runs);

}  // namespace rom

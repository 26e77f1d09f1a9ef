#include "rom/benchmark.hpp"

#include <chrono>

#include "rom/errors.hpp"
#include "rom/log.hpp"

namespace rom {

void BenchmarkProfile::validate() const {
  if (validation < 1) throw ConfigError("benchmark: validation size must be positive");
  if (training_sizes.empty()) throw ConfigError("benchmark: no training sizes");
  for (auto mt : training_sizes) {
    if (mt < 2 || mt + validation > m) {
      throw ConfigError("benchmark: training size " + std::to_string(mt) + " plus validation size " +
                        std::to_string(validation) + " exceeds M = " + std::to_string(m));
    }
  }
  if (reductions.empty() || rsms.empty()) throw ConfigError("benchmark: empty reduction or RSM list");
}

json to_json(const BenchmarkProfile& p) {
  json reductions = json::array();
  for (auto r : p.reductions) reductions.push_back(to_string(r));
  json rsms = json::array();
  for (auto r : p.rsms) rsms.push_back(to_string(r));
  return json{{"m", p.m},
              {"n", p.n},
              {"validation", p.validation},
              {"training_sizes", p.training_sizes},
              {"variant", p.variant == NoiseVariant::noisy ? "noisy" : "band_limited"},
              {"data_seed", p.data_seed},
              {"reductions", reductions},
              {"rsms", rsms},
              {"surrogate", to_json(p.surrogate)}};
}

BenchmarkProfile benchmark_profile_from_json(const json& j, const BenchmarkProfile& base) {
  BenchmarkProfile p = base;
  try {
    if (j.contains("m")) p.m = j.at("m").get<std::size_t>();
    if (j.contains("n")) p.n = j.at("n").get<std::size_t>();
    if (j.contains("validation")) p.validation = j.at("validation").get<std::size_t>();
    if (j.contains("training_sizes")) p.training_sizes = j.at("training_sizes").get<std::vector<std::size_t>>();
    if (j.contains("variant")) {
      const auto v = j.at("variant").get<std::string>();
      if (v == "noisy") {
        p.variant = NoiseVariant::noisy;
      } else if (v == "band_limited") {
        p.variant = NoiseVariant::band_limited;
      } else {
        throw ConfigError("benchmark: unknown variant '" + v + "'");
      }
    }
    if (j.contains("data_seed")) p.data_seed = j.at("data_seed").get<std::uint64_t>();
    if (j.contains("reductions")) {
      p.reductions.clear();
      for (const auto& r : j.at("reductions")) p.reductions.push_back(parse_reduction_kind(r.get<std::string>()));
    }
    if (j.contains("rsms")) {
      p.rsms.clear();
      for (const auto& r : j.at("rsms")) p.rsms.push_back(parse_rsm_kind(r.get<std::string>()));
    }
    if (j.contains("surrogate")) p.surrogate = surrogate_config_from_json(j.at("surrogate"), p.surrogate);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid benchmark profile: ") + e.what());
  }
  return p;
}

Dataset benchmark_dataset(const BenchmarkProfile& profile) {
  profile.validate();
  return batch_generate(default_config(profile.variant), default_space(), profile.m, profile.n, profile.data_seed);
}

BenchmarkSplit split_benchmark(const Dataset& dataset, const BenchmarkProfile& profile) {
  profile.validate();
  if (dataset.size() != profile.m) throw DataError("benchmark: dataset size does not match the profile");
  return BenchmarkSplit{dataset.slice(profile.m - profile.validation, profile.m),
                        dataset.slice(0, profile.m - profile.validation)};
}

std::string RunResult::name() const {
  return std::string(to_string(reduction)) + "_" + std::string(to_string(rsm)) + "_" + std::to_string(training_size);
}

RunResult run_benchmark_case(const BenchmarkSplit& split, const BenchmarkProfile& profile,
                             ReductionKind reduction, RsmKind rsm, std::size_t training_size) {
  if (training_size > split.pool.size()) throw ConfigError("benchmark: training size exceeds the pool");
  SurrogateConfig config = profile.surrogate;
  config.reduction = reduction;
  config.rsm = rsm;
  const auto start = std::chrono::steady_clock::now();
  const Surrogate surrogate = train_surrogate(split.pool.slice(0, training_size), config);
  RunResult result{reduction, rsm, training_size, evaluate_surrogate(surrogate, split.validation), 0.0};
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  log_info(result.name() + ": signal MAPE " + format_double(result.report.signal_mape) + " in " +
           format_double(result.seconds) + " s");
  return result;
}

std::vector<RunResult> run_benchmark_matrix(const BenchmarkProfile& profile,
                                            const std::filesystem::path& output_dir) {
  const Dataset dataset = benchmark_dataset(profile);
  const BenchmarkSplit split = split_benchmark(dataset, profile);
  std::vector<RunResult> runs;
  for (auto reduction : profile.reductions) {
    for (auto rsm : profile.rsms) {
      for (auto mt : profile.training_sizes) {
        runs.push_back(run_benchmark_case(split, profile, reduction, rsm, mt));
        if (!output_dir.empty()) write_report(runs.back().report, output_dir / runs.back().name());
      }
    }
  }
  if (!output_dir.empty()) {
    write_text_file(output_dir / "summary.csv", benchmark_summary_csv(runs));
    write_json_file(output_dir / "profile.json", to_json(profile));
  }
  return runs;
}

std::string benchmark_summary_csv(const std::vector<RunResult>& runs) {
  std::string out = "reduction,rsm,m_t,signal_mape,max_mape,max_sdape\n";
  for (const auto& r : runs) {
    out += std::string(to_string(r.reduction)) + "," + std::string(to_string(r.rsm)) + "," +
           std::to_string(r.training_size) + "," + format_double(r.report.signal_mape) + "," +
           format_double(r.report.mape.maxCoeff()) + "," + format_double(r.report.sdape.maxCoeff()) + "\n";
  }
  return out;
}

}  // namespace rom

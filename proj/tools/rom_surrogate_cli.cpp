// rom-surrogate: dataset generation, reduction analysis, surrogate training,
// inference, evaluation, Monte Carlo UQ and the benchmark report.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rom/benchmark.hpp"
#include "rom/dataset.hpp"
#include "rom/errors.hpp"
#include "rom/io.hpp"
#include "rom/log.hpp"
#include "rom/parallel.hpp"
#include "rom/random.hpp"
#include "rom/spectral.hpp"
#include "rom/surrogate.hpp"
#include "rom/synthetic_model.hpp"
#include "rom/uq.hpp"

namespace fs = std::filesystem;
using namespace rom;

namespace {

/// Flag value when given on the command line, else config[key], else fallback.
template <typename T>
T pick(const CLI::Option* opt, const T& flag, const json& config, const char* key, const T& fallback) {
  if (opt != nullptr && opt->count() > 0) return flag;
  if (config.contains(key)) {
    try {
      return config.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
  }
  return fallback;
}

struct Common {
  std::string config_path;
  json config = json::object();
  std::string space_path;
  CLI::Option* space_opt = nullptr;

  void load() {
    if (!config_path.empty()) config = read_json_file(config_path);
    if (!config.is_object()) throw ConfigError("config file must hold a JSON object");
  }

  ParameterSpace space() const {
    const std::string path = pick<std::string>(space_opt, space_path, config, "space", "");
    return path.empty() ? default_space() : load_space(path);
  }
};

NoiseVariant parse_variant(const std::string& name) {
  if (name == "noisy") return NoiseVariant::noisy;
  if (name == "band_limited") return NoiseVariant::band_limited;
  throw ConfigError("unknown synthetic variant '" + name + "' (expected band_limited or noisy)");
}

SyntheticModelConfig synthetic_config(const json& config, const std::string& path, const CLI::Option* path_opt,
                                      const std::string& variant, const CLI::Option* variant_opt) {
  const std::string file = pick<std::string>(path_opt, path, config, "synthetic_config", "");
  if (!file.empty()) return synthetic_config_from_json(read_json_file(file));
  return default_config(parse_variant(pick<std::string>(variant_opt, variant, config, "variant", "noisy")));
}

void print_json(const json& j) { std::cout << dump_json(j); }

std::vector<DesignPoint> read_designs(const fs::path& path, const ParameterSpace& space) {
  const CsvTable table = read_csv(path);
  const std::size_t p = space.dimension();
  if (table.header.size() < p) throw DataError(path.string() + ": expected at least " + std::to_string(p) + " columns");
  for (std::size_t i = 0; i < p; ++i) {
    if (table.header[i] != "p" + std::to_string(i + 1)) {
      throw DataError(path.string() + ": column " + std::to_string(i + 1) + " should be p" + std::to_string(i + 1));
    }
  }
  std::vector<DesignPoint> points;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    try {
      points.emplace_back(space, std::vector<double>(table.rows[r].begin(), table.rows[r].begin() + static_cast<std::ptrdiff_t>(p)));
    } catch (const Error& e) {
      throw Error(e.kind(), path.string() + ": row " + std::to_string(r + 1) + ": " + e.what());
    }
  }
  if (points.empty()) throw DataError(path.string() + ": no designs");
  return points;
}

std::string signals_csv(const Eigen::MatrixXd& signals) {
  std::vector<std::string> header;
  for (Eigen::Index t = 0; t < signals.cols(); ++t) header.push_back("tau_" + std::to_string(t));
  std::vector<std::vector<double>> rows;
  for (Eigen::Index r = 0; r < signals.rows(); ++r) {
    rows.emplace_back(static_cast<std::size_t>(signals.cols()));
    for (Eigen::Index t = 0; t < signals.cols(); ++t) rows.back()[static_cast<std::size_t>(t)] = signals(r, t);
  }
  return to_csv(header, rows);
}

Dataset rows_of(const Dataset& d, std::size_t from, std::size_t to) {
  if (to == 0 || to > d.size()) to = d.size();
  if (from >= to) throw ConfigError("row range is empty");
  return d.slice(from, to);
}

int emit_error(ErrorKind kind, const std::string& message) {
  std::cerr << json{{"error", {{"kind", to_string(kind)}, {"message", message}}}}.dump() << '\n';
  return exit_code(kind);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced-order torque surrogates: DFT/PCA reduction with PCE, FNN or GP response surfaces"};
  app.require_subcommand(1);
  int threads = 0;
  bool verbose = false;
  bool quiet = false;
  app.add_option("--threads", threads, "Worker threads (default: logical cores; ROM_SURROGATE_THREADS wins)");
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");
  app.add_flag("-q,--quiet", quiet, "Suppress warnings");

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON config; flags override its keys")->check(CLI::ExistingFile);
  };
  std::vector<std::pair<CLI::App*, CLI::Option*>> space_opts;
  auto add_space = [&](CLI::App* sub) {
    space_opts.emplace_back(sub, sub->add_option("--space", common.space_path, "Parameter space JSON (default: built-in)"));
  };

  // generate
  auto* gen = app.add_subcommand("generate", "Sample designs and write a synthetic torque dataset CSV");
  add_common(gen);
  add_space(gen);
  std::size_t gen_m = 2000, gen_n = 120;
  std::uint64_t gen_seed = 20240917;
  std::string gen_out, gen_variant = "noisy", gen_synth;
  auto* gen_m_opt = gen->add_option("--m", gen_m, "Number of designs");
  auto* gen_n_opt = gen->add_option("--n", gen_n, "Samples per period");
  auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "Sampling seed");
  auto* gen_variant_opt = gen->add_option("--variant", gen_variant, "band_limited | noisy");
  auto* gen_synth_opt = gen->add_option("--synthetic-config", gen_synth, "Synthetic model JSON");
  auto* gen_out_opt = gen->add_option("--out", gen_out, "Output CSV path");

  // reduce-analyze
  auto* ra = app.add_subcommand("reduce-analyze", "Reconstruction MAE versus retained DFT components");
  add_common(ra);
  add_space(ra);
  std::string ra_data, ra_out;
  std::size_t ra_rmax = 0, ra_reduced_r = 0;
  std::vector<std::size_t> ra_worst{5, 11};
  auto* ra_data_opt = ra->add_option("--data", ra_data, "Dataset CSV");
  auto* ra_rmax_opt = ra->add_option("--r-max", ra_rmax, "Largest R (default N/2+1)");
  auto* ra_worst_opt = ra->add_option("--worst", ra_worst, "R values for worst-case reconstructions")->delimiter(',');
  auto* ra_reduced_opt = ra->add_option("--reduced-r", ra_reduced_r, "Also write the reduced dataset at this R");
  auto* ra_out_opt = ra->add_option("--out", ra_out, "Output directory");

  // train
  auto* tr = app.add_subcommand("train", "Train a surrogate bundle");
  add_common(tr);
  add_space(tr);
  std::string tr_data, tr_out, tr_reduction, tr_rsm;
  std::size_t tr_r = 11, tr_c = 21, tr_from = 0, tr_to = 0;
  std::uint64_t tr_seed = 1;
  auto* tr_data_opt = tr->add_option("--data", tr_data, "Training dataset CSV");
  auto* tr_reduction_opt = tr->add_option("--reduction", tr_reduction, "dft | pca | none");
  auto* tr_rsm_opt = tr->add_option("--rsm", tr_rsm, "pce | fnn | gp");
  auto* tr_r_opt = tr->add_option("--r", tr_r, "Retained DFT components");
  auto* tr_c_opt = tr->add_option("--c", tr_c, "Retained principal components");
  auto* tr_seed_opt = tr->add_option("--seed", tr_seed, "Training seed");
  auto* tr_from_opt = tr->add_option("--from", tr_from, "First training row");
  auto* tr_to_opt = tr->add_option("--to", tr_to, "One past the last training row (0 = end)");
  auto* tr_out_opt = tr->add_option("--out", tr_out, "Bundle directory");

  // predict
  auto* pr = app.add_subcommand("predict", "Infer torque signals for designs");
  add_common(pr);
  std::string pr_bundle, pr_designs, pr_out;
  auto* pr_bundle_opt = pr->add_option("--bundle", pr_bundle, "Surrogate bundle directory");
  auto* pr_designs_opt = pr->add_option("--designs", pr_designs, "CSV with columns p1..pP");
  auto* pr_out_opt = pr->add_option("--out", pr_out, "Output CSV (tau_0..)");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "APE/MAPE/SDAPE of a bundle on a validation dataset");
  add_common(ev);
  std::string ev_bundle, ev_data, ev_out;
  std::size_t ev_from = 0, ev_to = 0;
  bool ev_strict = false;
  auto* ev_bundle_opt = ev->add_option("--bundle", ev_bundle, "Surrogate bundle directory");
  auto* ev_data_opt = ev->add_option("--data", ev_data, "Validation dataset CSV");
  auto* ev_from_opt = ev->add_option("--from", ev_from, "First validation row");
  auto* ev_to_opt = ev->add_option("--to", ev_to, "One past the last validation row (0 = end)");
  ev->add_flag("--strict", ev_strict, "Use |tau| as the APE denominator");
  auto* ev_out_opt = ev->add_option("--out", ev_out, "Output directory");

  // uq
  auto* uq = app.add_subcommand("uq", "Monte Carlo mean/std per angle; compares a bundle with the synthetic truth");
  add_common(uq);
  add_space(uq);
  std::string uq_bundle, uq_out, uq_variant = "noisy", uq_synth;
  std::size_t uq_samples = kDefaultMcSamples, uq_n = 120;
  std::uint64_t uq_seed = 1;
  bool uq_crn = false;
  auto* uq_bundle_opt = uq->add_option("--bundle", uq_bundle, "Surrogate bundle (omit for truth only)");
  auto* uq_samples_opt = uq->add_option("--samples", uq_samples, "Monte Carlo samples");
  auto* uq_seed_opt = uq->add_option("--seed", uq_seed, "Sampling seed");
  auto* uq_n_opt = uq->add_option("--n", uq_n, "Samples per period for the synthetic truth");
  auto* uq_variant_opt = uq->add_option("--variant", uq_variant, "band_limited | noisy");
  auto* uq_synth_opt = uq->add_option("--synthetic-config", uq_synth, "Synthetic model JSON");
  uq->add_flag("--crn", uq_crn, "Reuse the candidate's design samples for the reference run");
  auto* uq_out_opt = uq->add_option("--out", uq_out, "Output directory");

  // report
  auto* rp = app.add_subcommand("report", "Run the reduction x RSM x training-size matrix");
  add_common(rp);
  std::string rp_out;
  auto* rp_out_opt = rp->add_option("--out", rp_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return emit_error(ErrorKind::usage, e.what());
  }

  if (quiet) set_log_level(LogLevel::quiet);
  if (verbose) set_log_level(LogLevel::info);
  if (const char* env = std::getenv("ROM_SURROGATE_THREADS"); env != nullptr && *env != '\0') {
    try {
      threads = std::stoi(env);
    } catch (const std::exception&) {
      return emit_error(ErrorKind::usage, "ROM_SURROGATE_THREADS must be an integer");
    }
  }
  if (threads < 0) return emit_error(ErrorKind::usage, "thread count must be nonnegative");
  if (threads > 0) set_thread_count(threads);

  for (auto& [sub, opt] : space_opts) {
    if (sub->parsed()) common.space_opt = opt;
  }

  try {
    common.load();
    const json& cfg = common.config;

    if (gen->parsed()) {
      const ParameterSpace space = common.space();
      const auto m = pick(gen_m_opt, gen_m, cfg, "m", std::size_t{2000});
      const auto n = pick(gen_n_opt, gen_n, cfg, "n", std::size_t{120});
      const auto seed = pick(gen_seed_opt, gen_seed, cfg, "seed", std::uint64_t{20240917});
      const auto out = pick<std::string>(gen_out_opt, gen_out, cfg, "out", "");
      if (out.empty()) throw ConfigError("generate: --out is required");
      if (m < 1) throw ConfigError("generate: --m must be at least 1");
      SyntheticModelConfig synth = synthetic_config(cfg, gen_synth, gen_synth_opt, gen_variant, gen_variant_opt);
      if (n < minimum_signal_length(synth)) {
        log_warning("N = " + std::to_string(n) + " cannot represent every configured harmonic; dropping orders >= N/2");
        synth = restrict_to_length(synth, n);
      }
      const Dataset dataset = batch_generate(synth, space, m, n, seed);
      const std::string csv = dataset_to_csv(dataset);
      write_text_file(out, csv);
      const json meta = dataset_metadata(dataset);
      write_json_file(out + ".meta.json", meta);
      print_json({{"m", m}, {"n", n}, {"seed", seed}, {"csv_sha256", meta.at("csv_sha256")},
                  {"config_digest", dataset.config_digest}, {"out", out}});
      return 0;
    }

    if (ra->parsed()) {
      const ParameterSpace space = common.space();
      const auto data = pick<std::string>(ra_data_opt, ra_data, cfg, "data", "");
      const auto out = pick<std::string>(ra_out_opt, ra_out, cfg, "out", "");
      if (data.empty() || out.empty()) throw ConfigError("reduce-analyze: --data and --out are required");
      const Dataset dataset = read_dataset(data, space);
      const std::size_t n = dataset.signal_length();
      const std::size_t full = n / 2 + 1;
      const auto r_max = pick(ra_rmax_opt, ra_rmax, cfg, "r_max", full);
      if (r_max < 1 || r_max > full) {
        throw ConfigError("reduce-analyze: r_max must lie in [1, " + std::to_string(full) + "]");
      }
      const auto worst = pick(ra_worst_opt, ra_worst, cfg, "worst", std::vector<std::size_t>{5, 11});
      const ComponentRanking ranking = rank_components(dataset.signals);
      std::vector<std::vector<double>> rows;
      for (std::size_t r = 1; r <= r_max; ++r) {
        const ReductionMap map = build_reduction(ranking, r);
        const double per_signal = reconstruction_mae(dataset.signals, map, MaeNormalization::per_signal);
        rows.push_back({static_cast<double>(r), per_signal, per_signal / static_cast<double>(n)});
      }
      write_text_file(fs::path(out) / "mae.csv", to_csv({"r", "mae_per_signal", "mae_per_element"}, rows));
      json worst_json = json::array();
      for (auto r : worst) {
        if (r < 1 || r > full) throw ConfigError("reduce-analyze: worst-case R out of range");
        const ReductionMap map = build_reduction(ranking, r);
        const Eigen::VectorXd errors = reconstruction_l1_errors(dataset.signals, map);
        Eigen::Index idx = 0;
        errors.maxCoeff(&idx);
        const Eigen::VectorXd truth = dataset.signals.row(idx).transpose();
        const TorqueSignal rec = reconstruct(map, reduce(map, std::span<const double>(truth.data(), n)));
        std::vector<std::vector<double>> sig;
        for (std::size_t t = 0; t < n; ++t) {
          sig.push_back({rec.angle_degrees(t), truth[static_cast<Eigen::Index>(t)], rec.values[static_cast<Eigen::Index>(t)]});
        }
        write_text_file(fs::path(out) / ("worst_r" + std::to_string(r) + ".csv"),
                        to_csv({"angle_deg", "truth", "reconstruction"}, sig));
        worst_json.push_back({{"r", r}, {"sample", idx}, {"l1_error", errors[idx]}});
      }
      json ranking_json{{"order", ranking.order}, {"avg_contribution", to_json(ranking.avg_contribution)}};
      write_json_file(fs::path(out) / "ranking.json", ranking_json);
      const auto reduced_r = pick(ra_reduced_opt, ra_reduced_r, cfg, "reduced_r", std::size_t{0});
      if (reduced_r > 0) {
        const ReductionMap map = build_reduction(ranking, reduced_r);
        write_text_file(fs::path(out) / ("reduced_r" + std::to_string(reduced_r) + ".csv"),
                        reduced_dataset_csv(dataset, map));
        write_json_file(fs::path(out) / ("reduction_r" + std::to_string(reduced_r) + ".json"), to_json(map));
      }
      print_json({{"m", dataset.size()}, {"n", n}, {"r_max", r_max}, {"worst", worst_json}, {"out", out}});
      return 0;
    }

    if (tr->parsed()) {
      const ParameterSpace space = common.space();
      const auto data = pick<std::string>(tr_data_opt, tr_data, cfg, "data", "");
      const auto out = pick<std::string>(tr_out_opt, tr_out, cfg, "out", "");
      if (data.empty() || out.empty()) throw ConfigError("train: --data and --out are required");
      SurrogateConfig sc = surrogate_config_from_json(cfg.value("surrogate", json::object()));
      if (tr_reduction_opt->count() > 0) sc.reduction = parse_reduction_kind(tr_reduction);
      if (tr_rsm_opt->count() > 0) sc.rsm = parse_rsm_kind(tr_rsm);
      if (tr_r_opt->count() > 0) sc.dft_components = tr_r;
      if (tr_c_opt->count() > 0) sc.pca_components = tr_c;
      if (tr_seed_opt->count() > 0) sc.seed = tr_seed;
      const auto from = pick(tr_from_opt, tr_from, cfg, "from", std::size_t{0});
      const auto to = pick(tr_to_opt, tr_to, cfg, "to", std::size_t{0});
      const Dataset dataset = rows_of(read_dataset(data, space), from, to);
      Surrogate s = train_surrogate(dataset, sc);
      s.metadata["dataset_csv"] = data;
      s.metadata["rows"] = {from, from + dataset.size()};
      save_surrogate(s, out);
      print_json({{"reduction", to_string(s.reduction_kind())}, {"rsm", to_string(s.rsm_kind())},
                  {"training_size", dataset.size()}, {"reduced_dimension", s.reduced_dimension()}, {"out", out}});
      return 0;
    }

    if (pr->parsed()) {
      const auto bundle = pick<std::string>(pr_bundle_opt, pr_bundle, cfg, "bundle", "");
      const auto designs = pick<std::string>(pr_designs_opt, pr_designs, cfg, "designs", "");
      const auto out = pick<std::string>(pr_out_opt, pr_out, cfg, "out", "");
      if (bundle.empty() || designs.empty() || out.empty()) {
        throw ConfigError("predict: --bundle, --designs and --out are required");
      }
      const Surrogate s = load_surrogate(bundle);
      const Eigen::MatrixXd signals = infer_signals(s, read_designs(designs, s.space));
      write_text_file(out, signals_csv(signals));
      print_json({{"designs", signals.rows()}, {"n", signals.cols()}, {"out", out}});
      return 0;
    }

    if (ev->parsed()) {
      const auto bundle = pick<std::string>(ev_bundle_opt, ev_bundle, cfg, "bundle", "");
      const auto data = pick<std::string>(ev_data_opt, ev_data, cfg, "data", "");
      const auto out = pick<std::string>(ev_out_opt, ev_out, cfg, "out", "");
      if (bundle.empty() || data.empty() || out.empty()) {
        throw ConfigError("evaluate: --bundle, --data and --out are required");
      }
      const Surrogate s = load_surrogate(bundle);
      const auto from = pick(ev_from_opt, ev_from, cfg, "from", std::size_t{0});
      const auto to = pick(ev_to_opt, ev_to, cfg, "to", std::size_t{0});
      const Dataset validation = rows_of(read_dataset(data, s.space), from, to);
      const bool strict = ev_strict || cfg.value("strict", false);
      const EvaluationReport report = evaluate_surrogate(s, validation, strict);
      write_report(report, fs::path(out) / "report");
      print_json({{"samples", report.samples}, {"signal_mape", report.signal_mape},
                  {"worst_sample", report.worst_sample}, {"out", out}});
      return 0;
    }

    if (uq->parsed()) {
      const auto out = pick<std::string>(uq_out_opt, uq_out, cfg, "out", "");
      if (out.empty()) throw ConfigError("uq: --out is required");
      const auto bundle = pick<std::string>(uq_bundle_opt, uq_bundle, cfg, "bundle", "");
      const auto samples = pick(uq_samples_opt, uq_samples, cfg, "samples", kDefaultMcSamples);
      const auto seed = pick(uq_seed_opt, uq_seed, cfg, "seed", std::uint64_t{1});
      const bool crn = uq_crn || cfg.value("crn", false);
      SyntheticModelConfig synth = synthetic_config(cfg, uq_synth, uq_synth_opt, uq_variant, uq_variant_opt);
      std::optional<Surrogate> s;
      ParameterSpace space = common.space();
      std::size_t n = pick(uq_n_opt, uq_n, cfg, "n", std::size_t{120});
      if (!bundle.empty()) {
        s = load_surrogate(bundle);
        space = s->space;
        n = s->signal_length;
      }
      const McStatistics truth =
          monte_carlo(synthetic_evaluator(synth, space, n), space, samples, s && !crn ? derive_seed(seed, 1) : seed);
      json summary{{"samples", samples}, {"seed", seed}, {"crn", crn}, {"out", out}};
      if (s) {
        const McStatistics cand = monte_carlo(surrogate_evaluator(*s), space, samples, seed);
        const UqComparison cmp = compare_stats(cand, truth);
        write_json_file(fs::path(out) / "stats.json", to_json(cand));
        write_text_file(fs::path(out) / "stats.csv", stats_csv(cand));
        write_json_file(fs::path(out) / "reference.json", to_json(truth));
        write_text_file(fs::path(out) / "reference.csv", stats_csv(truth));
        write_json_file(fs::path(out) / "comparison.json", to_json(cmp));
        write_text_file(fs::path(out) / "comparison.csv", comparison_csv(cmp));
        summary["signal_ape_mean"] = cmp.signal_ape_mean;
        summary["signal_ape_std"] = cmp.signal_ape_std;
      } else {
        write_json_file(fs::path(out) / "stats.json", to_json(truth));
        write_text_file(fs::path(out) / "stats.csv", stats_csv(truth));
      }
      print_json(summary);
      return 0;
    }

    if (rp->parsed()) {
      const auto out = pick<std::string>(rp_out_opt, rp_out, cfg, "out", "");
      if (out.empty()) throw ConfigError("report: --out is required");
      const BenchmarkProfile profile = benchmark_profile_from_json(cfg.value("benchmark", cfg));
      const auto runs = run_benchmark_matrix(profile, out);
      json list = json::array();
      for (const auto& r : runs) list.push_back({{"run", r.name()}, {"signal_mape", r.report.signal_mape}});
      print_json({{"runs", list}, {"out", out}});
      return 0;
    }
  } catch (const Error& e) {
    return emit_error(e.kind(), e.what());
  } catch (const std::bad_alloc&) {
    return emit_error(ErrorKind::numerical, "out of memory");
  }
  return emit_error(ErrorKind::usage, "no subcommand");
}

#include "rom/surrogate.hpp"

#include <cmath>
#include <limits>

#include "rom/errors.hpp"
#include "rom/parallel.hpp"
#include "rom/random.hpp"

namespace rom {
namespace {

constexpr std::size_t kChunkRows = 256;
constexpr int kBundleFormat = 1;

json number_or_inf(double v) { return std::isfinite(v) ? json(v) : json("inf"); }

double read_number_or_inf(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw ConfigError("expected a number or \"inf\", got \"" + j.get<std::string>() + "\"");
  }
  return j.get<double>();
}

template <typename T>
void overlay(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

/// Evaluates fn on fixed-size row chunks in parallel; chunking does not depend
/// on the thread count.
template <typename Fn>
Eigen::MatrixXd chunked_rows(Eigen::Index rows, Eigen::Index cols, Fn&& fn) {
  Eigen::MatrixXd out(rows, cols);
  const auto chunks = static_cast<std::size_t>((rows + static_cast<Eigen::Index>(kChunkRows) - 1) /
                                               static_cast<Eigen::Index>(kChunkRows));
  parallel_for(chunks, [&](std::size_t c) {
    const auto begin = static_cast<Eigen::Index>(c * kChunkRows);
    const Eigen::Index count = std::min<Eigen::Index>(static_cast<Eigen::Index>(kChunkRows), rows - begin);
    out.middleRows(begin, count) = fn(begin, count);
  });
  return out;
}

}  // namespace

std::string_view to_string(ReductionKind kind) noexcept {
  switch (kind) {
    case ReductionKind::dft: return "dft";
    case ReductionKind::pca: return "pca";
    case ReductionKind::none: return "none";
  }
  return "unknown";
}

std::string_view to_string(RsmKind kind) noexcept {
  switch (kind) {
    case RsmKind::pce: return "pce";
    case RsmKind::fnn: return "fnn";
    case RsmKind::gp: return "gp";
  }
  return "unknown";
}

ReductionKind parse_reduction_kind(std::string_view name) {
  if (name == "dft") return ReductionKind::dft;
  if (name == "pca") return ReductionKind::pca;
  if (name == "none") return ReductionKind::none;
  throw ConfigError("unknown reduction kind '" + std::string(name) + "' (expected dft, pca or none)");
}

RsmKind parse_rsm_kind(std::string_view name) {
  if (name == "pce") return RsmKind::pce;
  if (name == "fnn") return RsmKind::fnn;
  if (name == "gp") return RsmKind::gp;
  throw ConfigError("unknown RSM kind '" + std::string(name) + "' (expected pce, fnn or gp)");
}

json to_json(const SurrogateConfig& c) {
  return json{
      {"reduction", to_string(c.reduction)},
      {"dft_components", c.dft_components},
      {"pca_components", c.pca_components},
      {"rsm", to_string(c.rsm)},
      {"seed", c.seed},
      {"pce",
       {{"min_degree", c.pce.min_degree},
        {"max_degree", c.pce.max_degree},
        {"q", c.pce.q},
        {"target_loo", number_or_inf(c.pce.target_loo)},
        {"basis_cap", c.pce.basis_cap},
        {"max_active", c.pce.max_active},
        {"patience", c.pce.patience}}},
      {"fnn",
       {{"hidden", c.fnn_hidden},
        {"epochs", c.fnn.epochs},
        {"batch_size", c.fnn.batch_size},
        {"learning_rate", c.fnn.learning_rate},
        {"decay_factor", c.fnn.decay_factor},
        {"decay_every", c.fnn.decay_every}}},
      {"gp",
       {{"budget", c.gp.budget},
        {"sigma0", c.gp.sigma0},
        {"lengthscale_min", c.gp.lengthscale_min},
        {"lengthscale_max", c.gp.lengthscale_max},
        {"variance_min", c.gp.variance_min},
        {"variance_max", c.gp.variance_max},
        {"jitter", c.gp.jitter},
        {"subset", c.gp.subset}}},
  };
}

SurrogateConfig surrogate_config_from_json(const json& j, const SurrogateConfig& base) {
  SurrogateConfig c = base;
  try {
    if (j.contains("reduction")) c.reduction = parse_reduction_kind(j.at("reduction").get<std::string>());
    if (j.contains("rsm")) c.rsm = parse_rsm_kind(j.at("rsm").get<std::string>());
    overlay(j, "dft_components", c.dft_components);
    overlay(j, "pca_components", c.pca_components);
    overlay(j, "seed", c.seed);
    if (j.contains("pce")) {
      const json& p = j.at("pce");
      overlay(p, "min_degree", c.pce.min_degree);
      overlay(p, "max_degree", c.pce.max_degree);
      overlay(p, "q", c.pce.q);
      if (p.contains("target_loo")) c.pce.target_loo = read_number_or_inf(p.at("target_loo"));
      overlay(p, "basis_cap", c.pce.basis_cap);
      overlay(p, "max_active", c.pce.max_active);
      overlay(p, "patience", c.pce.patience);
    }
    if (j.contains("fnn")) {
      const json& f = j.at("fnn");
      overlay(f, "hidden", c.fnn_hidden);
      overlay(f, "epochs", c.fnn.epochs);
      overlay(f, "batch_size", c.fnn.batch_size);
      overlay(f, "learning_rate", c.fnn.learning_rate);
      overlay(f, "decay_factor", c.fnn.decay_factor);
      overlay(f, "decay_every", c.fnn.decay_every);
    }
    if (j.contains("gp")) {
      const json& g = j.at("gp");
      overlay(g, "budget", c.gp.budget);
      overlay(g, "sigma0", c.gp.sigma0);
      overlay(g, "lengthscale_min", c.gp.lengthscale_min);
      overlay(g, "lengthscale_max", c.gp.lengthscale_max);
      overlay(g, "variance_min", c.gp.variance_min);
      overlay(g, "variance_max", c.gp.variance_max);
      overlay(g, "jitter", c.gp.jitter);
      overlay(g, "subset", c.gp.subset);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid surrogate configuration: ") + e.what());
  }
  return c;
}

ReductionKind Surrogate::reduction_kind() const noexcept {
  if (std::holds_alternative<ReductionMap>(reduction)) return ReductionKind::dft;
  if (std::holds_alternative<PcaModel>(reduction)) return ReductionKind::pca;
  return ReductionKind::none;
}

RsmKind Surrogate::rsm_kind() const noexcept {
  if (std::holds_alternative<PceModel>(rsm)) return RsmKind::pce;
  if (std::holds_alternative<FnnModel>(rsm)) return RsmKind::fnn;
  return RsmKind::gp;
}

std::size_t Surrogate::reduced_dimension() const {
  if (const auto* map = std::get_if<ReductionMap>(&reduction)) return map->real_dimension();
  if (const auto* pca = std::get_if<PcaModel>(&reduction)) return pca->retained();
  return signal_length;
}

Eigen::MatrixXd reduce_signals(const Reduction& reduction, const Eigen::MatrixXd& signals) {
  if (const auto* map = std::get_if<ReductionMap>(&reduction)) {
    if (static_cast<std::size_t>(signals.cols()) != map->signal_length()) {
      throw DataError("signal length does not match the reduction map");
    }
    Eigen::MatrixXd out(signals.rows(), static_cast<Eigen::Index>(map->real_dimension()));
    parallel_for(static_cast<std::size_t>(signals.rows()), [&](std::size_t i) {
      const Eigen::VectorXd row = signals.row(static_cast<Eigen::Index>(i)).transpose();
      out.row(static_cast<Eigen::Index>(i)) =
          flatten(*map, reduce(*map, std::span<const double>(row.data(), static_cast<std::size_t>(row.size())))).transpose();
    });
    return out;
  }
  if (const auto* pca = std::get_if<PcaModel>(&reduction)) {
    if (signals.cols() != pca->mean.size()) throw DataError("signal length does not match the PCA model");
    return (signals.rowwise() - pca->mean.transpose()) * pca->components.transpose();
  }
  return signals;
}

Eigen::MatrixXd expand_outputs(const Reduction& reduction, const Eigen::MatrixXd& outputs) {
  if (const auto* map = std::get_if<ReductionMap>(&reduction)) {
    if (static_cast<std::size_t>(outputs.cols()) != map->real_dimension()) {
      throw DataError("reduced width does not match the reduction map");
    }
    Eigen::MatrixXd out(outputs.rows(), static_cast<Eigen::Index>(map->signal_length()));
    for (Eigen::Index i = 0; i < outputs.rows(); ++i) {
      out.row(i) = reconstruct(*map, unflatten(*map, outputs.row(i).transpose())).values.transpose();
    }
    return out;
  }
  if (const auto* pca = std::get_if<PcaModel>(&reduction)) {
    if (static_cast<std::size_t>(outputs.cols()) != pca->retained()) {
      throw DataError("reduced width does not match the PCA model");
    }
    Eigen::MatrixXd out = outputs * pca->components;
    out.rowwise() += pca->mean.transpose();
    return out;
  }
  return outputs;
}

Surrogate train_surrogate(const Dataset& training, const SurrogateConfig& config) {
  if (training.size() == 0) throw DataError("training dataset is empty");
  Surrogate s{training.space, training.signal_length(), std::monostate{}, PceModel{}, json::object()};
  try {
    switch (config.reduction) {
      case ReductionKind::dft:
        s.reduction = build_reduction(rank_components(training.signals), config.dft_components);
        break;
      case ReductionKind::pca:
        s.reduction = fit_pca(training.signals, config.pca_components);
        break;
      case ReductionKind::none:
        break;
    }
  } catch (const Error& e) {
    rethrow_with_context(e, std::string("reduction ") + std::string(to_string(config.reduction)));
  }

  const Eigen::MatrixXd x = training.normalized_inputs();
  const Eigen::MatrixXd y = reduce_signals(s.reduction, training.signals);
  try {
    switch (config.rsm) {
      case RsmKind::pce:
        s.rsm = fit_lar_adaptive(x, y, config.pce);
        break;
      case RsmKind::fnn: {
        FnnArchitecture arch{static_cast<std::size_t>(x.cols()), config.fnn_hidden,
                             static_cast<std::size_t>(y.cols())};
        FnnTrainingConfig fc = config.fnn;
        fc.seed = derive_seed(config.seed, 11);
        s.rsm = fnn_train(x, y, arch, fc).model;
        break;
      }
      case RsmKind::gp: {
        GpTrainOptions go = config.gp;
        go.seed = derive_seed(config.seed, 12);
        go.keep_factors = false;
        s.rsm = gp_train(x, y, go);
        break;
      }
    }
  } catch (const Error& e) {
    rethrow_with_context(e, std::string("RSM ") + std::string(to_string(config.rsm)));
  }
  s.metadata = json{{"training_size", training.size()},
                    {"dataset_seed", training.seed},
                    {"dataset_config_digest", training.config_digest},
                    {"config", to_json(config)}};
  return s;
}

Eigen::MatrixXd predict_reduced(const Surrogate& s, const Eigen::MatrixXd& normalized) {
  if (static_cast<std::size_t>(normalized.cols()) != s.space.dimension()) {
    throw DataError("expected " + std::to_string(s.space.dimension()) + " normalized inputs");
  }
  const auto width = static_cast<Eigen::Index>(s.reduced_dimension());
  return chunked_rows(normalized.rows(), width, [&](Eigen::Index begin, Eigen::Index count) -> Eigen::MatrixXd {
    const Eigen::MatrixXd block = normalized.middleRows(begin, count);
    if (const auto* pce = std::get_if<PceModel>(&s.rsm)) return pce_predict(*pce, block);
    if (const auto* fnn = std::get_if<FnnModel>(&s.rsm)) return fnn_predict(*fnn, block);
    const auto& gps = std::get<std::vector<GpModel>>(s.rsm);
    Eigen::MatrixXd out(count, static_cast<Eigen::Index>(gps.size()));
    for (std::size_t d = 0; d < gps.size(); ++d) out.col(static_cast<Eigen::Index>(d)) = gp_predict_mean(gps[d], block);
    return out;
  });
}

Eigen::MatrixXd infer_signals(const Surrogate& s, const std::vector<DesignPoint>& points) {
  for (const auto& p : points) s.space.validate(p.values());
  const Eigen::MatrixXd reduced = predict_reduced(s, normalize_all(s.space, points));
  return chunked_rows(reduced.rows(), static_cast<Eigen::Index>(s.signal_length),
                      [&](Eigen::Index begin, Eigen::Index count) -> Eigen::MatrixXd {
                        return expand_outputs(s.reduction, reduced.middleRows(begin, count));
                      });
}

TorqueSignal infer_torque(const Surrogate& s, const DesignPoint& point) {
  return TorqueSignal{infer_signals(s, {point}).row(0).transpose()};
}

EvaluationReport evaluate_predictions(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& predicted,
                                      bool strict) {
  if (truth.rows() == 0) throw DataError("evaluation needs at least one validation sample");
  if (truth.rows() != predicted.rows() || truth.cols() != predicted.cols()) {
    throw DataError("predicted and true signals have different shapes");
  }
  const Eigen::Index m = truth.rows();
  Eigen::MatrixXd ape(m, truth.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index t = 0; t < truth.cols(); ++t) {
      const double tau = truth(i, t);
      if (!(std::abs(tau) >= 1e-12)) {
        throw DataError("relative error undefined: true torque of sample " + std::to_string(i) +
                        " at angle index " + std::to_string(t) + " is " + format_double(tau));
      }
      ape(i, t) = std::abs(tau - predicted(i, t)) / (strict ? std::abs(tau) : tau);
    }
  }
  EvaluationReport r;
  r.samples = static_cast<std::size_t>(m);
  r.mape = ape.colwise().mean().transpose();
  r.sdape = Eigen::VectorXd::Zero(truth.cols());
  if (m > 1) {
    r.sdape = ((ape.rowwise() - r.mape.transpose()).colwise().squaredNorm() / static_cast<double>(m - 1))
                  .cwiseSqrt()
                  .transpose();
  }
  r.signal_mape = r.mape.mean();
  const Eigen::VectorXd per_sample = ape.rowwise().mean();
  Eigen::Index worst = 0;
  for (Eigen::Index i = 1; i < m; ++i) {
    if (per_sample[i] > per_sample[worst]) worst = i;
  }
  r.worst_sample = static_cast<std::size_t>(worst);
  r.worst_sample_mape = per_sample[worst];
  r.worst_predicted = predicted.row(worst).transpose();
  r.worst_truth = truth.row(worst).transpose();
  return r;
}

EvaluationReport evaluate_surrogate(const Surrogate& s, const Dataset& validation, bool strict) {
  if (validation.signal_length() != s.signal_length) {
    throw DataError("validation signal length " + std::to_string(validation.signal_length()) +
                    " does not match the surrogate's " + std::to_string(s.signal_length));
  }
  return evaluate_predictions(validation.signals, infer_signals(s, validation.points), strict);
}

json to_json(const EvaluationReport& r) {
  return json{{"samples", r.samples},
              {"signal_mape", r.signal_mape},
              {"mape", to_json(r.mape)},
              {"sdape", to_json(r.sdape)},
              {"worst",
               {{"sample", r.worst_sample},
                {"mape", r.worst_sample_mape},
                {"predicted", to_json(r.worst_predicted)},
                {"truth", to_json(r.worst_truth)}}}};
}

std::string report_csv(const EvaluationReport& r) {
  std::vector<std::vector<double>> rows;
  const auto n = static_cast<double>(r.mape.size());
  for (Eigen::Index t = 0; t < r.mape.size(); ++t) {
    rows.push_back({r.period_degrees * static_cast<double>(t) / n, r.mape[t], r.sdape[t]});
  }
  return to_csv({"angle_deg", "mape", "sdape"}, rows);
}

void write_report(const EvaluationReport& report, const std::filesystem::path& stem) {
  write_json_file(std::filesystem::path(stem.string() + ".json"), to_json(report));
  write_text_file(std::filesystem::path(stem.string() + ".csv"), report_csv(report));
}

std::string reduced_dataset_csv(const Dataset& dataset, const ReductionMap& map) {
  std::vector<std::string> header;
  for (std::size_t i = 0; i < dataset.space.dimension(); ++i) header.push_back("p" + std::to_string(i + 1));
  const std::size_t nyquist = map.signal_length() % 2 == 0 ? map.signal_length() / 2 : map.signal_length();
  for (auto k : map.indices()) {
    header.push_back("c" + std::to_string(k) + "_re");
    if (k != 0 && k != nyquist) header.push_back("c" + std::to_string(k) + "_im");
  }
  const Eigen::MatrixXd reduced = reduce_signals(map, dataset.signals);
  std::vector<std::vector<double>> rows;
  for (std::size_t m = 0; m < dataset.size(); ++m) {
    std::vector<double> row = dataset.points[m].values();
    for (Eigen::Index j = 0; j < reduced.cols(); ++j) row.push_back(reduced(static_cast<Eigen::Index>(m), j));
    rows.push_back(std::move(row));
  }
  return to_csv(header, rows);
}

void save_surrogate(const Surrogate& s, const std::filesystem::path& directory) {
  json reduction;
  if (const auto* map = std::get_if<ReductionMap>(&s.reduction)) {
    reduction = to_json(*map);
  } else if (const auto* pca = std::get_if<PcaModel>(&s.reduction)) {
    reduction = to_json(*pca);
  } else {
    reduction = json{{"n", s.signal_length}};
  }
  json model;
  if (const auto* pce = std::get_if<PceModel>(&s.rsm)) {
    model = to_json(*pce);
  } else if (const auto* fnn = std::get_if<FnnModel>(&s.rsm)) {
    model = to_json(*fnn);
  } else {
    model = gp_models_to_json(std::get<std::vector<GpModel>>(s.rsm));
  }
  const std::string reduction_text = dump_json(reduction);
  const std::string model_text = dump_json(model);
  json manifest{{"format", kBundleFormat},
                {"reduction", to_string(s.reduction_kind())},
                {"rsm", to_string(s.rsm_kind())},
                {"n", s.signal_length},
                {"reduced_dimension", s.reduced_dimension()},
                {"space", to_json(s.space)},
                {"metadata", s.metadata},
                {"sha256", {{"reduction.json", sha256_hex(reduction_text)}, {"model.json", sha256_hex(model_text)}}}};
  if (const auto* map = std::get_if<ReductionMap>(&s.reduction)) manifest["r"] = map->retained();
  if (const auto* pca = std::get_if<PcaModel>(&s.reduction)) manifest["c"] = pca->retained();
  write_text_file(directory / "reduction.json", reduction_text);
  write_text_file(directory / "model.json", model_text);
  write_json_file(directory / "manifest.json", manifest);
}

Surrogate load_surrogate(const std::filesystem::path& directory) {
  const json manifest = read_json_file(directory / "manifest.json");
  try {
    if (manifest.at("format").get<int>() != kBundleFormat) {
      throw DataError("unsupported surrogate bundle format");
    }
    const std::string reduction_text = read_text_file(directory / "reduction.json");
    const std::string model_text = read_text_file(directory / "model.json");
    if (sha256_hex(reduction_text) != manifest.at("sha256").at("reduction.json").get<std::string>() ||
        sha256_hex(model_text) != manifest.at("sha256").at("model.json").get<std::string>()) {
      throw DataError(directory.string() + ": bundle files do not match the manifest digests");
    }
    const json reduction = json::parse(reduction_text);
    const json model = json::parse(model_text);
    Surrogate s{space_from_json(manifest.at("space")), manifest.at("n").get<std::size_t>(), std::monostate{},
                PceModel{}, manifest.value("metadata", json::object())};
    switch (parse_reduction_kind(manifest.at("reduction").get<std::string>())) {
      case ReductionKind::dft: s.reduction = reduction_from_json(reduction); break;
      case ReductionKind::pca: s.reduction = pca_from_json(reduction); break;
      case ReductionKind::none: break;
    }
    switch (parse_rsm_kind(manifest.at("rsm").get<std::string>())) {
      case RsmKind::pce: s.rsm = pce_from_json(model); break;
      case RsmKind::fnn: s.rsm = fnn_from_json(model); break;
      case RsmKind::gp: s.rsm = gp_models_from_json(model); break;
    }
    if (s.reduced_dimension() != manifest.at("reduced_dimension").get<std::size_t>()) {
      throw DataError("bundle reduction width does not match the manifest");
    }
    return s;
  } catch (const json::exception& e) {
    throw DataError(directory.string() + ": invalid surrogate bundle: " + e.what());
  }
}

}  // namespace rom

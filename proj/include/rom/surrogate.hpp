#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "rom/dataset.hpp"
#include "rom/fnn.hpp"
#include "rom/gp.hpp"
#include "rom/io.hpp"
#include "rom/param_space.hpp"
#include "rom/pca.hpp"
#include "rom/pce.hpp"
#include "rom/spectral.hpp"

namespace rom {

enum class ReductionKind { dft, pca, none };
enum class RsmKind { pce, fnn, gp };

std::string_view to_string(ReductionKind kind) noexcept;
std::string_view to_string(RsmKind kind) noexcept;
/// Throw ConfigError for unknown names.
ReductionKind parse_reduction_kind(std::string_view name);
RsmKind parse_rsm_kind(std::string_view name);

struct SurrogateConfig {
  ReductionKind reduction = ReductionKind::dft;
  std::size_t dft_components = 11;  // R
  std::size_t pca_components = 21;  // C
  RsmKind rsm = RsmKind::gp;
  LarOptions pce;
  std::vector<std::size_t> fnn_hidden{45, 60, 80, 25};
  FnnTrainingConfig fnn;
  GpTrainOptions gp;
  /// Seeds the FNN initialization/shuffling and the CMA-ES streams.
  std::uint64_t seed = 1;
};

json to_json(const SurrogateConfig& config);
/// Keys missing from `j` keep their value in `base`.
SurrogateConfig surrogate_config_from_json(const json& j, const SurrogateConfig& base = {});

using Reduction = std::variant<std::monostate, ReductionMap, PcaModel>;
using Rsm = std::variant<PceModel, FnnModel, std::vector<GpModel>>;

/// Reduction map plus response surface, trained together.
struct Surrogate {
  ParameterSpace space;
  std::size_t signal_length = 0;
  Reduction reduction;
  Rsm rsm;
  json metadata = json::object();

  ReductionKind reduction_kind() const noexcept;
  RsmKind rsm_kind() const noexcept;
  /// Width of the RSM output: 2R-1 style real count for DFT, C for PCA, N otherwise.
  std::size_t reduced_dimension() const;
};

/// Targets for the RSM: one reduced row per signal row.
Eigen::MatrixXd reduce_signals(const Reduction& reduction, const Eigen::MatrixXd& signals);
/// Inverse of reduce_signals, row by row.
Eigen::MatrixXd expand_outputs(const Reduction& reduction, const Eigen::MatrixXd& outputs);

/// Fits the reduction on `training` only, then the RSM from normalized inputs
/// to the reduced rows.
Surrogate train_surrogate(const Dataset& training, const SurrogateConfig& config);

/// RSM outputs for rows of normalized inputs (M x D).
Eigen::MatrixXd predict_reduced(const Surrogate& surrogate, const Eigen::MatrixXd& normalized);
/// Inferred signals (M x N) for design points.
Eigen::MatrixXd infer_signals(const Surrogate& surrogate, const std::vector<DesignPoint>& points);
TorqueSignal infer_torque(const Surrogate& surrogate, const DesignPoint& point);

struct EvaluationReport {
  Eigen::VectorXd mape;   // per angle
  Eigen::VectorXd sdape;  // per angle, divisor M_v - 1
  double signal_mape = 0.0;
  std::size_t samples = 0;
  std::size_t worst_sample = 0;
  double worst_sample_mape = 0.0;
  Eigen::VectorXd worst_predicted;
  Eigen::VectorXd worst_truth;
  double period_degrees = 30.0;
};

/// APE = |truth - predicted| / truth. With `strict` the denominator is |truth|.
/// Throws DataError when |truth| < 1e-12 anywhere.
EvaluationReport evaluate_predictions(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& predicted,
                                      bool strict = false);
EvaluationReport evaluate_surrogate(const Surrogate& surrogate, const Dataset& validation,
                                    bool strict = false);

json to_json(const EvaluationReport& report);
/// angle_deg,mape,sdape
std::string report_csv(const EvaluationReport& report);
/// Writes <stem>.json and <stem>.csv.
void write_report(const EvaluationReport& report, const std::filesystem::path& stem);

/// p1..pP, c0_re, c{k}_re, c{k}_im, ... in ascending bin order.
std::string reduced_dataset_csv(const Dataset& dataset, const ReductionMap& map);

/// Bundle directory: manifest.json, reduction.json, model.json.
void save_surrogate(const Surrogate& surrogate, const std::filesystem::path& directory);
Surrogate load_surrogate(const std::filesystem::path& directory);

}  // namespace rom

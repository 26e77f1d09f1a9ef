#include <doctest.h>

#include <filesystem>

#include "../oracles.hpp"
#include "rom/errors.hpp"
#include "rom/surrogate.hpp"
#include "rom/synthetic_model.hpp"
#include "util.hpp"

using namespace rom;
namespace fs = std::filesystem;

TEST_CASE("evaluation statistics match a direct computation") {
  Eigen::MatrixXd truth(3, 2), pred(3, 2);
  truth << 2, 4, 1, 5, 4, 2;
  pred << 2.2, 4, 0.5, 5.5, 4, 2.1;
  const EvaluationReport r = evaluate_predictions(truth, pred);
  // APE rows: [0.1, 0], [0.5, 0.1], [0, 0.05]
  CHECK(r.mape[0] == doctest::Approx(0.2));
  CHECK(r.mape[1] == doctest::Approx(0.05));
  CHECK(r.sdape[0] == doctest::Approx(std::sqrt((0.01 + 0.09 + 0.04) / 2)));
  CHECK(r.signal_mape == doctest::Approx(0.125));
  CHECK(r.worst_sample == 1);
  CHECK(r.worst_sample_mape == doctest::Approx(0.3));

  Eigen::MatrixXd neg = truth;
  neg(0, 0) = -2;
  CHECK(evaluate_predictions(neg, pred).mape[0] < evaluate_predictions(neg, pred, true).mape[0]);
  neg(1, 1) = 0.0;
  CHECK_THROWS_AS(evaluate_predictions(neg, pred), DataError);
  CHECK_THROWS_AS(evaluate_predictions(truth, pred.leftCols(1)), DataError);
}

TEST_CASE("reduce_signals and expand_outputs are inverse on retained content") {
  const Dataset d = batch_generate(default_config(NoiseVariant::band_limited), default_space(), 40, 120, 2);
  const ReductionMap map = build_reduction(rank_components(d.signals), 11);
  const Reduction dft = map;
  const Eigen::MatrixXd flat = reduce_signals(dft, d.signals);
  CHECK(flat.cols() == 21);
  CHECK((expand_outputs(dft, flat) - d.signals).cwiseAbs().maxCoeff() < 1e-10);
  const Reduction none{};
  CHECK(reduce_signals(none, d.signals) == d.signals);
  const Reduction pca = fit_pca(d.signals, 21);
  CHECK((expand_outputs(pca, reduce_signals(pca, d.signals)) - d.signals).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("trained bundles roundtrip through disk") {
  const ParameterSpace space = default_space();
  const Dataset train = batch_generate(default_config(NoiseVariant::noisy), space, 150, 120, 3);
  const Dataset valid = batch_generate(default_config(NoiseVariant::noisy), space, 20, 120, 4);
  const fs::path dir = fs::temp_directory_path() / "rom_bundle_test";
  fs::remove_all(dir);
  SurrogateConfig config;
  config.gp.budget = 60;
  config.fnn.epochs = 5;
  config.pce.max_degree = 2;
  for (auto red : {ReductionKind::dft, ReductionKind::pca, ReductionKind::none}) {
    for (auto rsm : {RsmKind::pce, RsmKind::fnn, RsmKind::gp}) {
      if (red == ReductionKind::none && rsm == RsmKind::gp) continue;  // slow, covered by the acceptance run
      config.reduction = red;
      config.rsm = rsm;
      CAPTURE(to_string(red));
      CAPTURE(to_string(rsm));
      const Surrogate s = train_surrogate(train, config);
      CHECK(s.reduction_kind() == red);
      CHECK(s.rsm_kind() == rsm);
      save_surrogate(s, dir);
      const Surrogate back = load_surrogate(dir);
      CHECK(infer_signals(back, valid.points) == infer_signals(s, valid.points));
      const TorqueSignal one = infer_torque(s, valid.points[0]);
      CHECK((one.values.transpose() - infer_signals(s, valid.points).row(0)).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
  config.reduction = ReductionKind::dft;
  config.rsm = RsmKind::pce;
  const Surrogate s = train_surrogate(train, config);
  CHECK(evaluate_surrogate(s, valid).signal_mape < 0.02);
  save_surrogate(s, dir);
  // Tampering with the model breaks the digest check.
  std::string model = read_text_file(dir / "model.json");
  model.insert(model.size() - 2, " ");
  write_text_file(dir / "model.json", model);
  CHECK(kind_of([&] { load_surrogate(dir); }) == ErrorKind::data);
  fs::remove_all(dir);
}

TEST_CASE("configuration parsing and validation") {
  CHECK(parse_reduction_kind("pca") == ReductionKind::pca);
  CHECK_THROWS_AS(parse_rsm_kind("svm"), ConfigError);
  SurrogateConfig base;
  base.dft_components = 7;
  const SurrogateConfig c = surrogate_config_from_json(json::parse(R"({"rsm": "pce", "pce": {"target_loo": "inf"}})"), base);
  CHECK(c.dft_components == 7);
  CHECK(c.rsm == RsmKind::pce);
  CHECK(std::isinf(c.pce.target_loo));
  const SurrogateConfig again = surrogate_config_from_json(to_json(c));
  CHECK(to_json(again) == to_json(c));

  const Dataset d = batch_generate(default_config(), default_space(), 30, 120, 5);
  SurrogateConfig bad;
  bad.dft_components = 62;
  CHECK(kind_of([&] { train_surrogate(d, bad); }) == ErrorKind::usage);
  bad = {};
  bad.reduction = ReductionKind::pca;
  bad.pca_components = 40;
  CHECK(kind_of([&] { train_surrogate(d, bad); }) == ErrorKind::usage);
}

TEST_CASE("hand-sized evaluation cases") {
  const EvaluationReport flat = evaluate_predictions(Eigen::MatrixXd::Constant(4, 3, 2.0), Eigen::MatrixXd::Constant(4, 3, 1.9));
  CHECK((flat.mape.array() - 0.05).abs().maxCoeff() < 1e-15);
  CHECK(flat.sdape.cwiseAbs().maxCoeff() < 1e-15);
  const Eigen::MatrixXd t = Eigen::MatrixXd::Constant(2, 1, 1.0);
  Eigen::MatrixXd p(2, 1);
  p << 1.01, 0.97;
  const EvaluationReport two = evaluate_predictions(t, p);
  CHECK(two.mape[0] == doctest::Approx(0.02));
  CHECK(two.sdape[0] == doctest::Approx(std::sqrt(2 * 0.0001)));
  const EvaluationReport perfect = evaluate_predictions(t, t);
  CHECK(perfect.signal_mape == 0.0);
  CHECK(perfect.sdape[0] == 0.0);
}

TEST_CASE("reduced dimensions and deterministic serialization") {
  const Dataset d = batch_generate(default_config(NoiseVariant::band_limited), default_space(), 80, 120, 6);
  SurrogateConfig config;
  config.rsm = RsmKind::pce;
  config.pce.max_degree = 2;
  const Surrogate dft = train_surrogate(d, config);
  CHECK(dft.reduced_dimension() == 21);
  config.reduction = ReductionKind::none;
  CHECK(train_surrogate(d, config).reduced_dimension() == 120);

  config.reduction = ReductionKind::dft;
  config.rsm = RsmKind::gp;
  config.gp.budget = 80;
  const fs::path a = fs::temp_directory_path() / "rom_det_a", b = fs::temp_directory_path() / "rom_det_b";
  save_surrogate(train_surrogate(d, config), a);
  save_surrogate(train_surrogate(d, config), b);
  for (const char* f : {"manifest.json", "reduction.json", "model.json"}) CHECK(read_text_file(a / f) == read_text_file(b / f));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("a DFT+GP surrogate interpolates band-limited training signals") {
  const Dataset d = batch_generate(default_config(NoiseVariant::band_limited), default_space(), 60, 120, 7);
  SurrogateConfig config;
  config.gp.budget = 100;
  const Surrogate s = train_surrogate(d, config);
  const std::vector<DesignPoint> first(d.points.begin(), d.points.begin() + 5);
  const Eigen::MatrixXd pred = infer_signals(s, first);
  // R = 11 is lossless here, so only the GP interpolation error remains.
  CHECK((pred - d.signals.topRows(5)).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("a constant-signal dataset gives constant predictions") {
  Dataset d = batch_generate(default_config(NoiseVariant::band_limited), default_space(), 40, 120, 8);
  d.signals.setConstant(4.5);
  const std::vector<DesignPoint> query = sample_uniform(default_space(), 10, 9);
  for (auto red : {ReductionKind::dft, ReductionKind::none}) {
    for (auto rsm : {RsmKind::pce, RsmKind::gp}) {
      SurrogateConfig config;
      config.reduction = red;
      config.rsm = rsm;
      config.dft_components = 3;
      config.pce.max_degree = 1;
      const Eigen::MatrixXd pred = infer_signals(train_surrogate(d, config), query);
      CHECK((pred.array() - 4.5).abs().maxCoeff() < 1e-8);
    }
  }
}

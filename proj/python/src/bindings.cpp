#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "rom/dataset.hpp"
#include "rom/errors.hpp"
#include "rom/parallel.hpp"
#include "rom/spectral.hpp"
#include "rom/surrogate.hpp"
#include "rom/synthetic_model.hpp"
#include "rom/uq.hpp"

namespace py = pybind11;
using namespace rom;

namespace {

// JSON crosses the boundary as text; the Python wrapper handles dicts.
json parse(const std::string& text) { return text.empty() ? json::object() : json::parse(text); }

NoiseVariant variant_from(const std::string& name) {
  if (name == "band_limited") return NoiseVariant::band_limited;
  if (name == "noisy") return NoiseVariant::noisy;
  throw ConfigError("unknown variant '" + name + "'");
}

ParameterSpace space_from(const std::string& text) {
  return text.empty() ? default_space() : space_from_json(parse(text));
}

std::vector<DesignPoint> points_from(const ParameterSpace& space, const Eigen::MatrixXd& x) {
  if (static_cast<std::size_t>(x.cols()) != space.dimension()) {
    throw DataError("expected " + std::to_string(space.dimension()) + " design columns, got " +
                    std::to_string(x.cols()));
  }
  std::vector<DesignPoint> points;
  points.reserve(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    std::vector<double> row(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) row[static_cast<std::size_t>(j)] = x(i, j);
    points.emplace_back(space, std::move(row));
  }
  return points;
}

Eigen::MatrixXd points_matrix(const std::vector<DesignPoint>& points, std::size_t dim) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = points[i][j];
  }
  return x;
}

Dataset dataset_from(const ParameterSpace& space, const Eigen::MatrixXd& x, const Eigen::MatrixXd& signals) {
  if (x.rows() != signals.rows()) throw DataError("designs and signals have different row counts");
  Dataset d{space, points_from(space, x), signals, "", 0};
  return d;
}

py::tuple moments(const McStatistics& s) { return py::make_tuple(s.mean, s.std); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Reduced-order torque surrogates: synthetic data, spectral reduction, response surfaces, UQ";

  static py::exception<Error> rom_error(m, "RomError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object instance = py::reinterpret_borrow<py::object>(rom_error.ptr())(e.what());
      instance.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(rom_error.ptr(), instance.ptr());
    }
  });

  m.def("set_threads", &set_thread_count, py::arg("threads"));
  m.def("default_space", [] { return dump_json(to_json(default_space())); });

  m.def(
      "generate",
      [](std::size_t m_rows, std::size_t n, std::uint64_t seed, const std::string& variant, const std::string& space) {
        const ParameterSpace s = space_from(space);
        const Dataset d = batch_generate(default_config(variant_from(variant)), s, m_rows, n, seed);
        return py::make_tuple(points_matrix(d.points, s.dimension()), d.signals);
      },
      py::arg("m"), py::arg("n"), py::arg("seed"), py::arg("variant") = "band_limited", py::arg("space") = "");

  m.def("dft_forward", [](const Eigen::VectorXd& x) { return dft_forward(TorqueSignal{x}).coefficients; },
        py::arg("signal"));
  m.def("dft_inverse", [](const Eigen::VectorXcd& c) { return dft_inverse(Spectrum{c}).values; },
        py::arg("spectrum"));
  m.def(
      "rank_components",
      [](const Eigen::MatrixXd& signals) {
        const ComponentRanking r = rank_components(signals);
        return py::make_tuple(r.avg_contribution, r.order);
      },
      py::arg("signals"));
  m.def(
      "reconstruction_mae",
      [](const Eigen::MatrixXd& signals, std::size_t r, bool per_element) {
        const ReductionMap map = build_reduction(rank_components(signals), r);
        return reconstruction_mae(signals, map,
                                  per_element ? MaeNormalization::per_element : MaeNormalization::per_signal);
      },
      py::arg("signals"), py::arg("r"), py::arg("per_element") = false);

  py::class_<Surrogate>(m, "Surrogate")
      .def_static(
          "train",
          [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& signals, const std::string& config,
             const std::string& space) {
            const ParameterSpace s = space_from(space);
            return train_surrogate(dataset_from(s, x, signals), surrogate_config_from_json(parse(config)));
          },
          py::arg("designs"), py::arg("signals"), py::arg("config") = "", py::arg("space") = "")
      .def_static("load", &load_surrogate, py::arg("directory"))
      .def("save", [](const Surrogate& s, const std::filesystem::path& dir) { save_surrogate(s, dir); },
           py::arg("directory"))
      .def("predict",
           [](const Surrogate& s, const Eigen::MatrixXd& x) { return infer_signals(s, points_from(s.space, x)); },
           py::arg("designs"))
      .def(
          "evaluate",
          [](const Surrogate& s, const Eigen::MatrixXd& x, const Eigen::MatrixXd& signals, bool strict) {
            return dump_json(to_json(evaluate_surrogate(s, dataset_from(s.space, x, signals), strict)));
          },
          py::arg("designs"), py::arg("signals"), py::arg("strict") = false)
      .def_property_readonly("reduction", [](const Surrogate& s) { return std::string(to_string(s.reduction_kind())); })
      .def_property_readonly("rsm", [](const Surrogate& s) { return std::string(to_string(s.rsm_kind())); })
      .def_property_readonly("signal_length", [](const Surrogate& s) { return s.signal_length; })
      .def_property_readonly("reduced_dimension", &Surrogate::reduced_dimension)
      .def_property_readonly("metadata", [](const Surrogate& s) { return dump_json(s.metadata); });

  m.def(
      "uq_surrogate",
      [](const Surrogate& s, std::size_t samples, std::uint64_t seed) {
        return moments(monte_carlo(surrogate_evaluator(s), s.space, samples, seed));
      },
      py::arg("surrogate"), py::arg("samples") = kDefaultMcSamples, py::arg("seed") = 1);
  m.def(
      "uq_synthetic",
      [](std::size_t n, std::size_t samples, std::uint64_t seed, const std::string& variant) {
        const ParameterSpace s = default_space();
        return moments(monte_carlo(synthetic_evaluator(default_config(variant_from(variant)), s, n), s, samples, seed));
      },
      py::arg("n"), py::arg("samples") = kDefaultMcSamples, py::arg("seed") = 1,
      py::arg("variant") = "band_limited");
}

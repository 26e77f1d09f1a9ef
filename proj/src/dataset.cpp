#include "rom/dataset.hpp"

#include "rom/errors.hpp"
#include "rom/parallel.hpp"

namespace rom {

Eigen::MatrixXd Dataset::normalized_inputs() const { return normalize_all(space, points); }

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > size()) throw DataError("dataset slice out of range");
  Dataset out{space, {}, signals.middleRows(static_cast<Eigen::Index>(begin),
                                            static_cast<Eigen::Index>(end - begin)),
              config_digest, seed};
  out.points.assign(points.begin() + static_cast<std::ptrdiff_t>(begin),
                    points.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

Dataset batch_generate(const SyntheticModelConfig& config, const ParameterSpace& space,
                       std::size_t m, std::size_t n, std::uint64_t seed) {
  config.validate();
  Dataset dataset{space, sample_uniform(space, m, seed),
                  Eigen::MatrixXd(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)),
                  config_digest(config), seed};
  parallel_for(m, [&](std::size_t i) {
    dataset.signals.row(static_cast<Eigen::Index>(i)) =
        evaluate_torque(config, space, dataset.points[i], n).values.transpose();
  });
  return dataset;
}

std::string dataset_to_csv(const Dataset& dataset) {
  std::vector<std::string> header;
  for (std::size_t i = 0; i < dataset.space.dimension(); ++i) header.push_back("p" + std::to_string(i + 1));
  for (std::size_t t = 0; t < dataset.signal_length(); ++t) header.push_back("tau_" + std::to_string(t));
  std::vector<std::vector<double>> rows;
  rows.reserve(dataset.size());
  for (std::size_t m = 0; m < dataset.size(); ++m) {
    std::vector<double> row = dataset.points[m].values();
    for (Eigen::Index t = 0; t < dataset.signals.cols(); ++t) {
      row.push_back(dataset.signals(static_cast<Eigen::Index>(m), t));
    }
    rows.push_back(std::move(row));
  }
  return to_csv(header, rows);
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  write_text_file(path, dataset_to_csv(dataset));
}

Dataset read_dataset(const std::filesystem::path& path, const ParameterSpace& space) {
  const CsvTable table = read_csv(path);
  const std::size_t p = space.dimension();
  if (table.header.size() <= p) {
    throw DataError(path.string() + ": expected " + std::to_string(p) +
                    " parameter columns followed by torque columns");
  }
  for (std::size_t i = 0; i < p; ++i) {
    if (table.header[i] != "p" + std::to_string(i + 1)) {
      throw DataError(path.string() + ": column " + std::to_string(i + 1) + " should be p" +
                      std::to_string(i + 1) + ", found '" + table.header[i] + "'");
    }
  }
  const std::size_t n = table.header.size() - p;
  for (std::size_t t = 0; t < n; ++t) {
    if (table.header[p + t] != "tau_" + std::to_string(t)) {
      throw DataError(path.string() + ": unexpected torque column '" + table.header[p + t] + "'");
    }
  }
  if (table.rows.empty()) throw DataError(path.string() + ": dataset has no rows");
  Dataset dataset{space, {}, Eigen::MatrixXd(static_cast<Eigen::Index>(table.rows.size()),
                                             static_cast<Eigen::Index>(n)),
                  "", 0};
  dataset.points.reserve(table.rows.size());
  for (std::size_t m = 0; m < table.rows.size(); ++m) {
    const auto& row = table.rows[m];
    try {
      dataset.points.emplace_back(space, std::vector<double>(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(p)));
    } catch (const Error& e) {
      throw DataError(path.string() + ": row " + std::to_string(m + 1) + ": " + e.what());
    }
    for (std::size_t t = 0; t < n; ++t) {
      dataset.signals(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(t)) = row[p + t];
    }
  }
  return dataset;
}

json dataset_metadata(const Dataset& dataset) {
  return json{{"m", dataset.size()},
              {"n", dataset.signal_length()},
              {"seed", dataset.seed},
              {"config_digest", dataset.config_digest},
              {"space", to_json(dataset.space)},
              {"csv_sha256", sha256_hex(dataset_to_csv(dataset))}};
}

}  // namespace rom

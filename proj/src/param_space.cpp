#include "rom/param_space.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rom/errors.hpp"
#include "rom/random.hpp"

namespace rom {

ParameterSpace::ParameterSpace(std::vector<std::string> names, std::vector<double> lower,
                               std::vector<double> upper)
    : names_(std::move(names)), lower_(std::move(lower)), upper_(std::move(upper)) {
  if (names_.empty()) throw ValidationError("parameter space must have at least one parameter");
  if (names_.size() != lower_.size() || names_.size() != upper_.size()) {
    throw ValidationError("parameter space: names, lower and upper must have equal length");
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!seen.insert(names_[i]).second) {
      throw ValidationError("parameter space: duplicate name '" + names_[i] + "'");
    }
    if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]) || !(lower_[i] < upper_[i])) {
      throw ValidationError("parameter space: bounds of '" + names_[i] +
                            "' must satisfy lower < upper");
    }
  }
}

void ParameterSpace::validate(std::span<const double> values) const {
  if (values.size() != dimension()) {
    throw ValidationError("design point has " + std::to_string(values.size()) +
                          " coordinates, expected " + std::to_string(dimension()));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= lower_[i] && values[i] <= upper_[i])) {
      throw ValidationError("parameter '" + names_[i] + "' = " + format_double(values[i]) +
                            " outside [" + format_double(lower_[i]) + ", " +
                            format_double(upper_[i]) + "]");
    }
  }
}

DesignPoint::DesignPoint(const ParameterSpace& space, std::vector<double> values)
    : values_(std::move(values)) {
  space.validate(values_);
}

ParameterSpace default_space() {
  return ParameterSpace(
      {"LSLIT1", "LSLIT2", "DSLIT5", "DSLIT6", "MA",  "MT1",   "MW1",  "RA1", "RA2", "RS",
       "RW2",    "RW3",    "RW4",    "RW5",    "WMAG", "DMAG", "ST",   "SW1", "SW2", "SW4"},
      {6.1, 4.1, 0.9, 1.9, 142.5, 3.8, 20.9, 136.8, 157.7, 0.9,
       0.9, 0.9, 0.9, 0.9, 3.8,   28.5, 1.5, 5.7,   3.4,   24.2},
      {6.7, 4.5, 1.1, 2.1, 157.5, 4.2, 23.1, 151.2, 174.3, 1.1,
       1.1, 1.1, 1.1, 1.1, 4.2,   31.5, 1.7, 6.3,   3.8,   26.8});
}

Eigen::VectorXd normalize(const ParameterSpace& space, std::span<const double> values) {
  space.validate(values);
  Eigen::VectorXd x(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double lo = space.lower()[i];
    const double hi = space.upper()[i];
    x[static_cast<Eigen::Index>(i)] = 2.0 * (values[i] - lo) / (hi - lo) - 1.0;
  }
  return x;
}

Eigen::VectorXd normalize(const ParameterSpace& space, const DesignPoint& point) {
  return normalize(space, std::span<const double>(point.values()));
}

DesignPoint denormalize(const ParameterSpace& space, std::span<const double> normalized) {
  if (normalized.size() != space.dimension()) {
    throw ValidationError("normalized point has " + std::to_string(normalized.size()) +
                          " coordinates, expected " + std::to_string(space.dimension()));
  }
  std::vector<double> values(normalized.size());
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    const double x = normalized[i];
    if (!(x >= -1.0 && x <= 1.0)) {
      throw ValidationError("normalized coordinate of '" + space.names()[i] + "' = " +
                            format_double(x) + " outside [-1, 1]");
    }
    const double lo = space.lower()[i];
    const double hi = space.upper()[i];
    // Endpoints map exactly so that x = +-1 never fails validation on roundoff.
    if (x == -1.0) {
      values[i] = lo;
    } else if (x == 1.0) {
      values[i] = hi;
    } else {
      values[i] = std::clamp(lo + 0.5 * (x + 1.0) * (hi - lo), lo, hi);
    }
  }
  return DesignPoint(space, std::move(values));
}

std::vector<DesignPoint> sample_uniform(const ParameterSpace& space, std::size_t count,
                                        std::uint64_t seed) {
  if (count == 0) throw ConfigError("sample count must be at least 1");
  Rng rng(seed);
  std::vector<DesignPoint> points;
  points.reserve(count);
  std::vector<double> values(space.dimension());
  for (std::size_t m = 0; m < count; ++m) {
    for (std::size_t i = 0; i < space.dimension(); ++i) {
      values[i] = rng.uniform(space.lower()[i], space.upper()[i]);
    }
    points.emplace_back(space, values);
  }
  return points;
}

Eigen::MatrixXd normalize_all(const ParameterSpace& space, const std::vector<DesignPoint>& points) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(points.size()),
                    static_cast<Eigen::Index>(space.dimension()));
  for (std::size_t m = 0; m < points.size(); ++m) {
    x.row(static_cast<Eigen::Index>(m)) = normalize(space, points[m]).transpose();
  }
  return x;
}

json to_json(const ParameterSpace& space) {
  return json{{"names", space.names()}, {"lower", space.lower()}, {"upper", space.upper()}};
}

ParameterSpace space_from_json(const json& j) {
  try {
    return ParameterSpace(j.at("names").get<std::vector<std::string>>(),
                          j.at("lower").get<std::vector<double>>(),
                          j.at("upper").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid parameter space JSON: ") + e.what());
  }
}

ParameterSpace load_space(const std::filesystem::path& path) {
  return space_from_json(read_json_file(path));
}

}  // namespace rom

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rom/io.hpp"

namespace rom {

/// Bounded box of named design parameters (bounds in mm). Immutable.
class ParameterSpace {
 public:
  ParameterSpace(std::vector<std::string> names, std::vector<double> lower,
                 std::vector<double> upper);

  std::size_t dimension() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<double>& lower() const noexcept { return lower_; }
  const std::vector<double>& upper() const noexcept { return upper_; }

  /// Throws ValidationError naming the first coordinate outside its bounds.
  void validate(std::span<const double> values) const;

  bool operator==(const ParameterSpace&) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<double> lower_;
  std::vector<double> upper_;
};

/// A point inside a ParameterSpace; validated on construction.
class DesignPoint {
 public:
  DesignPoint(const ParameterSpace& space, std::vector<double> values);

  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  bool operator==(const DesignPoint&) const = default;

 private:
  std::vector<double> values_;
};

/// The 20 PMSM geometry parameters with their design ranges.
ParameterSpace default_space();

/// Affine map onto [-1, 1]^P: x_i = 2 (p_i - lower_i) / (upper_i - lower_i) - 1.
Eigen::VectorXd normalize(const ParameterSpace& space, std::span<const double> values);
Eigen::VectorXd normalize(const ParameterSpace& space, const DesignPoint& point);

/// Inverse of normalize. Throws ValidationError for coordinates outside [-1, 1].
DesignPoint denormalize(const ParameterSpace& space, std::span<const double> normalized);

/// Independent uniform draws on the box, sample by sample and coordinate by
/// coordinate from one Rng stream seeded with `seed`.
std::vector<DesignPoint> sample_uniform(const ParameterSpace& space, std::size_t count,
                                        std::uint64_t seed);

/// Rows of the returned matrix are normalize(points[i]).
Eigen::MatrixXd normalize_all(const ParameterSpace& space, const std::vector<DesignPoint>& points);

json to_json(const ParameterSpace& space);
ParameterSpace space_from_json(const json& j);
ParameterSpace load_space(const std::filesystem::path& path);

}  // namespace rom

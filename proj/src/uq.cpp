#include "rom/uq.hpp"

#include <cmath>

#include "rom/errors.hpp"
#include "rom/parallel.hpp"

namespace rom {

BatchEvaluator synthetic_evaluator(const SyntheticModelConfig& config, const ParameterSpace& space,
                                   std::size_t n) {
  config.validate();
  return [config, space, n](const std::vector<DesignPoint>& points) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < points.size(); ++i) {
      out.row(static_cast<Eigen::Index>(i)) = evaluate_torque(config, space, points[i], n).values.transpose();
    }
    return out;
  };
}

BatchEvaluator surrogate_evaluator(const Surrogate& surrogate) {
  return [&surrogate](const std::vector<DesignPoint>& points) { return infer_signals(surrogate, points); };
}

void MomentAccumulator::add(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (count == 0) {
    mean = Eigen::VectorXd::Zero(x.size());
    m2 = Eigen::VectorXd::Zero(x.size());
  }
  ++count;
  const Eigen::VectorXd delta = x - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta.cwiseProduct(x - mean);
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  if (other.count == 0) return;
  if (count == 0) {
    *this = other;
    return;
  }
  const auto na = static_cast<double>(count);
  const auto nb = static_cast<double>(other.count);
  const double n = na + nb;
  const Eigen::VectorXd delta = other.mean - mean;
  mean += delta * (nb / n);
  m2 += other.m2 + delta.cwiseAbs2() * (na * nb / n);
  count += other.count;
}

McStatistics monte_carlo(const BatchEvaluator& evaluator, const ParameterSpace& space,
                         std::size_t n_samples, std::uint64_t seed, std::size_t chunk) {
  if (n_samples < 2) throw ConfigError("Monte Carlo needs at least 2 samples");
  if (chunk == 0) throw ConfigError("Monte Carlo chunk size must be positive");
  const auto designs = sample_uniform(space, n_samples, seed);
  const std::size_t chunks = (n_samples + chunk - 1) / chunk;
  std::vector<MomentAccumulator> partial(chunks);

  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t begin = c * chunk;
    const std::size_t end = std::min(n_samples, begin + chunk);
    const std::vector<DesignPoint> batch(designs.begin() + static_cast<std::ptrdiff_t>(begin),
                                         designs.begin() + static_cast<std::ptrdiff_t>(end));
    Eigen::MatrixXd values;
    try {
      values = evaluator(batch);
      if (values.rows() != static_cast<Eigen::Index>(batch.size())) {
        throw DataError("evaluator returned " + std::to_string(values.rows()) + " rows for " +
                        std::to_string(batch.size()) + " designs");
      }
      for (Eigen::Index r = 0; r < values.rows(); ++r) {
        if (!values.row(r).allFinite()) throw NumericalError("evaluator returned non-finite torque");
      }
    } catch (const Error&) {
      // Locate the first failing sample by evaluating one design at a time.
      for (std::size_t i = begin; i < end; ++i) {
        try {
          const Eigen::MatrixXd single = evaluator({designs[i]});
          if (single.rows() != 1 || !single.allFinite()) throw NumericalError("non-finite or malformed output");
        } catch (const Error& e) {
          std::string point;
          for (double v : designs[i].values()) point += (point.empty() ? "" : ",") + format_double(v);
          throw Error(e.kind(), "Monte Carlo sample " + std::to_string(i) + " at [" + point + "]: " + e.what());
        }
      }
      throw;
    }
    for (Eigen::Index r = 0; r < values.rows(); ++r) partial[c].add(values.row(r).transpose());
  });

  MomentAccumulator total;
  for (const auto& p : partial) total.merge(p);
  McStatistics stats;
  stats.mean = total.mean;
  stats.std = (total.m2.cwiseMax(0.0) / static_cast<double>(total.count - 1)).cwiseSqrt();
  stats.n_samples = n_samples;
  stats.seed = seed;
  return stats;
}

UqComparison compare_stats(const McStatistics& candidate, const McStatistics& reference) {
  if (candidate.mean.size() != reference.mean.size()) {
    throw DataError("compared statistics have different signal lengths");
  }
  UqComparison c;
  c.period_degrees = reference.period_degrees;
  const Eigen::Index n = reference.mean.size();
  c.ape_mean.resize(n);
  c.ape_std.resize(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    if (reference.mean[t] == 0.0 || reference.std[t] == 0.0) {
      throw DataError("reference statistic is zero at angle index " + std::to_string(t));
    }
    c.ape_mean[t] = std::abs(candidate.mean[t] - reference.mean[t]) / std::abs(reference.mean[t]);
    c.ape_std[t] = std::abs(candidate.std[t] - reference.std[t]) / std::abs(reference.std[t]);
  }
  c.signal_ape_mean = c.ape_mean.mean();
  c.signal_ape_std = c.ape_std.mean();
  return c;
}

json to_json(const McStatistics& s) {
  return json{{"n_samples", s.n_samples}, {"seed", s.seed}, {"mean", to_json(s.mean)}, {"std", to_json(s.std)}};
}

McStatistics mc_statistics_from_json(const json& j) {
  try {
    McStatistics s;
    s.n_samples = j.at("n_samples").get<std::size_t>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.mean = vector_from_json(j.at("mean"));
    s.std = vector_from_json(j.at("std"));
    if (s.mean.size() != s.std.size()) throw DataError("statistics JSON: mean and std lengths differ");
    return s;
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid statistics JSON: ") + e.what());
  }
}

namespace {

std::string angle_csv(const char* a, const char* b, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      double period) {
  std::vector<std::vector<double>> rows;
  const auto n = static_cast<double>(x.size());
  for (Eigen::Index t = 0; t < x.size(); ++t) rows.push_back({period * static_cast<double>(t) / n, x[t], y[t]});
  return to_csv({"angle_deg", a, b}, rows);
}

}  // namespace

std::string stats_csv(const McStatistics& s) { return angle_csv("mean", "std", s.mean, s.std, s.period_degrees); }

json to_json(const UqComparison& c) {
  return json{{"signal_ape_mean", c.signal_ape_mean},
              {"signal_ape_std", c.signal_ape_std},
              {"ape_mean", to_json(c.ape_mean)},
              {"ape_std", to_json(c.ape_std)}};
}

std::string comparison_csv(const UqComparison& c) {
  return angle_csv("ape_mean", "ape_std", c.ape_mean, c.ape_std, c.period_degrees);
}

}  // namespace rom

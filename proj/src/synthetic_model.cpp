#include "rom/synthetic_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "rom/errors.hpp"
#include "rom/random.hpp"

namespace rom {

double Polynomial::operator()(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& term : terms) {
    double value = term.coefficient;
    for (auto [dim, power] : term.factors) {
      const double xi = x[static_cast<std::size_t>(dim)];
      for (int p = 0; p < power; ++p) value *= xi;
    }
    sum += value;
  }
  return sum;
}

double Polynomial::lower_bound_on_box() const {
  double bound = 0.0;
  for (const auto& term : terms) {
    bound += term.factors.empty() ? term.coefficient : -std::abs(term.coefficient);
  }
  return bound;
}

int Polynomial::max_dimension() const {
  int dim = -1;
  for (const auto& term : terms) {
    for (auto [d, p] : term.factors) dim = std::max(dim, d);
  }
  return dim;
}

std::vector<int> SyntheticModelConfig::harmonic_orders() const {
  std::vector<int> orders;
  orders.reserve(harmonics.size());
  for (const auto& h : harmonics) orders.push_back(h.order);
  return orders;
}

void SyntheticModelConfig::validate() const {
  if (harmonics.empty()) throw ConfigError("synthetic config: no harmonics");
  if (input_dim == 0) throw ConfigError("synthetic config: input_dim must be positive");
  for (std::size_t i = 0; i < harmonics.size(); ++i) {
    if (harmonics[i].order < 0) throw ConfigError("synthetic config: negative harmonic order");
    if (i > 0 && harmonics[i].order <= harmonics[i - 1].order) {
      throw ConfigError("synthetic config: harmonic orders must be distinct and ascending");
    }
    const int max_dim = std::max(harmonics[i].amplitude.max_dimension(),
                                 harmonics[i].phase.max_dimension());
    if (max_dim >= static_cast<int>(input_dim)) {
      throw ConfigError("synthetic config: polynomial references dimension beyond input_dim");
    }
  }
  if (harmonics.front().order == 0 && !(harmonics.front().amplitude.lower_bound_on_box() > 0.0)) {
    throw ConfigError("synthetic config: mean torque is not provably positive on the box");
  }
  const auto orders = harmonic_orders();
  const std::set<int> in_band(orders.begin(), orders.end());
  for (const auto& term : out_of_band) {
    if (term.bin <= 0 || in_band.contains(term.bin)) {
      throw ConfigError("synthetic config: out-of-band bin " + std::to_string(term.bin) +
                        " collides with a harmonic or is not positive");
    }
    if (term.direction.size() != input_dim) {
      throw ConfigError("synthetic config: out-of-band direction has wrong dimension");
    }
  }
  if (noise_floor < 0.0 || !std::isfinite(noise_floor)) {
    throw ConfigError("synthetic config: noise_floor must be finite and nonnegative");
  }
}

namespace {

Monomial mono(double c, std::vector<std::pair<int, int>> factors = {}) {
  return Monomial{c, std::move(factors)};
}

}  // namespace

SyntheticModelConfig default_config(NoiseVariant variant) {
  SyntheticModelConfig config;
  config.input_dim = 20;
  config.seed = 20240917;
  config.noise_floor = variant == NoiseVariant::noisy ? 0.02 : 0.0;

  // Mean torque: cubic with bilinear cross terms; lower bound 5 - 2.36 > 0.
  HarmonicTerm mean{0, {}, {}};
  mean.amplitude.terms = {
      mono(5.0),
      mono(0.55, {{4, 1}}),           mono(0.40, {{15, 1}}),
      mono(-0.30, {{7, 1}}),          mono(0.25, {{14, 1}}),
      mono(-0.20, {{8, 1}}),          mono(0.15, {{0, 1}}),
      mono(0.10, {{19, 1}}),          mono(-0.12, {{4, 1}, {15, 1}}),
      mono(0.08, {{7, 1}, {8, 1}}),   mono(0.10, {{14, 2}}),
      mono(-0.06, {{4, 3}}),          mono(0.05, {{0, 1}, {19, 1}}),
  };
  config.harmonics.push_back(mean);

  // Ripple harmonics with geometrically decreasing base amplitude so the mean
  // power ranking is strict; relative amplitude variation stays within 30%.
  struct Ripple {
    int order;
    double base;
    int a1, a2, a3, a4;  // amplitude dependence
    int p1, p2;          // phase dependence
  };
  const Ripple ripples[] = {
      {1, 0.500, 4, 16, 5, 6, 15, 1},    {2, 0.320, 15, 2, 3, 17, 4, 18},
      {3, 0.220, 7, 9, 10, 11, 12, 0},   {4, 0.150, 14, 13, 4, 8, 16, 5},
      {5, 0.105, 18, 6, 1, 2, 7, 19},    {6, 0.075, 8, 19, 12, 13, 9, 3},
      {8, 0.052, 5, 0, 14, 15, 2, 10},   {10, 0.036, 17, 3, 16, 18, 11, 6},
      {12, 0.025, 9, 11, 0, 7, 13, 14},  {14, 0.017, 12, 1, 6, 19, 17, 8},
  };
  for (const auto& r : ripples) {
    HarmonicTerm h{r.order, {}, {}};
    h.amplitude.terms = {
        mono(r.base),
        mono(0.15 * r.base, {{r.a1, 1}}),
        mono(-0.10 * r.base, {{r.a2, 1}}),
        mono(0.05 * r.base, {{r.a3, 1}, {r.a4, 1}}),
    };
    h.phase.terms = {
        mono(0.3 * r.order),
        mono(0.25, {{r.p1, 1}}),
        mono(-0.15, {{r.p2, 1}}),
        mono(0.05, {{r.a1, 2}}),
    };
    config.harmonics.push_back(h);
  }

  // Out-of-band terms: fixed pseudo-random directions drawn from config.seed.
  Rng rng(config.seed);
  const int bins[] = {7, 9, 11, 13, 16, 19, 22, 25};
  for (int bin : bins) {
    OutOfBandTerm term;
    term.bin = bin;
    term.weight = 1.0 / static_cast<double>(std::size(bins));
    term.direction.assign(config.input_dim, 0.0);
    for (std::size_t i = 0; i < config.input_dim; ++i) term.direction[i] = rng.uniform(-1.0, 1.0);
    term.frequency = rng.uniform(2.0, 4.0);
    term.offset = rng.uniform(0.0, 2.0 * std::numbers::pi);
    term.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    config.out_of_band.push_back(std::move(term));
  }
  config.validate();
  return config;
}

SyntheticModelConfig restrict_to_length(const SyntheticModelConfig& config, std::size_t n) {
  SyntheticModelConfig out = config;
  const auto fits = [n](int order) { return 2 * static_cast<std::size_t>(order) + 2 <= n; };
  std::erase_if(out.harmonics, [&](const HarmonicTerm& h) { return !fits(h.order); });
  std::erase_if(out.out_of_band, [&](const OutOfBandTerm& t) { return !fits(t.bin); });
  return out;
}

std::size_t minimum_signal_length(const SyntheticModelConfig& config) {
  int max_order = 0;
  for (const auto& h : config.harmonics) max_order = std::max(max_order, h.order);
  return 2 * static_cast<std::size_t>(max_order) + 2;
}

TorqueSignal evaluate_torque(const SyntheticModelConfig& config, const ParameterSpace& space,
                             const DesignPoint& point, std::size_t n) {
  if (space.dimension() != config.input_dim) {
    throw ConfigError("synthetic model expects " + std::to_string(config.input_dim) +
                      " parameters, space has " + std::to_string(space.dimension()));
  }
  if (n < 2 || n % 2 != 0) throw ConfigError("signal length N must be even and at least 2");
  if (n < minimum_signal_length(config)) {
    throw ConfigError("signal length N = " + std::to_string(n) + " too small for harmonic order " +
                      std::to_string(config.harmonics.back().order) + " (need N >= " +
                      std::to_string(minimum_signal_length(config)) + ")");
  }
  const Eigen::VectorXd xv = normalize(space, point);
  const std::span<const double> x(xv.data(), static_cast<std::size_t>(xv.size()));
  const double two_pi_over_n = 2.0 * std::numbers::pi / static_cast<double>(n);

  TorqueSignal signal{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))};
  auto& tau = signal.values;
  for (const auto& h : config.harmonics) {
    const double amplitude = h.amplitude(x);
    if (h.order == 0) {
      tau.array() += amplitude;
      continue;
    }
    const double phase = h.phase(x);
    const auto order = static_cast<std::size_t>(h.order);
    for (std::size_t t = 0; t < n; ++t) {
      const double angle = two_pi_over_n * static_cast<double>((order * t) % n);
      tau[static_cast<Eigen::Index>(t)] += amplitude * std::cos(angle + phase);
    }
  }
  if (config.noise_floor > 0.0) {
    for (const auto& term : config.out_of_band) {
      const auto bin = static_cast<std::size_t>(term.bin);
      if (2 * bin + 2 > n) continue;
      double projection = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) projection += term.direction[i] * x[i];
      const double gain =
          config.noise_floor * term.weight * std::sin(term.frequency * projection + term.offset);
      for (std::size_t t = 0; t < n; ++t) {
        const double angle = two_pi_over_n * static_cast<double>((bin * t) % n);
        tau[static_cast<Eigen::Index>(t)] += gain * std::cos(angle + term.phase);
      }
    }
  }
  return signal;
}

namespace {

json to_json(const Polynomial& p) {
  json terms = json::array();
  for (const auto& t : p.terms) {
    json factors = json::array();
    for (auto [d, e] : t.factors) factors.push_back({d, e});
    terms.push_back({{"c", t.coefficient}, {"x", factors}});
  }
  return terms;
}

Polynomial polynomial_from_json(const json& j) {
  Polynomial p;
  for (const auto& t : j) {
    Monomial m;
    m.coefficient = t.at("c").get<double>();
    for (const auto& f : t.at("x")) m.factors.emplace_back(f.at(0).get<int>(), f.at(1).get<int>());
    p.terms.push_back(std::move(m));
  }
  return p;
}

}  // namespace

json to_json(const SyntheticModelConfig& config) {
  json harmonics = json::array();
  for (const auto& h : config.harmonics) {
    harmonics.push_back(
        {{"order", h.order}, {"amplitude", to_json(h.amplitude)}, {"phase", to_json(h.phase)}});
  }
  json oob = json::array();
  for (const auto& t : config.out_of_band) {
    oob.push_back({{"bin", t.bin},
                   {"weight", t.weight},
                   {"direction", t.direction},
                   {"frequency", t.frequency},
                   {"offset", t.offset},
                   {"phase", t.phase}});
  }
  return json{{"input_dim", config.input_dim}, {"harmonics", harmonics},
              {"out_of_band", oob},            {"noise_floor", config.noise_floor},
              {"seed", config.seed}};
}

SyntheticModelConfig synthetic_config_from_json(const json& j) {
  SyntheticModelConfig config;
  try {
    config.input_dim = j.at("input_dim").get<std::size_t>();
    for (const auto& h : j.at("harmonics")) {
      config.harmonics.push_back({h.at("order").get<int>(), polynomial_from_json(h.at("amplitude")),
                                  polynomial_from_json(h.at("phase"))});
    }
    for (const auto& t : j.value("out_of_band", json::array())) {
      config.out_of_band.push_back({t.at("bin").get<int>(), t.at("weight").get<double>(),
                                    t.at("direction").get<std::vector<double>>(),
                                    t.at("frequency").get<double>(), t.at("offset").get<double>(),
                                    t.at("phase").get<double>()});
    }
    config.noise_floor = j.value("noise_floor", 0.0);
    config.seed = j.value("seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid synthetic config JSON: ") + e.what());
  }
  config.validate();
  return config;
}

std::string config_digest(const SyntheticModelConfig& config) {
  return sha256_hex(dump_json(to_json(config)));
}

}  // namespace rom

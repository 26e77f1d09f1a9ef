#include "rom/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "rom/errors.hpp"
#include "rom/parallel.hpp"

namespace rom {
namespace {

constexpr double kResidueTolerance = 1e-9;

/// cos/sin of 2 pi j / N for j = 0..N-1. Products k*n are reduced mod N
/// before lookup so every twiddle is evaluated at an angle in [0, 2 pi).
struct Twiddles {
  std::vector<double> cosine;
  std::vector<double> sine;

  explicit Twiddles(std::size_t n) : cosine(n), sine(n) {
    for (std::size_t j = 0; j < n; ++j) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
      cosine[j] = std::cos(angle);
      sine[j] = std::sin(angle);
    }
  }
};

std::complex<double> dft_bin(std::span<const double> signal, std::size_t k, const Twiddles& tw) {
  const std::size_t n = signal.size();
  double re = 0.0;
  double im = 0.0;
  std::size_t j = 0;  // (k * t) mod n, advanced incrementally
  const std::size_t step = k % n;
  for (std::size_t t = 0; t < n; ++t) {
    re += signal[t] * tw.cosine[j];
    im -= signal[t] * tw.sine[j];
    j += step;
    if (j >= n) j -= n;
  }
  return {re, im};
}

void check_finite(std::span<const double> signal) {
  for (std::size_t i = 0; i < signal.size(); ++i) {
    if (!std::isfinite(signal[i])) {
      throw DataError("signal value at index " + std::to_string(i) + " is not finite");
    }
  }
}

bool is_nyquist(std::size_t k, std::size_t n) { return n % 2 == 0 && k == n / 2; }

}  // namespace

ReductionMap::ReductionMap(std::size_t n, std::vector<std::size_t> indices)
    : n_(n), indices_(std::move(indices)) {
  if (n_ < 2) throw ConfigError("reduction map: signal length must be at least 2");
  if (indices_.empty()) throw ConfigError("reduction map: at least one bin must be retained");
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] > n_ / 2) {
      throw ConfigError("reduction map: bin " + std::to_string(indices_[i]) + " exceeds N/2 = " +
                        std::to_string(n_ / 2));
    }
    if (i > 0 && indices_[i] <= indices_[i - 1]) {
      throw ConfigError("reduction map: bins must be strictly ascending");
    }
  }
}

std::size_t ReductionMap::real_dimension() const noexcept {
  std::size_t dim = 0;
  for (std::size_t k : indices_) dim += (k == 0 || is_nyquist(k, n_)) ? 1 : 2;
  return dim;
}

Spectrum dft_forward(std::span<const double> signal) {
  const std::size_t n = signal.size();
  if (n < 2) throw DataError("DFT needs at least 2 samples");
  check_finite(signal);
  const Twiddles tw(n);
  Spectrum spectrum{Eigen::VectorXcd(static_cast<Eigen::Index>(n))};
  for (std::size_t k = 0; k < n; ++k) {
    spectrum.coefficients[static_cast<Eigen::Index>(k)] = dft_bin(signal, k, tw);
  }
  return spectrum;
}

Spectrum dft_forward(const TorqueSignal& signal) {
  return dft_forward(std::span<const double>(signal.values.data(), signal.size()));
}

TorqueSignal dft_inverse(const Spectrum& spectrum) {
  const std::size_t n = spectrum.size();
  if (n < 2) throw DataError("inverse DFT needs at least 2 coefficients");
  const Twiddles tw(n);
  const auto& c = spectrum.coefficients;
  TorqueSignal out{Eigen::VectorXd(static_cast<Eigen::Index>(n))};
  double scale = 0.0;
  for (Eigen::Index k = 0; k < c.size(); ++k) scale += std::abs(c[k]);
  scale /= static_cast<double>(n);
  double worst_residue = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    double re = 0.0;
    double im = 0.0;
    std::size_t j = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const std::complex<double> ck = c[static_cast<Eigen::Index>(k)];
      re += ck.real() * tw.cosine[j] - ck.imag() * tw.sine[j];
      im += ck.real() * tw.sine[j] + ck.imag() * tw.cosine[j];
      j += t;
      while (j >= n) j -= n;
    }
    out.values[static_cast<Eigen::Index>(t)] = re / static_cast<double>(n);
    worst_residue = std::max(worst_residue, std::abs(im) / static_cast<double>(n));
  }
  if (worst_residue > kResidueTolerance * scale) {
    throw NumericalError("inverse DFT: imaginary residue " + format_double(worst_residue) +
                         " exceeds tolerance; spectrum is not Hermitian");
  }
  return out;
}

Eigen::VectorXd power_spectrum(const Spectrum& spectrum) {
  return spectrum.coefficients.cwiseAbs2() / static_cast<double>(spectrum.size());
}

ComponentRanking rank_components(std::span<const Spectrum> spectra) {
  if (spectra.empty()) throw DataError("rank_components: no spectra");
  const std::size_t n = spectra.front().size();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (const auto& s : spectra) {
    if (s.size() != n) throw DataError("rank_components: spectra have mixed lengths");
    sum += s.coefficients.cwiseAbs2();
  }
  ComponentRanking ranking;
  ranking.avg_contribution = sum / static_cast<double>(spectra.size());
  ranking.order.resize(n / 2 + 1);
  std::iota(ranking.order.begin(), ranking.order.end(), std::size_t{0});
  const auto& eta = ranking.avg_contribution;
  std::stable_sort(ranking.order.begin(), ranking.order.end(), [&eta](std::size_t a, std::size_t b) {
    return eta[static_cast<Eigen::Index>(a)] > eta[static_cast<Eigen::Index>(b)];
  });
  return ranking;
}

ComponentRanking rank_components(const Eigen::MatrixXd& signals) {
  std::vector<Spectrum> spectra(static_cast<std::size_t>(signals.rows()));
  parallel_for(spectra.size(), [&](std::size_t m) {
    const Eigen::VectorXd row = signals.row(static_cast<Eigen::Index>(m)).transpose();
    spectra[m] = dft_forward(std::span<const double>(row.data(), row.size()));
  });
  return rank_components(spectra);
}

ReductionMap build_reduction(const ComponentRanking& ranking, std::size_t retained) {
  const std::size_t n = static_cast<std::size_t>(ranking.avg_contribution.size());
  if (retained < 1 || retained > n / 2 + 1) {
    throw ConfigError("retained component count R = " + std::to_string(retained) +
                      " must lie in [1, " + std::to_string(n / 2 + 1) + "]");
  }
  std::vector<std::size_t> indices(ranking.order.begin(),
                                   ranking.order.begin() + static_cast<std::ptrdiff_t>(retained));
  std::sort(indices.begin(), indices.end());
  return ReductionMap(n, std::move(indices));
}

ReducedVector reduce(const ReductionMap& map, std::span<const double> signal) {
  const std::size_t n = map.signal_length();
  if (signal.size() != n) {
    throw DataError("reduce: signal length " + std::to_string(signal.size()) +
                    " does not match map length " + std::to_string(n));
  }
  check_finite(signal);
  const Twiddles tw(n);
  ReducedVector r{Eigen::VectorXcd(static_cast<Eigen::Index>(map.retained()))};
  for (std::size_t i = 0; i < map.retained(); ++i) {
    const std::size_t k = map.indices()[i];
    std::complex<double> c = dft_bin(signal, k, tw);
    if (k == 0 || is_nyquist(k, n)) c.imag(0.0);
    r.entries[static_cast<Eigen::Index>(i)] = c;
  }
  return r;
}

TorqueSignal reconstruct(const ReductionMap& map, const ReducedVector& reduced) {
  const std::size_t n = map.signal_length();
  if (static_cast<std::size_t>(reduced.entries.size()) != map.retained()) {
    throw DataError("reconstruct: reduced vector has " + std::to_string(reduced.entries.size()) +
                    " entries, map retains " + std::to_string(map.retained()));
  }
  Spectrum full{Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n))};
  for (std::size_t i = 0; i < map.retained(); ++i) {
    const std::size_t k = map.indices()[i];
    std::complex<double> c = reduced.entries[static_cast<Eigen::Index>(i)];
    if (k == 0 || is_nyquist(k, n)) {
      full.coefficients[static_cast<Eigen::Index>(k)] = c.real();
    } else {
      full.coefficients[static_cast<Eigen::Index>(k)] = c;
      full.coefficients[static_cast<Eigen::Index>(n - k)] = std::conj(c);
    }
  }
  return dft_inverse(full);
}

Eigen::VectorXd flatten(const ReductionMap& map, const ReducedVector& reduced) {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(map.real_dimension()));
  Eigen::Index pos = 0;
  for (std::size_t i = 0; i < map.retained(); ++i) {
    const std::size_t k = map.indices()[i];
    const auto c = reduced.entries[static_cast<Eigen::Index>(i)];
    flat[pos++] = c.real();
    if (!(k == 0 || is_nyquist(k, map.signal_length()))) flat[pos++] = c.imag();
  }
  return flat;
}

ReducedVector unflatten(const ReductionMap& map, const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != map.real_dimension()) {
    throw DataError("unflatten: expected " + std::to_string(map.real_dimension()) +
                    " real values, got " + std::to_string(flat.size()));
  }
  ReducedVector r{Eigen::VectorXcd(static_cast<Eigen::Index>(map.retained()))};
  Eigen::Index pos = 0;
  for (std::size_t i = 0; i < map.retained(); ++i) {
    const std::size_t k = map.indices()[i];
    const double re = flat[pos++];
    const double im = (k == 0 || is_nyquist(k, map.signal_length())) ? 0.0 : flat[pos++];
    r.entries[static_cast<Eigen::Index>(i)] = {re, im};
  }
  return r;
}

Eigen::VectorXd reconstruction_l1_errors(const Eigen::MatrixXd& signals, const ReductionMap& map) {
  Eigen::VectorXd errors(signals.rows());
  parallel_for(static_cast<std::size_t>(signals.rows()), [&](std::size_t m) {
    const Eigen::VectorXd row = signals.row(static_cast<Eigen::Index>(m)).transpose();
    const std::span<const double> view(row.data(), static_cast<std::size_t>(row.size()));
    const TorqueSignal rebuilt = reconstruct(map, reduce(map, view));
    errors[static_cast<Eigen::Index>(m)] = (row - rebuilt.values).lpNorm<1>();
  });
  return errors;
}

double reconstruction_mae(const Eigen::MatrixXd& signals, const ReductionMap& map,
                          MaeNormalization normalization) {
  if (signals.rows() == 0) throw DataError("reconstruction_mae: empty dataset");
  double mae = reconstruction_l1_errors(signals, map).mean();
  if (normalization == MaeNormalization::per_element) mae /= static_cast<double>(signals.cols());
  return mae;
}

json to_json(const ReductionMap& map) {
  return json{{"n", map.signal_length()}, {"indices", map.indices()}};
}

ReductionMap reduction_from_json(const json& j) {
  try {
    return ReductionMap(j.at("n").get<std::size_t>(), j.at("indices").get<std::vector<std::size_t>>());
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid reduction map JSON: ") + e.what());
  }
}

}  // namespace rom

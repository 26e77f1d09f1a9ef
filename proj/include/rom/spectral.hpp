#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rom/io.hpp"
#include "rom/signal.hpp"

namespace rom {

/// Full DFT of a real signal, c_k for k = 0..N-1.
struct Spectrum {
  Eigen::VectorXcd coefficients;

  std::size_t size() const noexcept { return static_cast<std::size_t>(coefficients.size()); }
};

/// Mean power contribution per bin and the ranking of the merged
/// (k, N-k) pairs, represented by k = 0..N/2, in descending contribution.
struct ComponentRanking {
  Eigen::VectorXd avg_contribution;  // length N, mean of |c_k|^2
  std::vector<std::size_t> order;    // permutation of 0..N/2
};

/// Retained nonnegative-frequency bins; conjugates are restored on
/// reconstruction.
class ReductionMap {
 public:
  ReductionMap(std::size_t n, std::vector<std::size_t> indices);

  std::size_t signal_length() const noexcept { return n_; }
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }
  std::size_t retained() const noexcept { return indices_.size(); }

  /// Real dimension of the flattened reduced vector: bin 0 and the Nyquist bin
  /// contribute one real value, every other bin two.
  std::size_t real_dimension() const noexcept;

  bool operator==(const ReductionMap&) const = default;

 private:
  std::size_t n_;
  std::vector<std::size_t> indices_;
};

struct ReducedVector {
  Eigen::VectorXcd entries;  // one per retained bin, ascending bin order
};

enum class MaeNormalization { per_signal, per_element };

Spectrum dft_forward(std::span<const double> signal);
Spectrum dft_forward(const TorqueSignal& signal);

/// Inverse DFT. Throws NumericalError if the imaginary residue exceeds 1e-9
/// relative to the signal scale (the spectrum is not Hermitian).
TorqueSignal dft_inverse(const Spectrum& spectrum);

/// PS_k = |c_k|^2 / N.
Eigen::VectorXd power_spectrum(const Spectrum& spectrum);

ComponentRanking rank_components(std::span<const Spectrum> spectra);
/// Ranks the rows of an M x N signal matrix.
ComponentRanking rank_components(const Eigen::MatrixXd& signals);

/// Keeps the R top-ranked merged bins, sorted ascending.
ReductionMap build_reduction(const ComponentRanking& ranking, std::size_t retained);

ReducedVector reduce(const ReductionMap& map, std::span<const double> signal);
TorqueSignal reconstruct(const ReductionMap& map, const ReducedVector& reduced);

/// [c0.re, c_k1.re, c_k1.im, c_k2.re, ...] in ascending bin order; bin 0 and
/// the Nyquist bin emit the real part only.
Eigen::VectorXd flatten(const ReductionMap& map, const ReducedVector& reduced);
ReducedVector unflatten(const ReductionMap& map, const Eigen::VectorXd& flat);

/// Per-row l1 norm of tau - R^-1(R(tau)).
Eigen::VectorXd reconstruction_l1_errors(const Eigen::MatrixXd& signals, const ReductionMap& map);

/// per_signal: (1/M) sum_m ||tau_m - R^-1(R(tau_m))||_1; per_element additionally divides by N.
double reconstruction_mae(const Eigen::MatrixXd& signals, const ReductionMap& map,
                          MaeNormalization normalization);

json to_json(const ReductionMap& map);
ReductionMap reduction_from_json(const json& j);

}  // namespace rom

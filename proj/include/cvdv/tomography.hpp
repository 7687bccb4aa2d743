#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cvdv/fock.hpp"
#include "cvdv/measurement.hpp"

namespace cvdv {

struct TomographyJob {
  std::vector<QuadratureRecord> records;
  int dim = 6;
  double eta_corr = 1.0;
  int max_iterations = 2000;
  /// Stop once the log-likelihood gain per sample falls below this.
  double tolerance = 1e-10;
  int phase_bins = 12;  ///< over [0, π); (θ + π, x) is folded onto (θ, −x)
  int x_bins = 128;
  double x_max = 8.0;
  /// Retry a step that lowers the likelihood with (I + εR)ρ(I + εR), ε = 0.5, 0.25, ...
  bool diluted_fallback = true;

  /// Throws ConfigError on out-of-range settings.
  void validate() const;
};

struct TomographyResult {
  DensityOperator state;  ///< single mode, labelled after the records
  std::vector<double> log_likelihood;  ///< entry 0 is the maximally mixed start
  int iterations = 0;
  bool converged = false;
  std::size_t dropped_records = 0;  ///< |x| beyond x_max
  std::vector<std::string> warnings;
};

/// RρR maximum-likelihood reconstruction with the loss-corrected binned
/// quadrature POVM L†(Π). Non-convergence is reported through the flag, not
/// thrown.
TomographyResult maxlik_reconstruct(const TomographyJob& job);

struct PhaseEstimate {
  double theta;
  bool clamped;  ///< statistic fell outside the invertible range
};

/// Per-window θ ∈ [0, π/2] from the sample variance, inverting
/// Var X_θ = [cosh 2ζ + sinh 2ζ cos 2θ]/2 of squeezed_vacuum(ζ).
/// Trailing records that do not fill a window are ignored.
std::vector<PhaseEstimate> estimate_phase_from_variance(std::span<const QuadratureRecord> records,
                                                        std::size_t window_size, double zeta);

/// θ_D − θ_C ∈ [0, π] from ⟨X_C X_D⟩ = α cos(θ_C − θ_D).
PhaseEstimate estimate_phase_difference(std::span<const QuadraturePair> pairs, double alpha);

/// φ from ⟨X_0⟩ = √2|α_eff| cos φ; records at θ = π/2 (if any) pick the sign of
/// sin φ, otherwise φ ∈ [0, π].
PhaseEstimate estimate_input_phase(std::span<const QuadratureRecord> records, double alpha_eff);

}  // namespace cvdv

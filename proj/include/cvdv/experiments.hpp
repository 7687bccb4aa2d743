#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cvdv/protocol.hpp"
#include "cvdv/serialization.hpp"
#include "cvdv/tomography.hpp"

namespace cvdv {

struct SweepSpec {
  double start = 0.0;
  double stop = 1.0;
  int steps = 10;
  bool endpoint = true;

  std::vector<double> values() const;
};

struct NoiseModel {
  enum class Interpretation { kSigma, kMeanAbsDeviation };

  double theta_c_width = 0.53;     ///< resource phase jitter θ_C, rad
  double phase_diff_width = 0.5;   ///< error of the estimated θ_D − θ_C, rad
  Interpretation interpretation = Interpretation::kSigma;

  /// Gaussian σ; equals width·√(π/2) for the mean-absolute-deviation reading.
  double theta_c_sigma() const;
  double phase_diff_sigma() const;
};

struct TomographySettings {
  double phi = 0.0;
  std::size_t samples = 500000;
  int phases = 48;  ///< equally spaced local-oscillator phases over [0, 2π)
  int dim = 6;
  double eta_corr = 0.54;
  int phase_bins = 12;
  int x_bins = 128;
  double x_max = 8.0;
  int max_iterations = 2000;
  double tolerance = 1e-10;
  double fidelity_threshold = 0.97;
};

struct ExperimentConfig {
  std::string resource_kind = "ideal";  ///< "ideal" or "physical"
  double alpha = 0.42;
  PhysicalResource physical{};
  std::optional<double> mix_ratio;  ///< physical only; tuned to target_rate_ratio when absent
  double target_rate_ratio = 1.0 / 3.0;

  double spcm2_eta = 0.1;
  double homodyne_eta = 0.54;

  int dim_a = 15;
  ResourceTruncation truncation{};

  double theta_c = 0.0;
  double theta_d = 0.0;
  BellDetection detection = BellDetection::kClick;

  SweepSpec phi_sweep{0.0, 2.0 * kPi, 36, false};
  SweepSpec alpha_sweep{0.05, 1.0, 20, true};

  NoiseModel noise{};
  int trials = 1000;
  std::optional<std::uint64_t> rng_seed;

  TomographySettings tomography{};
  PhaseSpaceGridSpec wigner{};
  std::string output_dir = "out";

  /// Throws ConfigError on any violated invariant.
  void validate() const;
  /// Seed for stochastic runners; throws ConfigError when unset.
  std::uint64_t seed() const;

  Json to_json() const;
  /// Strict: unknown keys and type mismatches raise ConfigError.
  static ExperimentConfig from_json(const Json& j);
};

/// Applies `path.to.key=value` to a config document. The value is parsed as
/// JSON when possible and kept as a string otherwise.
void apply_override(Json& doc, std::string_view assignment);

/// Defaults, merged with the file (if any), then the overrides in order.
ExperimentConfig load_config(const std::optional<std::filesystem::path>& path,
                             const std::vector<std::string>& overrides);

// ---------------------------------------------------------------------------
// Runners. Each returns plain data; the write_* helpers emit the artifacts and
// return the paths written.

struct ResourceBuild {
  DensityOperator state;  ///< modes (C, D)
  double herald_probability = 1.0;
  double mix_ratio = 0.0;        ///< physical only
  double fitted_alpha = 0.0;     ///< physical only
  double fidelity_to_ideal = 1.0;
  double alpha_plus = 0.0;       ///< cat amplitude of the |1⟩_D conditional
  double alpha_minus = 0.0;      ///< cat amplitude of the |0⟩_D conditional
};

/// Ideal resource at config.alpha, or the heralded physical resource with its
/// D-mode phase aligned to the ideal convention.
ResourceBuild build_resource(const ExperimentConfig& config);

struct ResourceFigure {
  ResourceBuild resource;
  std::vector<std::string> names;  ///< d1, d0, dplus, dminus
  std::vector<WignerGrid> grids;
  std::vector<double> projection_probabilities;
  std::vector<double> wigner_origin;  ///< W(0, 0) per projection
};

ResourceFigure run_resource_figure(const ExperimentConfig& config);

struct BellRow {
  double alpha;
  double p_phi_plus;
  double p_phi_minus;
  double p_phi_plus_approx;
  double p_phi_minus_approx;
  double ratio_exact;
  double ratio_approx;
};

std::vector<BellRow> run_bell_figure(const ExperimentConfig& config);

struct TeleportRow {
  double phi;
  Matrix rho;  ///< top-left 2×2 block of the output
  double fidelity_ideal;
  double fidelity_analytic;
  double success_probability;
  double leakage;  ///< population outside {|0⟩, |1⟩}
};

std::vector<TeleportRow> run_teleport_sweep(const ExperimentConfig& config);

struct MonteCarloRow {
  double phi;
  double fidelity_noiseless;
  double fidelity_of_mean;   ///< fidelity of the trial-averaged output
  double fidelity_mean;      ///< mean of per-trial fidelities
  double fidelity_std;
  double phase_error_std;    ///< rad, spread of arg ρ_10 − φ across trials
};

struct MonteCarloSummary {
  std::vector<MonteCarloRow> rows;
  double mean_noiseless = 0.0;
  double mean_noisy = 0.0;
  double relative_drop = 0.0;
  double peak_to_trough_noiseless = 0.0;
  double peak_to_trough_noisy = 0.0;
  double oscillation_suppression = 0.0;  ///< 1 − noisy/noiseless peak-to-trough
  double phase_error_std_deg = 0.0;      ///< pooled over all φ
};

MonteCarloSummary run_noise_montecarlo(const ExperimentConfig& config);

struct TomographyRoundtrip {
  double phi;
  DensityOperator truth;
  TomographyResult reconstruction;
  double fidelity;
  double phi_estimate;
  bool eta_corr_mismatch;
  bool fidelity_below_threshold;
  bool likelihood_monotone;

  bool flagged() const { return eta_corr_mismatch || fidelity_below_threshold || !likelihood_monotone; }
};

TomographyRoundtrip run_tomography_roundtrip(const ExperimentConfig& config);

std::vector<std::filesystem::path> write_resource_figure(const ResourceFigure& fig,
                                                         const std::filesystem::path& dir);
std::filesystem::path write_bell_figure(const std::vector<BellRow>& rows,
                                        const std::filesystem::path& dir);
std::filesystem::path write_teleport_sweep(const std::vector<TeleportRow>& rows,
                                           const std::filesystem::path& dir);
std::vector<std::filesystem::path> write_noise_montecarlo(const MonteCarloSummary& summary,
                                                          const std::filesystem::path& dir);
std::vector<std::filesystem::path> write_tomography_roundtrip(const TomographyRoundtrip& report,
                                                              const std::filesystem::path& dir);

/// Writes the reconstruction JSON and the likelihood trace CSV next to each other.
std::vector<std::filesystem::path> write_reconstruction(const TomographyResult& result,
                                                        const std::filesystem::path& json_path);

}  // namespace cvdv

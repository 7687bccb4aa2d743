#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cvdv/fock.hpp"
#include "cvdv/measurement.hpp"

namespace cvdv {

// ---------------------------------------------------------------------------
// Resource state

struct IdealResource {
  double alpha = 0.42;
};

/// Two-crystal heralded preparation: squeezed vacuum in C, two-mode squeezed
/// vacuum in (D, E), a tap of C into T, T and E mixed in front of the herald
/// detector.
struct PhysicalResource {
  double zeta = 0.18;
  double lambda = 0.1;
  double tap_reflectivity = 0.05;
  double spcm1_eta = 0.1;
  /// Power fraction of T reaching the herald detector; the rest comes from E.
  double mix_ratio = 0.5;
};

struct ResourceTruncation {
  int dim_c = 15;
  int dim_d = 15;
  int dim_ancilla = 5;  ///< tap mode T and idler mode E
  double tail_tolerance = kDefaultTailTolerance;
};

struct ResourceSpec {
  std::variant<IdealResource, PhysicalResource> flavor = IdealResource{};
  ResourceTruncation truncation{};

  /// Throws ConfigError when the invariants of the flavor fail.
  void validate() const;
};

/// (1/2)[(1/N_−)|cat_−⟩_C|0⟩_D + (1/N_+)|cat_+⟩_C|1⟩_D] over modes (C, D).
FockState ideal_resource(double alpha, int dim_c = 15, int dim_d = 15,
                         double tail_tolerance = kDefaultTailTolerance);

struct HeraldedResource {
  DensityOperator state;  ///< modes (C, D)
  double herald_probability;
};

HeraldedResource physical_resource(const PhysicalResource& params,
                                   const ResourceTruncation& truncation = {});

/// Herald click probability alone (cheaper than physical_resource).
double herald_probability(const PhysicalResource& params, const ResourceTruncation& truncation = {});

/// Herald rates from crystal I alone (λ = 0) and crystal II alone (ζ = 0).
struct PathRates {
  double crystal_one;
  double crystal_two;
  double ratio() const { return crystal_one / crystal_two; }
};

PathRates path_rates(const PhysicalResource& params, const ResourceTruncation& truncation = {});

/// Bisection on mix_ratio so that the path-rate ratio R_I/R_II hits `target`,
/// to 1e-6 in mix_ratio.
double tune_mix_ratio(const PhysicalResource& params, double target,
                      const ResourceTruncation& truncation = {});

/// (1 − e^{−2α_−²}) / (1 + e^{−2α_+²})
double rate_ratio_condition(double alpha_plus, double alpha_minus);

/// Amplitude of the cat of the given parity with maximal fidelity to `rho`.
struct CatFit {
  double alpha;
  double fidelity;
  double phase = 0.0;  ///< D-mode phase offset, ideal-resource fits only
};

CatFit fit_cat_amplitude(const DensityOperator& rho, CatParity parity, double alpha_max = 2.0);

/// Ideal-resource amplitude and D phase offset θ with maximal fidelity of
/// phase_shift(ideal_resource(α), D, θ) to a (C, D) state.
CatFit fit_ideal_resource(const DensityOperator& rho, double alpha_max = 1.5);

// ---------------------------------------------------------------------------
// CV qubit and Bell basis

/// X|α⟩ + Y|−α⟩ with real amplitude α.
class CvQubit {
 public:
  /// Throws DegenerateStateError when ⟨in|in⟩ deviates from 1 by more than 1e-10.
  CvQubit(Complex x, Complex y, double alpha);
  /// Rescales (x, y) to unit norm.
  static CvQubit normalized(Complex x, Complex y, double alpha);

  Complex x() const { return x_; }
  Complex y() const { return y_; }
  double alpha() const { return alpha_; }
  /// |X|² + |Y|² + 2 Re(X* Y) e^{−2α²}
  static double norm2(Complex x, Complex y, double alpha);

  FockState state(int dim, std::string label = "A",
                  double tail_tolerance = kDefaultTailTolerance) const;

 private:
  Complex x_;
  Complex y_;
  double alpha_;
};

enum class BellKind { kPhiPlus, kPhiMinus, kPsiPlus, kPsiMinus };

const char* to_string(BellKind kind);

/// |Φ±⟩ ∝ |α,α⟩ ± |−α,−α⟩ and |Ψ±⟩ ∝ |α,−α⟩ ± |−α,α⟩ over modes (A, C).
FockState bell_state(BellKind kind, double alpha, int dim_a = 15, int dim_c = 15,
                     double tail_tolerance = kDefaultTailTolerance);

/// Exact click probability of the single-detector Bell measurement: symmetric
/// beam splitter on (A, C), click POVM on A.
double bell_click_probability(BellKind kind, double alpha, double eta, int dim = 15);

/// Small-η expansion: 4ηα⁴ for Φ⁺, η(1 + 4α⁴/3) for Φ⁻, 0 for Ψ±.
double bell_click_probability_approx(BellKind kind, double alpha, double eta);

// ---------------------------------------------------------------------------
// Teleportation

enum class BellDetection {
  kClick,           ///< click POVM on A, identity on C
  kIdealProjector,  ///< rank-one projection ⟨1|_A ⟨0|_C
};

struct TeleportSettings {
  double spcm2_eta = 0.1;
  double theta_c = 0.0;
  double theta_d = 0.0;
  BellDetection detection = BellDetection::kClick;
};

struct TeleportResult {
  DensityOperator output;  ///< mode D
  double success_probability;
};

/// Eigen-ensemble of a mixed resource; weights sum to 1 after dropping
/// components lighter than `cutoff`.
struct ResourceEnsemble {
  std::vector<double> weights;
  std::vector<FockState> components;
};

ResourceEnsemble resource_ensemble(const DensityOperator& rho, double cutoff = 1e-12);

/// Reusable teleportation circuit for fixed truncations; caches the
/// symmetric beam-splitter unitary and the click POVM.
class Teleporter {
 public:
  Teleporter(int dim_a, int dim_c, int dim_d, double spcm2_eta);

  TeleportResult run(const FockState& input, const FockState& resource, double theta_c,
                     double theta_d, BellDetection detection = BellDetection::kClick) const;
  TeleportResult run(const FockState& input, const DensityOperator& resource, double theta_c,
                     double theta_d, BellDetection detection = BellDetection::kClick) const;
  TeleportResult run(const FockState& input, const ResourceEnsemble& resource, double theta_c,
                     double theta_d, BellDetection detection = BellDetection::kClick) const;

  int dim_a() const { return dim_a_; }
  int dim_c() const { return dim_c_; }
  int dim_d() const { return dim_d_; }

 private:
  int dim_a_;
  int dim_c_;
  int dim_d_;
  Matrix unitary_;
  RealVector click_;
};

TeleportResult teleport(const FockState& input, const FockState& resource,
                        const TeleportSettings& settings);
TeleportResult teleport(const FockState& input, const DensityOperator& resource,
                        const TeleportSettings& settings);

/// Closed-form second-order output state of mode D for input |α e^{iφ}⟩.
DensityOperator analytic_output(double phi, double alpha, double theta_c, double theta_d);

/// F = 1 − (α²/2)(1 − cos 2(φ − θ_C))
double analytic_fidelity(double phi, double alpha, double theta_c);

/// (e^{iθ_C}|0⟩ + e^{i(θ_D + φ)}|1⟩)/√2 embedded in `dim` levels of mode D.
FockState teleport_target(double phi, double theta_c, double theta_d, int dim = 2);

}  // namespace cvdv

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cvdv/fock.hpp"

namespace cvdv {

enum class BeamSplitterConvention {
  /// (α_i, α_j) → (√t α_i + √(1-t) α_j, √t α_j − √(1-t) α_i)
  kRealAntisymmetric,
};

struct BeamSplitterSpec {
  double transmissivity = 0.5;  ///< power transmissivity t ∈ [0, 1]
  std::string mode_i;
  std::string mode_j;
  BeamSplitterConvention convention = BeamSplitterConvention::kRealAntisymmetric;
};

/// Two-mode unitary on the product space C^{dim_i} ⊗ C^{dim_j}, obtained by
/// exponentiating the truncated coupling generator θ(a_i† a_j − a_i a_j†)
/// with cos θ = √t.
Matrix beam_splitter_unitary(double transmissivity, int dim_i, int dim_j);

FockState beam_splitter(const FockState& state, const BeamSplitterSpec& spec);
DensityOperator beam_splitter(const DensityOperator& rho, const BeamSplitterSpec& spec);
/// Same as above with a precomputed unitary (see beam_splitter_unitary).
FockState beam_splitter(const FockState& state, const BeamSplitterSpec& spec, const Matrix& unitary);

/// Multiplies the amplitude of Fock level n in `mode` by e^{inθ}.
FockState phase_shift(const FockState& state, std::string_view mode, double theta);
DensityOperator phase_shift(const DensityOperator& rho, std::string_view mode, double theta);

/// Kraus operators of the pure-loss channel with transmission η:
/// K_k = Σ_n sqrt(C(n,k) η^{n-k} (1-η)^k) |n-k⟩⟨n|.
std::vector<Matrix> loss_kraus(double eta, int dim);

/// Binomial photon loss on one mode, equal to mixing with vacuum on a
/// beam splitter of transmissivity η and discarding the reflected port.
DensityOperator loss_channel(const DensityOperator& rho, std::string_view mode, double eta);

/// Adjoint (Heisenberg-picture) loss map acting on a single-mode effect.
Matrix loss_adjoint(const Matrix& effect, double eta);

struct SubtractionResult {
  FockState state;
  double success_weight;  ///< ‖â ψ‖² before renormalization
};

SubtractionResult photon_subtract(const FockState& state, std::string_view mode);

}  // namespace cvdv

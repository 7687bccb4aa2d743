#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvdv/errors.hpp"
#include "cvdv/linalg.hpp"

namespace cvdv {

inline constexpr double kDefaultTailTolerance = 1e-8;

/// Ordered list of modes with their truncation dimensions. Composite basis
/// indices are row-major: the first mode is the most significant digit.
class ModeLayout {
 public:
  ModeLayout() = default;
  ModeLayout(std::vector<int> dims, std::vector<std::string> labels);

  std::size_t num_modes() const { return dims_.size(); }
  const std::vector<int>& dims() const { return dims_; }
  const std::vector<std::string>& labels() const { return labels_; }
  int dim(std::size_t mode) const { return dims_.at(mode); }
  Eigen::Index total_dim() const;

  bool contains(std::string_view label) const;
  /// Throws ModeError for unknown labels.
  std::size_t index_of(std::string_view label) const;
  Eigen::Index stride(std::size_t mode) const;

  /// Sub-layout with the given modes, in the given order.
  ModeLayout select(std::span<const std::size_t> modes) const;
  /// Throws ModeError on duplicate labels.
  ModeLayout concat(const ModeLayout& other) const;

  bool same_dims(const ModeLayout& other) const { return dims_ == other.dims_; }
  bool operator==(const ModeLayout& other) const = default;

 private:
  std::vector<int> dims_;
  std::vector<std::string> labels_;
};

/// Pure state over a truncated multi-mode Fock basis.
class FockState {
 public:
  FockState(ModeLayout layout, Vector amplitudes);

  const ModeLayout& layout() const { return layout_; }
  const Vector& amplitudes() const { return amplitudes_; }
  std::size_t num_modes() const { return layout_.num_modes(); }

  double norm() const { return amplitudes_.norm(); }
  /// Throws DegenerateStateError for the zero vector.
  FockState normalized() const;
  /// Largest marginal probability of the top Fock level over all modes.
  double tail_mass() const;
  bool is_valid(double tail_tolerance = kDefaultTailTolerance) const;

  Complex amplitude(std::span<const int> occupation) const;
  FockState relabeled(std::vector<std::string> labels) const;

 private:
  ModeLayout layout_;
  Vector amplitudes_;
};

/// Density matrix over a truncated multi-mode Fock basis.
class DensityOperator {
 public:
  DensityOperator(ModeLayout layout, Matrix matrix);
  explicit DensityOperator(const FockState& pure);

  const ModeLayout& layout() const { return layout_; }
  const Matrix& matrix() const { return matrix_; }
  std::size_t num_modes() const { return layout_.num_modes(); }

  double trace() const { return matrix_.trace().real(); }
  double purity() const;
  DensityOperator normalized() const;
  double tail_mass() const;
  /// Hermitian within 1e-10, eigenvalues above -1e-9 and unit trace.
  bool is_physical(double tol = 1e-10) const;
  DensityOperator relabeled(std::vector<std::string> labels) const;

 private:
  ModeLayout layout_;
  Matrix matrix_;
};

/// Single-mode operator. POVM-flagged operators are checked for 0 <= E <= 1.
class ModeOperator {
 public:
  explicit ModeOperator(Matrix matrix, bool povm = false);

  int dim() const { return static_cast<int>(matrix_.rows()); }
  const Matrix& matrix() const { return matrix_; }
  bool is_povm() const { return povm_; }
  ModeOperator adjoint() const { return ModeOperator(matrix_.adjoint()); }

 private:
  Matrix matrix_;
  bool povm_;
};

enum class CatParity { kPlus, kMinus };

/// Amplitude and phase parameters shared by the protocol formulas.
struct AmplitudeParams {
  Complex alpha{0.0, 0.0};
  double zeta = 0.0;
  double phi = 0.0;
  double theta_c = 0.0;
  double theta_d = 0.0;

  double n_plus() const;
  double n_minus() const;
};

/// N_± = 1/sqrt(2 ± 2 exp(-2|α|²)).
double cat_normalization(Complex alpha, CatParity parity);

FockState vacuum(int dim, std::string label = "A");
FockState fock_basis_state(int n, int dim, std::string label = "A");
FockState coherent_state(Complex alpha, int dim, std::string label = "A",
                         double tail_tolerance = kDefaultTailTolerance);
FockState cat_state(Complex alpha, CatParity parity, int dim, std::string label = "A",
                    double tail_tolerance = kDefaultTailTolerance);
/// Momentum-squeezed vacuum S(ζ)|0⟩ (positive coefficients for ζ > 0).
FockState squeezed_vacuum(double zeta, int dim, std::string label = "A",
                          double tail_tolerance = kDefaultTailTolerance);
/// ∝ Σ λ^n |n⟩|n⟩.
FockState two_mode_squeezed(double lambda, int dim_first, int dim_second,
                            std::string label_first = "D", std::string label_second = "E",
                            double tail_tolerance = kDefaultTailTolerance);

FockState tensor(std::span<const FockState> states);
FockState tensor(const FockState& a, const FockState& b);
DensityOperator tensor(const DensityOperator& a, const DensityOperator& b);

/// Zero-pads or crops each mode to `dims`. Cropping that discards more than
/// `tail_tolerance` of probability throws TruncationError.
FockState resize_modes(const FockState& state, const std::vector<int>& dims,
                       double tail_tolerance = kDefaultTailTolerance);
DensityOperator resize_modes(const DensityOperator& rho, const std::vector<int>& dims,
                             double tail_tolerance = kDefaultTailTolerance);

double fidelity(const FockState& x, const FockState& y);
double fidelity(const FockState& x, const DensityOperator& y);
double fidelity(const DensityOperator& x, const FockState& y);
/// Uhlmann fidelity (tr sqrt(sqrt(ρ) σ sqrt(ρ)))².
double fidelity(const DensityOperator& x, const DensityOperator& y);

DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::string>& keep);
/// Reduced state of a pure state without forming the full projector.
DensityOperator partial_trace(const FockState& psi, const std::vector<std::string>& keep);

ModeOperator annihilation_op(int dim);
ModeOperator creation_op(int dim);
ModeOperator number_op(int dim);
ModeOperator identity_op(int dim);
/// X̂_θ = (â e^{-iθ} + â† e^{iθ})/√2.
ModeOperator quadrature_op(int dim, double theta);

/// Applies a single-mode operator to one mode (no renormalization).
FockState apply(const ModeOperator& op, const FockState& state, std::string_view mode);
/// ⟨ψ|O|ψ⟩ for a single-mode operator.
Complex expectation(const FockState& state, const ModeOperator& op, std::string_view mode);
Complex expectation(const DensityOperator& rho, const ModeOperator& op, std::string_view mode);
/// ⟨O_1 ⊗ O_2⟩ on two distinct modes.
Complex expectation(const DensityOperator& rho, const ModeOperator& op1, std::string_view mode1,
                    const ModeOperator& op2, std::string_view mode2);

}  // namespace cvdv

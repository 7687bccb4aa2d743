#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cvdv/fock.hpp"

namespace cvdv {

/// One homodyne sample. θ is wrapped into [0, 2π) on construction.
class QuadratureRecord {
 public:
  QuadratureRecord(std::string mode, double theta, double x);

  const std::string& mode() const { return mode_; }
  double theta() const { return theta_; }
  double x() const { return x_; }

 private:
  std::string mode_;
  double theta_;
  double x_;
};

/// Uniform quadrature grid used for gridded distributions and sampling.
struct QuadratureGrid {
  double x_min = -8.0;
  double x_max = 8.0;
  int points = 2048;

  RealVector points_vector() const;
  double step() const { return (x_max - x_min) / (points - 1); }
};

struct PhaseSpaceGridSpec {
  double x_min = -4.0;
  double x_max = 4.0;
  int x_steps = 161;
  double p_min = -4.0;
  double p_max = 4.0;
  int p_steps = 161;
};

/// Wigner function sampled on a rectangular grid; values(i, j) = W(x_j, p_i).
struct WignerGrid {
  PhaseSpaceGridSpec spec;
  RealMatrix values;

  double x_at(int j) const;
  double p_at(int i) const;
  double dx() const;
  double dp() const;
  /// Riemann sum of W dx dp.
  double integral() const;
};

template <typename State>
struct Conditioned {
  State state;
  double probability;
};

/// Click POVM Σ_n [1 − (1−η)^n] |n⟩⟨n| of a non-resolving detector.
ModeOperator click_povm(double eta, int dim);

/// Measurement update for an effect on one mode. With `discard` the measured
/// mode is traced out; otherwise the Lüders update √E ρ √E is returned.
Conditioned<DensityOperator> condition_on(const DensityOperator& rho, std::string_view mode,
                                          const ModeOperator& effect, bool discard);
Conditioned<DensityOperator> condition_on(const FockState& psi, std::string_view mode,
                                          const ModeOperator& effect, bool discard);
/// Rank-one effect |v⟩⟨v| given by a single-mode state; pure inputs stay pure.
Conditioned<FockState> condition_on(const FockState& psi, std::string_view mode,
                                    const FockState& projector, bool discard);
Conditioned<DensityOperator> condition_on(const DensityOperator& rho, std::string_view mode,
                                          const FockState& projector, bool discard);

/// Harmonic-oscillator eigenfunctions ψ_n(x_k) for the convention
/// X̂ = (â + â†)/√2; row n, column k.
RealMatrix hermite_functions(int dim, const RealVector& x);

/// Vector v with ⟨n|x_θ⟩ = v_n, i.e. the quadrature eigenstate at (θ, x).
Vector quadrature_eigenvector(int dim, double theta, double x);

/// p(x|θ) on the given ascending grid. Throws GridCoverageError when the grid
/// does not span ±6 standard deviations around the mean.
RealVector quadrature_distribution(const DensityOperator& rho, std::string_view mode, double theta,
                                   const RealVector& x_grid);
RealVector quadrature_distribution(const FockState& psi, std::string_view mode, double theta,
                                   const RealVector& x_grid);

/// One sample per entry of `thetas`, by inverse-CDF over the gridded density.
std::vector<QuadratureRecord> sample_quadratures(const DensityOperator& rho, std::string_view mode,
                                                 std::span<const double> thetas, std::uint64_t seed,
                                                 const QuadratureGrid& grid = {});
std::vector<QuadratureRecord> sample_quadratures(const FockState& psi, std::string_view mode,
                                                 std::span<const double> thetas, std::uint64_t seed,
                                                 const QuadratureGrid& grid = {});

using QuadraturePair = std::pair<QuadratureRecord, QuadratureRecord>;

/// Jointly distributed samples of two modes: the first mode is drawn from its
/// marginal, the second from the state conditioned on that outcome.
std::vector<QuadraturePair> sample_joint_quadratures(const FockState& psi, std::string_view mode1,
                                                     double theta1, std::string_view mode2,
                                                     double theta2, std::size_t count,
                                                     std::uint64_t seed,
                                                     const QuadratureGrid& grid = {});
std::vector<QuadraturePair> sample_joint_quadratures(const DensityOperator& rho,
                                                     std::string_view mode1, double theta1,
                                                     std::string_view mode2, double theta2,
                                                     std::size_t count, std::uint64_t seed,
                                                     const QuadratureGrid& grid = {});

/// W(x, p) = (1/π) Tr[ρ D(β) Π D†(β)] with β = (x + ip)/√2, evaluated with the
/// closed-form Laguerre matrix elements. Single-mode input only.
WignerGrid wigner(const DensityOperator& rho, const PhaseSpaceGridSpec& spec = {});
WignerGrid wigner(const FockState& psi, const PhaseSpaceGridSpec& spec = {});
double wigner_at(const DensityOperator& rho, double x, double p);

/// CSV with header `mode,theta,x`, full double precision.
void write_quadrature_csv(std::ostream& out, std::span<const QuadratureRecord> records);
std::vector<QuadratureRecord> read_quadrature_csv(std::istream& in);

}  // namespace cvdv

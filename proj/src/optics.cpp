#include "cvdv/optics.hpp"

#include <algorithm>
#include <cmath>

#include "cvdv/local_ops.hpp"

namespace cvdv {

namespace {

void check_transmissivity(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DimensionError("beam splitter transmissivity outside [0,1]");
}

std::vector<std::size_t> pair_modes(const ModeLayout& layout, const BeamSplitterSpec& spec) {
  const std::size_t i = layout.index_of(spec.mode_i);
  const std::size_t j = layout.index_of(spec.mode_j);
  if (i == j) throw ModeError("beam splitter needs two distinct modes");
  return {i, j};
}

}  // namespace

Matrix beam_splitter_unitary(double transmissivity, int dim_i, int dim_j) {
  check_transmissivity(transmissivity);
  if (dim_i < 1 || dim_j < 1) throw DimensionError("beam splitter needs positive dimensions");
  const double theta = std::acos(std::sqrt(transmissivity));
  // U = exp(θ(a†b − a b†)) = exp(−iH), H = iθ(a†b − a b†). H conserves
  // n_i + n_j, so each total-photon block is exponentiated on its own.
  Matrix u = Matrix::Zero(static_cast<Eigen::Index>(dim_i) * dim_j, static_cast<Eigen::Index>(dim_i) * dim_j);
  for (int total = 0; total <= dim_i + dim_j - 2; ++total) {
    const int n_lo = std::max(0, total - (dim_j - 1));
    const int n_hi = std::min(dim_i - 1, total);
    const int size = n_hi - n_lo + 1;
    Matrix h = Matrix::Zero(size, size);
    for (int k = 0; k + 1 < size; ++k) {
      // ⟨n+1, m−1| a†b |n, m⟩ = √(n+1)√m
      const int n = n_lo + k;
      const double g = std::sqrt(static_cast<double>(n + 1) * (total - n));
      h(k + 1, k) = kI * theta * g;
      h(k, k + 1) = -kI * theta * g;
    }
    const Matrix block = exp_minus_i(h);
    if (!is_unitary(block, 1e-10)) throw NumericalError("beam splitter unitary failed unitarity check");
    for (int r = 0; r < size; ++r) {
      for (int c = 0; c < size; ++c) {
        const Eigen::Index row = static_cast<Eigen::Index>(n_lo + r) * dim_j + (total - n_lo - r);
        const Eigen::Index col = static_cast<Eigen::Index>(n_lo + c) * dim_j + (total - n_lo - c);
        u(row, col) = block(r, c);
      }
    }
  }
  return u;
}

FockState beam_splitter(const FockState& state, const BeamSplitterSpec& spec, const Matrix& unitary) {
  const auto modes = pair_modes(state.layout(), spec);
  const auto split = local::split(state.layout(), modes);
  Vector v = state.amplitudes();
  local::apply_to_vector(v, split, unitary);
  return FockState(state.layout(), std::move(v));
}

FockState beam_splitter(const FockState& state, const BeamSplitterSpec& spec) {
  const auto modes = pair_modes(state.layout(), spec);
  const Matrix u = beam_splitter_unitary(spec.transmissivity, state.layout().dim(modes[0]),
                                         state.layout().dim(modes[1]));
  return beam_splitter(state, spec, u);
}

DensityOperator beam_splitter(const DensityOperator& rho, const BeamSplitterSpec& spec) {
  const auto modes = pair_modes(rho.layout(), spec);
  const Matrix u = beam_splitter_unitary(spec.transmissivity, rho.layout().dim(modes[0]),
                                         rho.layout().dim(modes[1]));
  return DensityOperator(rho.layout(),
                         local::conjugate(rho.matrix(), local::split(rho.layout(), modes), u));
}

namespace {

Matrix phase_matrix(int dim, double theta) {
  Vector d(dim);
  for (int n = 0; n < dim; ++n) d(n) = std::exp(kI * (theta * n));
  return d.asDiagonal();
}

}  // namespace

FockState phase_shift(const FockState& state, std::string_view mode, double theta) {
  return apply(ModeOperator(phase_matrix(state.layout().dim(state.layout().index_of(mode)), theta)),
               state, mode);
}

DensityOperator phase_shift(const DensityOperator& rho, std::string_view mode, double theta) {
  const std::size_t idx = rho.layout().index_of(mode);
  const std::size_t modes[] = {idx};
  return DensityOperator(rho.layout(),
                         local::conjugate(rho.matrix(), local::split(rho.layout(), modes),
                                          phase_matrix(rho.layout().dim(idx), theta)));
}

std::vector<Matrix> loss_kraus(double eta, int dim) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DimensionError("loss efficiency outside [0,1]");
  std::vector<Matrix> kraus;
  kraus.reserve(dim);
  for (int k = 0; k < dim; ++k) {
    Matrix m = Matrix::Zero(dim, dim);
    for (int n = k; n < dim; ++n) {
      // log C(n,k) via lgamma; powers written out so η = 0 or 1 stay exact.
      const double log_binom = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
      const double weight = std::exp(log_binom) * std::pow(eta, n - k) * std::pow(1.0 - eta, k);
      m(n - k, n) = std::sqrt(weight);
    }
    kraus.push_back(std::move(m));
  }
  return kraus;
}

DensityOperator loss_channel(const DensityOperator& rho, std::string_view mode, double eta) {
  const std::size_t idx = rho.layout().index_of(mode);
  const std::size_t modes[] = {idx};
  const auto split = local::split(rho.layout(), modes);
  Matrix out = Matrix::Zero(rho.matrix().rows(), rho.matrix().cols());
  for (const Matrix& k : loss_kraus(eta, rho.layout().dim(idx))) {
    if (k.cwiseAbs().maxCoeff() == 0.0) continue;
    out += local::conjugate(rho.matrix(), split, k);
  }
  return DensityOperator(rho.layout(), std::move(out));
}

Matrix loss_adjoint(const Matrix& effect, double eta) {
  Matrix out = Matrix::Zero(effect.rows(), effect.cols());
  for (const Matrix& k : loss_kraus(eta, static_cast<int>(effect.rows()))) {
    out += k.adjoint() * effect * k;
  }
  return out;
}

SubtractionResult photon_subtract(const FockState& state, std::string_view mode) {
  const std::size_t idx = state.layout().index_of(mode);
  const FockState raw = apply(annihilation_op(state.layout().dim(idx)), state, mode);
  const double weight = raw.amplitudes().squaredNorm();
  if (!(weight > 0.0)) throw ZeroProbabilityError("photon subtraction from vacuum");
  return SubtractionResult{raw.normalized(), weight};
}

}  // namespace cvdv

#include "cvdv/fock.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "cvdv/local_ops.hpp"

namespace cvdv {

// ---------------------------------------------------------------------------
// ModeLayout

ModeLayout::ModeLayout(std::vector<int> dims, std::vector<std::string> labels)
    : dims_(std::move(dims)), labels_(std::move(labels)) {
  if (dims_.size() != labels_.size()) {
    throw DimensionError("mode dims and labels differ in length");
  }
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (dims_[i] < 1) throw DimensionError("mode dimension must be positive");
    for (std::size_t j = 0; j < i; ++j) {
      if (labels_[i] == labels_[j]) throw ModeError("duplicate mode label '" + labels_[i] + "'");
    }
  }
}

Eigen::Index ModeLayout::total_dim() const {
  Eigen::Index total = 1;
  for (int d : dims_) total *= d;
  return total;
}

bool ModeLayout::contains(std::string_view label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

std::size_t ModeLayout::index_of(std::string_view label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw ModeError("unknown mode '" + std::string(label) + "'");
  return static_cast<std::size_t>(it - labels_.begin());
}

Eigen::Index ModeLayout::stride(std::size_t mode) const {
  Eigen::Index s = 1;
  for (std::size_t m = mode + 1; m < dims_.size(); ++m) s *= dims_[m];
  return s;
}

ModeLayout ModeLayout::select(std::span<const std::size_t> modes) const {
  std::vector<int> dims;
  std::vector<std::string> labels;
  for (std::size_t m : modes) {
    dims.push_back(dims_.at(m));
    labels.push_back(labels_.at(m));
  }
  return ModeLayout(std::move(dims), std::move(labels));
}

ModeLayout ModeLayout::concat(const ModeLayout& other) const {
  std::vector<int> dims = dims_;
  std::vector<std::string> labels = labels_;
  dims.insert(dims.end(), other.dims_.begin(), other.dims_.end());
  labels.insert(labels.end(), other.labels_.begin(), other.labels_.end());
  return ModeLayout(std::move(dims), std::move(labels));
}

// ---------------------------------------------------------------------------
// FockState

namespace {

double top_level_marginal(const ModeLayout& layout, const RealVector& populations) {
  double worst = 0.0;
  for (std::size_t m = 0; m < layout.num_modes(); ++m) {
    const int d = layout.dim(m);
    if (d < 2) continue;
    const Eigen::Index stride = layout.stride(m);
    double top = 0.0;
    for (Eigen::Index i = 0; i < populations.size(); ++i) {
      if ((i / stride) % d == d - 1) top += populations(i);
    }
    worst = std::max(worst, top);
  }
  return worst;
}

std::vector<std::size_t> sorted_indices(const ModeLayout& layout,
                                        const std::vector<std::string>& labels) {
  auto idx = local::mode_indices(layout, labels);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

FockState::FockState(ModeLayout layout, Vector amplitudes)
    : layout_(std::move(layout)), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != layout_.total_dim()) {
    throw DimensionError("amplitude vector length does not match mode dims");
  }
}

FockState FockState::normalized() const {
  const double n = norm();
  if (!(n > 0.0)) throw DegenerateStateError("cannot normalize the zero vector");
  return FockState(layout_, amplitudes_ / n);
}

double FockState::tail_mass() const {
  const double n2 = amplitudes_.squaredNorm();
  if (n2 == 0.0) return 0.0;
  return top_level_marginal(layout_, amplitudes_.cwiseAbs2() / n2);
}

bool FockState::is_valid(double tail_tolerance) const {
  return std::abs(norm() - 1.0) < 1e-10 && tail_mass() < tail_tolerance;
}

Complex FockState::amplitude(std::span<const int> occupation) const {
  if (occupation.size() != layout_.num_modes()) {
    throw DimensionError("occupation tuple length does not match mode count");
  }
  Eigen::Index index = 0;
  for (std::size_t m = 0; m < occupation.size(); ++m) {
    if (occupation[m] < 0 || occupation[m] >= layout_.dim(m)) {
      throw DimensionError("occupation outside truncated basis");
    }
    index += occupation[m] * layout_.stride(m);
  }
  return amplitudes_(index);
}

FockState FockState::relabeled(std::vector<std::string> labels) const {
  return FockState(ModeLayout(layout_.dims(), std::move(labels)), amplitudes_);
}

// ---------------------------------------------------------------------------
// DensityOperator

DensityOperator::DensityOperator(ModeLayout layout, Matrix matrix)
    : layout_(std::move(layout)), matrix_(std::move(matrix)) {
  if (matrix_.rows() != layout_.total_dim() || matrix_.cols() != layout_.total_dim()) {
    throw DimensionError("density matrix size does not match mode dims");
  }
}

DensityOperator::DensityOperator(const FockState& pure)
    : layout_(pure.layout()), matrix_(pure.amplitudes() * pure.amplitudes().adjoint()) {}

double DensityOperator::purity() const {
  const double t = trace();
  return (matrix_ * matrix_).trace().real() / (t * t);
}

DensityOperator DensityOperator::normalized() const {
  const double t = trace();
  if (!(t > 0.0)) throw DegenerateStateError("cannot normalize a traceless operator");
  return DensityOperator(layout_, matrix_ / t);
}

double DensityOperator::tail_mass() const {
  const double t = trace();
  if (t == 0.0) return 0.0;
  return top_level_marginal(layout_, matrix_.diagonal().real() / t);
}

bool DensityOperator::is_physical(double tol) const {
  if (!is_hermitian(matrix_, tol)) return false;
  if (std::abs(trace() - 1.0) > tol) return false;
  return hermitian_eigenvalues(matrix_).minCoeff() >= -1e-9;
}

DensityOperator DensityOperator::relabeled(std::vector<std::string> labels) const {
  return DensityOperator(ModeLayout(layout_.dims(), std::move(labels)), matrix_);
}

// ---------------------------------------------------------------------------
// ModeOperator

ModeOperator::ModeOperator(Matrix matrix, bool povm) : matrix_(std::move(matrix)), povm_(povm) {
  if (matrix_.rows() != matrix_.cols()) throw DimensionError("mode operator must be square");
  if (povm_) {
    if (!is_hermitian(matrix_, 1e-10)) throw NumericalError("POVM element is not Hermitian");
    const RealVector ev = hermitian_eigenvalues(matrix_);
    if (ev.minCoeff() < -1e-10 || ev.maxCoeff() > 1.0 + 1e-10) {
      throw NumericalError("POVM element violates 0 <= E <= 1");
    }
  }
}

// ---------------------------------------------------------------------------
// Constructors

double AmplitudeParams::n_plus() const { return cat_normalization(alpha, CatParity::kPlus); }
double AmplitudeParams::n_minus() const { return cat_normalization(alpha, CatParity::kMinus); }

double cat_normalization(Complex alpha, CatParity parity) {
  const double a2 = std::norm(alpha);
  // 2 - 2e^{-2|α|²} via expm1 keeps precision at small |α|.
  const double denom = parity == CatParity::kPlus ? 2.0 + 2.0 * std::exp(-2.0 * a2)
                                                  : -2.0 * std::expm1(-2.0 * a2);
  return 1.0 / std::sqrt(denom);
}

FockState fock_basis_state(int n, int dim, std::string label) {
  if (n < 0 || n >= dim) throw DimensionError("Fock level outside truncated basis");
  Vector v = Vector::Zero(dim);
  v(n) = 1.0;
  return FockState(ModeLayout({dim}, {std::move(label)}), std::move(v));
}

FockState vacuum(int dim, std::string label) { return fock_basis_state(0, dim, std::move(label)); }

namespace {

// Untruncated coherent-state coefficients on the first `dim` levels.
Vector coherent_coefficients(Complex alpha, int dim) {
  Vector c(dim);
  c(0) = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n < dim; ++n) c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  return c;
}

void check_tail(double tail, double tolerance, const char* what) {
  if (tail > tolerance) {
    char buf[128];
    std::snprintf(buf, sizeof buf, ": mass beyond truncation %.3g exceeds tolerance %.3g", tail, tolerance);
    throw TruncationError(std::string(what) + buf);
  }
}

}  // namespace

FockState coherent_state(Complex alpha, int dim, std::string label, double tail_tolerance) {
  if (dim < 2) throw DimensionError("coherent_state requires dim >= 2");
  const Vector c = coherent_coefficients(alpha, dim);
  check_tail(1.0 - c.squaredNorm(), tail_tolerance, "coherent_state");
  return FockState(ModeLayout({dim}, {std::move(label)}), c / c.norm());
}

FockState cat_state(Complex alpha, CatParity parity, int dim, std::string label,
                    double tail_tolerance) {
  if (dim < 2) throw DimensionError("cat_state requires dim >= 2");
  if (parity == CatParity::kMinus && alpha == Complex(0.0, 0.0)) {
    throw DegenerateStateError("odd cat state with zero amplitude is the zero vector");
  }
  const Vector c = coherent_coefficients(alpha, dim);
  Vector v = Vector::Zero(dim);
  const int first = parity == CatParity::kPlus ? 0 : 1;
  for (int n = first; n < dim; n += 2) v(n) = 2.0 * c(n);
  const double exact = 1.0 / std::pow(cat_normalization(alpha, parity), 2);
  check_tail(1.0 - v.squaredNorm() / exact, tail_tolerance, "cat_state");
  if (!(v.norm() > 0.0)) throw DegenerateStateError("cat_state amplitude underflow");
  return FockState(ModeLayout({dim}, {std::move(label)}), v / v.norm());
}

FockState squeezed_vacuum(double zeta, int dim, std::string label, double tail_tolerance) {
  if (dim < 6) throw DimensionError("squeezed_vacuum requires dim >= 6");
  const double t = std::tanh(zeta);
  Vector v = Vector::Zero(dim);
  double c = 1.0 / std::sqrt(std::cosh(zeta));
  v(0) = c;
  for (int n = 2; n < dim; n += 2) {
    // c_{2m}/c_{2m-2} = tanh ζ · sqrt((2m-1)/(2m))
    c *= t * std::sqrt((n - 1.0) / n);
    v(n) = c;
  }
  check_tail(1.0 - v.squaredNorm(), tail_tolerance, "squeezed_vacuum");
  return FockState(ModeLayout({dim}, {std::move(label)}), v / v.norm());
}

FockState two_mode_squeezed(double lambda, int dim_first, int dim_second, std::string label_first,
                            std::string label_second, double tail_tolerance) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw DimensionError("two_mode_squeezed needs 0 <= λ < 1");
  const int levels = std::min(dim_first, dim_second);
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim_first) * dim_second);
  double c = std::sqrt(1.0 - lambda * lambda);
  for (int n = 0; n < levels; ++n) {
    v(static_cast<Eigen::Index>(n) * dim_second + n) = c;
    c *= lambda;
  }
  check_tail(std::pow(lambda, 2 * levels), tail_tolerance, "two_mode_squeezed");
  return FockState(ModeLayout({dim_first, dim_second},
                              {std::move(label_first), std::move(label_second)}),
                   v / v.norm());
}

// ---------------------------------------------------------------------------
// Composition

FockState tensor(const FockState& a, const FockState& b) {
  ModeLayout layout = a.layout().concat(b.layout());
  Vector v = kron(a.amplitudes(), b.amplitudes());
  return FockState(std::move(layout), std::move(v));
}

FockState tensor(std::span<const FockState> states) {
  if (states.empty()) throw DimensionError("tensor of an empty list");
  FockState out = states.front();
  for (std::size_t i = 1; i < states.size(); ++i) out = tensor(out, states[i]);
  return out;
}

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
  ModeLayout layout = a.layout().concat(b.layout());
  Matrix m = kron(a.matrix(), b.matrix());
  return DensityOperator(std::move(layout), std::move(m));
}

namespace {

// Maps each index of the `from` layout to the `to` layout; -1 when the
// occupation does not fit.
std::vector<Eigen::Index> resize_map(const ModeLayout& from, const std::vector<int>& dims) {
  const ModeLayout to(dims, from.labels());
  std::vector<Eigen::Index> map(from.total_dim(), -1);
  for (Eigen::Index i = 0; i < from.total_dim(); ++i) {
    Eigen::Index j = 0;
    bool fits = true;
    for (std::size_t m = 0; m < from.num_modes(); ++m) {
      const Eigen::Index n = (i / from.stride(m)) % from.dim(m);
      if (n >= dims[m]) {
        fits = false;
        break;
      }
      j += n * to.stride(m);
    }
    if (fits) map[i] = j;
  }
  return map;
}

}  // namespace

FockState resize_modes(const FockState& state, const std::vector<int>& dims,
                       double tail_tolerance) {
  if (dims.size() != state.num_modes()) throw DimensionError("resize: mode count mismatch");
  const ModeLayout to(dims, state.layout().labels());
  const auto map = resize_map(state.layout(), dims);
  Vector v = Vector::Zero(to.total_dim());
  double dropped = 0.0;
  for (Eigen::Index i = 0; i < state.amplitudes().size(); ++i) {
    if (map[i] >= 0) {
      v(map[i]) = state.amplitudes()(i);
    } else {
      dropped += std::norm(state.amplitudes()(i));
    }
  }
  check_tail(dropped, tail_tolerance, "resize_modes");
  return FockState(to, std::move(v));
}

DensityOperator resize_modes(const DensityOperator& rho, const std::vector<int>& dims,
                             double tail_tolerance) {
  if (dims.size() != rho.num_modes()) throw DimensionError("resize: mode count mismatch");
  const ModeLayout to(dims, rho.layout().labels());
  const auto map = resize_map(rho.layout(), dims);
  Matrix m = Matrix::Zero(to.total_dim(), to.total_dim());
  double dropped = 0.0;
  for (Eigen::Index i = 0; i < rho.matrix().rows(); ++i) {
    if (map[i] < 0) {
      dropped += rho.matrix()(i, i).real();
      continue;
    }
    for (Eigen::Index j = 0; j < rho.matrix().cols(); ++j) {
      if (map[j] >= 0) m(map[i], map[j]) = rho.matrix()(i, j);
    }
  }
  check_tail(dropped, tail_tolerance, "resize_modes");
  return DensityOperator(to, std::move(m));
}

// ---------------------------------------------------------------------------
// Fidelity

namespace {

void require_same_dims(const ModeLayout& a, const ModeLayout& b) {
  if (!a.same_dims(b)) throw DimensionError("fidelity: mode dims differ");
}

double clamp_unit(double f) { return std::clamp(f, 0.0, 1.0); }

}  // namespace

double fidelity(const FockState& x, const FockState& y) {
  require_same_dims(x.layout(), y.layout());
  const double overlap = std::norm(x.amplitudes().dot(y.amplitudes()));
  return clamp_unit(overlap / (x.amplitudes().squaredNorm() * y.amplitudes().squaredNorm()));
}

double fidelity(const FockState& x, const DensityOperator& y) {
  require_same_dims(x.layout(), y.layout());
  const Complex v = x.amplitudes().dot(y.matrix() * x.amplitudes());
  return clamp_unit(v.real() / (x.amplitudes().squaredNorm() * y.trace()));
}

double fidelity(const DensityOperator& x, const FockState& y) { return fidelity(y, x); }

double fidelity(const DensityOperator& x, const DensityOperator& y) {
  require_same_dims(x.layout(), y.layout());
  const Matrix sx = psd_sqrt(x.matrix() / x.trace());
  const Matrix inner = sx * (y.matrix() / y.trace()) * sx;
  const RealVector ev = hermitian_eigenvalues(inner);
  double root_sum = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) root_sum += ev(i) > 0.0 ? std::sqrt(ev(i)) : 0.0;
  return clamp_unit(root_sum * root_sum);
}

// ---------------------------------------------------------------------------
// Partial trace

DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::string>& keep) {
  const auto kept = sorted_indices(rho.layout(), keep);
  const auto split = local::split(rho.layout(), kept);
  const auto n = static_cast<Eigen::Index>(split.local.size());
  Matrix out = Matrix::Zero(n, n);
  const Matrix& m = rho.matrix();
  for (Eigen::Index base : split.bases) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index col = base + split.local[j];
      for (Eigen::Index i = 0; i < n; ++i) out(i, j) += m(base + split.local[i], col);
    }
  }
  return DensityOperator(rho.layout().select(kept), std::move(out));
}

DensityOperator partial_trace(const FockState& psi, const std::vector<std::string>& keep) {
  const auto kept = sorted_indices(psi.layout(), keep);
  const auto split = local::split(psi.layout(), kept);
  const Matrix m = local::reshape(psi.amplitudes(), split);
  return DensityOperator(psi.layout().select(kept), m * m.adjoint());
}

// ---------------------------------------------------------------------------
// Operators

ModeOperator annihilation_op(int dim) {
  if (dim < 2) throw DimensionError("annihilation_op requires dim >= 2");
  Matrix a = Matrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return ModeOperator(std::move(a));
}

ModeOperator creation_op(int dim) { return annihilation_op(dim).adjoint(); }

ModeOperator number_op(int dim) {
  const Matrix a = annihilation_op(dim).matrix();
  return ModeOperator(a.adjoint() * a);
}

ModeOperator identity_op(int dim) { return ModeOperator(Matrix::Identity(dim, dim)); }

ModeOperator quadrature_op(int dim, double theta) {
  const Matrix a = annihilation_op(dim).matrix();
  const Complex phase = std::exp(-kI * theta);
  return ModeOperator((a * phase + a.adjoint() * std::conj(phase)) / std::sqrt(2.0));
}

FockState apply(const ModeOperator& op, const FockState& state, std::string_view mode) {
  const std::size_t idx = state.layout().index_of(mode);
  if (op.dim() != state.layout().dim(idx)) throw DimensionError("operator/mode dim mismatch");
  const std::size_t modes[] = {idx};
  Vector v = state.amplitudes();
  local::apply_to_vector(v, local::split(state.layout(), modes), op.matrix());
  return FockState(state.layout(), std::move(v));
}

Complex expectation(const FockState& state, const ModeOperator& op, std::string_view mode) {
  const FockState applied = apply(op, state, mode);
  return state.amplitudes().dot(applied.amplitudes()) / state.amplitudes().squaredNorm();
}

Complex expectation(const DensityOperator& rho, const ModeOperator& op, std::string_view mode) {
  const std::size_t idx = rho.layout().index_of(mode);
  if (op.dim() != rho.layout().dim(idx)) throw DimensionError("operator/mode dim mismatch");
  const std::size_t modes[] = {idx};
  const Matrix m = local::left_multiply(rho.matrix(), local::split(rho.layout(), modes), op.matrix());
  return m.trace() / rho.trace();
}

Complex expectation(const DensityOperator& rho, const ModeOperator& op1, std::string_view mode1,
                    const ModeOperator& op2, std::string_view mode2) {
  const std::size_t i1 = rho.layout().index_of(mode1);
  const std::size_t i2 = rho.layout().index_of(mode2);
  if (i1 == i2) throw ModeError("two-mode expectation needs distinct modes");
  const std::size_t m1[] = {i1};
  const std::size_t m2[] = {i2};
  Matrix m = local::left_multiply(rho.matrix(), local::split(rho.layout(), m2), op2.matrix());
  m = local::left_multiply(m, local::split(rho.layout(), m1), op1.matrix());
  return m.trace() / rho.trace();
}

}  // namespace cvdv

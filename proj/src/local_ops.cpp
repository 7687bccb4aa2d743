#include "cvdv/local_ops.hpp"

#include <algorithm>

namespace cvdv::local {

namespace {

// Enumerates all offsets Σ n_k stride_k over the given modes, row-major.
std::vector<Eigen::Index> enumerate_offsets(const ModeLayout& layout,
                                            const std::vector<std::size_t>& modes) {
  std::vector<Eigen::Index> offsets{0};
  for (std::size_t mode : modes) {
    const Eigen::Index stride = layout.stride(mode);
    std::vector<Eigen::Index> next;
    next.reserve(offsets.size() * layout.dim(mode));
    for (Eigen::Index base : offsets) {
      for (int n = 0; n < layout.dim(mode); ++n) next.push_back(base + n * stride);
    }
    offsets = std::move(next);
  }
  return offsets;
}

}  // namespace

SplitIndex split(const ModeLayout& layout, std::span<const std::size_t> modes) {
  std::vector<std::size_t> targeted(modes.begin(), modes.end());
  std::vector<std::size_t> others;
  for (std::size_t m = 0; m < layout.num_modes(); ++m) {
    if (std::find(targeted.begin(), targeted.end(), m) == targeted.end()) others.push_back(m);
  }
  return SplitIndex{enumerate_offsets(layout, targeted), enumerate_offsets(layout, others)};
}

std::vector<std::size_t> mode_indices(const ModeLayout& layout,
                                      std::span<const std::string> labels) {
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (const auto& label : labels) {
    const std::size_t idx = layout.index_of(label);
    if (std::find(out.begin(), out.end(), idx) != out.end()) {
      throw ModeError("mode '" + label + "' listed twice");
    }
    out.push_back(idx);
  }
  return out;
}

void apply_to_vector(Eigen::Ref<Vector> v, const SplitIndex& split, const Matrix& op) {
  const auto n = static_cast<Eigen::Index>(split.local.size());
  if (op.rows() != n || op.cols() != n) {
    throw DimensionError("local operator size does not match targeted modes");
  }
  Vector buffer(n);
  for (Eigen::Index base : split.bases) {
    for (Eigen::Index k = 0; k < n; ++k) buffer(k) = v(base + split.local[k]);
    const Vector out = op * buffer;
    for (Eigen::Index k = 0; k < n; ++k) v(base + split.local[k]) = out(k);
  }
}

Matrix left_multiply(const Matrix& rho, const SplitIndex& split, const Matrix& op) {
  Matrix out = rho;
  for (Eigen::Index c = 0; c < out.cols(); ++c) apply_to_vector(out.col(c), split, op);
  return out;
}

Matrix conjugate(const Matrix& rho, const SplitIndex& split, const Matrix& op) {
  // A ρ A† = (A (A ρ)†)†
  const Matrix left = left_multiply(rho, split, op);
  Matrix out = left.adjoint();
  for (Eigen::Index c = 0; c < out.cols(); ++c) apply_to_vector(out.col(c), split, op);
  return out.adjoint();
}

Matrix reshape(const Vector& psi, const SplitIndex& split) {
  const auto rows = static_cast<Eigen::Index>(split.local.size());
  const auto cols = static_cast<Eigen::Index>(split.bases.size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < cols; ++r) {
    for (Eigen::Index k = 0; k < rows; ++k) m(k, r) = psi(split.bases[r] + split.local[k]);
  }
  return m;
}

}  // namespace cvdv::local

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cvdv/fock.hpp"

// Index bookkeeping for operators acting on a subset of modes of a
// row-major composite basis.
namespace cvdv::local {

/// Offsets of a sub-block: `local[k]` enumerates the targeted modes in
/// row-major order, `bases[r]` enumerates every configuration of the others.
struct SplitIndex {
  std::vector<Eigen::Index> local;
  std::vector<Eigen::Index> bases;
};

SplitIndex split(const ModeLayout& layout, std::span<const std::size_t> modes);

std::vector<std::size_t> mode_indices(const ModeLayout& layout,
                                      std::span<const std::string> labels);

/// v ← (op on `modes`) v, in place.
void apply_to_vector(Eigen::Ref<Vector> v, const SplitIndex& split, const Matrix& op);

/// ρ ← A ρ A†, where A acts on the split modes.
Matrix conjugate(const Matrix& rho, const SplitIndex& split, const Matrix& op);

/// ρ ← A ρ (left action only).
Matrix left_multiply(const Matrix& rho, const SplitIndex& split, const Matrix& op);

/// Reshapes ψ into M(local, rest) with rows indexed by the split modes.
Matrix reshape(const Vector& psi, const SplitIndex& split);

}  // namespace cvdv::local

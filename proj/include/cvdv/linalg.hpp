#pragma once

#include <cmath>
#include <complex>

#include <Eigen/Dense>

namespace cvdv {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

/// Kronecker product; the left factor is the most significant index.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Result = Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Result out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m, double tol = 1e-10) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

template <typename Derived>
bool is_unitary(const Eigen::MatrixBase<Derived>& m, double tol = 1e-10) {
  if (m.rows() != m.cols()) return false;
  const auto n = m.rows();
  using Plain = typename Derived::PlainObject;
  return ((m.adjoint() * m) - Plain::Identity(n, n)).cwiseAbs().maxCoeff() <= tol;
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
template <typename Derived>
RealVector hermitian_eigenvalues(const Eigen::MatrixBase<Derived>& m) {
  const Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

/// Applies a real function to the spectrum of a Hermitian matrix.
template <typename Derived, typename F>
Matrix hermitian_function(const Eigen::MatrixBase<Derived>& m, F&& f) {
  const Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  const RealVector values = solver.eigenvalues().unaryExpr(f);
  return solver.eigenvectors() * values.cast<Complex>().asDiagonal() *
         solver.eigenvectors().adjoint();
}

/// Square root of a positive-semidefinite matrix; negative round-off
/// eigenvalues are clamped to zero.
template <typename Derived>
Matrix psd_sqrt(const Eigen::MatrixBase<Derived>& m) {
  return hermitian_function(m, [](double v) { return v > 0.0 ? std::sqrt(v) : 0.0; });
}

/// exp(-i H) for Hermitian H.
template <typename Derived>
Matrix exp_minus_i(const Eigen::MatrixBase<Derived>& h) {
  const Matrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  const Vector phases =
      solver.eigenvalues().unaryExpr([](double v) { return std::exp(-kI * v); });
  return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

/// Wraps an angle into [0, 2π).
inline double wrap_angle(double theta) {
  double t = std::fmod(theta, 2.0 * kPi);
  if (t < 0.0) t += 2.0 * kPi;
  if (t >= 2.0 * kPi) t = 0.0;
  return t;
}

/// Wraps an angle into [-π, π).
inline double wrap_signed_angle(double theta) {
  double t = wrap_angle(theta + kPi) - kPi;
  return t;
}

}  // namespace cvdv

#include "cvdv/measurement.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "cvdv/local_ops.hpp"
#include "cvdv/rng.hpp"

namespace cvdv {

// ---------------------------------------------------------------------------
// Types

QuadratureRecord::QuadratureRecord(std::string mode, double theta, double x)
    : mode_(std::move(mode)), theta_(wrap_angle(theta)), x_(x) {
  if (!std::isfinite(x) || !std::isfinite(theta)) {
    throw NumericalError("quadrature record must be finite");
  }
}

RealVector QuadratureGrid::points_vector() const {
  if (points < 2 || !(x_max > x_min)) throw GridCoverageError("degenerate quadrature grid");
  return RealVector::LinSpaced(points, x_min, x_max);
}

double WignerGrid::dx() const { return (spec.x_max - spec.x_min) / (spec.x_steps - 1); }
double WignerGrid::dp() const { return (spec.p_max - spec.p_min) / (spec.p_steps - 1); }
double WignerGrid::x_at(int j) const { return spec.x_min + j * dx(); }
double WignerGrid::p_at(int i) const { return spec.p_min + i * dp(); }
double WignerGrid::integral() const { return values.sum() * dx() * dp(); }

// ---------------------------------------------------------------------------
// Click detection and conditioning

ModeOperator click_povm(double eta, int dim) {
  if (!(eta > 0.0 && eta <= 1.0)) throw DimensionError("click efficiency must lie in (0, 1]");
  RealVector d(dim);
  for (int n = 0; n < dim; ++n) d(n) = 1.0 - std::pow(1.0 - eta, n);
  return ModeOperator(Matrix(d.cast<Complex>().asDiagonal()), true);
}

namespace {

constexpr double kMinProbability = 1e-14;

void check_probability(double p) {
  if (!(p >= kMinProbability)) {
    throw ZeroProbabilityError("conditioning event has probability " + std::to_string(p));
  }
}

std::vector<std::string> labels_without(const ModeLayout& layout, std::size_t skip) {
  std::vector<std::string> out;
  for (std::size_t m = 0; m < layout.num_modes(); ++m) {
    if (m != skip) out.push_back(layout.labels()[m]);
  }
  return out;
}

void check_effect(const ModeOperator& effect, int mode_dim) {
  if (effect.dim() != mode_dim) throw DimensionError("effect dimension does not match mode");
  if (!effect.is_povm()) ModeOperator checked(effect.matrix(), true);
}

// Zero-pads a single-mode projector state to `dim` and normalizes it.
Vector projector_vector(const FockState& projector, int dim) {
  if (projector.num_modes() != 1) throw DimensionError("projector must be a single-mode state");
  if (projector.layout().dim(0) > dim) throw DimensionError("projector larger than target mode");
  Vector v = Vector::Zero(dim);
  v.head(projector.layout().dim(0)) = projector.normalized().amplitudes();
  return v;
}

Conditioned<DensityOperator> condition_with_matrix(const DensityOperator& rho, std::size_t idx,
                                                   const Matrix& effect, const Matrix& root,
                                                   bool discard) {
  const std::size_t modes[] = {idx};
  const auto split = local::split(rho.layout(), modes);
  const Matrix weighted = local::left_multiply(rho.matrix(), split, effect);
  const double p = weighted.trace().real() / rho.trace();
  check_probability(p);
  if (discard) {
    DensityOperator joint(rho.layout(), weighted);
    DensityOperator reduced = partial_trace(joint, labels_without(rho.layout(), idx));
    return {reduced.normalized(), p};
  }
  DensityOperator updated(rho.layout(), local::conjugate(rho.matrix(), split, root));
  return {updated.normalized(), p};
}

}  // namespace

Conditioned<DensityOperator> condition_on(const DensityOperator& rho, std::string_view mode,
                                          const ModeOperator& effect, bool discard) {
  const std::size_t idx = rho.layout().index_of(mode);
  check_effect(effect, rho.layout().dim(idx));
  const Matrix root = discard ? Matrix() : psd_sqrt(effect.matrix());
  return condition_with_matrix(rho, idx, effect.matrix(), root, discard);
}

Conditioned<DensityOperator> condition_on(const FockState& psi, std::string_view mode,
                                          const ModeOperator& effect, bool discard) {
  const std::size_t idx = psi.layout().index_of(mode);
  check_effect(effect, psi.layout().dim(idx));
  const double norm2 = psi.amplitudes().squaredNorm();
  if (discard) {
    const std::size_t modes[] = {idx};
    const Matrix m = local::reshape(psi.amplitudes(), local::split(psi.layout(), modes));
    // ρ_rest = Mᵀ Eᵀ M*, rows of M indexed by the measured mode
    const Matrix reduced = m.transpose() * effect.matrix().transpose() * m.conjugate();
    const double p = reduced.trace().real() / norm2;
    check_probability(p);
    std::vector<std::size_t> rest;
    for (std::size_t k = 0; k < psi.num_modes(); ++k) {
      if (k != idx) rest.push_back(k);
    }
    return {DensityOperator(psi.layout().select(rest), reduced / (p * norm2)), p};
  }
  const FockState updated = apply(ModeOperator(psd_sqrt(effect.matrix())), psi, mode);
  const double p = updated.amplitudes().squaredNorm() / norm2;
  check_probability(p);
  return {DensityOperator(updated.normalized()), p};
}

Conditioned<FockState> condition_on(const FockState& psi, std::string_view mode,
                                    const FockState& projector, bool discard) {
  const std::size_t idx = psi.layout().index_of(mode);
  const Vector v = projector_vector(projector, psi.layout().dim(idx));
  const std::size_t modes[] = {idx};
  const auto split = local::split(psi.layout(), modes);
  const Matrix m = local::reshape(psi.amplitudes(), split);
  const Vector rest = m.transpose() * v.conjugate();
  const double p = rest.squaredNorm() / psi.amplitudes().squaredNorm();
  check_probability(p);
  if (discard) {
    std::vector<std::size_t> others;
    for (std::size_t k = 0; k < psi.num_modes(); ++k) {
      if (k != idx) others.push_back(k);
    }
    return {FockState(psi.layout().select(others), rest).normalized(), p};
  }
  Vector out = Vector::Zero(psi.amplitudes().size());
  for (std::size_t r = 0; r < split.bases.size(); ++r) {
    for (std::size_t n = 0; n < split.local.size(); ++n) {
      out(split.bases[r] + split.local[n]) = v(static_cast<Eigen::Index>(n)) * rest(static_cast<Eigen::Index>(r));
    }
  }
  return {FockState(psi.layout(), out).normalized(), p};
}

Conditioned<DensityOperator> condition_on(const DensityOperator& rho, std::string_view mode,
                                          const FockState& projector, bool discard) {
  const std::size_t idx = rho.layout().index_of(mode);
  const Vector v = projector_vector(projector, rho.layout().dim(idx));
  const Matrix proj = v * v.adjoint();
  return condition_with_matrix(rho, idx, proj, proj, discard);
}

// ---------------------------------------------------------------------------
// Homodyne statistics

RealMatrix hermite_functions(int dim, const RealVector& x) {
  RealMatrix psi(dim, x.size());
  const double norm0 = std::pow(kPi, -0.25);
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double xk = x(k);
    psi(0, k) = norm0 * std::exp(-0.5 * xk * xk);
    if (dim > 1) psi(1, k) = std::sqrt(2.0) * xk * psi(0, k);
    for (int n = 1; n + 1 < dim; ++n) {
      psi(n + 1, k) = std::sqrt(2.0 / (n + 1)) * xk * psi(n, k) -
                      std::sqrt(static_cast<double>(n) / (n + 1)) * psi(n - 1, k);
    }
  }
  return psi;
}

Vector quadrature_eigenvector(int dim, double theta, double x) {
  RealVector xs(1);
  xs(0) = x;
  const RealMatrix psi = hermite_functions(dim, xs);
  Vector v(dim);
  for (int n = 0; n < dim; ++n) v(n) = std::exp(kI * (theta * n)) * psi(n, 0);
  return v;
}

namespace {

DensityOperator single_mode(const DensityOperator& rho, std::string_view mode) {
  if (rho.num_modes() == 1 && rho.layout().labels()[0] == mode) return rho.normalized();
  return partial_trace(rho, {std::string(mode)}).normalized();
}

DensityOperator single_mode(const FockState& psi, std::string_view mode) {
  if (psi.num_modes() == 1 && psi.layout().labels()[0] == mode) {
    return DensityOperator(psi.normalized());
  }
  return partial_trace(psi, {std::string(mode)}).normalized();
}

// p(x_k|θ) = v_kᴴ ρ v_k with v_k = e^{iθn} ψ_n(x_k)
RealVector gridded_density(const Matrix& rho, double theta, const RealMatrix& psi) {
  const auto dim = rho.rows();
  Matrix phi(dim, psi.cols());
  for (Eigen::Index n = 0; n < dim; ++n) {
    phi.row(n) = psi.row(n).cast<Complex>() * std::exp(kI * (theta * static_cast<double>(n)));
  }
  const Matrix rho_phi = rho * phi;
  return (phi.conjugate().cwiseProduct(rho_phi)).colwise().sum().real().transpose().cwiseMax(0.0);
}

void check_coverage(const Matrix& rho, double theta, const RealVector& x_grid) {
  if (x_grid.size() < 2) throw GridCoverageError("quadrature grid needs at least two points");
  for (Eigen::Index i = 1; i < x_grid.size(); ++i) {
    if (!(x_grid(i) > x_grid(i - 1))) throw GridCoverageError("quadrature grid must ascend");
  }
  const int dim = static_cast<int>(rho.rows());
  const Matrix x = quadrature_op(dim, theta).matrix();
  const double mean = (rho * x).trace().real();
  const double second = (rho * x * x).trace().real();
  const double sigma = std::sqrt(std::max(second - mean * mean, 0.0));
  if (x_grid(0) > mean - 6.0 * sigma || x_grid(x_grid.size() - 1) < mean + 6.0 * sigma) {
    throw GridCoverageError("quadrature grid does not cover ±6σ around the mean");
  }
}

// Inverse-CDF sampler over a gridded density, linear within each cell.
class GriddedSampler {
 public:
  GriddedSampler(const RealVector& x, const RealVector& density) : x_(x), cdf_(x.size()) {
    cdf_(0) = 0.0;
    for (Eigen::Index i = 1; i < x.size(); ++i) {
      cdf_(i) = cdf_(i - 1) + 0.5 * (density(i) + density(i - 1)) * (x(i) - x(i - 1));
    }
    if (!(cdf_(cdf_.size() - 1) > 0.0)) throw NumericalError("quadrature density vanishes on grid");
  }

  double draw(double u) const {
    const double target = u * cdf_(cdf_.size() - 1);
    const double* begin = cdf_.data();
    const double* end = begin + cdf_.size();
    const double* it = std::upper_bound(begin, end, target);
    Eigen::Index hi = std::clamp<Eigen::Index>(it - begin, 1, cdf_.size() - 1);
    const Eigen::Index lo = hi - 1;
    const double width = cdf_(hi) - cdf_(lo);
    const double frac = width > 0.0 ? (target - cdf_(lo)) / width : 0.5;
    return x_(lo) + frac * (x_(hi) - x_(lo));
  }

 private:
  RealVector x_;
  RealVector cdf_;
};

}  // namespace

RealVector quadrature_distribution(const DensityOperator& rho, std::string_view mode, double theta,
                                   const RealVector& x_grid) {
  const DensityOperator single = single_mode(rho, mode);
  check_coverage(single.matrix(), theta, x_grid);
  return gridded_density(single.matrix(), theta,
                         hermite_functions(single.layout().dim(0), x_grid));
}

RealVector quadrature_distribution(const FockState& psi, std::string_view mode, double theta,
                                   const RealVector& x_grid) {
  return quadrature_distribution(single_mode(psi, mode), mode, theta, x_grid);
}

std::vector<QuadratureRecord> sample_quadratures(const DensityOperator& rho, std::string_view mode,
                                                 std::span<const double> thetas, std::uint64_t seed,
                                                 const QuadratureGrid& grid) {
  const DensityOperator single = single_mode(rho, mode);
  const RealVector x = grid.points_vector();
  const RealMatrix psi = hermite_functions(single.layout().dim(0), x);
  std::map<double, GriddedSampler> samplers;
  Rng rng(seed);
  std::vector<QuadratureRecord> out;
  out.reserve(thetas.size());
  for (double theta : thetas) {
    auto it = samplers.find(theta);
    if (it == samplers.end()) {
      check_coverage(single.matrix(), theta, x);
      it = samplers.emplace(theta, GriddedSampler(x, gridded_density(single.matrix(), theta, psi)))
               .first;
    }
    out.emplace_back(std::string(mode), theta, it->second.draw(rng.uniform()));
  }
  return out;
}

std::vector<QuadratureRecord> sample_quadratures(const FockState& psi, std::string_view mode,
                                                 std::span<const double> thetas, std::uint64_t seed,
                                                 const QuadratureGrid& grid) {
  return sample_quadratures(single_mode(psi, mode), mode, thetas, seed, grid);
}

namespace {

// Two-mode pure component Ψ(n1, n2) trimmed to the populated levels of mode 2.
struct JointComponent {
  Matrix amplitudes;  // d1 × d2_eff
  double weight;
};

std::vector<QuadraturePair> sample_components(const std::vector<JointComponent>& components,
                                              std::string_view mode1, double theta1,
                                              std::string_view mode2, double theta2,
                                              std::size_t count, std::uint64_t seed,
                                              const QuadratureGrid& grid) {
  const RealVector x = grid.points_vector();
  const int dim1 = static_cast<int>(components.front().amplitudes.rows());
  int dim2 = 0;
  for (const auto& c : components) dim2 = std::max(dim2, static_cast<int>(c.amplitudes.cols()));
  const RealMatrix psi1 = hermite_functions(dim1, x);
  const RealMatrix psi2 = hermite_functions(dim2, x);
  Vector rot2(dim2);
  for (int n = 0; n < dim2; ++n) rot2(n) = std::exp(-kI * (theta2 * n));

  std::vector<GriddedSampler> marginals;
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& c : components) {
    const Matrix rho1 = c.amplitudes * c.amplitudes.adjoint();
    check_coverage(rho1 / rho1.trace().real(), theta1, x);
    marginals.emplace_back(x, gridded_density(rho1, theta1, psi1));
    total += c.weight;
    cumulative.push_back(total);
  }

  Rng rng(seed);
  std::vector<QuadraturePair> out;
  out.reserve(count);
  RealVector density2(x.size());
  for (std::size_t s = 0; s < count; ++s) {
    const double pick = rng.uniform() * total;
    std::size_t k = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
    k = std::min(k, components.size() - 1);
    const Matrix& amp = components[k].amplitudes;
    const double x1 = marginals[k].draw(rng.uniform());
    const Vector v1 = quadrature_eigenvector(dim1, theta1, x1);
    const auto d2 = amp.cols();
    // p(x2|x1) ∝ |Σ_n conj(v2_n(x)) cond_n|², conj(v2_n(x)) = e^{−iθ2 n} ψ_n(x)
    const Vector cond = (amp.transpose() * v1.conjugate()).cwiseProduct(rot2.head(d2));
    const auto rows = psi2.topRows(d2);
    density2 = (cond.real().transpose() * rows).transpose().cwiseAbs2() +
               (cond.imag().transpose() * rows).transpose().cwiseAbs2();
    const double x2 = GriddedSampler(x, density2).draw(rng.uniform());
    out.emplace_back(QuadratureRecord(std::string(mode1), theta1, x1),
                     QuadratureRecord(std::string(mode2), theta2, x2));
  }
  return out;
}

int populated_levels(const RealVector& populations) {
  int last = 0;
  for (Eigen::Index n = 0; n < populations.size(); ++n) {
    if (populations(n) > 1e-16) last = static_cast<int>(n);
  }
  return last + 1;
}

}  // namespace

std::vector<QuadraturePair> sample_joint_quadratures(const FockState& psi, std::string_view mode1,
                                                     double theta1, std::string_view mode2,
                                                     double theta2, std::size_t count,
                                                     std::uint64_t seed,
                                                     const QuadratureGrid& grid) {
  if (psi.num_modes() != 2) {
    return sample_joint_quadratures(DensityOperator(psi), mode1, theta1, mode2, theta2, count, seed,
                                    grid);
  }
  const std::size_t i1 = psi.layout().index_of(mode1);
  const std::size_t i2 = psi.layout().index_of(mode2);
  if (i1 == i2) throw ModeError("joint sampling needs two distinct modes");
  const int d1 = psi.layout().dim(i1);
  const int d2 = psi.layout().dim(i2);
  const FockState normed = psi.normalized();
  Matrix amp(d1, d2);
  for (int a = 0; a < d1; ++a) {
    for (int b = 0; b < d2; ++b) {
      amp(a, b) = normed.amplitudes()(a * psi.layout().stride(i1) + b * psi.layout().stride(i2));
    }
  }
  const int keep = populated_levels(amp.cwiseAbs2().colwise().sum().transpose());
  return sample_components({JointComponent{amp.leftCols(keep), 1.0}}, mode1, theta1, mode2, theta2,
                           count, seed, grid);
}

std::vector<QuadraturePair> sample_joint_quadratures(const DensityOperator& rho,
                                                     std::string_view mode1, double theta1,
                                                     std::string_view mode2, double theta2,
                                                     std::size_t count, std::uint64_t seed,
                                                     const QuadratureGrid& grid) {
  const std::size_t i1 = rho.layout().index_of(mode1);
  const std::size_t i2 = rho.layout().index_of(mode2);
  if (i1 == i2) throw ModeError("joint sampling needs two distinct modes");
  DensityOperator pair = partial_trace(rho, {std::string(mode1), std::string(mode2)}).normalized();
  // partial_trace keeps layout order; put mode1 first.
  const bool swapped = pair.layout().labels()[0] != mode1;
  const int d1 = rho.layout().dim(i1);
  const int d2 = rho.layout().dim(i2);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (pair.matrix() + pair.matrix().adjoint()));
  std::vector<JointComponent> components;
  for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
    const double w = solver.eigenvalues()(k);
    if (w < 1e-13) continue;
    const Vector v = solver.eigenvectors().col(k);
    Matrix amp(d1, d2);
    for (int a = 0; a < d1; ++a) {
      for (int b = 0; b < d2; ++b) amp(a, b) = swapped ? v(b * d1 + a) : v(a * d2 + b);
    }
    components.push_back({amp, w});
  }
  if (components.empty()) throw DegenerateStateError("joint sampling of a zero state");
  RealVector pops = RealVector::Zero(d2);
  for (const auto& c : components) pops += c.weight * c.amplitudes.cwiseAbs2().colwise().sum().transpose();
  const int keep = populated_levels(pops);
  for (auto& c : components) c.amplitudes = Matrix(c.amplitudes.leftCols(keep));
  return sample_components(components, mode1, theta1, mode2, theta2, count, seed, grid);
}

// ---------------------------------------------------------------------------
// Wigner function

namespace {

void require_single_mode(const ModeLayout& layout) {
  if (layout.num_modes() != 1) {
    throw ModeError("wigner() needs a single-mode state; trace or project the others first");
  }
}

// Σ_{m,n} ρ_mn W_mn(x, p) with the displaced-parity matrix elements written
// through generalized Laguerre polynomials L_m^{(k)}(2(x²+p²)).
double wigner_value(const Matrix& rho, const RealMatrix& sqrt_fact_ratio, double x, double p) {
  const int dim = static_cast<int>(rho.rows());
  const Complex a = Complex(x, p) / std::sqrt(2.0);
  const double b = 4.0 * std::norm(a);
  double total = 0.0;
  std::vector<double> lag(dim);
  Complex power = 1.0;  // (2a)^k
  for (int k = 0; k < dim; ++k) {
    const int count = dim - k;
    lag[0] = 1.0;
    if (count > 1) lag[1] = 1.0 + k - b;
    for (int m = 1; m + 1 < count; ++m) {
      lag[m + 1] = ((2.0 * m + 1.0 + k - b) * lag[m] - (m + k) * lag[m - 1]) / (m + 1.0);
    }
    for (int m = 0; m < count; ++m) {
      const int n = m + k;
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      if (k == 0) {
        total += sign * rho(m, m).real() * lag[m];
      } else {
        total += 2.0 * sign * sqrt_fact_ratio(m, n) * lag[m] * (rho(m, n) * power).real();
      }
    }
    power *= 2.0 * a;
  }
  return total * std::exp(-0.5 * b) / kPi;
}

RealMatrix factorial_ratios(int dim) {
  RealMatrix r = RealMatrix::Zero(dim, dim);
  for (int m = 0; m < dim; ++m) {
    for (int n = m; n < dim; ++n) r(m, n) = std::exp(0.5 * (std::lgamma(m + 1.0) - std::lgamma(n + 1.0)));
  }
  return r;
}

}  // namespace

double wigner_at(const DensityOperator& rho, double x, double p) {
  require_single_mode(rho.layout());
  const Matrix m = rho.matrix() / rho.trace();
  return wigner_value(m, factorial_ratios(static_cast<int>(m.rows())), x, p);
}

WignerGrid wigner(const DensityOperator& rho, const PhaseSpaceGridSpec& spec) {
  require_single_mode(rho.layout());
  if (spec.x_steps < 2 || spec.p_steps < 2) throw GridCoverageError("Wigner grid needs >= 2 steps");
  WignerGrid grid{spec, RealMatrix(spec.p_steps, spec.x_steps)};
  const Matrix m = rho.matrix() / rho.trace();
  const RealMatrix ratios = factorial_ratios(static_cast<int>(m.rows()));
  for (int i = 0; i < spec.p_steps; ++i) {
    for (int j = 0; j < spec.x_steps; ++j) {
      grid.values(i, j) = wigner_value(m, ratios, grid.x_at(j), grid.p_at(i));
    }
  }
  return grid;
}

WignerGrid wigner(const FockState& psi, const PhaseSpaceGridSpec& spec) {
  require_single_mode(psi.layout());
  return wigner(DensityOperator(psi.normalized()), spec);
}

// ---------------------------------------------------------------------------
// CSV

void write_quadrature_csv(std::ostream& out, std::span<const QuadratureRecord> records) {
  out << "mode,theta,x\n";
  char buffer[64];
  for (const auto& r : records) {
    std::snprintf(buffer, sizeof(buffer), "%.17g,%.17g", r.theta(), r.x());
    out << r.mode() << ',' << buffer << '\n';
  }
}

std::vector<QuadratureRecord> read_quadrature_csv(std::istream& in) {
  std::vector<QuadratureRecord> out;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "mode,theta,x") throw ConfigError("quadrature CSV header must be 'mode,theta,x'");
      header_seen = true;
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw ConfigError("malformed quadrature CSV row at line " + std::to_string(line_no));
    }
    try {
      out.emplace_back(line.substr(0, c1), std::stod(line.substr(c1 + 1, c2 - c1 - 1)),
                       std::stod(line.substr(c2 + 1)));
    } catch (const std::logic_error&) {
      throw ConfigError("unparsable number in quadrature CSV at line " + std::to_string(line_no));
    }
  }
  if (!header_seen) throw ConfigError("quadrature CSV is empty");
  return out;
}

}  // namespace cvdv

#include "cvdv/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cvdv/local_ops.hpp"
#include "cvdv/optics.hpp"

namespace cvdv {

// ---------------------------------------------------------------------------
// Resource state

void ResourceSpec::validate() const {
  if (const auto* ideal = std::get_if<IdealResource>(&flavor)) {
    if (!(ideal->alpha > 0.0)) throw ConfigError("ideal resource needs alpha > 0");
  } else {
    const auto& p = std::get<PhysicalResource>(flavor);
    if (!(p.tap_reflectivity > 0.0 && p.tap_reflectivity < 1.0)) {
      throw ConfigError("tap reflectivity must lie in (0, 1)");
    }
    if (!(p.mix_ratio >= 0.0 && p.mix_ratio <= 1.0)) throw ConfigError("mix_ratio must lie in [0, 1]");
    if (!(p.spcm1_eta > 0.0 && p.spcm1_eta <= 1.0)) throw ConfigError("spcm1_eta must lie in (0, 1]");
    if (!(p.lambda >= 0.0 && p.lambda < 1.0)) throw ConfigError("lambda must lie in [0, 1)");
  }
  if (truncation.dim_c < 6 || truncation.dim_d < 3 || truncation.dim_ancilla < 2) {
    throw ConfigError("resource truncations too small");
  }
}

FockState ideal_resource(double alpha, int dim_c, int dim_d, double tail_tolerance) {
  if (!(alpha > 0.0)) throw DimensionError("ideal_resource needs alpha > 0");
  if (dim_d < 2) throw DimensionError("ideal_resource needs dim_d >= 2");
  const Vector plus = coherent_state(alpha, dim_c, "C", tail_tolerance).amplitudes();
  const Vector minus = coherent_state(-alpha, dim_c, "C", tail_tolerance).amplitudes();
  Vector d0 = Vector::Zero(dim_d);
  Vector d1 = Vector::Zero(dim_d);
  d0(0) = 1.0;
  d1(1) = 1.0;
  // (|α⟩ − |−α⟩)|0⟩ = (1/N_−)|cat_−⟩|0⟩, (|α⟩ + |−α⟩)|1⟩ = (1/N_+)|cat_+⟩|1⟩
  const Vector v = 0.5 * (kron(Vector(plus - minus), d0) + kron(Vector(plus + minus), d1));
  return FockState(ModeLayout({dim_c, dim_d}, {"C", "D"}), v).normalized();
}

namespace {

// Pure state of modes (C, T, D, E) right before the herald detector.
FockState pre_herald_state(const PhysicalResource& p, const ResourceTruncation& t) {
  const FockState c = squeezed_vacuum(p.zeta, t.dim_c, "C", t.tail_tolerance);
  const FockState tap = vacuum(t.dim_ancilla, "T");
  const FockState de = two_mode_squeezed(p.lambda, t.dim_d, t.dim_ancilla, "D", "E", t.tail_tolerance);
  const FockState parts[] = {c, tap, de};
  FockState psi = tensor(parts);
  psi = beam_splitter(psi, BeamSplitterSpec{1.0 - p.tap_reflectivity, "C", "T"});
  psi = beam_splitter(psi, BeamSplitterSpec{p.mix_ratio, "T", "E"});
  return psi;
}

double click_expectation(const FockState& psi, std::string_view mode, double eta) {
  const int dim = psi.layout().dim(psi.layout().index_of(mode));
  return expectation(psi, click_povm(eta, dim), mode).real();
}

}  // namespace

HeraldedResource physical_resource(const PhysicalResource& params,
                                   const ResourceTruncation& truncation) {
  ResourceSpec{params, truncation}.validate();
  const FockState psi = pre_herald_state(params, truncation);
  const auto heralded =
      condition_on(psi, "T", click_povm(params.spcm1_eta, truncation.dim_ancilla), true);
  DensityOperator cd = partial_trace(heralded.state, {"C", "D"});
  return {cd.normalized(), heralded.probability};
}

double herald_probability(const PhysicalResource& params, const ResourceTruncation& truncation) {
  ResourceSpec{params, truncation}.validate();
  return click_expectation(pre_herald_state(params, truncation), "T", params.spcm1_eta);
}

PathRates path_rates(const PhysicalResource& params, const ResourceTruncation& truncation) {
  PhysicalResource one = params;
  one.lambda = 0.0;
  PhysicalResource two = params;
  two.zeta = 0.0;
  return {herald_probability(one, truncation), herald_probability(two, truncation)};
}

double tune_mix_ratio(const PhysicalResource& params, double target,
                      const ResourceTruncation& truncation) {
  if (!(target > 0.0)) throw ConfigError("target rate ratio must be positive");
  // R_I grows and R_II shrinks with the transmitted fraction of T.
  double lo = 1e-9;
  double hi = 1.0 - 1e-9;
  auto ratio_at = [&](double m) {
    PhysicalResource p = params;
    p.mix_ratio = m;
    const PathRates r = path_rates(p, truncation);
    return r.crystal_two > 0.0 ? r.ratio() : std::numeric_limits<double>::infinity();
  };
  if (ratio_at(lo) > target || ratio_at(hi) < target) {
    throw ConfigError("target rate ratio not reachable by mix_ratio");
  }
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    (ratio_at(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double rate_ratio_condition(double alpha_plus, double alpha_minus) {
  return -std::expm1(-2.0 * alpha_minus * alpha_minus) /
         (1.0 + std::exp(-2.0 * alpha_plus * alpha_plus));
}

namespace {

// Golden-section maximization on [lo, hi] after a coarse bracket scan.
template <typename F>
CatFit maximize_amplitude(F&& score, double lo, double hi) {
  constexpr int kScan = 160;
  double best_a = lo;
  double best_f = -1.0;
  const double step = (hi - lo) / kScan;
  for (int i = 0; i <= kScan; ++i) {
    const double a = lo + i * step;
    const double f = score(a);
    if (f > best_f) {
      best_f = f;
      best_a = a;
    }
  }
  double a = std::max(lo, best_a - step);
  double b = std::min(hi, best_a + step);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = score(c);
  double fd = score(d);
  while (b - a > 1e-9) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = score(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = score(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, score(x)};
}

}  // namespace

CatFit fit_cat_amplitude(const DensityOperator& rho, CatParity parity, double alpha_max) {
  if (rho.num_modes() != 1) throw ModeError("fit_cat_amplitude needs a single-mode state");
  const int dim = rho.layout().dim(0);
  const std::string label = rho.layout().labels()[0];
  auto score = [&](double a) {
    if (a <= 0.0) return parity == CatParity::kPlus ? fidelity(vacuum(dim, label), rho) : 0.0;
    try {
      return fidelity(cat_state(a, parity, dim, label, 1.0), rho);
    } catch (const Error&) {
      return 0.0;
    }
  };
  return maximize_amplitude(score, 1e-4, alpha_max);
}

CatFit fit_ideal_resource(const DensityOperator& rho, double alpha_max) {
  if (rho.num_modes() != 2 || rho.layout().labels()[0] != "C" || rho.layout().labels()[1] != "D") {
    throw ModeError("fit_ideal_resource needs a state over modes (C, D)");
  }
  const int dim_c = rho.layout().dim(0);
  const int dim_d = rho.layout().dim(1);
  // ψ = u0 + e^{iθ} u1 splits by D occupation; ⟨ψ|ρ|ψ⟩ is maximal at θ = −arg⟨u0|ρ|u1⟩.
  auto branches = [&](double a) {
    const Vector v = ideal_resource(a, dim_c, dim_d, 1.0).amplitudes();
    Vector u0 = Vector::Zero(v.size());
    Vector u1 = Vector::Zero(v.size());
    for (int c = 0; c < dim_c; ++c) {
      u0(c * dim_d) = v(c * dim_d);
      u1(c * dim_d + 1) = v(c * dim_d + 1);
    }
    const Matrix& m = rho.matrix();
    const double diag = (u0.dot(m * u0) + u1.dot(m * u1)).real();
    const Complex cross = u0.dot(m * u1);
    return std::pair{diag + 2.0 * std::abs(cross), -std::arg(cross)};
  };
  auto score = [&](double a) {
    try {
      return branches(a).first;
    } catch (const Error&) {
      return 0.0;
    }
  };
  CatFit fit = maximize_amplitude(score, 1e-3, alpha_max);
  fit.fidelity = std::clamp(fit.fidelity, 0.0, 1.0);
  fit.phase = wrap_angle(branches(fit.alpha).second);
  return fit;
}

// ---------------------------------------------------------------------------
// CV qubit and Bell basis

double CvQubit::norm2(Complex x, Complex y, double alpha) {
  return std::norm(x) + std::norm(y) +
         2.0 * (std::conj(x) * y).real() * std::exp(-2.0 * alpha * alpha);
}

CvQubit::CvQubit(Complex x, Complex y, double alpha) : x_(x), y_(y), alpha_(alpha) {
  if (!(alpha > 0.0)) throw DimensionError("CV qubit needs alpha > 0");
  if (std::abs(norm2(x, y, alpha) - 1.0) > 1e-10) {
    throw DegenerateStateError("CV qubit coefficients are not normalized");
  }
}

CvQubit CvQubit::normalized(Complex x, Complex y, double alpha) {
  const double n2 = norm2(x, y, alpha);
  if (!(n2 > 0.0)) throw DegenerateStateError("CV qubit coefficients vanish");
  const double s = 1.0 / std::sqrt(n2);
  return CvQubit(x * s, y * s, alpha);
}

FockState CvQubit::state(int dim, std::string label, double tail_tolerance) const {
  const Vector plus = coherent_state(alpha_, dim, label, tail_tolerance).amplitudes();
  const Vector minus = coherent_state(-alpha_, dim, label, tail_tolerance).amplitudes();
  return FockState(ModeLayout({dim}, {std::move(label)}), x_ * plus + y_ * minus).normalized();
}

const char* to_string(BellKind kind) {
  switch (kind) {
    case BellKind::kPhiPlus: return "phi_plus";
    case BellKind::kPhiMinus: return "phi_minus";
    case BellKind::kPsiPlus: return "psi_plus";
    case BellKind::kPsiMinus: return "psi_minus";
  }
  return "unknown";
}

FockState bell_state(BellKind kind, double alpha, int dim_a, int dim_c, double tail_tolerance) {
  if (!(alpha > 0.0)) throw DimensionError("bell_state needs alpha > 0");
  const Vector ap = coherent_state(alpha, dim_a, "A", tail_tolerance).amplitudes();
  const Vector am = coherent_state(-alpha, dim_a, "A", tail_tolerance).amplitudes();
  const Vector cp = coherent_state(alpha, dim_c, "C", tail_tolerance).amplitudes();
  const Vector cm = coherent_state(-alpha, dim_c, "C", tail_tolerance).amplitudes();
  Vector v;
  switch (kind) {
    case BellKind::kPhiPlus: v = kron(ap, cp) + kron(am, cm); break;
    case BellKind::kPhiMinus: v = kron(ap, cp) - kron(am, cm); break;
    case BellKind::kPsiPlus: v = kron(ap, cm) + kron(am, cp); break;
    case BellKind::kPsiMinus: v = kron(ap, cm) - kron(am, cp); break;
  }
  return FockState(ModeLayout({dim_a, dim_c}, {"A", "C"}), v).normalized();
}

double bell_click_probability(BellKind kind, double alpha, double eta, int dim) {
  if (!(eta > 0.0 && eta <= 1.0)) throw DimensionError("click efficiency must lie in (0, 1]");
  const FockState mixed =
      beam_splitter(bell_state(kind, alpha, dim, dim), BeamSplitterSpec{0.5, "A", "C"});
  return click_expectation(mixed, "A", eta);
}

double bell_click_probability_approx(BellKind kind, double alpha, double eta) {
  const double a4 = std::pow(alpha, 4);
  switch (kind) {
    case BellKind::kPhiPlus: return 4.0 * eta * a4;
    case BellKind::kPhiMinus: return eta * (1.0 + 4.0 * a4 / 3.0);
    case BellKind::kPsiPlus:
    case BellKind::kPsiMinus: return 0.0;
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Teleportation

Teleporter::Teleporter(int dim_a, int dim_c, int dim_d, double spcm2_eta)
    : dim_a_(dim_a),
      dim_c_(dim_c),
      dim_d_(dim_d),
      unitary_(beam_splitter_unitary(0.5, dim_a, dim_c)),
      click_(click_povm(spcm2_eta, dim_a).matrix().diagonal().real()) {}

TeleportResult Teleporter::run(const FockState& input, const FockState& resource, double theta_c,
                               double theta_d, BellDetection detection) const {
  if (input.num_modes() != 1 || input.layout().labels()[0] != "A" || input.layout().dim(0) != dim_a_) {
    throw ModeError("teleport input must be a single mode 'A' of the configured dimension");
  }
  if (resource.layout() != ModeLayout({dim_c_, dim_d_}, {"C", "D"})) {
    throw ModeError("teleport resource must be modes (C, D) of the configured dimensions");
  }
  FockState shifted = phase_shift(phase_shift(resource, "C", theta_c), "D", theta_d);
  FockState psi = tensor(input.normalized(), shifted.normalized());
  psi = beam_splitter(psi, BeamSplitterSpec{0.5, "A", "C"}, unitary_);

  const Vector& amp = psi.amplitudes();
  const Eigen::Index stride_a = static_cast<Eigen::Index>(dim_c_) * dim_d_;
  Matrix rho_d;
  if (detection == BellDetection::kIdealProjector) {
    // ⟨1|_A ⟨0|_C
    const Vector branch = amp.segment(stride_a, dim_d_);
    rho_d = branch * branch.adjoint();
  } else {
    // ρ_D = Σ_{a,c} click_a ψ(a,c,·) ψ(a,c,·)†
    rho_d = Matrix::Zero(dim_d_, dim_d_);
    for (int a = 1; a < dim_a_; ++a) {
      if (click_(a) == 0.0) continue;
      const auto block = Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic,
                                                        Eigen::RowMajor>>(
          amp.data() + a * stride_a, dim_c_, dim_d_);
      rho_d.noalias() += click_(a) * (block.transpose() * block.conjugate());
    }
  }
  const double p = rho_d.trace().real();
  if (!(p >= 1e-14)) throw ZeroProbabilityError("teleportation success probability vanishes");
  return {DensityOperator(ModeLayout({dim_d_}, {"D"}), rho_d / p), p};
}

ResourceEnsemble resource_ensemble(const DensityOperator& rho, double cutoff) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (rho.matrix() + rho.matrix().adjoint()));
  const RealVector& w = solver.eigenvalues();
  const double total = w.cwiseMax(0.0).sum();
  if (!(total > 0.0)) throw DegenerateStateError("resource has no positive weight");
  ResourceEnsemble out;
  double kept = 0.0;
  for (Eigen::Index k = w.size() - 1; k >= 0; --k) {
    const double weight = w(k) / total;
    if (weight < cutoff) continue;
    out.weights.push_back(weight);
    out.components.emplace_back(rho.layout(), solver.eigenvectors().col(k));
    kept += weight;
  }
  for (double& x : out.weights) x /= kept;
  return out;
}

TeleportResult Teleporter::run(const FockState& input, const DensityOperator& resource,
                               double theta_c, double theta_d, BellDetection detection) const {
  if (resource.layout() != ModeLayout({dim_c_, dim_d_}, {"C", "D"})) {
    throw ModeError("teleport resource must be modes (C, D) of the configured dimensions");
  }
  return run(input, resource_ensemble(resource), theta_c, theta_d, detection);
}

TeleportResult Teleporter::run(const FockState& input, const ResourceEnsemble& resource,
                               double theta_c, double theta_d, BellDetection detection) const {
  Matrix acc = Matrix::Zero(dim_d_, dim_d_);
  double p = 0.0;
  for (std::size_t k = 0; k < resource.components.size(); ++k) {
    try {
      const TeleportResult r = run(input, resource.components[k], theta_c, theta_d, detection);
      acc += resource.weights[k] * r.success_probability * r.output.matrix();
      p += resource.weights[k] * r.success_probability;
    } catch (const ZeroProbabilityError&) {
      // component never heralds
    }
  }
  if (!(p >= 1e-14)) throw ZeroProbabilityError("teleportation success probability vanishes");
  return {DensityOperator(ModeLayout({dim_d_}, {"D"}), acc / p), p};
}

namespace {

Teleporter make_teleporter(const FockState& input, const ModeLayout& resource,
                           const TeleportSettings& settings) {
  if (input.num_modes() != 1) throw ModeError("teleport input must be single-mode");
  return Teleporter(input.layout().dim(0), resource.dim(resource.index_of("C")),
                    resource.dim(resource.index_of("D")), settings.spcm2_eta);
}

}  // namespace

TeleportResult teleport(const FockState& input, const FockState& resource,
                        const TeleportSettings& settings) {
  return make_teleporter(input, resource.layout(), settings)
      .run(input, resource, settings.theta_c, settings.theta_d, settings.detection);
}

TeleportResult teleport(const FockState& input, const DensityOperator& resource,
                        const TeleportSettings& settings) {
  return make_teleporter(input, resource.layout(), settings)
      .run(input, resource, settings.theta_c, settings.theta_d, settings.detection);
}

DensityOperator analytic_output(double phi, double alpha, double theta_c, double theta_d) {
  const double a2 = alpha * alpha;
  const Complex off = 0.5 * std::exp(-kI * (phi + theta_d - theta_c)) *
                      (1.0 + a2 * (std::exp(2.0 * kI * (phi - theta_c)) - 1.0));
  Matrix m(2, 2);
  m << 0.5, off, std::conj(off), 0.5;
  return DensityOperator(ModeLayout({2}, {"D"}), m);
}

double analytic_fidelity(double phi, double alpha, double theta_c) {
  return 1.0 - 0.5 * alpha * alpha * (1.0 - std::cos(2.0 * (phi - theta_c)));
}

FockState teleport_target(double phi, double theta_c, double theta_d, int dim) {
  if (dim < 2) throw DimensionError("teleport_target needs dim >= 2");
  Vector v = Vector::Zero(dim);
  v(0) = std::exp(kI * theta_c) / std::sqrt(2.0);
  v(1) = std::exp(kI * (theta_d + phi)) / std::sqrt(2.0);
  return FockState(ModeLayout({dim}, {"D"}), v);
}

}  // namespace cvdv

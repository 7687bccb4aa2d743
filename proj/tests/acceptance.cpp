// Acceptance harness: one PASS/FAIL line per criterion, tolerances pinned here.
// Lines starting with "  note:" carry supporting measurements and never
// affect the verdict.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "cvdv/experiments.hpp"
#include "cvdv/optics.hpp"
#include "cvdv/protocol.hpp"
#include "cvdv/tomography.hpp"
#include "oracles.hpp"

using namespace cvdv;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void run_criterion(int id, const char* title, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o{false, ""};
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = dt < limit_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("%s criterion %d: %s | %s | runtime %.2f s (limit %.0f s%s)\n", pass ? "PASS" : "FAIL", id, title,
              o.detail.c_str(), dt, limit_s, in_time ? "" : ", exceeded");
  std::fflush(stdout);
}

void note(const char* fmt, auto... args) {
  std::printf("  note: ");
  std::printf(fmt, args...);
  std::printf("\n");
}

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

constexpr double kPiD = oracle::kPi;

// 1 -------------------------------------------------------------------------
Outcome bell_probabilities() {
  constexpr double kEta = 0.1;
  constexpr double kPsiBound = 1e-12;
  constexpr double kRatioTarget = 10.7;
  constexpr double kRatioTol = 0.05;
  bool ok = true;
  double worst_plus = 0.0, worst_minus = 0.0, worst_psi = 0.0, worst_plus_static = 0.0;
  for (int k = 1; k <= 10; ++k) {
    const double a = 0.05 * k;
    const double pp = bell_click_probability(BellKind::kPhiPlus, a, kEta);
    const double pm = bell_click_probability(BellKind::kPhiMinus, a, kEta);
    const double ep = std::abs(bell_click_probability_approx(BellKind::kPhiPlus, a, kEta) / pp - 1);
    const double em = std::abs(bell_click_probability_approx(BellKind::kPhiMinus, a, kEta) / pm - 1);
    // Φ⁺: the approximation is first order in η, so its relative error carries
    // an O(η) term besides the α⁴ one; Φ⁻: 2α⁴.
    ok = ok && ep < kEta + 2 * std::pow(a, 4) && em < 2 * std::pow(a, 4);
    for (auto kind : {BellKind::kPsiPlus, BellKind::kPsiMinus}) {
      const double p = bell_click_probability(kind, a, kEta);
      worst_psi = std::max(worst_psi, p);
      ok = ok && p < kPsiBound;
    }
    worst_plus = std::max(worst_plus, ep);
    worst_minus = std::max(worst_minus, em / std::pow(a, 4));
    // η → 0 limit isolates the α expansion
    const double tiny = 1e-7;
    const double e0 = std::abs(bell_click_probability_approx(BellKind::kPhiPlus, a, tiny) /
                                   bell_click_probability(BellKind::kPhiPlus, a, tiny) -
                               1);
    worst_plus_static = std::max(worst_plus_static, e0 / std::pow(a, 4));
    ok = ok && e0 < 2 * std::pow(a, 4);
  }
  const double ratio = bell_click_probability(BellKind::kPhiMinus, 0.67, kEta) /
                       bell_click_probability(BellKind::kPhiPlus, 0.42, kEta);
  ok = ok && std::abs(ratio / kRatioTarget - 1) < kRatioTol;
  note("max rel err Phi+ at eta=0.1: %.4f; Phi+ at eta->0: %.3f a^4; Phi-: %.3f a^4", worst_plus,
       worst_plus_static, worst_minus);
  return {ok, format("alpha<=0.5, max p_Psi=%.2e, ratio p_Phi-(0.67)/p_Phi+(0.42)=%.3f", worst_psi, ratio)};
}

// 2 -------------------------------------------------------------------------
Outcome bell_transform() {
  constexpr int kDim = 15;
  constexpr double kTol = 1e-5;
  double worst = 1.0;
  for (double a : {0.2, 0.42, 0.67}) {
    const double b = std::sqrt(2.0) * a;
    struct Case {
      BellKind kind;
      FockState expected;
    };
    const Case cases[] = {
        {BellKind::kPhiPlus, tensor(cat_state(b, CatParity::kPlus, kDim, "A"), vacuum(kDim, "C"))},
        {BellKind::kPhiMinus, tensor(cat_state(b, CatParity::kMinus, kDim, "A"), vacuum(kDim, "C"))},
        {BellKind::kPsiPlus, tensor(vacuum(kDim, "A"), cat_state(b, CatParity::kPlus, kDim, "C"))},
        {BellKind::kPsiMinus, tensor(vacuum(kDim, "A"), cat_state(b, CatParity::kMinus, kDim, "C"))},
    };
    for (const auto& c : cases) {
      const auto out = beam_splitter(bell_state(c.kind, a, kDim, kDim), BeamSplitterSpec{0.5, "A", "C"});
      worst = std::min(worst, fidelity(out, c.expected));
    }
  }
  return {worst >= 1 - kTol, format("min fidelity to product form %.12f over 12 cases", worst)};
}

// 3 -------------------------------------------------------------------------
struct OracleComparison {
  double worst_element = 0.0;  // max over cases of (max elementwise diff)/α³
  double worst_fidelity = 0.0;
};

OracleComparison compare_with_second_order(BellDetection detection) {
  constexpr int kDim = 15;
  const double phis[] = {0.0, kPiD / 4, kPiD / 2, 2.5};
  const std::pair<double, double> frames[] = {{0.0, 0.0}, {0.4, 0.0}, {0.0, 0.9}, {1.1, -0.6}};
  OracleComparison out;
  for (double a : {0.1, 0.2, 0.3}) {
    const auto resource = ideal_resource(a, kDim, kDim);
    const Teleporter t(kDim, kDim, kDim, 0.1);
    for (double phi : phis) {
      for (auto [tc, td] : frames) {
        const auto r = t.run(coherent_state(std::polar(a, phi), kDim, "A"), resource, tc, td, detection);
        const Matrix block = r.output.matrix().topLeftCorner(2, 2);
        const double diff = (block - analytic_output(phi, a, tc, td).matrix()).cwiseAbs().maxCoeff();
        const double fdiff =
            std::abs(fidelity(teleport_target(phi, tc, td, kDim), r.output) - analytic_fidelity(phi, a, tc));
        out.worst_element = std::max(out.worst_element, diff / std::pow(a, 3));
        out.worst_fidelity = std::max(out.worst_fidelity, fdiff / std::pow(a, 3));
      }
    }
  }
  return out;
}

Outcome output_state_oracle() {
  const auto projector = compare_with_second_order(BellDetection::kIdealProjector);
  const auto click = compare_with_second_order(BellDetection::kClick);
  note("click-POVM detection on the same 16 settings: max elementwise diff %.3f a^3, fidelity diff %.3f a^3",
       click.worst_element, click.worst_fidelity);
  note("projected output is pure (fidelity 1 to the target), the second-order matrix is mixed at order a^2");
  const bool ok = projector.worst_element < 1 && projector.worst_fidelity < 1;
  return {ok, format("ideal <1|<0| projection, a in {0.1,0.2,0.3}: max elementwise diff %.3f a^3, "
                     "fidelity diff %.3f a^3 (bound 1 a^3)",
                     projector.worst_element, projector.worst_fidelity)};
}

// 4 -------------------------------------------------------------------------
Outcome fidelity_extremes() {
  constexpr int kDim = 15;
  constexpr double kExactTol = 1e-9;
  constexpr int kScan = 72;
  bool ok = true;
  double worst_peak = 0.0;
  double worst_min = 0.0;
  for (double a : {0.2, 0.3, 0.42}) {
    const auto resource = ideal_resource(a, kDim, kDim);
    const Teleporter t(kDim, kDim, kDim, 0.1);
    for (auto [tc, td] : {std::pair{0.0, 0.0}, std::pair{0.8, 0.3}}) {
      auto f_at = [&](double phi) {
        const auto r = t.run(coherent_state(std::polar(a, phi), kDim, "A"), resource, tc, td);
        return fidelity(teleport_target(phi, tc, td, kDim), r.output);
      };
      worst_peak = std::max(worst_peak, 1 - f_at(tc));
      // minimum of the scan must sit at φ − θ_C = ±π/2
      double f_min = 2.0;
      double phi_min = 0.0;
      for (int k = 0; k < kScan; ++k) {
        const double phi = tc + k * 2 * kPiD / kScan;
        const double f = f_at(phi);
        if (f < f_min) {
          f_min = f;
          phi_min = phi;
        }
      }
      const double off = std::abs(std::abs(wrap_signed_angle(phi_min - tc)) - kPiD / 2);
      ok = ok && off < 1e-9 && std::abs(f_min - (1 - a * a)) < std::pow(a, 3);
      worst_min = std::max(worst_min, std::abs(f_min - (1 - a * a)) / std::pow(a, 3));
    }
  }
  ok = ok && worst_peak < kExactTol;
  return {ok, format("max 1-F at phi=theta_C: %.2e; minima at +-pi/2 with |F_min-(1-a^2)| <= %.3f a^3", worst_peak,
                     worst_min)};
}

// 5 -------------------------------------------------------------------------
Outcome resource_structure() {
  constexpr double kIdealTol = 1e-9;
  constexpr double kSqrt3Tol = 0.03;
  constexpr double kRateTol = 0.02;
  double worst_ideal = 1.0;
  for (double a : {0.2, 0.42, 0.67}) {
    const auto r = ideal_resource(a, 15, 15);
    const auto on0 = condition_on(r, "D", fock_basis_state(0, 15), true);
    const auto on1 = condition_on(r, "D", fock_basis_state(1, 15), true);
    worst_ideal = std::min({worst_ideal, fidelity(cat_state(a, CatParity::kMinus, 15, "C"), on0.state),
                            fidelity(cat_state(a, CatParity::kPlus, 15, "C"), on1.state)});
  }
  ExperimentConfig config;
  config.resource_kind = "physical";
  const auto build = build_resource(config);
  const double ratio = build.alpha_minus / build.alpha_plus;
  const double rates = rate_ratio_condition(0.42, 0.67);
  note("physical resource: mix_ratio %.6f, herald p %.3e, fidelity to ideal %.4f at alpha %.4f",
       build.mix_ratio, build.herald_probability, build.fidelity_to_ideal, build.fitted_alpha);
  note("alpha_-/alpha_+ = %.4f/%.4f = %.4f (sqrt3 = %.4f): %s", build.alpha_minus, build.alpha_plus, ratio,
       std::sqrt(3.0), std::abs(ratio / std::sqrt(3.0) - 1) < kSqrt3Tol ? "within 3%" : "outside 3%");
  note("rate_ratio_condition on the fitted amplitudes: %.4f",
       rate_ratio_condition(build.alpha_plus, build.alpha_minus));
  const bool ok = worst_ideal >= 1 - kIdealTol && std::abs(ratio / std::sqrt(3.0) - 1) < kSqrt3Tol &&
                  std::abs(rates * 3 - 1) < kRateTol;
  return {ok, format("ideal projections min F %.12f; alpha_-/alpha_+ %.4f; rate_ratio_condition(0.42,0.67) = %.4f "
                     "(%.1f%% from 1/3, tol 2%%)",
                     worst_ideal, ratio, rates, 100 * std::abs(rates * 3 - 1))};
}

// 6 -------------------------------------------------------------------------
Outcome quadrature_correlation() {
  constexpr double kOperatorTol = 1e-8;
  constexpr std::size_t kPairs = 100000;
  constexpr double kSigmas = 3.0;
  const double a = 0.42;
  const int dim = 15;
  const auto base = ideal_resource(a, dim, dim);
  const Matrix xc = kron(quadrature_op(dim, 0.0).matrix(), Matrix::Identity(dim, dim));
  const Matrix xd = kron(Matrix::Identity(dim, dim), quadrature_op(dim, 0.0).matrix());
  const double angles[] = {0.0, kPiD / 6, kPiD / 3, kPiD / 2};
  double worst_literal = 0.0, worst_exact = 0.0, worst_sigma_literal = 0.0, worst_sigma_exact = 0.0;
  double worst_aligned = 0.0;
  std::uint64_t seed = 2024;
  for (double tc : angles) {
    for (double td : angles) {
      const auto s = phase_shift(phase_shift(base, "C", tc), "D", td);
      const double corr = s.amplitudes().dot(xc * xd * s.amplitudes()).real();
      const double literal = a * std::cos(tc - td);
      const double exact = oracle::resource_correlation(a, tc, td);
      worst_literal = std::max(worst_literal, std::abs(corr - literal));
      worst_exact = std::max(worst_exact, std::abs(corr - exact));
      if (tc == 0.0) worst_aligned = std::max(worst_aligned, std::abs(corr - literal));

      const auto pairs = sample_joint_quadratures(s, "C", 0.0, "D", 0.0, kPairs, seed++);
      double m = 0.0, m2 = 0.0;
      for (const auto& [c, d] : pairs) {
        const double v = c.x() * d.x();
        m += v;
        m2 += v * v;
      }
      m /= kPairs;
      const double se = std::sqrt((m2 / kPairs - m * m) / (kPairs - 1));
      worst_sigma_literal = std::max(worst_sigma_literal, std::abs(m - literal) / se);
      worst_sigma_exact = std::max(worst_sigma_exact, std::abs(m - exact) / se);
    }
  }
  note("against a[cos tC cos tD + exp(-2a^2) sin tC sin tD]: operator %.2e, sampling %.2f SE", worst_exact,
       worst_sigma_exact);
  note("theta_C = 0 subset against a cos(tC - tD): operator %.2e", worst_aligned);
  const bool ok = worst_literal < kOperatorTol && worst_sigma_literal < kSigmas;
  return {ok, format("a=0.42, 16 (theta_C, theta_D) pairs vs a cos(tC-tD): operator max diff %.3e (tol 1e-8), "
                     "sampling max %.1f SE (tol 3)",
                     worst_literal, worst_sigma_literal)};
}

// 7 -------------------------------------------------------------------------
Outcome tomography_roundtrip() {
  ExperimentConfig config;
  config.rng_seed = 7;
  const auto r = run_tomography_roundtrip(config);
  note("iterations %d, converged %s, eta_corr %.2f, homodyne eta %.2f", r.reconstruction.iterations,
       r.reconstruction.converged ? "yes" : "no", config.tomography.eta_corr, config.homodyne_eta);
  const bool ok = r.fidelity >= 0.97 && r.likelihood_monotone && config.tomography.samples == 500000;
  return {ok, format("5e5 samples at phi=%.2f: fidelity %.5f (>= 0.97), log-likelihood monotone %s", r.phi,
                     r.fidelity, r.likelihood_monotone ? "yes" : "no")};
}

// 8 -------------------------------------------------------------------------
Outcome noise_montecarlo() {
  constexpr double kDropTarget = 0.05;
  constexpr double kDropTol = 0.02;
  constexpr double kSuppression = 0.30;
  ExperimentConfig config;
  config.rng_seed = 11;
  config.trials = 1000;
  const auto s = run_noise_montecarlo(config);
  note("mean F %.4f -> %.4f; peak-to-trough %.4f -> %.4f; output phase std %.2f deg", s.mean_noiseless,
       s.mean_noisy, s.peak_to_trough_noiseless, s.peak_to_trough_noisy, s.phase_error_std_deg);
  const bool ok = std::abs(s.relative_drop - kDropTarget) <= kDropTol && s.oscillation_suppression >= kSuppression;
  return {ok, format("widths (0.53, 0.5) rad, 1e3 trials x %zu phi: drop %.2f%% (5+-2%%), peak-to-trough "
                     "reduced %.1f%% (>= 30%%)",
                     s.rows.size(), 100 * s.relative_drop, 100 * s.oscillation_suppression)};
}

// 9 -------------------------------------------------------------------------
Outcome property_suites() {
  int checks = 0;
  std::vector<std::string> broken;
  auto expect = [&](bool cond, const std::string& what) {
    ++checks;
    if (!cond) broken.push_back(what);
  };
  for (int dim : {8, 15, 20}) {
    const std::string d = " dim " + std::to_string(dim);
    const Matrix u = beam_splitter_unitary(0.37, dim, dim);
    expect(is_unitary(u, 1e-10), "beam-splitter unitarity" + d);

    const FockState states[] = {coherent_state(0.4, dim), cat_state(0.6, CatParity::kMinus, dim),
                                squeezed_vacuum(0.1, dim), fock_basis_state(dim - 1, dim)};
    for (const auto& s : states) {
      expect(std::abs(s.norm() - 1) < 1e-13, "state normalization" + d);
      expect(DensityOperator(s).is_physical(), "state positivity" + d);
    }

    for (double eta : {0.05, 0.54, 1.0}) {
      const RealVector ev = hermitian_eigenvalues(click_povm(eta, dim).matrix());
      expect(ev.minCoeff() >= -1e-15 && ev.maxCoeff() <= 1 + 1e-15, "click POVM bounds" + d);
    }

    const DensityOperator rho(cat_state(0.6, CatParity::kMinus, dim));
    const auto twice = loss_channel(loss_channel(rho, "A", 0.8), "A", 0.7);
    const auto once = loss_channel(rho, "A", 0.56);
    expect((twice.matrix() - once.matrix()).norm() < 1e-12, "loss composition" + d);
    expect(std::abs(once.trace() - 1) < 1e-13, "loss trace" + d);
    Matrix kraus_sum = Matrix::Zero(dim, dim);
    for (const auto& k : loss_kraus(0.54, dim)) kraus_sum += k.adjoint() * k;
    expect((kraus_sum - Matrix::Identity(dim, dim)).norm() < 1e-12, "Kraus completeness" + d);

    const PhaseSpaceGridSpec spec{-9, 9, 181, -9, 9, 181};
    const auto w = wigner(once, spec);
    RealVector xs(spec.x_steps);
    for (int j = 0; j < spec.x_steps; ++j) xs(j) = w.x_at(j);
    const RealVector marginal = w.values.colwise().sum().transpose() * w.dp();
    const RealVector px = quadrature_distribution(once, "A", 0.0, xs);
    expect(std::abs(w.integral() - 1) < 1e-6, "Wigner normalization" + d);
    expect((marginal - px).cwiseAbs().maxCoeff() < 1e-6, "Wigner marginal" + d);

    const std::vector<double> thetas{0.0, 0.5, 1.0, 2.0};
    const auto s1 = sample_quadratures(squeezed_vacuum(0.1, dim), "A", thetas, 99);
    const auto s2 = sample_quadratures(squeezed_vacuum(0.1, dim), "A", thetas, 99);
    bool same = true;
    for (std::size_t i = 0; i < thetas.size(); ++i) same = same && s1[i].x() == s2[i].x();
    expect(same, "sampling determinism" + d);
  }
  std::string detail = format("%d checks at dims {8, 15, 20}, %zu failed", checks, broken.size());
  for (const auto& b : broken) detail += "; " + b;
  return {broken.empty(), detail};
}

}  // namespace

int main() {
  run_criterion(1, "Bell click probabilities", 1, bell_probabilities);
  run_criterion(2, "symmetric beam splitter on Bell states", 1, bell_transform);
  run_criterion(3, "teleported output vs second-order matrix", 10, output_state_oracle);
  run_criterion(4, "fidelity extremes", 30, fidelity_extremes);
  run_criterion(5, "resource structure", 30, resource_structure);
  run_criterion(6, "quadrature correlation", 30, quadrature_correlation);
  run_criterion(7, "tomography round trip", 300, tomography_roundtrip);
  run_criterion(8, "phase-noise Monte Carlo", 600, noise_montecarlo);
  run_criterion(9, "property suites", 60, property_suites);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

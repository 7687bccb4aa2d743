#include "cvdv/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cvdv/optics.hpp"

namespace cvdv {

void TomographyJob::validate() const {
  if (dim < 2) throw ConfigError("tomography dim must be >= 2");
  if (!(eta_corr > 0.0 && eta_corr <= 1.0)) throw ConfigError("eta_corr must lie in (0, 1]");
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (!(tolerance >= 0.0)) throw ConfigError("tolerance must be non-negative");
  if (phase_bins < 1 || x_bins < 2) throw ConfigError("need >= 1 phase bin and >= 2 x bins");
  if (!(x_max > 0.0)) throw ConfigError("x_max must be positive");
}

namespace {

struct Bin {
  Matrix effect;
  double count;
};

// ∫ ψ_m ψ_n dx over each x bin, 4-point Gauss-Legendre per bin.
std::vector<RealMatrix> bin_overlaps(int dim, int x_bins, double x_max) {
  static constexpr double kNodes[] = {-0.8611363115940526, -0.3399810435848563,
                                      0.3399810435848563, 0.8611363115940526};
  static constexpr double kWeights[] = {0.3478548451374538, 0.6521451548625461,
                                        0.6521451548625461, 0.3478548451374538};
  const double width = 2.0 * x_max / x_bins;
  std::vector<RealMatrix> out;
  out.reserve(x_bins);
  RealVector xs(4);
  for (int b = 0; b < x_bins; ++b) {
    const double mid = -x_max + (b + 0.5) * width;
    for (int q = 0; q < 4; ++q) xs(q) = mid + 0.5 * width * kNodes[q];
    const RealMatrix psi = hermite_functions(dim, xs);
    RealMatrix g = RealMatrix::Zero(dim, dim);
    for (int q = 0; q < 4; ++q) g += (0.5 * width * kWeights[q]) * psi.col(q) * psi.col(q).transpose();
    out.push_back(std::move(g));
  }
  return out;
}

double log_likelihood(const std::vector<Bin>& bins, const Matrix& rho, std::vector<double>& probs) {
  double total = 0.0;
  for (std::size_t j = 0; j < bins.size(); ++j) {
    // tr(Π ρ) = Σ_mn Π_mn ρ_nm
    const double p = std::max(bins[j].effect.cwiseProduct(rho.transpose()).sum().real(), 1e-300);
    probs[j] = p;
    total += bins[j].count * std::log(p);
  }
  return total;
}

Matrix normalized_sandwich(const Matrix& m, const Matrix& rho) {
  Matrix out = m * rho * m.adjoint();
  out = 0.5 * (out + out.adjoint());
  return out / out.trace().real();
}

}  // namespace

TomographyResult maxlik_reconstruct(const TomographyJob& job) {
  job.validate();
  if (job.records.empty()) throw ConfigError("tomography needs at least one record");
  const std::string label = job.records.front().mode();
  const int d = job.dim;
  TomographyResult result{DensityOperator(ModeLayout({d}, {label}), Matrix::Identity(d, d) / d)};

  // Fold θ into [0, π), then histogram. Per phase bin the effect uses the
  // empirical moments ⟨e^{ikθ}⟩ of the phases that fell into it.
  const double phase_width = kPi / job.phase_bins;
  const double x_width = 2.0 * job.x_max / job.x_bins;
  std::vector<double> counts(static_cast<std::size_t>(job.phase_bins) * job.x_bins, 0.0);
  std::vector<Vector> moments(job.phase_bins, Vector::Zero(d));
  std::vector<double> phase_counts(job.phase_bins, 0.0);
  for (const auto& r : job.records) {
    if (r.mode() != label) throw ModeError("tomography records must all belong to one mode");
    double theta = r.theta();
    double x = r.x();
    if (theta >= kPi) {
      theta -= kPi;
      x = -x;
    }
    if (std::abs(x) >= job.x_max) {
      ++result.dropped_records;
      continue;
    }
    const int pb = std::min(static_cast<int>(theta / phase_width), job.phase_bins - 1);
    const int xb = std::min(static_cast<int>((x + job.x_max) / x_width), job.x_bins - 1);
    counts[static_cast<std::size_t>(pb) * job.x_bins + xb] += 1.0;
    phase_counts[pb] += 1.0;
    for (int k = 0; k < d; ++k) moments[pb](k) += std::exp(kI * (k * theta));
  }

  const int empty_phase_bins =
      static_cast<int>(std::count(phase_counts.begin(), phase_counts.end(), 0.0));
  if (empty_phase_bins > 0) {
    result.warnings.push_back("incomplete phase coverage: " + std::to_string(empty_phase_bins) +
                              " of " + std::to_string(job.phase_bins) +
                              " phase bins over [0, pi) are empty");
  }
  if (result.dropped_records > 0) {
    result.warnings.push_back(std::to_string(result.dropped_records) +
                              " records outside |x| < x_max were dropped");
  }

  const auto overlaps = bin_overlaps(d, job.x_bins, job.x_max);
  std::vector<Bin> bins;
  for (int pb = 0; pb < job.phase_bins; ++pb) {
    if (phase_counts[pb] == 0.0) continue;
    // C_mn = ⟨e^{i(m−n)θ}⟩
    Matrix phase_mix(d, d);
    for (int m = 0; m < d; ++m) {
      for (int n = 0; n < d; ++n) {
        const Complex c = moments[pb](std::abs(m - n)) / phase_counts[pb];
        phase_mix(m, n) = m >= n ? c : std::conj(c);
      }
    }
    for (int xb = 0; xb < job.x_bins; ++xb) {
      const double count = counts[static_cast<std::size_t>(pb) * job.x_bins + xb];
      if (count == 0.0) continue;
      Matrix effect = phase_mix.cwiseProduct(overlaps[xb].cast<Complex>());
      if (job.eta_corr < 1.0) effect = loss_adjoint(effect, job.eta_corr);
      bins.push_back({std::move(effect), count});
    }
  }
  if (bins.empty()) throw ConfigError("no records inside the quadrature window");

  double total = 0.0;
  for (const auto& b : bins) total += b.count;
  std::vector<double> probs(bins.size());
  Matrix rho = result.state.matrix();
  double ll = log_likelihood(bins, rho, probs);
  result.log_likelihood.push_back(ll);
  const Matrix identity = Matrix::Identity(d, d);

  for (int it = 0; it < job.max_iterations; ++it) {
    Matrix r = Matrix::Zero(d, d);
    for (std::size_t j = 0; j < bins.size(); ++j) r += (bins[j].count / probs[j]) * bins[j].effect;
    r /= total;

    std::vector<double> cand_probs(bins.size());
    Matrix cand = normalized_sandwich(r, rho);
    double cand_ll = log_likelihood(bins, cand, cand_probs);
    if (cand_ll < ll && job.diluted_fallback) {
      for (double eps = 0.5; eps > 1e-8 && cand_ll < ll; eps *= 0.5) {
        cand = normalized_sandwich((identity + eps * r) / (1.0 + eps), rho);
        cand_ll = log_likelihood(bins, cand, cand_probs);
      }
    }
    if (cand_ll < ll) {
      // no ascent step left; the current iterate is a plateau
      result.converged = true;
      break;
    }
    const double gain = (cand_ll - ll) / total;
    rho = std::move(cand);
    probs.swap(cand_probs);
    ll = cand_ll;
    result.log_likelihood.push_back(ll);
    result.iterations = it + 1;
    if (gain < job.tolerance) {
      result.converged = true;
      break;
    }
  }
  if (!result.converged) {
    result.warnings.push_back("maximum-likelihood iteration hit max_iterations before converging");
  }
  result.state = DensityOperator(result.state.layout(), rho);
  return result;
}

std::vector<PhaseEstimate> estimate_phase_from_variance(std::span<const QuadratureRecord> records,
                                                        std::size_t window_size, double zeta) {
  if (window_size < 50) throw ConfigError("variance phase estimation needs windows of >= 50 samples");
  if (zeta == 0.0) throw ConfigError("variance phase estimation needs a squeezed source");
  const double c = std::cosh(2.0 * zeta);
  const double s = std::sinh(2.0 * zeta);
  std::vector<PhaseEstimate> out;
  for (std::size_t start = 0; start + window_size <= records.size(); start += window_size) {
    double sum = 0.0;
    double sum2 = 0.0;
    for (std::size_t i = start; i < start + window_size; ++i) {
      sum += records[i].x();
      sum2 += records[i].x() * records[i].x();
    }
    const double n = static_cast<double>(window_size);
    const double var = (sum2 - sum * sum / n) / (n - 1.0);
    const double cos2 = (2.0 * var - c) / s;
    const bool clamped = std::abs(cos2) > 1.0;
    out.push_back({0.5 * std::acos(std::clamp(cos2, -1.0, 1.0)), clamped});
  }
  return out;
}

PhaseEstimate estimate_phase_difference(std::span<const QuadraturePair> pairs, double alpha) {
  if (pairs.empty()) throw ConfigError("phase-difference estimation needs at least one pair");
  if (!(alpha > 0.0)) throw ConfigError("phase-difference estimation needs alpha > 0");
  double sum = 0.0;
  for (const auto& [c, d] : pairs) sum += c.x() * d.x();
  const double ratio = sum / static_cast<double>(pairs.size()) / alpha;
  return {std::acos(std::clamp(ratio, -1.0, 1.0)), std::abs(ratio) > 1.0};
}

PhaseEstimate estimate_input_phase(std::span<const QuadratureRecord> records, double alpha_eff) {
  if (!(alpha_eff > 0.0)) throw ConfigError("input-phase estimation needs a displacement > 0");
  constexpr double kPhaseMatch = 1e-9;
  double sum0 = 0.0;
  double sum90 = 0.0;
  std::size_t n0 = 0;
  std::size_t n90 = 0;
  for (const auto& r : records) {
    const double t = wrap_signed_angle(r.theta());
    if (std::abs(t) < kPhaseMatch) {
      sum0 += r.x();
      ++n0;
    } else if (std::abs(t - 0.5 * kPi) < kPhaseMatch) {
      sum90 += r.x();
      ++n90;
    }
  }
  if (n0 == 0) throw ConfigError("input-phase estimation needs records at theta = 0");
  const double ratio = sum0 / static_cast<double>(n0) / (std::sqrt(2.0) * alpha_eff);
  double phi = std::acos(std::clamp(ratio, -1.0, 1.0));
  if (n90 > 0 && sum90 < 0.0) phi = wrap_angle(-phi);
  return {phi, std::abs(ratio) > 1.0};
}

}  // namespace cvdv

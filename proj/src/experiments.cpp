#include "cvdv/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "cvdv/optics.hpp"
#include "cvdv/rng.hpp"

namespace cvdv {

namespace fs = std::filesystem;

std::vector<double> SweepSpec::values() const {
  if (steps < 1) throw ConfigError("sweep needs at least one step");
  std::vector<double> out(steps);
  if (steps == 1) {
    out[0] = start;
    return out;
  }
  const double h = (stop - start) / (endpoint ? steps - 1 : steps);
  for (int i = 0; i < steps; ++i) out[i] = start + i * h;
  return out;
}

namespace {

double to_sigma(double width, NoiseModel::Interpretation mode) {
  return mode == NoiseModel::Interpretation::kSigma ? width : width * std::sqrt(0.5 * kPi);
}

}  // namespace

double NoiseModel::theta_c_sigma() const { return to_sigma(theta_c_width, interpretation); }
double NoiseModel::phase_diff_sigma() const { return to_sigma(phase_diff_width, interpretation); }

// ---------------------------------------------------------------------------
// Config

void ExperimentConfig::validate() const {
  auto efficiency = [](double eta, const char* name) {
    if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError(std::string(name) + " must lie in (0, 1]");
  };
  if (resource_kind != "ideal" && resource_kind != "physical") {
    throw ConfigError("resource.kind must be \"ideal\" or \"physical\"");
  }
  if (!(alpha > 0.0)) throw ConfigError("resource.alpha must be positive");
  efficiency(physical.spcm1_eta, "efficiencies.spcm1");
  efficiency(spcm2_eta, "efficiencies.spcm2");
  efficiency(homodyne_eta, "efficiencies.homodyne");
  efficiency(tomography.eta_corr, "tomography.eta_corr");
  PhysicalResource p = physical;
  if (mix_ratio) p.mix_ratio = *mix_ratio;
  ResourceSpec{p, truncation}.validate();
  if (!(target_rate_ratio > 0.0)) throw ConfigError("resource.target_rate_ratio must be positive");
  if (dim_a < 2) throw ConfigError("truncation.dim_a must be >= 2");
  if (phi_sweep.steps < 1 || alpha_sweep.steps < 1) throw ConfigError("sweeps need >= 1 step");
  for (double a : alpha_sweep.values()) {
    if (!(a > 0.0 && a <= 1.0)) throw ConfigError("alpha sweep must stay inside (0, 1]");
  }
  if (noise.theta_c_width < 0.0 || noise.phase_diff_width < 0.0) {
    throw ConfigError("noise widths must be non-negative");
  }
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (tomography.samples < 1 || tomography.phases < 1) {
    throw ConfigError("tomography needs samples >= 1 and phases >= 1");
  }
  TomographyJob{{}, tomography.dim, tomography.eta_corr, tomography.max_iterations,
                tomography.tolerance, tomography.phase_bins, tomography.x_bins, tomography.x_max}
      .validate();
  if (wigner.x_steps < 2 || wigner.p_steps < 2) throw ConfigError("wigner grid needs >= 2 steps");
}

std::uint64_t ExperimentConfig::seed() const {
  if (!rng_seed) throw ConfigError("rng_seed is required for stochastic runs");
  return *rng_seed;
}

namespace {

Json sweep_json(const SweepSpec& s) {
  return {{"start", s.start}, {"stop", s.stop}, {"steps", s.steps}, {"endpoint", s.endpoint}};
}

SweepSpec sweep_from(const Json& j) {
  return {j.at("start").get<double>(), j.at("stop").get<double>(), j.at("steps").get<int>(),
          j.at("endpoint").get<bool>()};
}

// Every key of `given` must exist in `reference`, recursively.
void check_keys(const Json& given, const Json& reference, const std::string& path) {
  if (!given.is_object()) throw ConfigError("config section '" + path + "' must be an object");
  for (const auto& [key, value] : given.items()) {
    const std::string here = path.empty() ? key : path + "." + key;
    if (!reference.contains(key)) throw ConfigError("unknown config key '" + here + "'");
    if (reference.at(key).is_object()) check_keys(value, reference.at(key), here);
  }
}

}  // namespace

Json ExperimentConfig::to_json() const {
  Json j;
  j["resource"] = {{"kind", resource_kind},
                   {"alpha", alpha},
                   {"zeta", physical.zeta},
                   {"lambda", physical.lambda},
                   {"tap_reflectivity", physical.tap_reflectivity},
                   {"mix_ratio", mix_ratio ? Json(*mix_ratio) : Json(nullptr)},
                   {"target_rate_ratio", target_rate_ratio}};
  j["efficiencies"] = {{"spcm1", physical.spcm1_eta}, {"spcm2", spcm2_eta}, {"homodyne", homodyne_eta}};
  j["truncation"] = {{"dim_a", dim_a},
                     {"dim_c", truncation.dim_c},
                     {"dim_d", truncation.dim_d},
                     {"dim_ancilla", truncation.dim_ancilla},
                     {"tail_tolerance", truncation.tail_tolerance}};
  j["teleport"] = {{"theta_c", theta_c},
                   {"theta_d", theta_d},
                   {"detection", detection == BellDetection::kClick ? "click" : "ideal_projector"}};
  j["sweeps"] = {{"phi", sweep_json(phi_sweep)}, {"alpha", sweep_json(alpha_sweep)}};
  j["noise"] = {{"theta_c_width", noise.theta_c_width},
                {"phase_diff_width", noise.phase_diff_width},
                {"interpretation", noise.interpretation == NoiseModel::Interpretation::kSigma
                                       ? "sigma"
                                       : "mean_abs_deviation"}};
  j["trials"] = trials;
  j["rng_seed"] = rng_seed ? Json(*rng_seed) : Json(nullptr);
  const auto& t = tomography;
  j["tomography"] = {{"phi", t.phi},
                     {"samples", t.samples},
                     {"phases", t.phases},
                     {"dim", t.dim},
                     {"eta_corr", t.eta_corr},
                     {"phase_bins", t.phase_bins},
                     {"x_bins", t.x_bins},
                     {"x_max", t.x_max},
                     {"max_iterations", t.max_iterations},
                     {"tolerance", t.tolerance},
                     {"fidelity_threshold", t.fidelity_threshold}};
  j["wigner"] = {{"x_min", wigner.x_min}, {"x_max", wigner.x_max}, {"x_steps", wigner.x_steps},
                 {"p_min", wigner.p_min}, {"p_max", wigner.p_max}, {"p_steps", wigner.p_steps}};
  j["output_dir"] = output_dir;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const Json& given) {
  Json doc = ExperimentConfig{}.to_json();
  check_keys(given, doc, "");
  doc.merge_patch(given);  // null removes optional keys
  ExperimentConfig c;
  try {
    const Json& r = doc.at("resource");
    c.resource_kind = r.at("kind").get<std::string>();
    c.alpha = r.at("alpha").get<double>();
    c.physical.zeta = r.at("zeta").get<double>();
    c.physical.lambda = r.at("lambda").get<double>();
    c.physical.tap_reflectivity = r.at("tap_reflectivity").get<double>();
    if (r.contains("mix_ratio") && !r.at("mix_ratio").is_null()) {
      c.mix_ratio = r.at("mix_ratio").get<double>();
      c.physical.mix_ratio = *c.mix_ratio;
    }
    c.target_rate_ratio = r.at("target_rate_ratio").get<double>();
    const Json& e = doc.at("efficiencies");
    c.physical.spcm1_eta = e.at("spcm1").get<double>();
    c.spcm2_eta = e.at("spcm2").get<double>();
    c.homodyne_eta = e.at("homodyne").get<double>();
    const Json& tr = doc.at("truncation");
    c.dim_a = tr.at("dim_a").get<int>();
    c.truncation.dim_c = tr.at("dim_c").get<int>();
    c.truncation.dim_d = tr.at("dim_d").get<int>();
    c.truncation.dim_ancilla = tr.at("dim_ancilla").get<int>();
    c.truncation.tail_tolerance = tr.at("tail_tolerance").get<double>();
    const Json& tp = doc.at("teleport");
    c.theta_c = tp.at("theta_c").get<double>();
    c.theta_d = tp.at("theta_d").get<double>();
    const auto det = tp.at("detection").get<std::string>();
    if (det == "click") {
      c.detection = BellDetection::kClick;
    } else if (det == "ideal_projector") {
      c.detection = BellDetection::kIdealProjector;
    } else {
      throw ConfigError("teleport.detection must be \"click\" or \"ideal_projector\"");
    }
    c.phi_sweep = sweep_from(doc.at("sweeps").at("phi"));
    c.alpha_sweep = sweep_from(doc.at("sweeps").at("alpha"));
    const Json& n = doc.at("noise");
    c.noise.theta_c_width = n.at("theta_c_width").get<double>();
    c.noise.phase_diff_width = n.at("phase_diff_width").get<double>();
    const auto interp = n.at("interpretation").get<std::string>();
    if (interp == "sigma") {
      c.noise.interpretation = NoiseModel::Interpretation::kSigma;
    } else if (interp == "mean_abs_deviation") {
      c.noise.interpretation = NoiseModel::Interpretation::kMeanAbsDeviation;
    } else {
      throw ConfigError("noise.interpretation must be \"sigma\" or \"mean_abs_deviation\"");
    }
    c.trials = doc.at("trials").get<int>();
    if (doc.contains("rng_seed") && !doc.at("rng_seed").is_null()) {
      c.rng_seed = doc.at("rng_seed").get<std::uint64_t>();
    }
    const Json& t = doc.at("tomography");
    c.tomography.phi = t.at("phi").get<double>();
    c.tomography.samples = t.at("samples").get<std::size_t>();
    c.tomography.phases = t.at("phases").get<int>();
    c.tomography.dim = t.at("dim").get<int>();
    c.tomography.eta_corr = t.at("eta_corr").get<double>();
    c.tomography.phase_bins = t.at("phase_bins").get<int>();
    c.tomography.x_bins = t.at("x_bins").get<int>();
    c.tomography.x_max = t.at("x_max").get<double>();
    c.tomography.max_iterations = t.at("max_iterations").get<int>();
    c.tomography.tolerance = t.at("tolerance").get<double>();
    c.tomography.fidelity_threshold = t.at("fidelity_threshold").get<double>();
    const Json& w = doc.at("wigner");
    c.wigner = {w.at("x_min").get<double>(), w.at("x_max").get<double>(), w.at("x_steps").get<int>(),
                w.at("p_min").get<double>(), w.at("p_max").get<double>(), w.at("p_steps").get<int>()};
    c.output_dir = doc.at("output_dir").get<std::string>();
  } catch (const Json::exception& ex) {
    throw ConfigError(std::string("malformed config: ") + ex.what());
  }
  c.validate();
  return c;
}

void apply_override(Json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override must look like key.path=value: " + std::string(assignment));
  }
  std::string pointer;
  std::string key(assignment.substr(0, eq));
  std::stringstream parts(key);
  for (std::string part; std::getline(parts, part, '.');) {
    if (part.empty()) throw ConfigError("empty segment in override key: " + key);
    pointer += "/" + part;
  }
  const std::string raw(assignment.substr(eq + 1));
  Json value = Json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  doc[Json::json_pointer(pointer)] = std::move(value);
}

ExperimentConfig load_config(const std::optional<fs::path>& path,
                             const std::vector<std::string>& overrides) {
  Json doc = Json::object();
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot open config file " + path->string());
    doc = Json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("config file is not valid JSON: " + path->string());
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return ExperimentConfig::from_json(doc);
}

// ---------------------------------------------------------------------------
// Runners

ResourceBuild build_resource(const ExperimentConfig& config) {
  config.validate();
  const auto& tr = config.truncation;
  if (config.resource_kind == "ideal") {
    const FockState psi = ideal_resource(config.alpha, tr.dim_c, tr.dim_d, tr.tail_tolerance);
    return {DensityOperator(psi), 1.0, 0.0, config.alpha, 1.0, config.alpha, config.alpha};
  }
  PhysicalResource p = config.physical;
  p.mix_ratio = config.mix_ratio ? *config.mix_ratio
                                 : tune_mix_ratio(p, config.target_rate_ratio, tr);
  const HeraldedResource heralded = physical_resource(p, tr);
  const CatFit fit = fit_ideal_resource(heralded.state);
  // Align the D-mode phase so the branches carry the ideal relative sign.
  const DensityOperator aligned = phase_shift(heralded.state, "D", -fit.phase);
  const auto plus = condition_on(aligned, "D", fock_basis_state(1, tr.dim_d, "D"), true);
  const auto minus = condition_on(aligned, "D", fock_basis_state(0, tr.dim_d, "D"), true);
  return {aligned,
          heralded.herald_probability,
          p.mix_ratio,
          fit.alpha,
          fit.fidelity,
          fit_cat_amplitude(plus.state, CatParity::kPlus).alpha,
          fit_cat_amplitude(minus.state, CatParity::kMinus).alpha};
}

ResourceFigure run_resource_figure(const ExperimentConfig& config) {
  ResourceFigure fig{build_resource(config), {}, {}, {}, {}};
  const int dd = config.truncation.dim_d;
  Vector d0 = Vector::Zero(dd);
  Vector d1 = Vector::Zero(dd);
  d0(0) = 1.0;
  d1(1) = 1.0;
  const std::pair<const char*, Vector> projections[] = {
      {"d1", d1}, {"d0", d0}, {"dplus", (d0 + d1) / std::sqrt(2.0)}, {"dminus", (d0 - d1) / std::sqrt(2.0)}};
  for (const auto& [name, v] : projections) {
    const auto cond = condition_on(fig.resource.state, "D", FockState(ModeLayout({dd}, {"D"}), v), true);
    fig.names.emplace_back(name);
    fig.grids.push_back(wigner(cond.state, config.wigner));
    fig.projection_probabilities.push_back(cond.probability);
    fig.wigner_origin.push_back(wigner_at(cond.state, 0.0, 0.0));
  }
  return fig;
}

std::vector<BellRow> run_bell_figure(const ExperimentConfig& config) {
  config.validate();
  const int dim = std::max(config.dim_a, config.truncation.dim_c);
  const double eta = config.spcm2_eta;
  std::vector<BellRow> rows;
  for (double a : config.alpha_sweep.values()) {
    BellRow r{a,
              bell_click_probability(BellKind::kPhiPlus, a, eta, dim),
              bell_click_probability(BellKind::kPhiMinus, a, eta, dim),
              bell_click_probability_approx(BellKind::kPhiPlus, a, eta),
              bell_click_probability_approx(BellKind::kPhiMinus, a, eta),
              0.0,
              0.0};
    r.ratio_exact = r.p_phi_minus / r.p_phi_plus;
    r.ratio_approx = r.p_phi_minus_approx / r.p_phi_plus_approx;
    rows.push_back(r);
  }
  return rows;
}

namespace {

struct Circuit {
  Teleporter teleporter;
  ResourceEnsemble resource;
};

Circuit make_circuit(const ExperimentConfig& config, const ResourceBuild& build) {
  return {Teleporter(config.dim_a, config.truncation.dim_c, config.truncation.dim_d, config.spcm2_eta),
          resource_ensemble(build.state)};
}

FockState coherent_input(const ExperimentConfig& config, double phi) {
  return coherent_state(std::polar(config.alpha, phi), config.dim_a, "A",
                        config.truncation.tail_tolerance);
}

double leakage(const DensityOperator& rho) {
  const Matrix& m = rho.matrix();
  return std::max(0.0, 1.0 - m(0, 0).real() - m(1, 1).real());
}

}  // namespace

std::vector<TeleportRow> run_teleport_sweep(const ExperimentConfig& config) {
  const ResourceBuild build = build_resource(config);
  const Circuit circuit = make_circuit(config, build);
  const int dd = config.truncation.dim_d;
  std::vector<TeleportRow> rows;
  for (double phi : config.phi_sweep.values()) {
    const TeleportResult r = circuit.teleporter.run(coherent_input(config, phi), circuit.resource,
                                                    config.theta_c, config.theta_d, config.detection);
    rows.push_back({phi, r.output.matrix().topLeftCorner(2, 2),
                    fidelity(teleport_target(phi, config.theta_c, config.theta_d, dd), r.output),
                    analytic_fidelity(phi, config.alpha, config.theta_c), r.success_probability,
                    leakage(r.output)});
  }
  return rows;
}

MonteCarloSummary run_noise_montecarlo(const ExperimentConfig& config) {
  if (config.trials < 100) throw ConfigError("the noise Monte Carlo needs trials >= 100");
  const std::uint64_t seed = config.seed();
  const ResourceBuild build = build_resource(config);
  const Circuit circuit = make_circuit(config, build);
  const int dd = config.truncation.dim_d;
  const double sigma_c = config.noise.theta_c_sigma();
  const double sigma_diff = config.noise.phase_diff_sigma();
  const std::vector<double> phis = config.phi_sweep.values();

  MonteCarloSummary summary;
  summary.rows.resize(phis.size());
  std::vector<double> phase_var(phis.size());

  auto run_row = [&](std::size_t row) {
    const double phi = phis[row];
    const FockState input = coherent_input(config, phi);
    const FockState target = teleport_target(phi, config.theta_c, config.theta_d, dd);
    const double expected_phase = phi + config.theta_d - config.theta_c;
    Matrix mean = Matrix::Zero(dd, dd);
    double f_sum = 0.0;
    double f_sum2 = 0.0;
    std::vector<double> deltas(config.trials);
    for (int t = 0; t < config.trials; ++t) {
      Rng rng(seed, static_cast<std::uint64_t>(row) * config.trials + t);
      const double jitter = sigma_c > 0.0 ? rng.normal(0.0, sigma_c) : 0.0;
      const double frame_error = sigma_diff > 0.0 ? rng.normal(0.0, sigma_diff) : 0.0;
      const TeleportResult r =
          circuit.teleporter.run(input, circuit.resource, config.theta_c + jitter,
                                 config.theta_d + jitter, config.detection);
      const DensityOperator out = phase_shift(r.output, "D", -frame_error);
      const double f = fidelity(target, out);
      f_sum += f;
      f_sum2 += f * f;
      mean += out.matrix();
      deltas[t] = wrap_signed_angle(std::arg(out.matrix()(1, 0)) - expected_phase);
    }
    const double n = config.trials;
    mean /= n;
    double d_mean = 0.0;
    for (double d : deltas) d_mean += d;
    d_mean /= n;
    double d_var = 0.0;
    for (double d : deltas) d_var += (d - d_mean) * (d - d_mean);
    d_var /= n;
    const double f_mean = f_sum / n;
    const TeleportResult clean = circuit.teleporter.run(input, circuit.resource, config.theta_c,
                                                        config.theta_d, config.detection);
    summary.rows[row] = {phi,
                         fidelity(target, clean.output),
                         fidelity(target, DensityOperator(ModeLayout({dd}, {"D"}), mean)),
                         f_mean,
                         std::sqrt(std::max(0.0, f_sum2 / n - f_mean * f_mean)),
                         std::sqrt(d_var)};
    phase_var[row] = d_var;
  };

  // Rows are independent and every trial owns its RNG stream, so the split
  // across threads does not change the result.
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, phis.size());
  std::vector<std::exception_ptr> failures(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t row = w; row < phis.size(); row += workers) run_row(row);
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  double lo_clean = 1.0, hi_clean = 0.0, lo_noisy = 1.0, hi_noisy = 0.0, pooled = 0.0;
  for (std::size_t i = 0; i < phis.size(); ++i) {
    const auto& r = summary.rows[i];
    summary.mean_noiseless += r.fidelity_noiseless;
    summary.mean_noisy += r.fidelity_of_mean;
    lo_clean = std::min(lo_clean, r.fidelity_noiseless);
    hi_clean = std::max(hi_clean, r.fidelity_noiseless);
    lo_noisy = std::min(lo_noisy, r.fidelity_of_mean);
    hi_noisy = std::max(hi_noisy, r.fidelity_of_mean);
    pooled += phase_var[i];
  }
  const double rows = static_cast<double>(phis.size());
  summary.mean_noiseless /= rows;
  summary.mean_noisy /= rows;
  summary.relative_drop = (summary.mean_noiseless - summary.mean_noisy) / summary.mean_noiseless;
  summary.peak_to_trough_noiseless = hi_clean - lo_clean;
  summary.peak_to_trough_noisy = hi_noisy - lo_noisy;
  summary.oscillation_suppression =
      summary.peak_to_trough_noiseless > 0.0
          ? 1.0 - summary.peak_to_trough_noisy / summary.peak_to_trough_noiseless
          : 0.0;
  summary.phase_error_std_deg = std::sqrt(pooled / rows) * 180.0 / kPi;
  return summary;
}

TomographyRoundtrip run_tomography_roundtrip(const ExperimentConfig& config) {
  const std::uint64_t seed = config.seed();
  const auto& ts = config.tomography;
  const ResourceBuild build = build_resource(config);
  const Circuit circuit = make_circuit(config, build);
  const TeleportResult out = circuit.teleporter.run(coherent_input(config, ts.phi), circuit.resource,
                                                    config.theta_c, config.theta_d, config.detection);
  const DensityOperator truth = resize_modes(out.output, {ts.dim}, 1e-6).normalized();
  const DensityOperator measured = loss_channel(truth, "D", config.homodyne_eta);

  std::vector<double> thetas(ts.samples);
  for (std::size_t i = 0; i < ts.samples; ++i) {
    thetas[i] = static_cast<double>(i % ts.phases) * 2.0 * kPi / ts.phases;
  }
  TomographyJob job;
  job.records = sample_quadratures(measured, "D", thetas, seed);
  job.dim = ts.dim;
  job.eta_corr = ts.eta_corr;
  job.max_iterations = ts.max_iterations;
  job.tolerance = ts.tolerance;
  job.phase_bins = ts.phase_bins;
  job.x_bins = ts.x_bins;
  job.x_max = ts.x_max;
  TomographyResult rec = maxlik_reconstruct(job);

  bool monotone = true;
  for (std::size_t i = 1; i < rec.log_likelihood.size(); ++i) {
    if (rec.log_likelihood[i] < rec.log_likelihood[i - 1] - 1e-9) monotone = false;
  }
  const double f = fidelity(truth, rec.state);
  const double phi_est =
      wrap_angle(std::arg(rec.state.matrix()(1, 0)) - (config.theta_d - config.theta_c));
  return {ts.phi,
          truth,
          std::move(rec),
          f,
          phi_est,
          std::abs(ts.eta_corr - config.homodyne_eta) > 1e-12,
          f < ts.fidelity_threshold,
          monotone};
}

// ---------------------------------------------------------------------------
// Writers

namespace {

std::ofstream open_out(const fs::path& path) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

void close_checked(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw ConfigError("failed writing " + path.string());
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_json(const Json& j, const fs::path& path) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  close_checked(out, path);
}

}  // namespace

std::vector<fs::path> write_resource_figure(const ResourceFigure& fig, const fs::path& dir) {
  std::vector<fs::path> written;
  Json summary;
  summary["herald_probability"] = fig.resource.herald_probability;
  summary["mix_ratio"] = fig.resource.mix_ratio;
  summary["fitted_alpha"] = fig.resource.fitted_alpha;
  summary["fidelity_to_ideal"] = fig.resource.fidelity_to_ideal;
  summary["alpha_plus"] = fig.resource.alpha_plus;
  summary["alpha_minus"] = fig.resource.alpha_minus;
  Json projections = Json::object();
  for (std::size_t i = 0; i < fig.grids.size(); ++i) {
    const fs::path path = dir / ("wigner_" + fig.names[i] + ".csv");
    auto out = open_out(path);
    write_wigner_csv(out, fig.grids[i]);
    close_checked(out, path);
    written.push_back(path);
    const auto& g = fig.grids[i];
    projections[fig.names[i]] = {{"probability", fig.projection_probabilities[i]},
                                 {"wigner_origin", fig.wigner_origin[i]},
                                 {"wigner_min", g.values.minCoeff()}};
  }
  summary["projections"] = std::move(projections);
  const fs::path path = dir / "resource_summary.json";
  write_json(summary, path);
  written.push_back(path);
  return written;
}

fs::path write_bell_figure(const std::vector<BellRow>& rows, const fs::path& dir) {
  const fs::path path = dir / "bell_probabilities.csv";
  auto out = open_out(path);
  out << "#schema-version 1 bell-probabilities\n";
  out << "alpha,p_phi_plus,p_phi_minus,p_phi_plus_approx,p_phi_minus_approx,ratio_exact,ratio_approx\n";
  for (const auto& r : rows) {
    out << fmt(r.alpha) << ',' << fmt(r.p_phi_plus) << ',' << fmt(r.p_phi_minus) << ','
        << fmt(r.p_phi_plus_approx) << ',' << fmt(r.p_phi_minus_approx) << ',' << fmt(r.ratio_exact)
        << ',' << fmt(r.ratio_approx) << '\n';
  }
  close_checked(out, path);
  return path;
}

fs::path write_teleport_sweep(const std::vector<TeleportRow>& rows, const fs::path& dir) {
  const fs::path path = dir / "teleport_sweep.csv";
  auto out = open_out(path);
  out << "#schema-version 1 teleport-sweep\n";
  out << "phi,rho00_re,rho00_im,rho01_re,rho01_im,rho10_re,rho10_im,rho11_re,rho11_im,"
         "fidelity_ideal,fidelity_analytic,success_probability,offdiag_abs,offdiag_arg,leakage\n";
  for (const auto& r : rows) {
    out << fmt(r.phi);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) out << ',' << fmt(r.rho(i, j).real()) << ',' << fmt(r.rho(i, j).imag());
    }
    out << ',' << fmt(r.fidelity_ideal) << ',' << fmt(r.fidelity_analytic) << ','
        << fmt(r.success_probability) << ',' << fmt(std::abs(r.rho(0, 1))) << ','
        << fmt(std::arg(r.rho(0, 1))) << ',' << fmt(r.leakage) << '\n';
  }
  close_checked(out, path);
  return path;
}

std::vector<fs::path> write_noise_montecarlo(const MonteCarloSummary& s, const fs::path& dir) {
  const fs::path csv = dir / "noise_montecarlo.csv";
  auto out = open_out(csv);
  out << "#schema-version 1 noise-montecarlo\n";
  out << "phi,fidelity_noiseless,fidelity_of_mean,fidelity_mean,fidelity_std,phase_error_std\n";
  for (const auto& r : s.rows) {
    out << fmt(r.phi) << ',' << fmt(r.fidelity_noiseless) << ',' << fmt(r.fidelity_of_mean) << ','
        << fmt(r.fidelity_mean) << ',' << fmt(r.fidelity_std) << ',' << fmt(r.phase_error_std) << '\n';
  }
  close_checked(out, csv);
  const fs::path json = dir / "noise_montecarlo_summary.json";
  write_json({{"mean_fidelity_noiseless", s.mean_noiseless},
              {"mean_fidelity_noisy", s.mean_noisy},
              {"relative_drop", s.relative_drop},
              {"peak_to_trough_noiseless", s.peak_to_trough_noiseless},
              {"peak_to_trough_noisy", s.peak_to_trough_noisy},
              {"oscillation_suppression", s.oscillation_suppression},
              {"phase_error_std_deg", s.phase_error_std_deg}},
             json);
  return {csv, json};
}

std::vector<fs::path> write_tomography_roundtrip(const TomographyRoundtrip& r, const fs::path& dir) {
  Json j;
  j["phi"] = r.phi;
  j["fidelity"] = r.fidelity;
  j["phi_estimate"] = r.phi_estimate;
  j["flags"] = {{"eta_corr_mismatch", r.eta_corr_mismatch},
                {"fidelity_below_threshold", r.fidelity_below_threshold},
                {"likelihood_not_monotone", !r.likelihood_monotone}};
  j["truth"] = to_json(r.truth);
  j["reconstruction"] = tomography_report(r.reconstruction);
  const fs::path json = dir / "tomography_roundtrip.json";
  write_json(j, json);
  const fs::path trace = dir / "tomography_likelihood.csv";
  auto out = open_out(trace);
  write_likelihood_trace_csv(out, r.reconstruction.log_likelihood);
  close_checked(out, trace);
  return {json, trace};
}

std::vector<fs::path> write_reconstruction(const TomographyResult& result, const fs::path& json_path) {
  write_json(tomography_report(result), json_path);
  fs::path trace = json_path;
  trace.replace_extension();
  trace += "_likelihood.csv";
  auto out = open_out(trace);
  write_likelihood_trace_csv(out, result.log_likelihood);
  close_checked(out, trace);
  return {json_path, trace};
}

}  // namespace cvdv

// Command-line front end for the experiment runners.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cvdv/experiments.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitError = 1;
constexpr int kExitFlagged = 2;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--seed", opts.seed, "RNG seed (overrides rng_seed)");
  cmd->add_option("--out", opts.out, "output directory (overrides output_dir)");
  cmd->add_option("--set", opts.overrides, "override a config key, e.g. resource.alpha=0.3")
      ->allow_extra_args(false);
}

cvdv::ExperimentConfig resolve(const CommonOptions& opts) {
  std::vector<std::string> overrides = opts.overrides;
  if (opts.seed) overrides.push_back("rng_seed=" + std::to_string(*opts.seed));
  if (!opts.out.empty()) overrides.push_back("output_dir=\"" + opts.out + "\"");
  std::optional<fs::path> path;
  if (!opts.config.empty()) path = opts.config;
  return cvdv::load_config(path, overrides);
}

void report(const std::vector<fs::path>& paths) {
  for (const auto& p : paths) std::cout << "wrote " << p.string() << '\n';
}

int cmd_resource(const CommonOptions& opts) {
  const auto config = resolve(opts);
  const auto fig = cvdv::run_resource_figure(config);
  report(cvdv::write_resource_figure(fig, config.output_dir));
  std::printf("fidelity_to_ideal %.6f  alpha_plus %.4f  alpha_minus %.4f\n",
              fig.resource.fidelity_to_ideal, fig.resource.alpha_plus, fig.resource.alpha_minus);
  return 0;
}

int cmd_bell(const CommonOptions& opts) {
  const auto config = resolve(opts);
  report({cvdv::write_bell_figure(cvdv::run_bell_figure(config), config.output_dir)});
  return 0;
}

int cmd_teleport(const CommonOptions& opts) {
  const auto config = resolve(opts);
  const auto rows = cvdv::run_teleport_sweep(config);
  report({cvdv::write_teleport_sweep(rows, config.output_dir)});
  int status = 0;
  for (const auto& r : rows) {
    if (!(r.fidelity_ideal >= 0.0 && r.fidelity_ideal <= 1.0 + 1e-12)) {
      std::cerr << "invariant violated: fidelity outside [0, 1] at phi=" << r.phi << '\n';
      status = kExitFlagged;
    }
  }
  return status;
}

int cmd_montecarlo(const CommonOptions& opts) {
  const auto config = resolve(opts);
  const auto summary = cvdv::run_noise_montecarlo(config);
  report(cvdv::write_noise_montecarlo(summary, config.output_dir));
  std::printf("mean fidelity %.6f -> %.6f (relative drop %.4f), oscillation suppression %.3f\n",
              summary.mean_noiseless, summary.mean_noisy, summary.relative_drop,
              summary.oscillation_suppression);
  return 0;
}

int cmd_tomography(const CommonOptions& opts) {
  const auto config = resolve(opts);
  const auto result = cvdv::run_tomography_roundtrip(config);
  report(cvdv::write_tomography_roundtrip(result, config.output_dir));
  std::printf("fidelity %.6f  phi_estimate %.6f  iterations %d\n", result.fidelity,
              result.phi_estimate, result.reconstruction.iterations);
  for (const auto& w : result.reconstruction.warnings) std::cerr << "warning: " << w << '\n';
  if (result.flagged()) {
    if (result.eta_corr_mismatch) std::cerr << "flag: eta_corr differs from the homodyne efficiency\n";
    if (result.fidelity_below_threshold) std::cerr << "flag: round-trip fidelity below threshold\n";
    if (!result.likelihood_monotone) std::cerr << "flag: log-likelihood decreased\n";
    return kExitFlagged;
  }
  return 0;
}

struct ReconstructOptions {
  std::string input;
  std::string output = "reconstruction.json";
  cvdv::TomographyJob job;
};

int cmd_reconstruct(ReconstructOptions& opts) {
  std::ifstream in(opts.input);
  if (!in) throw cvdv::ConfigError("cannot open " + opts.input);
  opts.job.records = cvdv::read_quadrature_csv(in);
  const auto result = cvdv::maxlik_reconstruct(opts.job);
  report(cvdv::write_reconstruction(result, opts.output));
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  for (std::size_t i = 1; i < result.log_likelihood.size(); ++i) {
    if (result.log_likelihood[i] < result.log_likelihood[i - 1] - 1e-9) {
      std::cerr << "flag: log-likelihood decreased at iteration " << i << '\n';
      return kExitFlagged;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid CV-DV teleportation simulator"};
  app.require_subcommand(1);

  CommonOptions common;
  auto* resource = app.add_subcommand("resource", "Wigner grids of the projected resource state");
  auto* bell = app.add_subcommand("bell", "Bell-state click probabilities versus alpha");
  auto* teleport = app.add_subcommand("teleport", "noiseless teleportation sweep over phi");
  auto* montecarlo = app.add_subcommand("montecarlo", "phase-noise Monte Carlo over phi");
  auto* tomography = app.add_subcommand("tomography", "homodyne tomography round trip");
  for (auto* cmd : {resource, bell, teleport, montecarlo, tomography}) add_common(cmd, common);

  ReconstructOptions rec;
  auto* reconstruct = app.add_subcommand("reconstruct", "MaxLik reconstruction from a quadrature CSV");
  reconstruct->add_option("input", rec.input, "CSV with header mode,theta,x")
      ->required()
      ->check(CLI::ExistingFile);
  reconstruct->add_option("-o,--output", rec.output, "density-matrix JSON path");
  reconstruct->add_option("--dim", rec.job.dim, "Fock truncation")->capture_default_str();
  reconstruct->add_option("--eta-corr", rec.job.eta_corr, "detection efficiency to correct for")
      ->capture_default_str();
  reconstruct->add_option("--max-iterations", rec.job.max_iterations)->capture_default_str();
  reconstruct->add_option("--tolerance", rec.job.tolerance)->capture_default_str();
  reconstruct->add_option("--phase-bins", rec.job.phase_bins)->capture_default_str();
  reconstruct->add_option("--x-bins", rec.job.x_bins)->capture_default_str();
  reconstruct->add_option("--x-max", rec.job.x_max)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*resource) return cmd_resource(common);
    if (*bell) return cmd_bell(common);
    if (*teleport) return cmd_teleport(common);
    if (*montecarlo) return cmd_montecarlo(common);
    if (*tomography) return cmd_tomography(common);
    if (*reconstruct) return cmd_reconstruct(rec);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return 0;
}

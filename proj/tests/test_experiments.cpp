#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cvdv/experiments.hpp"
#include "oracles.hpp"

using namespace cvdv;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.alpha = 0.3;
  c.dim_a = 10;
  c.truncation.dim_c = 10;
  c.truncation.dim_d = 10;
  c.phi_sweep = {0.0, 2 * kPi, 6, false};
  c.trials = 100;
  c.rng_seed = 17;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("cvdv_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Config, DefaultsRoundTripThroughJson) {
  const ExperimentConfig c;
  const auto back = ExperimentConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json().dump(), c.to_json().dump());
  EXPECT_FALSE(back.rng_seed.has_value());
  EXPECT_FALSE(back.mix_ratio.has_value());
}

TEST(Config, UnknownKeysRejected) {
  Json j = ExperimentConfig{}.to_json();
  j["resource"]["alpah"] = 0.3;
  EXPECT_THROW(ExperimentConfig::from_json(j), ConfigError);
  Json top = ExperimentConfig{}.to_json();
  top["extra"] = 1;
  EXPECT_THROW(ExperimentConfig::from_json(top), ConfigError);
}

TEST(Config, TypeMismatchRejected) {
  Json j = ExperimentConfig{}.to_json();
  j["trials"] = "many";
  EXPECT_THROW(ExperimentConfig::from_json(j), ConfigError);
}

TEST(Config, PartialFileMergesOverDefaults) {
  const auto dir = scratch("partial");
  fs::create_directories(dir);
  const auto path = dir / "c.json";
  std::ofstream(path) << R"({"resource": {"alpha": 0.25}, "rng_seed": 5})";
  const auto c = load_config(path, {});
  EXPECT_EQ(c.alpha, 0.25);
  EXPECT_EQ(c.seed(), 5u);
  EXPECT_EQ(c.dim_a, ExperimentConfig{}.dim_a);
}

TEST(Config, OverridesParseJsonOrString) {
  const auto c = load_config(std::nullopt, {"resource.alpha=0.2", "output_dir=results", "resource.kind=\"physical\"",
                                            "resource.mix_ratio=0.4", "teleport.detection=ideal_projector"});
  EXPECT_EQ(c.alpha, 0.2);
  EXPECT_EQ(c.output_dir, "results");
  EXPECT_EQ(c.resource_kind, "physical");
  ASSERT_TRUE(c.mix_ratio.has_value());
  EXPECT_EQ(*c.mix_ratio, 0.4);
  EXPECT_EQ(c.detection, BellDetection::kIdealProjector);
  EXPECT_THROW(load_config(std::nullopt, {"resource.nope=1"}), ConfigError);
  EXPECT_THROW(load_config(std::nullopt, {"no_equals_sign"}), ConfigError);
}

TEST(Config, ValidationCatchesBadValues) {
  EXPECT_THROW(load_config(std::nullopt, {"efficiencies.spcm2=0"}), ConfigError);
  EXPECT_THROW(load_config(std::nullopt, {"resource.kind=\"other\""}), ConfigError);
  EXPECT_THROW(load_config(std::nullopt, {"noise.interpretation=\"fwhm\""}), ConfigError);
}

TEST(Config, SeedRequiredForStochasticRunners) {
  ExperimentConfig c = small_config();
  c.rng_seed.reset();
  EXPECT_THROW(c.seed(), ConfigError);
  EXPECT_THROW(run_noise_montecarlo(c), ConfigError);
  EXPECT_THROW(run_tomography_roundtrip(c), ConfigError);
}

TEST(NoiseModel, MeanAbsoluteDeviationConversion) {
  NoiseModel n;
  EXPECT_EQ(n.theta_c_sigma(), 0.53);
  n.interpretation = NoiseModel::Interpretation::kMeanAbsDeviation;
  EXPECT_NEAR(n.theta_c_sigma(), 0.53 * std::sqrt(oracle::kPi / 2), 1e-15);
  EXPECT_NEAR(n.phase_diff_sigma(), 0.5 * std::sqrt(oracle::kPi / 2), 1e-15);
}

TEST(Sweep, ValuesAndEndpoint) {
  const auto open = SweepSpec{0.0, 1.0, 4, false}.values();
  ASSERT_EQ(open.size(), 4u);
  EXPECT_DOUBLE_EQ(open[3], 0.75);
  const auto closed = SweepSpec{0.0, 1.0, 5, true}.values();
  EXPECT_DOUBLE_EQ(closed.back(), 1.0);
  EXPECT_EQ(SweepSpec({0.3, 9.0, 1, true}).values(), std::vector<double>{0.3});
}

TEST(Runners, ZeroNoiseMonteCarloEqualsSweep) {
  ExperimentConfig c = small_config();
  c.noise.theta_c_width = 0.0;
  c.noise.phase_diff_width = 0.0;
  const auto mc = run_noise_montecarlo(c);
  const auto sweep = run_teleport_sweep(c);
  ASSERT_EQ(mc.rows.size(), sweep.size());
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    EXPECT_NEAR(mc.rows[i].fidelity_of_mean, sweep[i].fidelity_ideal, 1e-9);
    EXPECT_NEAR(mc.rows[i].fidelity_noiseless, sweep[i].fidelity_ideal, 1e-12);
    EXPECT_NEAR(mc.rows[i].phase_error_std, 0.0, 1e-9);
  }
  EXPECT_NEAR(mc.relative_drop, 0.0, 1e-9);
}

TEST(Runners, NoiseLowersFidelity) {
  const auto mc = run_noise_montecarlo(small_config());
  EXPECT_LT(mc.mean_noisy, mc.mean_noiseless);
  EXPECT_GT(mc.phase_error_std_deg, 10.0);
  ExperimentConfig few = small_config();
  few.trials = 50;
  EXPECT_THROW(run_noise_montecarlo(few), ConfigError);
}

TEST(Runners, MonteCarloOutputIsByteIdenticalUnderSeed) {
  const auto c = small_config();
  const auto a = scratch("mc_a");
  const auto b = scratch("mc_b");
  const auto pa = write_noise_montecarlo(run_noise_montecarlo(c), a);
  const auto pb = write_noise_montecarlo(run_noise_montecarlo(c), b);
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(slurp(pa[i]), slurp(pb[i])) << pa[i];
}

TEST(Runners, TeleportSweepCsvHasSchemaHeader) {
  const auto dir = scratch("sweep");
  const auto path = write_teleport_sweep(run_teleport_sweep(small_config()), dir);
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first.rfind("#schema-version 1", 0), 0u);
}

TEST(Runners, BellFigureRatiosFollowProbabilities) {
  ExperimentConfig c = small_config();
  c.alpha_sweep = {0.2, 0.6, 3, true};
  for (const auto& r : run_bell_figure(c)) {
    EXPECT_NEAR(r.ratio_exact, r.p_phi_minus / r.p_phi_plus, 1e-12);
    EXPECT_NEAR(r.p_phi_plus, oracle::bell_click(true, true, r.alpha, c.spcm2_eta), 1e-8);
  }
}

TEST(Runners, ResourceFigureProjectionsSumToOne) {
  ExperimentConfig c = small_config();
  c.wigner = {-3, 3, 31, -3, 3, 31};
  const auto fig = run_resource_figure(c);
  ASSERT_EQ(fig.names.size(), 4u);
  EXPECT_NEAR(fig.projection_probabilities[0] + fig.projection_probabilities[1], 1.0, 1e-12);
  EXPECT_NEAR(fig.projection_probabilities[2] + fig.projection_probabilities[3], 1.0, 1e-12);
  // |1⟩_D conditional is an even cat, |0⟩_D an odd one
  EXPECT_GT(fig.wigner_origin[0], 0.0);
  EXPECT_LT(fig.wigner_origin[1], 0.0);
}

TEST(Runners, TomographyFlagsEfficiencyMismatch) {
  ExperimentConfig c = small_config();
  c.tomography.samples = 20000;
  c.tomography.phases = 12;
  c.tomography.dim = 4;
  c.tomography.max_iterations = 200;
  c.tomography.eta_corr = 0.8;
  const auto r = run_tomography_roundtrip(c);
  EXPECT_TRUE(r.eta_corr_mismatch);
  EXPECT_TRUE(r.flagged());
  EXPECT_TRUE(r.likelihood_monotone);
}

TEST(Runners, TomographyRoundTripRecoversOutput) {
  ExperimentConfig c = small_config();
  c.tomography.samples = 100000;
  c.tomography.phases = 24;
  c.tomography.dim = 4;
  c.tomography.max_iterations = 500;
  c.tomography.phi = 1.0;
  const auto r = run_tomography_roundtrip(c);
  EXPECT_FALSE(r.eta_corr_mismatch);
  EXPECT_GE(r.fidelity, 0.97);
  EXPECT_NEAR(wrap_signed_angle(r.phi_estimate - 1.0), 0.0, 0.15);
}

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "cvdv/measurement.hpp"
#include "cvdv/optics.hpp"
#include "oracles.hpp"

using namespace cvdv;

namespace {

double mean_x(const std::vector<QuadratureRecord>& r) {
  double s = 0.0;
  for (const auto& q : r) s += q.x();
  return s / r.size();
}

double var_x(const std::vector<QuadratureRecord>& r) {
  const double m = mean_x(r);
  double s = 0.0;
  for (const auto& q : r) s += (q.x() - m) * (q.x() - m);
  return s / (r.size() - 1);
}

}  // namespace

TEST(ClickPovm, DiagonalValues) {
  const auto e = click_povm(0.1, 5).matrix();
  EXPECT_EQ(e(0, 0), Complex(0.0));
  EXPECT_NEAR(e(1, 1).real(), 0.1, 1e-15);
  EXPECT_NEAR(e(3, 3).real(), 1 - std::pow(0.9, 3), 1e-15);
  EXPECT_THROW(click_povm(0.0, 5), DimensionError);
  EXPECT_THROW(click_povm(1.1, 5), DimensionError);
}

TEST(Conditioning, HeraldedSinglePhoton) {
  const double lambda = 0.1;
  const auto tms = two_mode_squeezed(lambda, 6, 6);
  const auto r = condition_on(tms, "E", click_povm(0.1, 6), true);
  EXPECT_EQ(r.state.layout().labels(), std::vector<std::string>{"D"});
  EXPECT_GT(fidelity(fock_basis_state(1, 6, "D"), r.state), 1 - 2 * lambda * lambda);
  // P(click) = Σ λ^{2n}(1−λ²)[1 − 0.9ⁿ]
  double p = 0.0;
  for (int n = 0; n < 6; ++n) p += std::pow(lambda, 2 * n) * (1 - lambda * lambda) * (1 - std::pow(0.9, n));
  EXPECT_NEAR(r.probability, p, 1e-10);
}

TEST(Conditioning, PureAndMixedRoutesAgree) {
  const auto psi = beam_splitter(tensor(cat_state(0.6, CatParity::kMinus, 10, "A"), coherent_state(0.3, 10, "C")),
                                 BeamSplitterSpec{0.5, "A", "C"});
  const auto effect = click_povm(0.2, 10);
  for (bool discard : {true, false}) {
    const auto a = condition_on(psi, "A", effect, discard);
    const auto b = condition_on(DensityOperator(psi), "A", effect, discard);
    EXPECT_NEAR(a.probability, b.probability, 1e-13);
    EXPECT_LT((a.state.matrix() - b.state.matrix()).norm(), 1e-12);
    EXPECT_TRUE(a.state.is_physical());
  }
}

TEST(Conditioning, ProjectorKeepsPurity) {
  const auto psi = tensor(coherent_state(0.5, 8, "C"), cat_state(0.4, CatParity::kPlus, 8, "D"));
  const auto r = condition_on(psi, "D", fock_basis_state(0, 8), true);
  EXPECT_GT(fidelity(coherent_state(0.5, 8, "C"), r.state), 1 - 1e-14);
  const auto kept = condition_on(psi, "D", fock_basis_state(0, 8), false);
  EXPECT_EQ(kept.state.num_modes(), 2u);
  EXPECT_NEAR(kept.probability, r.probability, 1e-15);
}

TEST(Conditioning, ZeroProbabilityThrows) {
  EXPECT_THROW(condition_on(vacuum(5), "A", click_povm(0.3, 5), true), ZeroProbabilityError);
  EXPECT_THROW(condition_on(vacuum(5), "A", fock_basis_state(2, 5), true), ZeroProbabilityError);
}

TEST(Quadrature, EigenvectorPhaseConvention) {
  const Vector v = quadrature_eigenvector(6, 0.7, 0.3);
  const RealVector x = RealVector::Constant(1, 0.3);
  const RealMatrix psi = hermite_functions(6, x);
  for (int n = 0; n < 6; ++n) EXPECT_NEAR(std::abs(v(n) - std::polar(psi(n, 0), 0.7 * n)), 0.0, 1e-15);
}

TEST(Quadrature, HermiteFunctionsOrthonormal) {
  const RealVector x = RealVector::LinSpaced(4001, -12, 12);
  const double h = x(1) - x(0);
  const RealMatrix psi = hermite_functions(20, x);
  const RealMatrix gram = psi * psi.transpose() * h;
  EXPECT_LT((gram - RealMatrix::Identity(20, 20)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Quadrature, CoherentDistributionIsGaussian) {
  const Complex a(0.6, 0.4);
  const auto s = coherent_state(a, 20);
  const RealVector x = RealVector::LinSpaced(801, -6, 6);
  for (double theta : {0.0, 0.8, 2.5}) {
    const RealVector p = quadrature_distribution(s, "A", theta, x);
    const double mu = std::sqrt(2.0) * (a * std::exp(Complex(0, -theta))).real();
    for (Eigen::Index k = 0; k < x.size(); k += 40) {
      const double ref = std::exp(-(x(k) - mu) * (x(k) - mu)) / std::sqrt(oracle::kPi);
      EXPECT_NEAR(p(k), ref, 1e-10);
    }
  }
}

TEST(Quadrature, CoverageCheck) {
  const RealVector narrow = RealVector::LinSpaced(100, -1, 1);
  EXPECT_THROW(quadrature_distribution(vacuum(5), "A", 0.0, narrow), GridCoverageError);
}

TEST(Sampling, CoherentMomentsWithinStandardErrors) {
  const Complex a(0.5, -0.2);
  const std::vector<double> thetas(40000, 0.6);
  const auto rec = sample_quadratures(coherent_state(a, 20), "A", thetas, 11);
  const double mu = std::sqrt(2.0) * (a * std::exp(Complex(0, -0.6))).real();
  const double se = std::sqrt(0.5 / thetas.size());
  EXPECT_NEAR(mean_x(rec), mu, 4 * se);
  EXPECT_NEAR(var_x(rec), 0.5, 4 * 0.5 * std::sqrt(2.0 / thetas.size()));
}

TEST(Sampling, SqueezedVarianceFollowsPhase) {
  const double zeta = 0.3;
  for (double theta : {0.0, oracle::kPi / 2}) {
    const std::vector<double> thetas(40000, theta);
    const auto rec = sample_quadratures(squeezed_vacuum(zeta, 30), "A", thetas, 5);
    const double v = oracle::squeezed_variance(zeta, theta);
    EXPECT_NEAR(var_x(rec), v, 4 * v * std::sqrt(2.0 / thetas.size()));
  }
}

TEST(Sampling, JointSamplesOfProductStateAreUncorrelated) {
  const auto psi = tensor(coherent_state(0.5, 12, "C"), coherent_state(-0.3, 12, "D"));
  const auto pairs = sample_joint_quadratures(psi, "C", 0.0, "D", 0.0, 30000, 3);
  double sc = 0, sd = 0, scd = 0;
  for (const auto& [c, d] : pairs) {
    sc += c.x();
    sd += d.x();
    scd += c.x() * d.x();
  }
  const double n = pairs.size();
  EXPECT_NEAR(sc / n, std::sqrt(2.0) * 0.5, 0.03);
  EXPECT_NEAR(sd / n, -std::sqrt(2.0) * 0.3, 0.03);
  EXPECT_NEAR(scd / n - (sc / n) * (sd / n), 0.0, 0.03);
}

TEST(Wigner, CoherentMatchesGaussian) {
  const Complex a(0.4, -0.3);
  const DensityOperator rho(coherent_state(a, 20));
  for (double x : {-1.0, 0.0, 0.6}) {
    for (double p : {-0.5, 0.2, 1.1}) EXPECT_NEAR(wigner_at(rho, x, p), oracle::wigner_coherent(a, x, p), 1e-10);
  }
}

TEST(Wigner, SinglePhotonClosedForm) {
  const DensityOperator rho(fock_basis_state(1, 4));
  for (double x : {0.0, 0.5, 1.3}) EXPECT_NEAR(wigner_at(rho, x, 0.4), oracle::wigner_fock1(x, 0.4), 1e-13);
}

TEST(Wigner, OriginEqualsScaledParity) {
  const auto odd = cat_state(0.67, CatParity::kMinus, 20);
  EXPECT_NEAR(wigner_at(DensityOperator(odd), 0, 0), -1.0 / oracle::kPi, 1e-12);
  const auto even = cat_state(0.42, CatParity::kPlus, 20);
  EXPECT_NEAR(wigner_at(DensityOperator(even), 0, 0), 1.0 / oracle::kPi, 1e-12);
}

TEST(Wigner, RejectsMultiModeInput) {
  EXPECT_THROW(wigner(tensor(vacuum(3, "A"), vacuum(3, "B"))), ModeError);
}

TEST(Csv, RoundTrip) {
  std::vector<QuadratureRecord> rec{{"D", 0.1, -1.25}, {"D", 3.0, 0.1 + 1e-16}, {"C", 7.0, 2.0}};
  std::stringstream ss;
  write_quadrature_csv(ss, rec);
  const auto back = read_quadrature_csv(ss);
  ASSERT_EQ(back.size(), rec.size());
  for (std::size_t i = 0; i < rec.size(); ++i) {
    EXPECT_EQ(back[i].mode(), rec[i].mode());
    EXPECT_EQ(back[i].theta(), rec[i].theta());
    EXPECT_EQ(back[i].x(), rec[i].x());
  }
  EXPECT_NEAR(rec[2].theta(), 7.0 - 2 * oracle::kPi, 1e-15);
}

TEST(Csv, RejectsBadHeader) {
  std::stringstream ss("a,b,c\nD,0,0\n");
  EXPECT_THROW(read_quadrature_csv(ss), ConfigError);
}

class MeasurementProperties : public ::testing::TestWithParam<int> {};

TEST_P(MeasurementProperties, ClickPovmBounds) {
  const int dim = GetParam();
  for (double eta : {0.05, 0.54, 1.0}) {
    const auto e = click_povm(eta, dim);
    const RealVector ev = hermitian_eigenvalues(e.matrix());
    EXPECT_GE(ev.minCoeff(), -1e-15);
    EXPECT_LE(ev.maxCoeff(), 1 + 1e-15);
  }
}

TEST_P(MeasurementProperties, WignerNormalizedWithQuadratureMarginal) {
  const int dim = GetParam();
  const DensityOperator rho = loss_channel(DensityOperator(cat_state(0.67, CatParity::kMinus, dim)), "A", 0.54);
  PhaseSpaceGridSpec spec{-9, 9, 181, -9, 9, 181};
  const auto w = wigner(rho, spec);
  EXPECT_NEAR(w.integral(), 1.0, 1e-6);
  RealVector xs(spec.x_steps);
  for (int j = 0; j < spec.x_steps; ++j) xs(j) = w.x_at(j);
  const RealVector marginal = w.values.colwise().sum().transpose() * w.dp();
  const RealVector px = quadrature_distribution(rho, "A", 0.0, xs);
  EXPECT_LT((marginal - px).cwiseAbs().maxCoeff(), 1e-6);
}

TEST_P(MeasurementProperties, SamplingDeterministicUnderSeed) {
  const int dim = GetParam();
  const std::vector<double> thetas{0.0, 0.5, 1.0, 0.5, 2.0};
  const auto s = squeezed_vacuum(0.1, dim);
  const auto a = sample_quadratures(s, "A", thetas, 99);
  const auto b = sample_quadratures(s, "A", thetas, 99);
  const auto c = sample_quadratures(s, "A", thetas, 100);
  bool differs = false;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    EXPECT_EQ(a[i].x(), b[i].x());
    differs = differs || a[i].x() != c[i].x();
  }
  EXPECT_TRUE(differs);
}

INSTANTIATE_TEST_SUITE_P(Dims, MeasurementProperties, ::testing::Values(8, 15, 20));

#include "mirrortail/concentration.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace mirrortail;
using namespace mirrortail::conc;

TEST(Thresholds, SubgaussianExample) {
  // 4 sqrt(e * 100 * ln 20)
  const double expected = 4.0 * std::sqrt(std::exp(1.0) * 100.0 * std::log(20.0));
  EXPECT_NEAR(maximal_threshold_subgaussian(constant_scales(100, 1.0), 0.05), expected, 1e-10);
  EXPECT_NEAR(expected, 114.15, 5e-3);
}

TEST(Thresholds, FukNagaevExample) {
  const double a = std::sqrt(2.0 * 100.0 * std::log(20.0));
  const double b = (2.0 + 5.0 / 3.0) * std::pow(100.0 / 0.05, 0.2);
  EXPECT_NEAR(fuk_nagaev_threshold(5.0, constant_scales(100, 1.0), 0.05), a + b, 1e-10);
  EXPECT_NEAR(a + b, 41.25, 5e-3);
}

TEST(Thresholds, HeavyExampleByHand) {
  // theta = 2, m_i = 1, n = 100, delta = 0.05, s = 0.
  const double c1 = 128.0 * 720.0;
  const double log2d = std::log(40.0);
  const double lr = std::log(2.0 * std::exp(1.0) * 100.0 / 0.05);
  const double expected = std::sqrt(c1 * 100.0 * log2d) + 4.0 * lr * log2d;
  EXPECT_NEAR(maximal_threshold_heavy(2.0, constant_scales(100, 1.0), 0.05, 0.0) / expected, 1.0, 1e-12);
  // s = 3 with theta = 2: max{log(2e n / delta), 3} picks the log here.
  EXPECT_NEAR(maximal_threshold_heavy(2.0, constant_scales(100, 1.0), 0.05, 3.0) / expected, 1.0, 1e-12);
}

TEST(Thresholds, ZeroScalesGiveZeroThreshold) {
  EXPECT_EQ(maximal_threshold_subgaussian(constant_scales(10, 0.0), 0.1), 0.0);
  EXPECT_EQ(maximal_threshold_heavy(2.0, constant_scales(10, 0.0), 0.1, 0.0), 0.0);
  EXPECT_EQ(shortcut_threshold(Regime::poly, Shortcut::inner_product, 5.0, 1.0, constant_scales(5, 0.0), 0.1), 0.0);
  const auto v = validate_subw_maximal(2.0, constant_scales(10, 0.0), 0.05, 0.0, 100);
  EXPECT_EQ(v.rate, 0.0);
  EXPECT_TRUE(v.passed);
}

TEST(Thresholds, InvalidInputsRejected) {
  EXPECT_THROW(maximal_threshold_subgaussian({1.0}, 0.0), std::invalid_argument);
  EXPECT_THROW(maximal_threshold_subgaussian({1.0}, 1.5), std::invalid_argument);
  EXPECT_THROW(maximal_threshold_subgaussian({-1.0}, 0.1), std::invalid_argument);
  EXPECT_THROW(maximal_threshold_heavy(0.5, {1.0}, 0.1, 0.0), std::invalid_argument);
  EXPECT_THROW(fuk_nagaev_threshold(2.0, {1.0}, 0.1), std::invalid_argument);
  EXPECT_THROW(freedman_type_cap(0.0, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(freedman_type_cap(-1.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(shortcut_threshold(Regime::poly, Shortcut::squared_norm, 4.0, 1.0, {1.0}, 0.1), std::invalid_argument);
}

TEST(Thresholds, FreedmanTypeCap) {
  EXPECT_NEAR(freedman_type_cap(0.0, 200.0, 40.0), std::exp(-1.0), 1e-15);
  // min{144/8, 12/6} = 2
  EXPECT_NEAR(freedman_type_cap(1.0, 1.0, 12.0), std::exp(-2.0), 1e-15);
}

TEST(Martingales, RademacherMaximumMatchesExactWalk) {
  const MartingaleGen gen{IncrementLaw::rademacher, 0.5, 0.0, constant_scales(100, 1.0), false};
  const std::size_t n = 200000;
  const auto rates = exceedance_curve(gen, {10.0, 20.0, 30.0}, n, 5);
  for (int k = 0; k < 3; ++k) {
    const double p = oracle::walk_max_tail(100, 10 * (k + 1));
    EXPECT_NEAR(rates[std::size_t(k)], p, 4.0 * std::sqrt(p * (1.0 - p) / double(n)) + 1e-12) << "x=" << 10 * (k + 1);
  }
}

TEST(Martingales, ChickenEggRademacherRateIsWalkTail) {
  // With alpha = 0, beta = 200 the variance condition 2t <= 200 always holds,
  // so the event is exactly {max S_t >= 40}.
  const MartingaleGen gen{IncrementLaw::rademacher, 0.5, 0.0, constant_scales(100, 1.0), false};
  const std::size_t n = 100000;
  const auto v = validate_chicken_egg(0.0, 200.0, 40.0, gen, n, 3);
  const double p = oracle::walk_max_tail(100, 40);
  EXPECT_NEAR(v.rate, p, 4.0 * std::sqrt(p * (1.0 - p) / double(n)) + 1e-12);
  EXPECT_NEAR(v.target, std::exp(-1.0), 1e-15);
  EXPECT_TRUE(v.passed);
}

TEST(Martingales, ConditionalVarianceMatchesSampling) {
  for (IncrementLaw law : {IncrementLaw::gaussian, IncrementLaw::sym_weibull, IncrementLaw::sym_poly}) {
    const MartingaleGen gen{law, 2.0, 8.0, {1.3}, false};
    double s2 = 0.0;
    const std::size_t n = 400000;
    for (std::size_t i = 0; i < n; ++i) {
      CounterRng rng{77, i};
      const double x = gen.draw(0, 0.0, rng);
      s2 += x * x;
    }
    EXPECT_NEAR(s2 / double(n) / gen.conditional_variance(0, 0.0), 1.0, 0.03) << to_string(law);
  }
}

TEST(Martingales, AdversarialHalvesScaleBelowZero) {
  const MartingaleGen gen{IncrementLaw::rademacher, 0.5, 0.0, {2.0}, true};
  EXPECT_EQ(gen.scale_at(0, -0.1), 1.0);
  EXPECT_EQ(gen.scale_at(0, 0.0), 2.0);
}

TEST(Martingales, ExceedanceIsMonotone) {
  const MartingaleGen gen{IncrementLaw::sym_weibull, 2.0, 0.0, constant_scales(50, 1.0), false};
  const auto r = exceedance_curve(gen, {0.0, 5.0, 10.0, 20.0, 40.0}, 20000, 9);
  for (std::size_t k = 1; k < r.size(); ++k) EXPECT_LE(r[k], r[k - 1]);
}

TEST(TightLaws, WeibullCertificateIsTwo) {
  // E exp(|X|/nu)^(1/theta) = E exp(E/2) = 2 for the tight law.
  for (double theta : {1.0, 2.0}) {
    const double nu = 1.7;
    const double lambda = tight_weibull_lambda(theta, nu);
    const double val = oracle::integrate_to_inf(
        [&](double e) { return std::exp(-e) * std::exp(std::pow(lambda * std::pow(e, theta) / nu, 1.0 / theta)); }, 0.0,
        1.0, 1e-13);
    EXPECT_NEAR(val, 2.0, 1e-8);
  }
}

TEST(TightLaws, GaussianCertificateIsTwo) {
  const double nu = 1.0;
  const double s = tight_gaussian_std(nu);
  const double val = 2.0 * oracle::integrate_to_inf(
                               [&](double x) {
                                 return std::exp(x * x / (nu * nu) - x * x / (2 * s * s)) /
                                        (s * std::sqrt(2 * std::numbers::pi));
                               },
                               0.0, 1.0, 1e-13);
  EXPECT_NEAR(val, 2.0, 1e-8);
}

TEST(TightLaws, ParetoMomentIsKappaToP) {
  const double p = 5.0, kappa = 1.4;
  const double xm = tight_pareto_xm(p, kappa);
  const double a = p + 1.0;
  // E W^p = int_{x_m}^inf w^p a x_m^a w^(-a-1) dw; substitute w = x_m / u.
  const double mom = oracle::integrate(
      [&](double u) { return u <= 0.0 ? 0.0 : a * std::pow(xm, p) * std::pow(u, a - p - 1.0); }, 0.0, 1.0, 1e-14);
  EXPECT_NEAR(mom / std::pow(kappa, p), 1.0, 1e-9);
}

TEST(Calculus, CentringConstant) {
  EXPECT_NEAR(centering_constant(1.0), 4.0 / std::log(2.0), 1e-12);
  EXPECT_NEAR(centering_constant(0.5), 4.0 * std::sqrt(std::numbers::pi) / 2.0 / std::sqrt(std::log(2.0)), 1e-12);
  EXPECT_NEAR(centering_constant(2.0), 8.0 * 2.0 / std::pow(std::log(2.0), 2.0), 1e-12);
}

TEST(Calculus, MomentBoundExamples) {
  EXPECT_NEAR(subw_moment_bound(1.0, 1.0, 2.0), 4.0, 1e-12);
  EXPECT_NEAR(subw_moment_bound(2.0, 1.0, 1.0), 4.0, 1e-12);
  EXPECT_NEAR(subw_moment_bound(0.5, 2.0, 2.0), 8.0, 1e-12);
  EXPECT_THROW(subw_moment_bound(100.0, 1.0, 10.0), std::range_error);
}

TEST(Calculus, MgfBoundExamplesAndRanges) {
  EXPECT_EQ(mgf_bound(MgfCase::subgaussian, 0.5, 1.0, 0.0), 1.0);
  EXPECT_NEAR(mgf_bound(MgfCase::subgaussian, 0.5, 1.0, 0.5), std::exp(std::exp(1.0)), 1e-12);
  const double lmax = 1.0 / (2.0 * std::exp(1.0));
  EXPECT_NEAR(mgf_bound(MgfCase::subexponential, 1.0, 1.0, lmax), std::exp(0.5), 1e-12);
  EXPECT_THROW(mgf_bound(MgfCase::subexponential, 1.0, 1.0, 1.01 * lmax), std::invalid_argument);
  EXPECT_THROW(mgf_bound(MgfCase::truncated, 2.0, 1.0, -0.1, 4.0), std::invalid_argument);
  EXPECT_THROW(mgf_bound(MgfCase::truncated, 2.0, 1.0, 1.01 * truncated_mgf_lambda_max(2.0, 1.0, 4.0), 4.0),
               std::invalid_argument);
  EXPECT_THROW(mgf_bound(MgfCase::truncated, 0.5, 1.0, 0.0, 4.0), std::invalid_argument);
  // theta = 2, h = 4: (16 + 1) 4! + 64 * 6! / 6 * 4^(-1/2), lambda_max = 1/(2 * 2) = 1/4.
  EXPECT_NEAR(truncated_mgf_coefficient(2.0, 4.0), 17.0 * 24.0 + 64.0 * 720.0 / 6.0 / 2.0, 1e-9);
  EXPECT_NEAR(truncated_mgf_lambda_max(2.0, 1.0, 4.0), 0.25, 1e-15);
}

TEST(Calculus, EmpiricalChecksPass) {
  EXPECT_TRUE(check_subw_moment(1.0, 1.0, 2.0, 20000, 4).passed);
  EXPECT_TRUE(check_centering(2.0, 1.0, 20000, 4).passed);
  const auto m = check_mgf_bounds(MgfCase::subgaussian, 0.5, 1.0, {0.0, 0.5}, 1.0, 20000, 4);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_NEAR(m[0].mean, 1.0, 1e-15);
  EXPECT_TRUE(m[1].passed);
}

TEST(Validators, ViolationEstimateUsesSeAtCap) {
  const auto v = make_violation_estimate(100, 7, 0.05);
  EXPECT_DOUBLE_EQ(v.rate, 0.07);
  EXPECT_NEAR(v.std_error, std::sqrt(0.05 * 0.95 / 100.0), 1e-15);
  EXPECT_TRUE(v.passed);
  EXPECT_FALSE(make_violation_estimate(100, 15, 0.05).passed);
  EXPECT_THROW(make_violation_estimate(0, 0, 0.05), std::invalid_argument);
}

TEST(Validators, UnknownPropertyRejected) {
  EXPECT_THROW(standard_configurations("e9"), std::invalid_argument);
  for (std::string_view p : known_props()) EXPECT_FALSE(standard_configurations(p).empty()) << p;
}

TEST(Validators, SmallRunsPassAndAreWorkerIndependent) {
  for (std::string_view p : known_props()) {
    for (const ConcentrationConfig& c : standard_configurations(p)) {
      const auto a = c.run({2000, 11, 1});
      const auto b = c.run({2000, 11, 3});
      ASSERT_EQ(a.size(), b.size());
      for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_TRUE(a[k].passed) << a[k].label;
        EXPECT_EQ(a[k].statistic, b[k].statistic) << a[k].label;
        EXPECT_EQ(a[k].label, b[k].label);
      }
    }
  }
}

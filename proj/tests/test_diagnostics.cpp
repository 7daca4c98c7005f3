#include "mirrortail/diagnostics.hpp"
#include "mirrortail/trace_suite.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace mirrortail;
using namespace mirrortail::diag;

namespace {

Point pt(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

RunTrace abs_trace(const StepSchedule& s, const NoiseSpec& n, std::size_t T, std::uint64_t seed, double x1 = 2.0) {
  const auto setup = MirrorSetup::euclidean();
  const OracleProblem f(Objective::abs_sum, pt({0}), setup);
  return run_smd(f, setup, s, n, T, pt({x1}), seed);
}

RunTrace quadratic_ball_trace(const NoiseSpec& n, std::size_t T, std::uint64_t seed) {
  const auto setup = MirrorSetup::euclidean(Domain::ball(1.0));
  const OracleProblem f(Objective::quadratic, pt({0.3, -0.2}), setup);
  return run_smd(f, setup, StepSchedule::constant(0.2), n, T, pt({0.9, 0.1}), seed);
}

// Trace whose iterates realize the requested d_t = sqrt(B(x*, x_t)) for
// f = |x| on R, x* = 0 (so x_t = sqrt(2) d_t).
RunTrace trace_with_d(const std::vector<double>& d) {
  RunTrace tr = abs_trace(StepSchedule::constant(1.0), NoiseSpec::gaussian(0.0), d.size() - 1, 1);
  for (std::size_t k = 0; k < d.size(); ++k) tr.x[k] = pt({std::sqrt(2.0) * d[k]});
  return tr;
}

}  // namespace

TEST(SlackLog, ToleranceAndWorstInstance) {
  SlackLog log("x", 1e-7);
  log.add(1, 0.5, 1.0);
  log.add(2, -5e-8, 1.0);  // inside tol 1e-7
  EXPECT_TRUE(log.report().passed);
  log.add(3, -2e-10, 0.0);  // beyond the 1e-10 floor
  EXPECT_FALSE(log.report().passed);
  EXPECT_EQ(log.report().worst_step, 3u);
  EXPECT_EQ(log.report().instances, 3u);
  SlackLog nan_log("n");
  nan_log.add(1, std::nan(""), 1.0);
  EXPECT_FALSE(nan_log.report().passed);
}

TEST(DSequence, Examples) {
  const DSequence a = d_sequence(trace_with_d({0.5, 0.1}), 1.0);
  EXPECT_DOUBLE_EQ(a.D[0], 1.0);

  const DSequence b = d_sequence(trace_with_d({0.5, 0.3, 0.9}), 0.1);
  EXPECT_NEAR(b.D[0], 0.5, 1e-15);
  EXPECT_NEAR(b.D[1], 0.5, 1e-15);
  EXPECT_NEAR(b.D[2], 0.9, 1e-15);

  const DSequence c = d_sequence(trace_with_d({0.2, 0.1, 0.3}), 0.5);
  for (double D : c.D) EXPECT_DOUBLE_EQ(D, 0.5);

  EXPECT_THROW(d_sequence(trace_with_d({0.2, 0.1}), 0.0), std::invalid_argument);
}

TEST(DSequence, Invariants) {
  const RunTrace tr = abs_trace(StepSchedule::inverse_sqrt(1.0), NoiseSpec::weibull(2.0), 200, 5);
  const double g = trace_gamma(tr);
  const DSequence ds = d_sequence(tr, g);
  for (std::size_t k = 0; k < ds.D.size(); ++k) {
    EXPECT_GE(ds.D[k], g);
    if (k > 0) {
      EXPECT_GE(ds.D[k], ds.D[k - 1]);
    }
    EXPECT_GE(std::sqrt(2.0) * ds.D[k] + 1e-12, std::abs(tr.x[k][0]));
  }
}

TEST(OneStep, NoiseFreeQuadraticAtMinimizer) {
  const RunTrace tr = quadratic_ball_trace(NoiseSpec::gaussian(0.0, 2), 100, 1);
  const DiagnosticReport r = check_one_step(tr, tr.problem.minimizer());
  EXPECT_TRUE(r.passed);
  EXPECT_GE(r.min_slack, -1e-9);
}

TEST(OneStep, SingleStepAtStartPoint) {
  const RunTrace tr = abs_trace(StepSchedule::constant(0.7), NoiseSpec::gaussian(), 1, 3);
  const DiagnosticReport r = check_one_step(tr, tr.x_at(1));
  EXPECT_EQ(r.instances, 1u);
  EXPECT_TRUE(r.passed);
}

TEST(OneStep, RandomNoisyRunsRandomComparators) {
  double worst = 1e300;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const RunTrace tr = quadratic_ball_trace(NoiseSpec::poly(5.0, 1.0, 2), 50, seed);
    CounterRng rng{seed, 99};
    Point z = pt({2 * rng.uniform() - 1, 2 * rng.uniform() - 1});
    z = tr.setup.domain.project(z);
    const DiagnosticReport r = check_one_step(tr, z);
    EXPECT_TRUE(r.passed);
    worst = std::min(worst, r.min_slack);
  }
  EXPECT_GE(worst, -1e-8);
}

TEST(OneStep, InfeasibleComparatorRejected) {
  const RunTrace tr = quadratic_ball_trace(NoiseSpec::gaussian(1.0, 2), 5, 1);
  EXPECT_THROW(check_one_step(tr, pt({3, 0})), std::invalid_argument);
}

TEST(WeightedIterates, UnitWeightsEqualTelescopedOneStep) {
  const RunTrace tr = abs_trace(StepSchedule::constant(0.3), NoiseSpec::weibull(1.0), 40, 8);
  const std::vector<double> ones(40, 1.0);
  const DiagnosticReport r = check_weighted_iterates(tr, tr.problem.minimizer(), ones, 40);
  EXPECT_TRUE(r.passed);
  // eta-weighted sum of the one-step slacks over t = 1..s gives the weighted slack.
  double sum = 0.0;
  const Point& z = tr.problem.minimizer();
  for (std::size_t t = 1; t <= 40; ++t) {
    const double eta = tr.eta_at(t);
    const double lhs = tr.f_gap(t) - tr.problem.value(z);
    const double rhs = (breg(tr, z, tr.x_at(t)) - breg(tr, z, tr.x_at(t + 1))) / eta +
                       tr.xi_at(t).dot(tr.x_at(t) - z) + 0.5 * eta * dual_sq(tr, t);
    sum += eta * (rhs - lhs);
  }
  EXPECT_NEAR(r.min_slack, sum, 1e-9 * std::max(1.0, std::abs(sum)));
}

TEST(WeightedIterates, InverseDWeightsOnRandomRuns) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const RunTrace tr = abs_trace(StepSchedule::inverse_sqrt(0.8), NoiseSpec::weibull(10.0 / 3.0), 64, seed);
    const auto w = inverse_d_weights(d_sequence(tr, trace_gamma(tr)), 64);
    const DiagnosticReport r = check_weighted_iterates_all(tr, tr.problem.minimizer(), w);
    EXPECT_TRUE(r.passed);
    EXPECT_GE(r.min_slack, -1e-8);
  }
}

TEST(WeightedIterates, SingleTermInstance) {
  const RunTrace tr = abs_trace(StepSchedule::constant(0.5), NoiseSpec::gaussian(), 10, 4);
  const std::vector<double> w(10, 0.7);
  const DiagnosticReport r = check_weighted_iterates(tr, tr.problem.minimizer(), w, 1);
  EXPECT_GE(r.min_slack, -1e-10);
}

TEST(WeightedIterates, IncreasingWeightsRejected) {
  const RunTrace tr = abs_trace(StepSchedule::constant(0.5), NoiseSpec::gaussian(), 3, 4);
  EXPECT_THROW(check_weighted_iterates(tr, tr.problem.minimizer(), {1.0, 2.0, 3.0}, 3), std::invalid_argument);
  EXPECT_THROW(check_weighted_iterates(tr, tr.problem.minimizer(), {1.0, 0.0, 0.0}, 3), std::invalid_argument);
}

TEST(IterateComparison, EqualIndicesCollapse) {
  const RunTrace tr = abs_trace(StepSchedule::inverse_sqrt(1.0), NoiseSpec::gaussian(), 20, 6);
  for (std::size_t j = 1; j <= 20; ++j) {
    const DiagnosticReport r = check_iterate_comparison(tr, j, j);
    const double expect = 0.5 * tr.eta_at(j) * dual_sq(tr, j) - breg(tr, tr.x_at(j), tr.x_at(j + 1)) / tr.eta_at(j);
    EXPECT_NEAR(r.min_slack, expect, 1e-12);
    EXPECT_GE(r.min_slack, -1e-10);
  }
}

TEST(IterateComparison, NoiseFreeHalfHorizonPair) {
  const RunTrace tr = abs_trace(StepSchedule::inverse_sqrt(1.0), NoiseSpec::gaussian(0.0), 64, 1);
  EXPECT_GE(check_iterate_comparison(tr, half_horizon(64), 64).min_slack, -1e-9);
}

TEST(IterateComparison, AllPairsOnNoisyRun) {
  const RunTrace tr = abs_trace(StepSchedule::inverse_sqrt(1.0), NoiseSpec::weibull(2.0), 20, 12);
  const DiagnosticReport all = check_iterate_comparison_all(tr);
  EXPECT_EQ(all.instances, 20u * 21u / 2u);
  EXPECT_GE(all.min_slack, -1e-8);
  double worst = 1e300;
  for (std::size_t j = 1; j <= 20; ++j)
    for (std::size_t r = j; r <= 20; ++r) worst = std::min(worst, check_iterate_comparison(tr, j, r).min_slack);
  EXPECT_NEAR(all.min_slack, worst, 1e-12);
}

TEST(IterateComparison, BadIndicesRejected) {
  const RunTrace tr = abs_trace(StepSchedule::constant(1.0), NoiseSpec::gaussian(), 5, 1);
  EXPECT_THROW(check_iterate_comparison(tr, 3, 2), std::invalid_argument);
  EXPECT_THROW(check_iterate_comparison(tr, 1, 6), std::invalid_argument);
}

TEST(AlphaSum, Examples) {
  // Direct summation oracle in the test.
  double s = 0.0;
  for (int j = 3; j <= 7; ++j) s += 1.0 / double((10 - j) * (10 - j + 1));
  EXPECT_NEAR(alpha_sum(3, 7, 10), s, 1e-15);
  EXPECT_NEAR(alpha_sum(3, 7, 10), 1.0 / 3.0 - 1.0 / 8.0, 1e-15);
  EXPECT_DOUBLE_EQ(alpha_sum(9, 9, 10), 0.5);
  for (std::size_t T = 2; T <= 200; ++T) EXPECT_NEAR(alpha_sum(1, T - 1, T), 1.0 - 1.0 / double(T), 1e-13);
}

TEST(AlphaSum, InvalidRangesRejected) {
  EXPECT_THROW(alpha_sum(1, 10, 10), std::invalid_argument);
  EXPECT_THROW(alpha_sum(0, 3, 10), std::invalid_argument);
  EXPECT_THROW(alpha_sum(5, 3, 10), std::invalid_argument);
}

TEST(AlphaDoubleSums, Examples) {
  const AlphaDoubleSums one = alpha_double_sums(1);
  EXPECT_DOUBLE_EQ(one.sum_rho, 0.0);
  EXPECT_DOUBLE_EQ(one.sum_rho2, 0.0);
  EXPECT_TRUE(one.within_bounds);

  // T = 4: rho = (alpha_2, alpha_2 + alpha_3, same) = (1/6, 2/3, 2/3).
  const double r1 = 1.0 / 6.0, r2 = 1.0 / 6.0 + 1.0 / 2.0;
  const AlphaDoubleSums four = alpha_double_sums(4);
  EXPECT_NEAR(four.sum_rho, r1 + 2 * r2, 1e-15);
  EXPECT_NEAR(four.sum_rho2, r1 * r1 + 2 * r2 * r2, 1e-15);
  EXPECT_NEAR(four.sum_rho, 1.5, 1e-15);
  EXPECT_NEAR(four.sum_rho2, 0.91667, 1e-5);

  for (std::size_t T = 1; T <= 500; ++T) {
    const AlphaDoubleSums s = alpha_double_sums(T);
    ASSERT_TRUE(s.within_bounds) << T;
    ASSERT_LE(s.sum_rho, std::log(4.0 * double(T)));
    ASSERT_LE(s.sum_rho2, 3.0);
  }
}

TEST(Rho, MaximumByDirectSummation) {
  for (std::size_t T = 2; T <= 300; ++T) {
    double best = 0.0;
    for (std::size_t t = half_horizon(T); t <= T; ++t) {
      const double r = rho(t, T);
      EXPECT_GE(r, 0.0);
      EXPECT_LT(r, 1.0);
      best = std::max(best, r);
    }
    EXPECT_NEAR(best, rho(T, T), 1e-15);
    EXPECT_NEAR(best, rho_max_closed_form(T), 1e-13) << T;
  }
  EXPECT_DOUBLE_EQ(rho_max_closed_form(2), 0.5);
}

TEST(LastIterate, HorizonTwoStartsEmpty) {
  const RunTrace tr = abs_trace(StepSchedule::inverse_sqrt(1.0), NoiseSpec::gaussian(), 2, 3);
  const LastIterateDecomp dc = last_iterate_decomposition(tr);
  EXPECT_EQ(dc.h, 1u);
  EXPECT_EQ(dc.w[0].norm(), 0.0);
  EXPECT_EQ(dc.Q[0], 0.0);
  EXPECT_EQ(dc.z[0], 0.0);
}

TEST(LastIterate, NoiseFreeHasNoMartingale) {
  const RunTrace tr = abs_trace(StepSchedule::inverse_sqrt(1.0), NoiseSpec::gaussian(0.0), 4, 3);
  const LastIterateDecomp dc = last_iterate_decomposition(tr);
  for (double q : dc.Q) EXPECT_EQ(q, 0.0);
  for (const auto& r : check_last_iterate_identities(tr, dc)) {
    EXPECT_TRUE(r.passed) << r.name;
    EXPECT_GE(r.min_slack, -1e-9) << r.name;
  }
}

TEST(LastIterate, ConstantScheduleRejected) {
  const RunTrace tr = abs_trace(StepSchedule::constant(1.0), NoiseSpec::gaussian(), 4, 3);
  EXPECT_THROW(last_iterate_decomposition(tr), std::invalid_argument);
}

TEST(LastIterate, HorizonOneIsTrivial) {
  const RunTrace tr = abs_trace(StepSchedule::inverse_sqrt(1.0), NoiseSpec::gaussian(), 1, 3);
  const LastIterateDecomp dc = last_iterate_decomposition(tr);
  for (const auto& r : check_last_iterate_identities(tr, dc)) EXPECT_GE(r.min_slack, 0.0) << r.name;
}

TEST(LastIterate, NoisyRunsThetaTwo) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const RunTrace tr = abs_trace(StepSchedule::inverse_sqrt(1.0), NoiseSpec::weibull(2.0), 64, seed);
    const LastIterateDecomp dc = last_iterate_decomposition(tr);
    const DiagnosticReport wn = check_w_norm(tr, dc);
    ASSERT_TRUE(wn.passed) << seed;
    for (std::size_t i = 0; i < dc.w.size(); ++i) {
      ASSERT_GE(dc.z[i], 0.0);
      ASSERT_LE(dc.w[i].squaredNorm(), 2.0 * dc.rho[i] * dc.z[i] + 1e-10);
    }
    for (const auto& r : check_last_iterate_identities(tr, dc)) ASSERT_TRUE(r.passed) << r.name << " seed " << seed;
  }
}

TEST(DRecursion, HoldsOnEveryGeometry) {
  for (std::size_t i = 0; i < 96; ++i) {
    const auto c = suite::make_trace_case(i, 4, {64});
    const RunTrace tr = suite::run_case(c);
    const DiagnosticReport r = check_d_recursion(tr, trace_gamma(tr));
    EXPECT_TRUE(r.passed) << c.label;
  }
}

TEST(Suite, NamesAndCoverage) {
  const RunTrace tr = abs_trace(StepSchedule::inverse_sqrt(1.0), NoiseSpec::poly(5.0), 16, 2);
  SuiteOptions opt;
  opt.comparators = {pt({1.0})};
  const auto reports = run_invariant_suite(tr, opt);
  std::set<std::string> names;
  for (const auto& r : reports) {
    names.insert(r.name);
    EXPECT_TRUE(r.passed) << r.name;
  }
  for (const char* n : {"one-step", "weighted-iterates", "iterate-comparison", "d-recursion", "w-norm",
                        "last-iterate-unrolled", "max-z", "variation"})
    EXPECT_TRUE(names.count(n)) << n;
}

TEST(Suite, TraceCasesSpanTheGrid) {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < 192; ++i) {
    const auto c = suite::make_trace_case(i, 1, {1, 2, 4, 64});
    seen.insert(std::string(to_string(c.setup.regularizer)) + "/" + std::string(to_string(c.schedule.kind)) + "/" +
                std::string(to_string(c.noise.cls)) + "/" + std::to_string(c.T));
    EXPECT_TRUE(c.setup.domain.contains(c.comparator));
    EXPECT_TRUE(c.setup.domain.contains(c.x1));
  }
  // 2 regularizers x 2 schedules x 3 classes x 4 horizons.
  EXPECT_EQ(seen.size(), 48u);
}

TEST(Suite, SmallRunPasses) {
  const auto r = suite::run_trace_suite(96, 3, {1, 2, 4, 64}, kDefaultRelTol, 2);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.traces, 96u);
}

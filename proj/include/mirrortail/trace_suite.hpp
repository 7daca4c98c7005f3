#pragma once

#include "mirrortail/diagnostics.hpp"
#include "mirrortail/parallel.hpp"
#include "mirrortail/rng.hpp"
#include "mirrortail/smd.hpp"

#include <map>
#include <string>
#include <vector>

// Randomized traces covering every shipped geometry, both step schedules and
// all noise classes, fed through the deterministic invariant suite.
namespace mirrortail::suite {

struct TraceCase {
  std::string label;
  MirrorSetup setup;
  Objective objective = Objective::abs_sum;
  Point center;
  StepSchedule schedule;
  NoiseSpec noise;
  std::size_t T = 1;
  Point x1;
  Point comparator;  // random feasible z
  std::uint64_t seed = 0;
};

enum class Geometry { euclidean_free, euclidean_ball, euclidean_box, entropic_simplex };

inline const std::vector<Geometry>& all_geometries() {
  static const std::vector<Geometry> g{Geometry::euclidean_free, Geometry::euclidean_ball, Geometry::euclidean_box,
                                       Geometry::entropic_simplex};
  return g;
}

inline const std::vector<NoiseSpec>& noise_menu_shapes() {
  static const std::vector<NoiseSpec> n{NoiseSpec::gaussian(), NoiseSpec::weibull(1.0), NoiseSpec::weibull(2.0),
                                        NoiseSpec::weibull(10.0 / 3.0), NoiseSpec::poly(5.0), NoiseSpec::poly(8.0)};
  return n;
}

namespace detail {

inline Point random_simplex_point(Eigen::Index d, CounterRng& rng) {
  Point p(d);
  for (Eigen::Index i = 0; i < d; ++i) p[i] = rng.exponential();
  return p / p.sum();
}

inline Point random_feasible(const MirrorSetup& s, Eigen::Index d, CounterRng& rng) {
  Point p(d);
  switch (s.domain.kind) {
    case Domain::Kind::unconstrained:
      for (Eigen::Index i = 0; i < d; ++i) p[i] = 4.0 * rng.uniform() - 2.0;
      return p;
    case Domain::Kind::l2_ball: {
      for (Eigen::Index i = 0; i < d; ++i) p[i] = rng.normal();
      const double r = s.domain.radius * std::pow(rng.uniform(), 1.0 / double(d));
      return p / p.norm() * r;
    }
    case Domain::Kind::box:
      for (Eigen::Index i = 0; i < d; ++i) p[i] = s.domain.lo + (s.domain.hi - s.domain.lo) * rng.uniform();
      return p;
    case Domain::Kind::simplex: return random_simplex_point(d, rng);
  }
  return p;
}

}  // namespace detail

// Case i cycles through geometry x schedule x noise x horizon; the remaining
// parameters (step scale, noise level, minimizer, start, comparator) are
// drawn from the stream (seed, i).
inline TraceCase make_trace_case(std::size_t i, std::uint64_t seed, const std::vector<std::size_t>& horizons) {
  const auto& geos = all_geometries();
  const auto& noises = noise_menu_shapes();
  std::size_t k = i;
  const Geometry geo = geos[k % geos.size()];
  k /= geos.size();
  const bool inv_sqrt = k % 2 == 1;
  k /= 2;
  const NoiseSpec shape = noises[k % noises.size()];
  k /= noises.size();
  const std::size_t T = horizons[k % horizons.size()];

  CounterRng rng{seed, std::uint64_t(i), 0xCA5Eu};
  TraceCase c;
  c.T = T;
  c.seed = stream_key({seed, std::uint64_t(i)});
  Eigen::Index d = 1;
  switch (geo) {
    case Geometry::euclidean_free:
      d = 1 + Eigen::Index(rng.uniform() * 3.0);
      c.setup = MirrorSetup::euclidean();
      c.objective = rng.uniform() < 0.5 ? Objective::abs_sum : Objective::piecewise_linear_max;
      c.label = "euclidean/free";
      break;
    case Geometry::euclidean_ball:
      d = 2 + Eigen::Index(rng.uniform() * 3.0);
      c.setup = MirrorSetup::euclidean(Domain::ball(0.5 + 1.5 * rng.uniform()));
      c.objective = rng.uniform() < 0.5 ? Objective::quadratic : Objective::piecewise_linear_max;
      c.label = "euclidean/ball";
      break;
    case Geometry::euclidean_box:
      d = 1 + Eigen::Index(rng.uniform() * 3.0);
      c.setup = MirrorSetup::euclidean(Domain::box(-1.0, 1.0 + rng.uniform()));
      c.objective = rng.uniform() < 0.5 ? Objective::abs_sum : Objective::quadratic;
      c.label = "euclidean/box";
      break;
    case Geometry::entropic_simplex:
      d = 2 + Eigen::Index(rng.uniform() * 4.0);
      c.setup = MirrorSetup::entropic_simplex();
      c.objective = std::array{Objective::abs_sum, Objective::piecewise_linear_max,
                               Objective::quadratic}[std::size_t(rng.uniform() * 3.0) % 3];
      c.label = "neg-entropy/simplex";
      break;
  }
  c.center = detail::random_feasible(c.setup, d, rng);
  c.x1 = detail::random_feasible(c.setup, d, rng);
  c.comparator = detail::random_feasible(c.setup, d, rng);
  if (geo == Geometry::euclidean_free) c.x1 *= 2.0;

  const double eta_hi = geo == Geometry::entropic_simplex ? 0.5 : 1.0;
  const double eta = 0.02 + (eta_hi - 0.02) * rng.uniform();
  c.schedule = inv_sqrt ? StepSchedule::inverse_sqrt(eta) : StepSchedule::constant(eta);

  c.noise = shape;
  c.noise.second_moment = 0.1 + 1.9 * rng.uniform();
  c.noise.dim = d;
  c.noise.dual = c.setup.dual;

  c.label += std::string("/") + std::string(to_string(c.schedule.kind)) + "/" + std::string(to_string(c.noise.cls)) +
             "/T=" + std::to_string(T);
  return c;
}

inline RunTrace run_case(const TraceCase& c) {
  const OracleProblem problem(c.objective, c.center, c.setup);
  return run_smd(problem, c.setup, c.schedule, c.noise, c.T, c.x1, c.seed);
}

// Per-check worst case over all traces.
struct CheckSummary {
  std::string name;
  std::size_t traces = 0;
  std::size_t instances = 0;
  std::size_t failures = 0;  // traces where the check failed
  double min_slack = 0.0;
  std::string worst_trace;
  bool passed = true;
};

struct SuiteResult {
  std::size_t traces = 0;
  std::vector<CheckSummary> checks;  // sorted by name
  bool passed = true;
};

inline SuiteResult run_trace_suite(std::size_t n, std::uint64_t seed, const std::vector<std::size_t>& horizons,
                                   double rel_tol = diag::kDefaultRelTol, unsigned workers = 1) {
  if (horizons.empty()) throw std::invalid_argument("trace suite: no horizons");
  std::vector<std::vector<diag::DiagnosticReport>> reports(n);
  std::vector<std::string> labels(n);
  parallel_for(n, workers, [&](std::size_t i) {
    const TraceCase c = make_trace_case(i, seed, horizons);
    const RunTrace tr = run_case(c);
    diag::SuiteOptions opt;
    opt.rel_tol = rel_tol;
    opt.comparators = {c.comparator};
    reports[i] = diag::run_invariant_suite(tr, opt);
    labels[i] = "#" + std::to_string(i) + " " + c.label;
  });

  std::map<std::string, CheckSummary> merged;
  for (std::size_t i = 0; i < n; ++i) {
    std::map<std::string, bool> seen;
    for (const auto& r : reports[i]) {
      CheckSummary& m = merged[r.name];
      const bool first_instance = m.instances == 0;
      m.name = r.name;
      if (!seen[r.name]) {
        ++m.traces;
        seen[r.name] = true;
      }
      if (r.instances > 0 && (first_instance || r.min_slack < m.min_slack)) {
        m.min_slack = r.min_slack;
        m.worst_trace = labels[i];
      }
      m.instances += r.instances;
      if (!r.passed) {
        ++m.failures;
        m.passed = false;
      }
    }
  }
  SuiteResult res;
  res.traces = n;
  for (auto& [name, m] : merged) {
    res.passed = res.passed && m.passed;
    res.checks.push_back(std::move(m));
  }
  return res;
}

}  // namespace mirrortail::suite

#pragma once

#include "mirrortail/geometry.hpp"
#include "mirrortail/noise.hpp"
#include "mirrortail/problem.hpp"
#include "mirrortail/rng.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mirrortail {

// Raised when a mirror step fails mid-run; carries the 1-based step index.
class step_error : public std::runtime_error {
 public:
  step_error(std::size_t step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// Noise for step t of a run comes from its own counter stream, so a run is
// a pure function of (seed, inputs) and steps never share RNG state.
inline CounterRng noise_stream(std::uint64_t seed, std::size_t t) { return CounterRng{seed, std::uint64_t(t)}; }

struct StepRecord {
  std::size_t t;
  double eta;
  Point xi;    // noise
  Point g;     // true subgradient at x_t
  Point ghat;  // g - xi
};

// Incremental SMD: keeps the current iterate and the running sum needed for
// the average iterate; used directly by the streaming experiment path.
class MirrorDescent {
 public:
  MirrorDescent(const OracleProblem& problem, const MirrorSetup& setup, const StepSchedule& schedule,
                const NoiseSpec& noise, Point x1, std::uint64_t seed)
      : problem_(&problem), setup_(setup), schedule_(schedule), noise_(noise), seed_(seed), x_(std::move(x1)) {
    setup_.validate();
    noise_.validate();
    require_same_dim(x_, problem.minimizer(), "x1");
    if (noise_.dim != x_.size()) throw std::invalid_argument("noise dimension does not match the problem");
    if (noise_.dim > 1 && noise_.dual != setup_.dual) throw std::invalid_argument("noise dual norm does not match the setup");
    if (!setup_.domain.contains(x_)) throw std::invalid_argument("x1 outside the domain");
    if (setup_.regularizer == Regularizer::neg_entropy && !(x_.array() > 0.0).all())
      throw std::invalid_argument("x1 must lie in the interior of dom(psi)");
    sum_ = x_;
  }

  std::size_t t() const { return t_; }
  const Point& current() const { return x_; }
  Point average() const { return sum_ / double(t_); }
  double error_last() const { return problem_->value(x_) - problem_->optimal_value(); }
  double error_average() const { return problem_->value(average()) - problem_->optimal_value(); }

  // Queries the oracle at x_t and moves to x_{t+1}.
  StepRecord advance() {
    StepRecord r{t_, step_size(schedule_, t_), Point(), problem_->subgradient(x_), Point()};
    auto rng = noise_stream(seed_, t_);
    r.xi = sample_noise(noise_, rng);
    r.ghat = r.g - r.xi;
    try {
      x_ = mirror_step(setup_, x_, r.ghat, r.eta);
    } catch (const std::exception& e) {
      throw step_error(t_, e.what());
    }
    if (!all_finite(x_)) throw step_error(t_, "non-finite iterate");
    ++t_;
    sum_ += x_;
    return r;
  }

 private:
  const OracleProblem* problem_;
  MirrorSetup setup_;
  StepSchedule schedule_;
  NoiseSpec noise_;
  std::uint64_t seed_;
  Point x_;
  Point sum_;
  std::size_t t_ = 1;
};

// Full record of one run. Vectors are 0-based; x[k] is x_{k+1}.
// x, err_last and err_avg hold T + 1 entries (x_1 .. x_{T+1}); xi, g and
// ghat hold T entries.
struct RunTrace {
  OracleProblem problem;
  MirrorSetup setup;
  StepSchedule schedule;
  NoiseSpec noise;
  std::uint64_t seed = 0;

  std::vector<Point> x;
  std::vector<Point> xi;
  std::vector<Point> g;
  std::vector<Point> ghat;
  std::vector<double> eta;
  std::vector<double> err_last;
  std::vector<double> err_avg;

  std::size_t horizon() const { return xi.size(); }

  // 1-based accessors matching the usual indexing of the method.
  const Point& x_at(std::size_t t) const { return x.at(t - 1); }
  const Point& xi_at(std::size_t t) const { return xi.at(t - 1); }
  const Point& ghat_at(std::size_t t) const { return ghat.at(t - 1); }
  double eta_at(std::size_t t) const { return eta.at(t - 1); }
  double f_gap(std::size_t t) const { return err_last.at(t - 1); }
};

inline constexpr std::size_t kMaxFullTraceSteps = 100000;

inline RunTrace run_smd(const OracleProblem& problem, const MirrorSetup& setup, const StepSchedule& schedule,
                        const NoiseSpec& noise, std::size_t T, const Point& x1, std::uint64_t seed) {
  if (T < 1) throw std::invalid_argument("run_smd: T must be >= 1");
  if (T > kMaxFullTraceSteps) throw std::invalid_argument("run_smd: use the streaming path for T > 1e5");
  MirrorDescent smd(problem, setup, schedule, noise, x1, seed);

  RunTrace trace{problem, setup, schedule, noise, seed, {}, {}, {}, {}, {}, {}, {}};
  trace.x.reserve(T + 1);
  trace.err_last.reserve(T + 1);
  trace.err_avg.reserve(T + 1);
  auto record_iterate = [&] {
    trace.x.push_back(smd.current());
    trace.err_last.push_back(smd.error_last());
    trace.err_avg.push_back(smd.error_average());
  };
  record_iterate();
  for (std::size_t t = 1; t <= T; ++t) {
    StepRecord r = smd.advance();
    trace.eta.push_back(r.eta);
    trace.xi.push_back(std::move(r.xi));
    trace.g.push_back(std::move(r.g));
    trace.ghat.push_back(std::move(r.ghat));
    record_iterate();
  }
  return trace;
}

// Mean of x_1 .. x_t.
inline Point average_iterate(const RunTrace& trace, std::size_t t) {
  if (t < 1 || t > trace.x.size()) throw std::invalid_argument("average_iterate: t out of range");
  Point s = Point::Zero(trace.x.front().size());
  for (std::size_t k = 0; k < t; ++k) s += trace.x[k];
  return s / double(t);
}

}  // namespace mirrortail

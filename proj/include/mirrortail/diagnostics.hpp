#pragma once

#include "mirrortail/bounds.hpp"
#include "mirrortail/geometry.hpp"
#include "mirrortail/smd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

// Per-run verification of the inequalities that hold surely for every SMD
// trace: the one-step and weighted-iterate bounds, the iterate comparison,
// the D_t recursion closure and the last-iterate decomposition identities.
namespace mirrortail::diag {

inline constexpr double kDefaultRelTol = 1e-7;
inline constexpr double kAbsTolFloor = 1e-10;

// Signed slack is RHS - LHS, so a holding inequality has slack >= 0.
struct DiagnosticReport {
  std::string name;
  std::size_t instances = 0;
  double min_slack = 0.0;
  std::size_t worst_step = 0;  // index of the instance closest to failing
  double worst_tolerance = 0.0;
  bool passed = true;
};

// Collects slack instances. Each one passes when slack >= -tol with
// tol = max(rel_tol * scale, 1e-10) and scale = sum of |terms| on both sides.
class SlackLog {
 public:
  explicit SlackLog(std::string name, double rel_tol = kDefaultRelTol) : rel_tol_(rel_tol) {
    report_.name = std::move(name);
  }

  void add(std::size_t step, double slack, double scale) {
    const double tol = std::max(rel_tol_ * std::abs(scale), kAbsTolFloor);
    const double margin = std::isnan(slack) ? -std::numeric_limits<double>::infinity() : slack + tol;
    if (report_.instances == 0 || slack < report_.min_slack || std::isnan(slack)) report_.min_slack = slack;
    if (report_.instances == 0 || margin < worst_margin_) {
      worst_margin_ = margin;
      report_.worst_step = step;
      report_.worst_tolerance = tol;
    }
    if (!(margin >= 0.0)) report_.passed = false;
    ++report_.instances;
  }

  const DiagnosticReport& report() const { return report_; }

 private:
  double rel_tol_;
  double worst_margin_ = 0.0;
  DiagnosticReport report_;
};

inline double dual_sq(const RunTrace& tr, std::size_t t) {
  const double n = norm(tr.ghat_at(t), tr.setup.dual);
  return n * n;
}

inline double breg(const RunTrace& tr, const Point& a, const Point& b) { return bregman(tr.setup, a, b); }

inline void require_feasible(const RunTrace& tr, const Point& z) {
  require_same_dim(z, tr.problem.minimizer(), "comparator");
  if (!tr.setup.domain.contains(z, 1e-9)) throw std::invalid_argument("comparator z must lie in the domain");
}

struct DSequence {
  double gamma = 0.0;
  std::vector<double> d;  // d_t = sqrt(B(x*, x_t)), t = 1 .. T + 1
  std::vector<double> D;  // running max of gamma and d_1 .. d_t
};

inline DSequence d_sequence(const RunTrace& tr, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("d_sequence: gamma must be positive");
  DSequence s{gamma, {}, {}};
  const Point& xs = tr.problem.minimizer();
  double running = gamma;
  for (const Point& x : tr.x) {
    const double d = std::sqrt(breg(tr, xs, x));
    running = std::max(running, d);
    s.d.push_back(d);
    s.D.push_back(running);
  }
  return s;
}

// Realized value of sum eta_t^2 (|xi_t|^2 - E|xi_t|^2), the second martingale
// controlling the average-iterate bound.
inline double realized_noise_energy(const RunTrace& tr) {
  double v = 0.0;
  for (std::size_t t = 1; t <= tr.horizon(); ++t) {
    const double n = norm(tr.xi_at(t), tr.setup.dual);
    v += tr.eta_at(t) * tr.eta_at(t) * (n * n - tr.noise.second_moment);
  }
  return v;
}

// gamma = gamma_value(max(0, realized energy), sum eta_t^2 (G^2 + sigma^2)).
inline double trace_gamma(const RunTrace& tr) {
  double s = 0.0;
  const double G2 = tr.problem.lipschitz() * tr.problem.lipschitz();
  for (double e : tr.eta) s += e * e * (G2 + tr.noise.second_moment);
  return bounds::gamma_value(std::max(0.0, realized_noise_energy(tr)), s);
}

// The weighted relation with w_t = 1/D_t, its right-hand side B_T, the
// induction D_s <= B_T for s = 1 .. T, and sqrt(2) D_t >= |x_t - x*|.
inline DiagnosticReport check_d_recursion(const RunTrace& tr, double gamma, double rel_tol = kDefaultRelTol) {
  const std::size_t T = tr.horizon();
  const DSequence ds = d_sequence(tr, gamma);
  const Point& xs = tr.problem.minimizer();

  double half_sq = 0.0;
  for (std::size_t t = 1; t <= T; ++t) half_sq += 0.5 * tr.eta_at(t) * tr.eta_at(t) * dual_sq(tr, t);
  double running = 0.0;
  double best = 0.0;
  double abs_mart = 0.0;
  for (std::size_t t = 1; t <= T; ++t) {
    const double term = tr.eta_at(t) * tr.xi_at(t).dot(tr.x_at(t) - xs) / (std::numbers::sqrt2 * ds.D[t - 1]);
    running += term;
    abs_mart += std::abs(term);
    best = std::max(best, running);
  }
  const double mid = std::max(gamma, half_sq / gamma);
  const double B_T = ds.d[0] + mid + std::numbers::sqrt2 * best;
  const double B_scale = ds.d[0] + mid + std::numbers::sqrt2 * abs_mart;

  SlackLog log("d-recursion", rel_tol);
  double weighted = 0.0;
  double weighted_abs = 0.0;
  for (std::size_t s = 1; s <= T; ++s) {
    const double gap = tr.f_gap(s);
    weighted += tr.eta_at(s) / ds.D[s - 1] * gap;
    weighted_abs += std::abs(tr.eta_at(s) / ds.D[s - 1] * gap);
    const double lhs = ds.d[s] * ds.d[s] / ds.D[s - 1] + weighted;
    log.add(s, B_T - lhs, B_scale + std::abs(lhs) + weighted_abs);
    log.add(s, B_T - ds.D[s - 1], B_scale + ds.D[s - 1]);
  }
  for (std::size_t t = 1; t <= tr.x.size(); ++t) {
    const double dist = norm(tr.x_at(t) - xs, tr.setup.primal);
    log.add(t, std::numbers::sqrt2 * ds.D[t - 1] - dist, ds.D[t - 1] + dist);
  }
  return log.report();
}

// f(x_t) - f(z) <= B(z,x_t)/eta_t - B(z,x_{t+1})/eta_t + <xi_t, x_t - z> + eta_t/2 |ghat_t|^2, every t.
inline DiagnosticReport check_one_step(const RunTrace& tr, const Point& z, double rel_tol = kDefaultRelTol) {
  require_feasible(tr, z);
  const double fz = tr.problem.value(z) - tr.problem.optimal_value();
  SlackLog log("one-step", rel_tol);
  for (std::size_t t = 1; t <= tr.horizon(); ++t) {
    const double eta = tr.eta_at(t);
    const double b0 = breg(tr, z, tr.x_at(t)) / eta;
    const double b1 = breg(tr, z, tr.x_at(t + 1)) / eta;
    const double inner = tr.xi_at(t).dot(tr.x_at(t) - z);
    const double sq = 0.5 * eta * dual_sq(tr, t);
    const double lhs = tr.f_gap(t) - fz;
    const double rhs = b0 - b1 + inner + sq;
    log.add(t, rhs - lhs, std::abs(tr.f_gap(t)) + std::abs(fz) + b0 + b1 + std::abs(inner) + sq);
  }
  return log.report();
}

inline void require_weights(const std::vector<double>& w, std::size_t needed) {
  if (w.size() < needed) throw std::invalid_argument("weights: sequence shorter than the step index");
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] > 0.0)) throw std::invalid_argument("weights must be positive");
    if (i > 0 && w[i] > w[i - 1]) throw std::invalid_argument("weights must be non-increasing");
  }
}

namespace detail {

// Runs the weighted-iterates inequality for s = 1 .. s_max, logging each s
// when `all` is set and only s_max otherwise.
inline DiagnosticReport weighted_iterates(const RunTrace& tr, const Point& z, const std::vector<double>& w,
                                          std::size_t s_max, bool all, double rel_tol) {
  require_feasible(tr, z);
  require_weights(w, s_max);
  if (s_max < 1 || s_max > tr.horizon()) throw std::invalid_argument("weighted iterates: s out of range");
  const double fz = tr.problem.value(z) - tr.problem.optimal_value();
  const double start = w[0] * breg(tr, z, tr.x_at(1));
  double left = 0.0, right = start, scale = start;
  SlackLog log("weighted-iterates", rel_tol);
  for (std::size_t s = 1; s <= s_max; ++s) {
    const double eta = tr.eta_at(s);
    const double wt = w[s - 1];
    const double gap = wt * eta * (tr.f_gap(s) - fz);
    const double sq = 0.5 * wt * eta * eta * dual_sq(tr, s);
    const double inner = wt * eta * tr.xi_at(s).dot(tr.x_at(s) - z);
    left += gap;
    right += sq + inner;
    scale += std::abs(wt * eta * tr.f_gap(s)) + std::abs(wt * eta * fz) + sq + std::abs(inner);
    if (all || s == s_max) {
      const double tail = wt * breg(tr, z, tr.x_at(s + 1));
      log.add(s, right - (tail + left), scale + tail);
    }
  }
  return log.report();
}

}  // namespace detail

// w_s B(z,x_{s+1}) + sum_{t<=s} w_t eta_t (f(x_t)-f(z))
//   <= w_1 B(z,x_1) + sum w_t eta_t^2/2 |ghat_t|^2 + sum w_t eta_t <xi_t, x_t - z>.
inline DiagnosticReport check_weighted_iterates(const RunTrace& tr, const Point& z, const std::vector<double>& w,
                                                std::size_t s, double rel_tol = kDefaultRelTol) {
  return detail::weighted_iterates(tr, z, w, s, false, rel_tol);
}

inline DiagnosticReport check_weighted_iterates_all(const RunTrace& tr, const Point& z, const std::vector<double>& w,
                                                    double rel_tol = kDefaultRelTol) {
  return detail::weighted_iterates(tr, z, w, tr.horizon(), true, rel_tol);
}

// Weights 1/D_t from the D sequence (non-increasing by construction).
inline std::vector<double> inverse_d_weights(const DSequence& ds, std::size_t T) {
  std::vector<double> w(T);
  for (std::size_t t = 0; t < T; ++t) w[t] = 1.0 / ds.D[t];
  return w;
}

namespace detail {

inline double eta_tilde(const RunTrace& tr, std::size_t t) {
  return t == 1 ? 1.0 / tr.eta_at(1) : 1.0 / tr.eta_at(t) - 1.0 / tr.eta_at(t - 1);
}

// Iterate comparison for a fixed j and every r in [j, r_max].
inline void iterate_comparison_from(const RunTrace& tr, std::size_t j, std::size_t r_min, std::size_t r_max,
                                    SlackLog& log) {
  const Point& xj = tr.x_at(j);
  const double fj = tr.f_gap(j);
  double left = 0.0, right = 0.0, scale = 0.0;
  for (std::size_t t = j; t <= r_max; ++t) {
    const double inner = tr.xi_at(t).dot(tr.x_at(t) - xj);
    const double sq = 0.5 * tr.eta_at(t) * dual_sq(tr, t);
    const double div = eta_tilde(tr, t) * breg(tr, xj, tr.x_at(t));
    left += tr.f_gap(t) - fj;
    right += inner + sq + div;
    scale += std::abs(tr.f_gap(t)) + std::abs(fj) + std::abs(inner) + sq + std::abs(div);
    if (t >= r_min) {
      const double tail = breg(tr, xj, tr.x_at(t + 1)) / tr.eta_at(t);
      log.add(t, right - (tail + left), scale + tail);
    }
  }
}

}  // namespace detail

// B(x_j,x_{r+1})/eta_r + sum_{t=j}^r (f(x_t)-f(x_j))
//   <= sum <xi_t, x_t - x_j> + 1/2 sum eta_t |ghat_t|^2 + sum eta~_t B(x_j, x_t),
// with eta~_1 = 1/eta_1 and eta~_t = 1/eta_t - 1/eta_{t-1}.
inline DiagnosticReport check_iterate_comparison(const RunTrace& tr, std::size_t j, std::size_t r,
                                                 double rel_tol = kDefaultRelTol) {
  if (j > r) throw std::invalid_argument("iterate comparison: need j <= r");
  if (j < 1 || r > tr.horizon()) throw std::invalid_argument("iterate comparison: index out of range");
  SlackLog log("iterate-comparison", rel_tol);
  detail::iterate_comparison_from(tr, j, r, r, log);
  return log.report();
}

inline DiagnosticReport check_iterate_comparison_all(const RunTrace& tr, double rel_tol = kDefaultRelTol) {
  SlackLog log("iterate-comparison", rel_tol);
  for (std::size_t j = 1; j <= tr.horizon(); ++j) detail::iterate_comparison_from(tr, j, j, tr.horizon(), log);
  return log.report();
}

// ---- alpha weights of the last-iterate analysis ----

inline std::size_t half_horizon(std::size_t T) { return (T + 1) / 2; }  // ceil(T/2)

// alpha_j = 1 / ((T - j)(T - j + 1)) for 1 <= j < T.
inline double alpha(std::size_t j, std::size_t T) {
  if (j < 1 || j >= T) throw std::invalid_argument("alpha: need 1 <= j < T");
  const double a = double(T - j);
  return 1.0 / (a * (a + 1.0));
}

inline double alpha_sum_closed_form(std::size_t a, std::size_t b, std::size_t T) {
  return 1.0 / double(T - b) - 1.0 / double(T - a + 1);
}

// sum_{j=a}^b alpha_j by direct summation, cross-checked against the
// telescoped form 1/(T-b) - 1/(T-a+1).
inline double alpha_sum(std::size_t a, std::size_t b, std::size_t T) {
  if (b >= T) throw std::invalid_argument("alpha_sum: need b < T");
  if (a < 1 || a > b) throw std::invalid_argument("alpha_sum: need 1 <= a <= b");
  double s = 0.0;
  for (std::size_t j = b + 1; j-- > a;) s += alpha(j, T);  // smallest terms first
  if (std::abs(s - alpha_sum_closed_form(a, b, T)) > 1e-12)
    throw std::logic_error("alpha_sum: direct sum disagrees with the telescoped form");
  return s;
}

// rho_t = sum_{j=ceil(T/2)}^{min(t, T-1)} alpha_j, by direct summation.
inline double rho(std::size_t t, std::size_t T) {
  const std::size_t h = half_horizon(T);
  const std::size_t top = std::min(t, T - 1);
  double s = 0.0;
  for (std::size_t j = h; j <= top && j < T; ++j) s += alpha(j, T);
  return s;
}

// 1 - 1/(floor(T/2) + 1), the largest rho_t over t in [ceil(T/2), T].
inline double rho_max_closed_form(std::size_t T) { return T < 2 ? 0.0 : 1.0 - 1.0 / double(T / 2 + 1); }

struct AlphaDoubleSums {
  double sum_rho = 0.0;
  double sum_rho2 = 0.0;
  double max_rho = 0.0;
  double log4T = 0.0;
  bool within_bounds = true;  // sum_rho <= log(4T) and sum_rho2 <= 3
};

inline AlphaDoubleSums alpha_double_sums(std::size_t T) {
  if (T < 1) throw std::invalid_argument("alpha_double_sums: T >= 1");
  AlphaDoubleSums s;
  const std::size_t h = half_horizon(T);
  double running = 0.0;
  for (std::size_t t = h; t <= T; ++t) {
    if (t < T) running += alpha(t, T);
    s.sum_rho += running;
    s.sum_rho2 += running * running;
    s.max_rho = std::max(s.max_rho, running);
  }
  s.log4T = std::log(4.0 * double(T));
  s.within_bounds = s.sum_rho <= s.log4T && s.sum_rho2 <= 3.0;
  return s;
}

// ---- last-iterate decomposition (inverse-sqrt steps) ----

// Entries are indexed by t - h with h = ceil(T/2), for t = h .. T.
struct LastIterateDecomp {
  std::size_t T = 0;
  std::size_t h = 0;
  std::vector<double> alpha;  // alpha_j for j = h .. T-1
  std::vector<Point> w;
  std::vector<double> z;
  std::vector<double> rho;
  std::vector<double> Q;    // Q_s
  std::vector<double> tcv;  // <Q>_s
  std::vector<double> tqv;  // [Q]_s
  std::size_t n_star = 0;
  double z_star = 0.0;
};

inline LastIterateDecomp last_iterate_decomposition(const RunTrace& tr) {
  if (tr.schedule.kind != StepSchedule::Kind::inverse_sqrt)
    throw std::invalid_argument("last-iterate decomposition needs eta_t = eta / sqrt(t)");
  LastIterateDecomp dc;
  const std::size_t T = tr.horizon();
  dc.T = T;
  dc.h = half_horizon(T);
  for (std::size_t j = dc.h; j < T; ++j) dc.alpha.push_back(alpha(j, T));

  double q = 0.0, tcv = 0.0, tqv = 0.0, best_q = -std::numeric_limits<double>::infinity();
  for (std::size_t t = dc.h; t <= T; ++t) {
    const Point& xt = tr.x_at(t);
    Point w = Point::Zero(xt.size());
    double z = 0.0, r = 0.0;
    for (std::size_t j = dc.h; j <= std::min(t, T - 1); ++j) {
      const double a = dc.alpha[j - dc.h];
      w += a * (xt - tr.x_at(j));
      z += a * breg(tr, tr.x_at(j), xt);
      r += a;
    }
    const double inner = tr.xi_at(t).dot(w);
    q += inner;
    tcv += noise_inner_second_moment(tr.noise, w);
    tqv += inner * inner;
    if (q > best_q) {
      best_q = q;
      dc.n_star = t;
    }
    dc.z_star = std::max(dc.z_star, z);
    dc.w.push_back(std::move(w));
    dc.z.push_back(z);
    dc.rho.push_back(r);
    dc.Q.push_back(q);
    dc.tcv.push_back(tcv);
    dc.tqv.push_back(tqv);
  }
  return dc;
}

// |w_t|^2 <= 2 rho_t z_t (primal norm).
inline DiagnosticReport check_w_norm(const RunTrace& tr, const LastIterateDecomp& dc, double rel_tol = kDefaultRelTol) {
  SlackLog log("w-norm", rel_tol);
  for (std::size_t i = 0; i < dc.w.size(); ++i) {
    const double n = norm(dc.w[i], tr.setup.primal);
    const double rhs = 2.0 * dc.rho[i] * dc.z[i];
    log.add(dc.h + i, rhs - n * n, rhs + n * n);
  }
  return log.report();
}

// Three reports: the unrolled bound on f(x_T) - f*, the bound on z*, and the
// bound on <Q>_T + [Q]_T.
inline std::vector<DiagnosticReport> check_last_iterate_identities(const RunTrace& tr, const LastIterateDecomp& dc,
                                                               double rel_tol = kDefaultRelTol) {
  const std::size_t T = dc.T;
  const double eta = tr.schedule.eta;
  const double rootT = std::sqrt(double(T));
  double gaps = 0.0, rho_g = 0.0, zs = 0.0, rho_dev = 0.0, rho_dev_abs = 0.0, inner_abs = 0.0;
  for (std::size_t t = dc.h; t <= T; ++t) {
    const std::size_t i = t - dc.h;
    gaps += tr.f_gap(t);
    rho_g += dc.rho[i] * dual_sq(tr, t);
    zs += dc.z[i];
    const double n = norm(tr.xi_at(t), tr.setup.dual);
    rho_dev += dc.rho[i] * (n * n - tr.noise.second_moment);
    rho_dev_abs += dc.rho[i] * (n * n + tr.noise.second_moment);
    inner_abs += std::abs(tr.xi_at(t).dot(dc.w[i]));
  }

  std::vector<DiagnosticReport> out;
  {
    SlackLog log("last-iterate-unrolled", rel_tol);
    const double a = 2.0 / double(T) * gaps;
    const double c = eta / std::sqrt(2.0 * double(T)) * rho_g;
    const double d = std::numbers::sqrt2 / (eta * rootT) * zs;
    const double lhs = tr.f_gap(T);
    log.add(T, a + dc.Q.back() + c + d - lhs, std::abs(lhs) + a + inner_abs + c + d);
    out.push_back(log.report());
  }
  {
    SlackLog log("max-z", rel_tol);
    const double a = 6.0 * std::numbers::sqrt2 * eta / (double(T) * rootT) * gaps;
    const double b = 3.0 * std::numbers::sqrt2 * eta / rootT * dc.Q[dc.n_star - dc.h];
    const double c = 3.0 * eta * eta / double(T) * rho_g;
    log.add(dc.n_star, a + b + c - dc.z_star,
            dc.z_star + a + 3.0 * std::numbers::sqrt2 * eta / rootT * inner_abs + c);
    out.push_back(log.report());
  }
  {
    SlackLog log("variation", rel_tol);
    const double lhs = dc.tcv.back() + dc.tqv.back();
    const double a = 4.0 * tr.noise.second_moment * dc.z_star * std::log(4.0 * double(T));
    const double b = 2.0 * dc.z_star * rho_dev;
    log.add(T, a + b - lhs, lhs + a + 2.0 * dc.z_star * rho_dev_abs);
    out.push_back(log.report());
  }
  return out;
}

struct SuiteOptions {
  double rel_tol = kDefaultRelTol;
  std::vector<Point> comparators;  // extra feasible z for the one-step/weighted checks
};

// Every surely-true check applicable to the trace.
inline std::vector<DiagnosticReport> run_invariant_suite(const RunTrace& tr, const SuiteOptions& opt = {}) {
  std::vector<DiagnosticReport> out;
  std::vector<Point> zs{tr.problem.minimizer()};
  zs.insert(zs.end(), opt.comparators.begin(), opt.comparators.end());
  const std::size_t T = tr.horizon();
  const double gamma = trace_gamma(tr);
  const std::vector<double> inv_d = inverse_d_weights(d_sequence(tr, gamma), T);
  const std::vector<double> ones(T, 1.0);
  for (const Point& z : zs) {
    out.push_back(check_one_step(tr, z, opt.rel_tol));
    out.push_back(check_weighted_iterates_all(tr, z, ones, opt.rel_tol));
    out.push_back(check_weighted_iterates_all(tr, z, inv_d, opt.rel_tol));
  }
  out.push_back(check_iterate_comparison_all(tr, opt.rel_tol));
  out.push_back(check_d_recursion(tr, gamma, opt.rel_tol));
  if (tr.schedule.kind == StepSchedule::Kind::inverse_sqrt) {
    const LastIterateDecomp dc = last_iterate_decomposition(tr);
    out.push_back(check_w_norm(tr, dc, opt.rel_tol));
    for (auto& r : check_last_iterate_identities(tr, dc, opt.rel_tol)) out.push_back(std::move(r));
  }
  return out;
}

}  // namespace mirrortail::diag

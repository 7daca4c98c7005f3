#pragma once

#include "mirrortail/parallel.hpp"
#include "mirrortail/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Monte Carlo checks of the martingale concentration inequalities and the
// sub-Weibull moment/centering/MGF bounds. Every sampler draws from the
// tightest law satisfying the certificate it is checked against, so the
// inequalities are exercised at their boundary rather than far inside it.
namespace mirrortail::conc {

inline constexpr std::size_t kDefaultTrials = 100000;
inline constexpr double kSigmaSlack = 4.0;

struct ViolationEstimate {
  std::size_t trials = 0;
  std::size_t violations = 0;
  double rate = 0.0;
  double std_error = 0.0;  // binomial standard error at the cap
  double target = 0.0;  // delta or the analytic probability bound
  bool passed = true;
};

inline ViolationEstimate make_violation_estimate(std::size_t trials, std::size_t violations, double target) {
  ViolationEstimate v{trials, violations, 0.0, 0.0, target, true};
  if (trials == 0) throw std::invalid_argument("violation estimate: zero trials");
  v.rate = double(violations) / double(trials);
  const double cap = std::clamp(target, 0.0, 1.0);
  v.std_error = std::sqrt(cap * (1.0 - cap) / double(trials));
  v.passed = v.rate <= target + kSigmaSlack * v.std_error;
  return v;
}

// Empirical mean of a statistic against an upper bound.
struct MomentEstimate {
  std::size_t trials = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  bool passed = true;
};

// ---- tight laws ----

// |X| = (nu / 2^theta) Exp(1)^theta gives E exp((|X|/nu)^(1/theta)) = E exp(E/2) = 2.
inline double tight_weibull_lambda(double theta, double nu) { return nu * std::pow(2.0, -theta); }

// N(0, s^2) with E exp(X^2/nu^2) = 2 needs s = nu sqrt(3/8).
inline double tight_gaussian_std(double nu) { return nu * std::sqrt(3.0 / 8.0); }

// Pareto(x_m, p + 1) with E|X|^p = kappa^p.
inline double tight_pareto_xm(double p, double kappa) { return kappa * std::pow(p + 1.0, -1.0 / p); }

inline double sym_weibull_draw(double theta, double nu, CounterRng& rng) {
  return rng.sign() * tight_weibull_lambda(theta, nu) * std::pow(rng.exponential(), theta);
}

inline double sym_pareto_draw(double p, double kappa, CounterRng& rng) {
  return rng.sign() * tight_pareto_xm(p, kappa) * std::pow(rng.uniform(), -1.0 / (p + 1.0));
}

enum class IncrementLaw { gaussian, sym_weibull, sym_poly, rademacher };

inline std::string_view to_string(IncrementLaw l) {
  switch (l) {
    case IncrementLaw::gaussian: return "gaussian";
    case IncrementLaw::sym_weibull: return "sym-weibull";
    case IncrementLaw::sym_poly: return "sym-poly";
    case IncrementLaw::rademacher: return "rademacher";
  }
  return "?";
}

// Martingale with independent symmetric increments. scales[i] is the
// certified constant of step i + 1: the sub-Weibull scale (gaussian uses
// theta = 1/2), the p-th moment scale kappa for sym-poly, or the amplitude
// for rademacher. With `adversarial` the scale is halved whenever the
// running sum is negative, a predictable choice that keeps the certificate.
struct MartingaleGen {
  IncrementLaw law = IncrementLaw::gaussian;
  double theta = 0.5;
  double p = 5.0;
  std::vector<double> scales;
  bool adversarial = false;

  std::size_t length() const { return scales.size(); }

  double scale_at(std::size_t i, double s_prev) const {
    return adversarial && s_prev < 0.0 ? 0.5 * scales[i] : scales[i];
  }

  double draw(std::size_t i, double s_prev, CounterRng& rng) const {
    const double m = scale_at(i, s_prev);
    switch (law) {
      case IncrementLaw::gaussian: return tight_gaussian_std(m) * rng.normal();
      case IncrementLaw::sym_weibull: return sym_weibull_draw(theta, m, rng);
      case IncrementLaw::sym_poly: return sym_pareto_draw(p, m, rng);
      case IncrementLaw::rademacher: return rng.sign() * m;
    }
    return 0.0;
  }

  double conditional_variance(std::size_t i, double s_prev) const {
    const double m = scale_at(i, s_prev);
    switch (law) {
      case IncrementLaw::gaussian: return 3.0 / 8.0 * m * m;
      case IncrementLaw::sym_weibull: {
        const double l = tight_weibull_lambda(theta, m);
        return l * l * std::tgamma(2.0 * theta + 1.0);
      }
      case IncrementLaw::sym_poly: {
        const double a = p + 1.0;
        const double x = tight_pareto_xm(p, m);
        return a * x * x / (a - 2.0);
      }
      case IncrementLaw::rademacher: return m * m;
    }
    return 0.0;
  }
};

inline std::vector<double> constant_scales(std::size_t n, double m) { return std::vector<double>(n, m); }

inline std::vector<double> inverse_sqrt_scales(std::size_t n) {
  std::vector<double> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = 1.0 / std::sqrt(double(i + 1));
  return m;
}

inline std::vector<double> inverse_scales(std::size_t n) {
  std::vector<double> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = 1.0 / double(i + 1);
  return m;
}

// Runs fn(trial, rng) for every trial on its own stream and returns the
// per-trial results in trial order.
template <class T, class Fn>
std::vector<T> run_trials(std::size_t trials, std::uint64_t seed, unsigned workers, Fn&& fn) {
  std::vector<T> out(trials);
  parallel_for(trials, workers, [&](std::size_t i) {
    CounterRng rng{seed, std::uint64_t(i)};
    out[i] = fn(i, rng);
  });
  return out;
}

// max_t S_t of each simulated path.
inline std::vector<double> simulate_maxima(const MartingaleGen& gen, std::size_t trials, std::uint64_t seed,
                                           unsigned workers = 1) {
  return run_trials<double>(trials, seed, workers, [&](std::size_t, CounterRng& rng) {
    double s = 0.0, best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < gen.length(); ++i) {
      s += gen.draw(i, s, rng);
      best = std::max(best, s);
    }
    return best;
  });
}

inline std::size_t count_at_least(const std::vector<double>& v, double x) {
  return std::size_t(std::count_if(v.begin(), v.end(), [x](double a) { return a >= x; }));
}

inline std::size_t count_above(const std::vector<double>& v, double x) {
  return std::size_t(std::count_if(v.begin(), v.end(), [x](double a) { return a > x; }));
}

// Empirical P(max_t S_t >= x) over a grid of x from one set of paths.
inline std::vector<double> exceedance_curve(const MartingaleGen& gen, const std::vector<double>& grid,
                                            std::size_t trials, std::uint64_t seed, unsigned workers = 1) {
  const std::vector<double> maxima = simulate_maxima(gen, trials, seed, workers);
  std::vector<double> rates;
  for (double x : grid) rates.push_back(double(count_at_least(maxima, x)) / double(trials));
  return rates;
}

// ---- thresholds ----

namespace detail {

inline long double sum_pow(const std::vector<double>& m, double e) {
  long double s = 0.0L;
  for (double v : m)
    if (v > 0.0 || e == 0.0) s += std::pow((long double)v, (long double)e);
  return s;
}

inline double max_of(const std::vector<double>& m) { return m.empty() ? 0.0 : *std::max_element(m.begin(), m.end()); }

inline void check_delta(double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in (0, 1]");
}

inline void check_scales(const std::vector<double>& m) {
  for (double v : m)
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("scales must be finite and >= 0");
}

// Only positive scales enter the union-bound sums of the sub-Weibull
// thresholds; zero-scale increments vanish.
inline std::vector<double> positive(const std::vector<double>& m) {
  std::vector<double> out;
  for (double v : m)
    if (v > 0.0) out.push_back(v);
  return out;
}

inline double log_ratio(const std::vector<double>& m, double s, double delta) {
  const long double ratio = sum_pow(m, s) / std::pow((long double)max_of(m), (long double)s);
  return double(std::log(2.0L * std::numbers::e_v<long double> * ratio / (long double)delta));
}

}  // namespace detail

// theta = 1/2: 4 sqrt(e sum m_i^2 log(1/delta)).
inline double maximal_threshold_subgaussian(const std::vector<double>& m, double delta) {
  detail::check_delta(delta);
  detail::check_scales(m);
  return double(4.0L * std::sqrt(std::numbers::e_v<long double> * detail::sum_pow(m, 2.0) * std::log(1.0L / delta)));
}

// theta >= 1: sqrt(C1 sum m^2 log(2/delta))
//   + 4 m_* max{log^(theta-1)(2e sum m^s / (m_*^s delta)), (s theta - s)^(theta-1)} log(2/delta),
// C1 = 2^(3 theta + 1) Gamma(3 theta + 1).
inline double maximal_threshold_heavy(double theta, const std::vector<double>& scales, double delta, double s) {
  detail::check_delta(delta);
  detail::check_scales(scales);
  if (!(theta >= 1.0)) throw std::invalid_argument("heavy-tail maximal inequality needs theta >= 1");
  if (!(s >= 0.0)) throw std::invalid_argument("s must be >= 0");
  const std::vector<double> m = detail::positive(scales);
  if (m.empty()) return 0.0;
  const long double c1 = std::pow(2.0L, 3.0L * theta + 1.0L) * std::tgamma(3.0L * theta + 1.0L);
  const long double log2d = std::log(2.0L / delta);
  const long double first = std::sqrt(c1 * detail::sum_pow(m, 2.0) * log2d);
  const double lr = detail::log_ratio(m, s, delta);
  const double mx = std::max(std::pow(lr, theta - 1.0), std::pow(s * theta - s, theta - 1.0));
  return double(first + 4.0L * detail::max_of(m) * mx * log2d);
}

// sqrt(2 sum kappa^2 log(1/delta)) + (2 + p/3) (sum kappa^p / delta)^(1/p).
inline double fuk_nagaev_threshold(double p, const std::vector<double>& kappa, double delta) {
  detail::check_delta(delta);
  detail::check_scales(kappa);
  if (!(p > 2.0)) throw std::invalid_argument("Fuk-Nagaev inequality needs p > 2");
  const long double a = std::sqrt(2.0L * detail::sum_pow(kappa, 2.0) * std::log(1.0L / delta));
  const long double b = (2.0L + p / 3.0L) * std::pow(detail::sum_pow(kappa, p) / delta, 1.0L / p);
  return double(a + b);
}

// exp(-min{x^2/(8 beta), x/(6 alpha)}), with x/(6 alpha) = inf at alpha = 0.
inline double freedman_type_cap(double alpha, double beta, double x) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  if (!(x > 0.0)) throw std::invalid_argument("x must be positive");
  const double a = x * x / (8.0 * beta);
  const double b = alpha == 0.0 ? std::numeric_limits<double>::infinity() : x / (6.0 * alpha);
  return std::exp(-std::min(a, b));
}

enum class Regime { weibull, poly };
enum class Shortcut { inner_product, squared_norm };

inline std::string_view to_string(Shortcut s) { return s == Shortcut::inner_product ? "inner-product" : "squared-norm"; }

// Thresholds of the weighted shortcuts. `scale` is nu (weibull) or kappa (poly).
inline double shortcut_threshold(Regime r, Shortcut which, double shape, double scale,
                                 const std::vector<double>& weights, double delta, double s = 0.0) {
  detail::check_delta(delta);
  detail::check_scales(weights);
  const std::vector<double> w = detail::positive(weights);
  if (w.empty()) return 0.0;
  const long double sw2 = detail::sum_pow(w, 2.0);
  const long double wmax = detail::max_of(w);
  if (r == Regime::weibull) {
    const double theta = shape;
    if (!(theta >= 1.0)) throw std::invalid_argument("weighted shortcut needs theta >= 1");
    const long double log2d = std::log(2.0L / delta);
    const double lr = detail::log_ratio(w, s, delta);
    if (which == Shortcut::inner_product) {
      const long double c1 = std::pow(2.0L, 3.0L * theta + 1.0L) * std::tgamma(3.0L * theta + 1.0L);
      const long double c2 = std::max(1.0L, std::pow((long double)(s * theta - s), (long double)(theta - 1.0)));
      return double(scale * std::sqrt(c1 * sw2 * log2d) + 4.0L * scale * wmax * c2 * std::pow((long double)lr, (long double)theta));
    }
    const long double c1 = std::pow(2.0L, 6.0L * theta + 1.0L) * std::tgamma(6.0L * theta + 1.0L);
    const long double c2 =
        std::max(1.0L, std::pow((long double)(2.0 * s * theta - s), (long double)(2.0 * theta - 1.0)));
    const long double c3 =
        std::pow(2.0L, 2.0L * theta + 1.0L) * std::tgamma(2.0L * theta + 1.0L) / std::pow(std::log(2.0L), 2.0L * theta);
    const long double v = (long double)scale * scale;
    return double(c3 * v * std::sqrt(c1 * sw2 * log2d) +
                  4.0L * c2 * c3 * v * wmax * std::pow((long double)lr, (long double)(2.0 * theta)));
  }
  const double p = shape;
  if (!(p > 4.0)) throw std::invalid_argument("weighted shortcut needs p > 4");
  const long double log1d = std::log(1.0L / delta);
  if (which == Shortcut::inner_product) {
    return double(scale * std::sqrt(2.0L * sw2 * log1d) +
                  (2.0L + p / 3.0L) * scale * std::pow(detail::sum_pow(w, p) / delta, 1.0L / p));
  }
  const long double k2 = (long double)scale * scale;
  return double(2.0L * k2 * std::sqrt(2.0L * sw2 * log1d) +
                2.0L * (2.0L + p / 6.0L) * k2 * std::pow(detail::sum_pow(w, p / 2.0) / delta, 2.0L / p));
}

// ---- sub-Weibull calculus ----

// 2 Gamma(theta p + 1) nu^p.
inline double subw_moment_bound(double theta, double nu, double p) {
  const double g = std::tgamma(theta * p + 1.0);
  if (!std::isfinite(g)) throw std::range_error("moment bound: Gamma(theta p + 1) overflows");
  return 2.0 * g * std::pow(nu, p);
}

// c_theta = 2^(max{theta, 1} + 1) Gamma(theta + 1) / ln^theta(2).
inline double centering_constant(double theta) {
  return std::pow(2.0, std::max(theta, 1.0) + 1.0) * std::tgamma(theta + 1.0) / std::pow(std::numbers::ln2, theta);
}

inline MomentEstimate moment_from_samples(const std::vector<double>& v, double bound) {
  MomentEstimate m;
  m.trials = v.size();
  long double s = 0.0L, s2 = 0.0L;
  for (double x : v) {
    s += x;
    s2 += (long double)x * x;
  }
  const long double n = v.size();
  m.mean = double(s / n);
  const long double var = std::max(0.0L, (s2 - s * s / n) / std::max(1.0L, n - 1.0L));
  m.std_error = double(std::sqrt(var / n));
  m.bound = bound;
  m.passed = m.mean <= bound + kSigmaSlack * m.std_error;
  return m;
}

// E|X|^p against 2 Gamma(theta p + 1) nu^p for the tight symmetric law.
inline MomentEstimate check_subw_moment(double theta, double nu, double p, std::size_t trials,
                                        std::uint64_t seed = 1, unsigned workers = 1) {
  if (!(theta > 0.0 && nu > 0.0 && p > 0.0)) throw std::invalid_argument("moment check: theta, nu, p must be > 0");
  const double bound = subw_moment_bound(theta, nu, p);
  const auto v = run_trials<double>(trials, seed, workers, [&](std::size_t, CounterRng& rng) {
    return std::pow(std::abs(sym_weibull_draw(theta, nu, rng)), p);
  });
  return moment_from_samples(v, bound);
}

// E exp((|X - EX| / (c_theta nu))^(1/theta)) <= 2 for the one-sided (uncentered)
// tight law X = (nu/2^theta) Exp(1)^theta, whose mean is lambda Gamma(theta + 1).
inline MomentEstimate check_centering(double theta, double nu, std::size_t trials, std::uint64_t seed = 1,
                                      unsigned workers = 1) {
  if (!(theta > 0.0 && nu > 0.0)) throw std::invalid_argument("centering check: theta, nu must be > 0");
  const double lambda = tight_weibull_lambda(theta, nu);
  const double mean = lambda * std::tgamma(theta + 1.0);
  const double c = centering_constant(theta);
  const auto v = run_trials<double>(trials, seed, workers, [&](std::size_t, CounterRng& rng) {
    const double x = lambda * std::pow(rng.exponential(), theta);
    return std::exp(std::pow(std::abs(x - mean) / (c * nu), 1.0 / theta));
  });
  return moment_from_samples(v, 2.0);
}

enum class MgfCase { subgaussian, subexponential, truncated };

inline std::string_view to_string(MgfCase c) {
  switch (c) {
    case MgfCase::subgaussian: return "theta=1/2";
    case MgfCase::subexponential: return "theta=1";
    case MgfCase::truncated: return "truncated";
  }
  return "?";
}

// a = (2^(2 theta) + 1) Gamma(2 theta + 1) + 2^(3 theta) Gamma(3 theta + 1) / 6 * h^(1/theta - 1).
inline double truncated_mgf_coefficient(double theta, double h) {
  return (std::pow(2.0, 2.0 * theta) + 1.0) * std::tgamma(2.0 * theta + 1.0) +
         std::pow(2.0, 3.0 * theta) * std::tgamma(3.0 * theta + 1.0) / 6.0 * std::pow(h, 1.0 / theta - 1.0);
}

inline double truncated_mgf_lambda_max(double theta, double nu, double h) {
  return 1.0 / (2.0 * std::pow(h, 1.0 - 1.0 / theta) * nu);
}

// MGF bound at lambda; throws when lambda is outside the admissible range.
inline double mgf_bound(MgfCase c, double theta, double nu, double lambda, double h = 1.0) {
  if (!(nu > 0.0)) throw std::invalid_argument("mgf bound: nu must be positive");
  switch (c) {
    case MgfCase::subgaussian: return std::exp(4.0 * std::numbers::e * nu * nu * lambda * lambda);
    case MgfCase::subexponential:
      if (std::abs(lambda) > 1.0 / (2.0 * std::numbers::e * nu))
        throw std::invalid_argument("mgf bound: need |lambda| <= 1/(2 e nu)");
      return std::exp(2.0 * std::numbers::e * std::numbers::e * nu * nu * lambda * lambda);
    case MgfCase::truncated:
      if (!(theta >= 1.0) || !(h > 0.0)) throw std::invalid_argument("mgf bound: truncated case needs theta >= 1, h > 0");
      if (lambda < 0.0 || lambda > truncated_mgf_lambda_max(theta, nu, h) * (1.0 + 1e-12))
        throw std::invalid_argument("mgf bound: need 0 <= lambda <= 1/(2 h^(1 - 1/theta) nu)");
      return std::exp(truncated_mgf_coefficient(theta, h) * nu * nu * lambda * lambda);
  }
  return 0.0;
}

// Empirical E exp(lambda X) on a lambda grid against the case's bound. The
// sampled laws are centered and tight for the certificate: gaussian for
// theta = 1/2, the symmetric Weibull law otherwise (X truncated at nu h in
// the third case).
inline std::vector<MomentEstimate> check_mgf_bounds(MgfCase c, double theta, double nu, const std::vector<double>& lambdas,
                                                    double h, std::size_t trials, std::uint64_t seed = 1,
                                                    unsigned workers = 1) {
  std::vector<double> bounds;
  for (double l : lambdas) bounds.push_back(mgf_bound(c, theta, nu, l, h));
  const double shape = c == MgfCase::subexponential ? 1.0 : theta;
  const auto draws = run_trials<double>(trials, seed, workers, [&](std::size_t, CounterRng& rng) {
    if (c == MgfCase::subgaussian) return tight_gaussian_std(nu) * rng.normal();
    const double x = sym_weibull_draw(shape, nu, rng);
    return c == MgfCase::truncated && x > nu * h ? 0.0 : x;
  });
  std::vector<MomentEstimate> out;
  std::vector<double> v(draws.size());
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    std::transform(draws.begin(), draws.end(), v.begin(), [&](double x) { return std::exp(lambdas[k] * x); });
    out.push_back(moment_from_samples(v, bounds[k]));
  }
  return out;
}

// ---- maximal inequalities ----

// Sub-Weibull increments with scales m_i; routes theta = 1/2 to the
// sub-Gaussian threshold. Event: S_t >= threshold for some t.
inline ViolationEstimate validate_subw_maximal(double theta, const std::vector<double>& scales, double delta, double s,
                                               std::size_t trials, std::uint64_t seed = 1, unsigned workers = 1,
                                               bool adversarial = false) {
  const bool light = theta == 0.5;
  const double thr = light ? maximal_threshold_subgaussian(scales, delta) : maximal_threshold_heavy(theta, scales, delta, s);
  if (detail::positive(scales).empty()) return make_violation_estimate(trials, 0, delta);
  const MartingaleGen gen{light ? IncrementLaw::gaussian : IncrementLaw::sym_weibull, theta, 0.0, scales, adversarial};
  const auto maxima = simulate_maxima(gen, trials, seed, workers);
  return make_violation_estimate(trials, count_at_least(maxima, thr), delta);
}

// Same paths, several values of s (they only change the threshold).
inline std::vector<ViolationEstimate> validate_subw_maximal_s_grid(double theta, const std::vector<double>& scales,
                                                                   double delta, const std::vector<double>& s_grid,
                                                                   std::size_t trials, std::uint64_t seed = 1,
                                                                   unsigned workers = 1) {
  const MartingaleGen gen{IncrementLaw::sym_weibull, theta, 0.0, scales, false};
  const auto maxima = simulate_maxima(gen, trials, seed, workers);
  std::vector<ViolationEstimate> out;
  for (double s : s_grid)
    out.push_back(make_violation_estimate(trials, count_at_least(maxima, maximal_threshold_heavy(theta, scales, delta, s)),
                                          delta));
  return out;
}

// Increments with E|X_i / kappa_i|^p = 1. Event: S_t > threshold for some t.
inline ViolationEstimate validate_fuk_nagaev(double p, const std::vector<double>& kappa, double delta,
                                             std::size_t trials, std::uint64_t seed = 1, unsigned workers = 1) {
  const double thr = fuk_nagaev_threshold(p, kappa, delta);
  const MartingaleGen gen{IncrementLaw::sym_poly, 1.0, p, kappa, false};
  const auto maxima = simulate_maxima(gen, trials, seed, workers);
  return make_violation_estimate(trials, count_above(maxima, thr), delta);
}

// Frequency of the union over t of {M_t >= x and <M>_t + [M]_t <= alpha M_t + beta}.
inline ViolationEstimate validate_chicken_egg(double alpha, double beta, double x, const MartingaleGen& gen,
                                              std::size_t trials, std::uint64_t seed = 1, unsigned workers = 1) {
  const double cap = freedman_type_cap(alpha, beta, x);
  const auto hits = run_trials<char>(trials, seed, workers, [&](std::size_t, CounterRng& rng) -> char {
    double m = 0.0, tcv = 0.0, tqv = 0.0;
    for (std::size_t i = 0; i < gen.length(); ++i) {
      tcv += gen.conditional_variance(i, m);
      const double d = gen.draw(i, m, rng);
      m += d;
      tqv += d * d;
      if (m >= x && tcv + tqv <= alpha * m + beta) return 1;
    }
    return 0;
  });
  return make_violation_estimate(trials, std::size_t(std::count(hits.begin(), hits.end(), 1)), cap);
}

// Vector noise in R^2 (l2 geometry) whose norm carries the certificate,
// paired with unit directions u_t that track the running sum of past noise.
struct ShortcutParams {
  Regime regime = Regime::weibull;
  double shape = 1.0;  // theta (weibull) or p (poly)
  double scale = 1.0;  // nu (weibull) or kappa (poly)
  double s = 0.0;      // union-bound parameter, weibull only
};

inline double shortcut_norm_second_moment(const ShortcutParams& prm) {
  if (prm.regime == Regime::weibull) {
    const double l = tight_weibull_lambda(prm.shape, prm.scale);
    return l * l * std::tgamma(2.0 * prm.shape + 1.0);
  }
  const double a = prm.shape + 1.0;
  const double x = tight_pareto_xm(prm.shape, prm.scale);
  return a * x * x / (a - 2.0);
}

inline ViolationEstimate validate_weighted_shortcuts(Shortcut which, const std::vector<double>& weights,
                                                     const ShortcutParams& prm, double delta, std::size_t trials,
                                                     std::uint64_t seed = 1, unsigned workers = 1) {
  const double thr = shortcut_threshold(prm.regime, which, prm.shape, prm.scale, weights, delta, prm.s);
  if (detail::positive(weights).empty()) return make_violation_estimate(trials, 0, delta);
  const double second = shortcut_norm_second_moment(prm);
  const bool strict = prm.regime == Regime::poly;
  const auto hits = run_trials<char>(trials, seed, workers, [&](std::size_t, CounterRng& rng) -> char {
    Eigen::Vector2d bias = Eigen::Vector2d::Zero();
    double sum = 0.0;
    for (std::size_t t = 0; t < weights.size(); ++t) {
      const double bn = bias.norm();
      const Eigen::Vector2d u = bn > 0.0 ? Eigen::Vector2d(bias / bn) : Eigen::Vector2d(1.0, 0.0);
      const double mag = prm.regime == Regime::weibull ? std::abs(sym_weibull_draw(prm.shape, prm.scale, rng))
                                                       : std::abs(sym_pareto_draw(prm.shape, prm.scale, rng));
      const double angle = 2.0 * std::numbers::pi * rng.uniform();
      const Eigen::Vector2d xi(mag * std::cos(angle), mag * std::sin(angle));
      sum += which == Shortcut::inner_product ? weights[t] * xi.dot(u) : weights[t] * (mag * mag - second);
      bias += xi;
      if (strict ? sum > thr : sum >= thr) return 1;
    }
    return 0;
  });
  return make_violation_estimate(trials, std::size_t(std::count(hits.begin(), hits.end(), 1)), delta);
}

// ---- standard configurations ----

// One result row: either a violation-rate check or a moment check.
struct ReportRow {
  std::string prop;
  std::string label;
  std::size_t trials = 0;
  double statistic = 0.0;  // violation rate or empirical mean
  double std_error = 0.0;
  double cap = 0.0;  // target rate or moment bound
  bool passed = true;
};

inline ReportRow row_from(std::string prop, std::string label, const ViolationEstimate& v) {
  return {std::move(prop), std::move(label), v.trials, v.rate, v.std_error, v.target, v.passed};
}

inline ReportRow row_from(std::string prop, std::string label, const MomentEstimate& m) {
  return {std::move(prop), std::move(label), m.trials, m.mean, m.std_error, m.bound, m.passed};
}

struct RunContext {
  std::size_t trials = kDefaultTrials;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

struct ConcentrationConfig {
  std::string prop;
  std::string label;
  std::function<std::vector<ReportRow>(const RunContext&)> run;
};

inline const std::vector<std::string_view>& known_props() {
  static const std::vector<std::string_view> p{"e2", "e3", "p1", "b1", "b2", "moments", "mgf"};
  return p;
}

namespace detail {

inline std::string fmt_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

inline std::vector<ConcentrationConfig> e2_configs() {
  std::vector<ConcentrationConfig> c;
  c.push_back({"e2", "theta=1/2 m=1 n=100 delta=0.05", [](const RunContext& ctx) {
                 auto v = validate_subw_maximal(0.5, constant_scales(100, 1.0), 0.05, 0.0, ctx.trials, ctx.seed, ctx.workers);
                 return std::vector<ReportRow>{row_from("e2", "theta=1/2 m=1 n=100 delta=0.05", v)};
               }});
  c.push_back({"e2", "theta=1/2 m=0 n=100 delta=0.05", [](const RunContext& ctx) {
                 auto v = validate_subw_maximal(0.5, constant_scales(100, 0.0), 0.05, 0.0, ctx.trials, ctx.seed, ctx.workers);
                 return std::vector<ReportRow>{row_from("e2", "theta=1/2 m=0 n=100 delta=0.05", v)};
               }});
  struct Heavy {
    double theta;
    std::vector<double> m;
    double delta;
    std::string tag;
  };
  const std::vector<Heavy> heavy{
      {1.0, inverse_sqrt_scales(1000), 0.01, "theta=1 m=1/sqrt(i) n=1000 delta=0.01"},
      {2.0, constant_scales(100, 1.0), 0.05, "theta=2 m=1 n=100 delta=0.05"},
      {10.0 / 3.0, inverse_sqrt_scales(200), 0.05, "theta=10/3 m=1/sqrt(i) n=200 delta=0.05"},
  };
  for (const Heavy& h : heavy) {
    c.push_back({"e2", h.tag + " s in {0,2,3}", [h](const RunContext& ctx) {
                   const std::vector<double> s_grid{0.0, 2.0, 3.0};
                   auto vs = validate_subw_maximal_s_grid(h.theta, h.m, h.delta, s_grid, ctx.trials, ctx.seed, ctx.workers);
                   std::vector<ReportRow> rows;
                   for (std::size_t k = 0; k < vs.size(); ++k)
                     rows.push_back(row_from("e2", h.tag + " s=" + fmt_num(s_grid[k]), vs[k]));
                   return rows;
                 }});
  }
  return c;
}

inline std::vector<ConcentrationConfig> e3_configs() {
  std::vector<ConcentrationConfig> c;
  c.push_back({"e3", "p=5 kappa=1 n=100 delta=0.05", [](const RunContext& ctx) {
                 auto v = validate_fuk_nagaev(5.0, constant_scales(100, 1.0), 0.05, ctx.trials, ctx.seed, ctx.workers);
                 return std::vector<ReportRow>{row_from("e3", "p=5 kappa=1 n=100 delta=0.05", v)};
               }});
  c.push_back({"e3", "p=5 kappa=1/sqrt(i) n=1000 delta=0.05", [](const RunContext& ctx) {
                 auto v = validate_fuk_nagaev(5.0, inverse_sqrt_scales(1000), 0.05, ctx.trials, ctx.seed, ctx.workers);
                 return std::vector<ReportRow>{row_from("e3", "p=5 kappa=1/sqrt(i) n=1000 delta=0.05", v)};
               }});
  c.push_back({"e3", "p=3 kappa=1 n=50 delta=0.1", [](const RunContext& ctx) {
                 auto v = validate_fuk_nagaev(3.0, constant_scales(50, 1.0), 0.1, ctx.trials, ctx.seed, ctx.workers);
                 return std::vector<ReportRow>{row_from("e3", "p=3 kappa=1 n=50 delta=0.1", v)};
               }});
  return c;
}

inline std::vector<ConcentrationConfig> p1_configs() {
  std::vector<ConcentrationConfig> c;
  c.push_back({"p1", "rademacher n=100 alpha=0 beta=200 x=40", [](const RunContext& ctx) {
                 MartingaleGen gen{IncrementLaw::rademacher, 0.5, 0.0, constant_scales(100, 1.0), false};
                 auto v = validate_chicken_egg(0.0, 200.0, 40.0, gen, ctx.trials, ctx.seed, ctx.workers);
                 return std::vector<ReportRow>{row_from("p1", "rademacher n=100 alpha=0 beta=200 x=40", v)};
               }});
  c.push_back({"p1", "rademacher n=100 alpha=0 beta=200 x=1e6", [](const RunContext& ctx) {
                 MartingaleGen gen{IncrementLaw::rademacher, 0.5, 0.0, constant_scales(100, 1.0), false};
                 auto v = validate_chicken_egg(0.0, 200.0, 1e6, gen, ctx.trials, ctx.seed, ctx.workers);
                 return std::vector<ReportRow>{row_from("p1", "rademacher n=100 alpha=0 beta=200 x=1e6", v)};
               }});
  c.push_back({"p1", "scaled-gaussian n=100 alpha=1 beta=1 x=12", [](const RunContext& ctx) {
                 MartingaleGen gen{IncrementLaw::gaussian, 0.5, 0.0, constant_scales(100, 0.5), true};
                 auto v = validate_chicken_egg(1.0, 1.0, 12.0, gen, ctx.trials, ctx.seed, ctx.workers);
                 return std::vector<ReportRow>{row_from("p1", "scaled-gaussian n=100 alpha=1 beta=1 x=12", v)};
               }});
  c.push_back({"p1", "sym-weibull(2) n=200 alpha=2 beta=20 x=10", [](const RunContext& ctx) {
                 MartingaleGen gen{IncrementLaw::sym_weibull, 2.0, 0.0, constant_scales(200, 1.0), true};
                 auto v = validate_chicken_egg(2.0, 20.0, 10.0, gen, ctx.trials, ctx.seed, ctx.workers);
                 return std::vector<ReportRow>{row_from("p1", "sym-weibull(2) n=200 alpha=2 beta=20 x=10", v)};
               }});
  return c;
}

inline ConcentrationConfig shortcut_config(std::string prop, std::string tag, Shortcut which, std::vector<double> w,
                                           ShortcutParams prm, double delta) {
  const std::string label = tag + " " + std::string(to_string(which));
  return {prop, label, [=](const RunContext& ctx) {
            auto v = validate_weighted_shortcuts(which, w, prm, delta, ctx.trials, ctx.seed, ctx.workers);
            return std::vector<ReportRow>{row_from(prop, label, v)};
          }};
}

inline std::vector<ConcentrationConfig> b_configs(Regime r) {
  std::vector<ConcentrationConfig> c;
  for (Shortcut which : {Shortcut::inner_product, Shortcut::squared_norm}) {
    if (r == Regime::weibull) {
      c.push_back(shortcut_config("b1", "theta=1 w=1/sqrt(t) s=3 n=1000 delta=0.05", which, inverse_sqrt_scales(1000),
                                  {Regime::weibull, 1.0, 1.0, 3.0}, 0.05));
      c.push_back(shortcut_config("b1", "theta=2 w=1 s=0 n=100 delta=0.05", which, constant_scales(100, 1.0),
                                  {Regime::weibull, 2.0, 1.0, 0.0}, 0.05));
      c.push_back(shortcut_config("b1", "theta=1 w=0 n=100 delta=0.05", which, constant_scales(100, 0.0),
                                  {Regime::weibull, 1.0, 1.0, 0.0}, 0.05));
    } else {
      c.push_back(shortcut_config("b2", "p=5 w=1/t n=1000 delta=0.05", which, inverse_scales(1000),
                                  {Regime::poly, 5.0, 1.0, 0.0}, 0.05));
      c.push_back(shortcut_config("b2", "p=8 w=1 n=100 delta=0.05", which, constant_scales(100, 1.0),
                                  {Regime::poly, 8.0, 1.0, 0.0}, 0.05));
    }
  }
  return c;
}

inline std::vector<ConcentrationConfig> moment_configs() {
  std::vector<ConcentrationConfig> c;
  struct M {
    double theta, nu, p;
  };
  for (M m : {M{1.0, 1.0, 2.0}, M{2.0, 1.0, 1.0}, M{1.0, 1.0, 1e-3}, M{10.0 / 3.0, 1.0, 2.0}}) {
    const std::string label = "E|X|^p theta=" + fmt_num(m.theta) + " nu=" + fmt_num(m.nu) + " p=" + fmt_num(m.p);
    c.push_back({"moments", label, [m, label](const RunContext& ctx) {
                   return std::vector<ReportRow>{
                       row_from("moments", label, check_subw_moment(m.theta, m.nu, m.p, ctx.trials, ctx.seed, ctx.workers))};
                 }});
  }
  for (double theta : {0.5, 1.0, 2.0, 10.0 / 3.0}) {
    const std::string label = "centering theta=" + fmt_num(theta) + " nu=1";
    c.push_back({"moments", label, [theta, label](const RunContext& ctx) {
                   return std::vector<ReportRow>{
                       row_from("moments", label, check_centering(theta, 1.0, ctx.trials, ctx.seed, ctx.workers))};
                 }});
  }
  return c;
}

inline std::vector<ConcentrationConfig> mgf_configs() {
  std::vector<ConcentrationConfig> c;
  auto add = [&c](MgfCase mc, double theta, double nu, std::vector<double> lambdas, double h, std::string tag) {
    c.push_back({"mgf", tag, [=](const RunContext& ctx) {
                   auto ms = check_mgf_bounds(mc, theta, nu, lambdas, h, ctx.trials, ctx.seed, ctx.workers);
                   std::vector<ReportRow> rows;
                   for (std::size_t k = 0; k < ms.size(); ++k)
                     rows.push_back(row_from("mgf", tag + " lambda=" + fmt_num(lambdas[k]), ms[k]));
                   return rows;
                 }});
  };
  const double nu_g = std::sqrt(8.0 / 3.0);
  add(MgfCase::subgaussian, 0.5, nu_g, {0.0, 0.5, -1.0, 2.0}, 1.0, "theta=1/2 nu=sqrt(8/3)");
  const double lmax1 = 1.0 / (2.0 * std::numbers::e);
  add(MgfCase::subexponential, 1.0, 1.0, {-lmax1, 0.5 * lmax1, lmax1}, 1.0, "theta=1 nu=1");
  add(MgfCase::truncated, 2.0, 1.0, {0.5 * truncated_mgf_lambda_max(2.0, 1.0, 4.0), truncated_mgf_lambda_max(2.0, 1.0, 4.0)},
      4.0, "theta=2 nu=1 h=4");
  add(MgfCase::truncated, 10.0 / 3.0, 1.0, {1e-4, 1e-3}, 2.0, "theta=10/3 nu=1 h=2");
  return c;
}

}  // namespace detail

inline std::vector<ConcentrationConfig> standard_configurations(std::string_view prop) {
  if (prop == "e2") return detail::e2_configs();
  if (prop == "e3") return detail::e3_configs();
  if (prop == "p1") return detail::p1_configs();
  if (prop == "b1") return detail::b_configs(Regime::weibull);
  if (prop == "b2") return detail::b_configs(Regime::poly);
  if (prop == "moments") return detail::moment_configs();
  if (prop == "mgf") return detail::mgf_configs();
  throw std::invalid_argument("unknown property '" + std::string(prop) + "'");
}

}  // namespace mirrortail::conc

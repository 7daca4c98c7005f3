#pragma once

#include "mirrortail/geometry.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

// Closed-form high-probability bounds on the optimization error of SMD.
// Unspecified absolute constants are exposed as `C` (default 1).
namespace mirrortail::bounds {

struct TailBoundInputs {
  double breg0 = 0.0;  // B(x*, x_1)
  double eta = 1.0;
  double G = 0.0;
  double sigma2 = 0.0;
  double nu = 0.0;     // sub-Weibull scale
  double theta = 1.0;  // sub-Weibull shape
  double kappa = 0.0;  // polynomial-tail scale
  double p = 5.0;      // moment order
  double T = 1.0;
  double delta = 0.05;
  double C = 1.0;
  std::optional<double> D;  // diameter-type bound sqrt(B(x, y)) <= D
};

enum class Case { constant, inverse_sqrt };
enum class Regime { weibull, poly };

namespace detail {

inline void check_common(const TailBoundInputs& in) {
  if (!(in.delta > 0.0 && in.delta <= 1.0)) throw std::invalid_argument("bounds: delta must lie in (0, 1]");
  if (!(in.T >= 1.0)) throw std::invalid_argument("bounds: T must be >= 1");
  if (!(in.eta > 0.0)) throw std::invalid_argument("bounds: eta must be positive");
  if (in.breg0 < 0.0 || in.G < 0.0 || in.sigma2 < 0.0 || in.nu < 0.0 || in.kappa < 0.0 || in.C < 0.0)
    throw std::invalid_argument("bounds: scalars must be nonnegative");
}

inline void check_poly(const TailBoundInputs& in) {
  if (!(in.p > 4.0)) throw std::invalid_argument("bounds: polynomial bounds need p > 4");
}

inline void check_weibull(const TailBoundInputs& in) {
  if (!(in.theta >= 0.5)) throw std::invalid_argument("bounds: theta must be >= 1/2");
}

inline double log_e_over(double x) { return 1.0 + std::log(x); }  // log(e x)

}  // namespace detail

// gamma = sqrt(Y2(delta/2) + sum_t eta_t^2 (G^2 + sigma^2)).
inline double gamma_value(double y2_half_delta, double sum_eta2_g2_sigma2) {
  if (y2_half_delta < 0.0 || sum_eta2_g2_sigma2 < 0.0) throw std::invalid_argument("gamma_value: arguments must be >= 0");
  if (y2_half_delta == 0.0 && sum_eta2_g2_sigma2 == 0.0) throw std::invalid_argument("gamma_value: both arguments are 0");
  return std::sqrt(y2_half_delta + sum_eta2_g2_sigma2);
}

inline std::vector<double> step_sizes(const StepSchedule& schedule, std::size_t T) {
  std::vector<double> etas(T);
  for (std::size_t t = 1; t <= T; ++t) etas[t - 1] = step_size(schedule, t);
  return etas;
}

// Tail functions of the two martingales entering the average-iterate bound:
// Y(delta, (eta_t)) such that the martingale exceeds it w.p. <= delta.
struct MartingaleTailFns {
  std::function<double(double, std::span<const double>)> first;
  std::function<double(double, std::span<const double>)> second;

  static MartingaleTailFns constant(double y1, double y2) {
    return {[y1](double, std::span<const double>) { return y1; }, [y2](double, std::span<const double>) { return y2; }};
  }
};

// (3 / (eta_T T)) (B + sum eta_t^2 (G^2 + sigma^2) + 2 Y1(delta/2)^2 + Y2(delta/2))
inline double avg_generic_bound(const MartingaleTailFns& fns, const TailBoundInputs& in, const StepSchedule& schedule) {
  detail::check_common(in);
  const auto T = static_cast<std::size_t>(in.T);
  const std::vector<double> etas = step_sizes(schedule, T);
  double sum_eta2 = 0.0;
  for (double e : etas) sum_eta2 += e * e;
  const double y1 = fns.first(in.delta / 2.0, etas);
  const double y2 = fns.second(in.delta / 2.0, etas);
  const double eta_T = etas.back();
  return 3.0 / (eta_T * in.T) * (in.breg0 + sum_eta2 * (in.G * in.G + in.sigma2) + 2.0 * y1 * y1 + y2);
}

// Average iterate, sub-Weibull noise.
inline double avg_weibull_bound(Case c, const TailBoundInputs& in) {
  detail::check_common(in);
  detail::check_weibull(in);
  const double nu2 = in.nu * in.nu;
  const double G2 = in.G * in.G;
  if (c == Case::constant) {
    return in.C / in.T *
           (in.breg0 / in.eta + in.eta * (G2 + nu2 * detail::log_e_over(1.0 / in.delta)) * in.T +
            in.eta * nu2 * std::pow(detail::log_e_over(in.T / in.delta), 2.0 * in.theta));
  }
  return in.C * detail::log_e_over(in.T) / std::sqrt(in.T) *
         (in.breg0 / in.eta + in.eta * (G2 + nu2 * std::pow(detail::log_e_over(1.0 / in.delta), 2.0 * in.theta)));
}

// Average iterate, polynomial tails.
inline double avg_poly_bound(Case c, const TailBoundInputs& in) {
  detail::check_common(in);
  detail::check_poly(in);
  const double k2 = in.kappa * in.kappa;
  const double G2 = in.G * in.G;
  if (c == Case::constant) {
    return in.C / in.T *
           (in.breg0 / in.eta + in.eta * (G2 + k2 * detail::log_e_over(1.0 / in.delta)) * in.T +
            in.eta * k2 * std::pow(in.T / in.delta, 2.0 / in.p));
  }
  return in.C * detail::log_e_over(in.T) / std::sqrt(in.T) *
         (in.breg0 / in.eta + in.eta * (G2 + k2 * std::pow(1.0 / in.delta, 2.0 / in.p)));
}

// Optimally tuned constant-step bound split into its sub-Gaussian addend and
// its heavy-tail addend.
struct TunedForm {
  double total;
  double subgaussian;
  double heavy_tail;
};

inline TunedForm tuned_eta_forms(Regime r, const TailBoundInputs& in) {
  detail::check_common(in);
  const double root_b = std::sqrt(in.breg0);
  const double scale = r == Regime::weibull ? in.nu : in.kappa;
  if (r == Regime::poly) detail::check_poly(in);
  const double light =
      root_b * std::sqrt((in.G * in.G + scale * scale * detail::log_e_over(1.0 / in.delta)) / in.T);
  const double heavy = r == Regime::weibull
                           ? root_b * scale * std::pow(detail::log_e_over(in.T / in.delta), in.theta) / in.T
                           : root_b * scale * std::pow(1.0 / in.delta, 1.0 / in.p) / std::pow(in.T, 1.0 - 1.0 / in.p);
  return {light + heavy, light, heavy};
}

// First integer horizon in [1, t_max] at which the sub-Gaussian addend is at
// least the heavy-tail addend; nullopt if none.
inline std::optional<std::size_t> crossover_horizon(Regime r, TailBoundInputs in, std::size_t t_max) {
  for (std::size_t T = 1; T <= t_max; ++T) {
    in.T = double(T);
    const TunedForm f = tuned_eta_forms(r, in);
    if (f.subgaussian >= f.heavy_tail) return T;
  }
  return std::nullopt;
}

// Last iterate, generic form given Xi1(delta/3) and Xi2(delta/3).
inline double last_generic_bound(double xi1, double xi2, const TailBoundInputs& in) {
  detail::check_common(in);
  const double log4T = std::log(4.0 * in.T);
  return 35.0 / std::sqrt(in.T) *
         (2.0 * xi1 + std::numbers::sqrt2 * in.eta * in.G * in.G * log4T +
          9.0 * std::numbers::sqrt2 * in.eta * (xi2 + 2.0 * in.sigma2 * log4T) * std::log(3.0 / in.delta));
}

// Last iterate, inverse-sqrt steps.
inline double last_iterate_bound(Regime r, const TailBoundInputs& in) {
  detail::check_common(in);
  const double G2 = in.G * in.G;
  const double L = detail::log_e_over(1.0 / in.delta);
  double noise = 0.0;
  if (r == Regime::weibull) {
    detail::check_weibull(in);
    noise = in.nu * in.nu * std::pow(L, 2.0 * in.theta + 1.0);
  } else {
    detail::check_poly(in);
    noise = in.kappa * in.kappa * std::pow(1.0 / in.delta, 2.0 / in.p) * L;
  }
  return in.C * detail::log_e_over(in.T) / std::sqrt(in.T) * (in.breg0 / in.eta + in.eta * (G2 + noise));
}

// Average iterate on a domain with sqrt(B) <= D, inverse-sqrt steps.
inline double bounded_domain_bound(Regime r, const TailBoundInputs& in) {
  detail::check_common(in);
  if (!in.D) throw std::invalid_argument("bounded-domain bound: D is required");
  const double D = *in.D;
  if (!(D >= 0.0)) throw std::invalid_argument("bounded-domain bound: D must be >= 0");
  const double L = detail::log_e_over(1.0 / in.delta);
  const double rootT = std::sqrt(in.T);
  double tail = 0.0;
  double scale = 0.0;
  if (r == Regime::weibull) {
    detail::check_weibull(in);
    scale = in.nu;
    tail = L + std::pow(L, 2.0 * in.theta) / rootT + std::pow(detail::log_e_over(in.T / in.delta), 2.0 * in.theta) / in.T;
  } else {
    detail::check_poly(in);
    scale = in.kappa;
    tail = L + std::pow(1.0 / in.delta, 2.0 / in.p) / rootT;
  }
  return in.C / rootT * (D * D / in.eta + in.eta * in.G * in.G + in.eta * scale * scale * tail);
}

}  // namespace mirrortail::bounds

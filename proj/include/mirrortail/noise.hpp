#pragma once

#include "mirrortail/geometry.hpp"
#include "mirrortail/rng.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mirrortail {

enum class NoiseClass { gaussian, sym_weibull, sym_poly };

inline std::string_view to_string(NoiseClass c) {
  switch (c) {
    case NoiseClass::gaussian: return "gaussian";
    case NoiseClass::sym_weibull: return "sym-weibull";
    case NoiseClass::sym_poly: return "sym-poly";
  }
  return "?";
}

// Zero-mean noise xi = s * W * u: a Rademacher sign s, a nonnegative
// magnitude W scaled so that E W^2 equals the target, and a direction u
// uniform on the dual-norm unit sphere (u = 1 when d = 1). Hence
// |xi|_* = W and every tail certificate of W transfers to |xi|_*.
struct NoiseSpec {
  NoiseClass cls = NoiseClass::gaussian;
  double theta = 1.0;          // sym-weibull: W = lambda * Exp(1)^theta
  double p = 5.0;              // sym-poly: moment order certified finite
  double second_moment = 1.0;  // E |xi|_*^2
  Eigen::Index dim = 1;
  Norm dual = Norm::l2;

  static NoiseSpec gaussian(double second_moment = 1.0, Eigen::Index d = 1, Norm dual = Norm::l2) {
    return checked({NoiseClass::gaussian, 0.5, 0.0, second_moment, d, dual});
  }
  static NoiseSpec weibull(double theta, double second_moment = 1.0, Eigen::Index d = 1, Norm dual = Norm::l2) {
    return checked({NoiseClass::sym_weibull, theta, 0.0, second_moment, d, dual});
  }
  static NoiseSpec poly(double p, double second_moment = 1.0, Eigen::Index d = 1, Norm dual = Norm::l2) {
    return checked({NoiseClass::sym_poly, 0.0, p, second_moment, d, dual});
  }

  void validate() const {
    if (!(second_moment >= 0.0) || !std::isfinite(second_moment))
      throw std::invalid_argument("noise: second moment must be >= 0");
    if (dim < 1) throw std::invalid_argument("noise: dimension must be >= 1");
    if (dual == Norm::l1) throw std::invalid_argument("noise: l1 dual norm is not supported");
    if (cls == NoiseClass::sym_weibull && !(theta >= 1.0))
      throw std::invalid_argument("noise: sym-weibull needs theta >= 1");
    if (cls == NoiseClass::sym_poly && !(p > 4.0)) throw std::invalid_argument("noise: sym-poly needs p > 4");
  }

 private:
  static NoiseSpec checked(NoiseSpec s) {
    s.validate();
    return s;
  }
};

// Pareto index used for sym-poly magnitudes; keeps the p-th moment finite.
inline double pareto_index(double p) { return p + 1.0; }

inline constexpr double kMaxWeibullTheta = 150.0;

// Scale of the magnitude law giving E W^2 = second_moment:
// gaussian -> standard deviation, sym-weibull -> lambda, sym-poly -> Pareto x_m.
inline double unit_variance_scale(const NoiseSpec& spec) {
  const double target = spec.second_moment;
  switch (spec.cls) {
    case NoiseClass::gaussian: return std::sqrt(target);
    case NoiseClass::sym_weibull: {
      if (spec.theta > kMaxWeibullTheta) throw std::range_error("unit_variance_scale: Gamma(1 + 2 theta) overflows");
      // E (lambda E^theta)^2 = lambda^2 Gamma(1 + 2 theta)
      return std::sqrt(target) * std::exp(-0.5 * std::lgamma(1.0 + 2.0 * spec.theta));
    }
    case NoiseClass::sym_poly: {
      const double a = pareto_index(spec.p);
      // E W^2 = a x_m^2 / (a - 2)
      return std::sqrt(target * (a - 2.0) / a);
    }
  }
  return 0.0;
}

struct TailParams {
  NoiseClass cls;
  double theta = 0.0;  // sub-Weibull shape (0.5 for gaussian)
  double nu = 0.0;     // sub-Weibull scale: E exp((|X|/nu)^(1/theta)) = 2
  double p = 0.0;      // polynomial moment order
  double kappa = 0.0;  // (E |X|^p)^(1/p)
  double sigma2 = 0.0;
};

// Certified tail constants of |xi|_*. The sub-Weibull scales solve the
// defining equation with equality:
//   N(0, s^2):           E exp(X^2/nu^2) = (1 - 2 s^2/nu^2)^(-1/2) = 2  ->  nu = s sqrt(8/3)
//   lambda Exp(1)^theta: E exp(Exp(1) (lambda/nu)^(1/theta)) = 2       ->  nu = lambda 2^theta
//   Pareto(x_m, a):      E W^p = a x_m^p / (a - p)                    ->  kappa
inline TailParams tail_params(const NoiseSpec& spec) {
  spec.validate();
  TailParams t{spec.cls};
  t.sigma2 = spec.second_moment;
  const double scale = unit_variance_scale(spec);
  switch (spec.cls) {
    case NoiseClass::gaussian:
      t.theta = 0.5;
      t.nu = scale * std::sqrt(8.0 / 3.0);
      break;
    case NoiseClass::sym_weibull:
      t.theta = spec.theta;
      t.nu = scale * std::pow(2.0, spec.theta);
      break;
    case NoiseClass::sym_poly: {
      const double a = pareto_index(spec.p);
      t.p = spec.p;
      t.kappa = scale * std::pow(a / (a - spec.p), 1.0 / spec.p);
      break;
    }
  }
  return t;
}

// Magnitude samplers for the three laws.
inline double sample_weibull_magnitude(double lambda, double theta, CounterRng& rng) {
  return lambda * std::pow(rng.exponential(), theta);
}

inline double sample_pareto_magnitude(double x_m, double index, CounterRng& rng) {
  return x_m * std::pow(rng.uniform(), -1.0 / index);
}

// Uniform direction on the unit sphere of the given norm.
inline Point sample_direction(Eigen::Index d, Norm dual, CounterRng& rng) {
  Point u(d);
  if (d == 1) {
    u[0] = 1.0;
    return u;
  }
  if (dual == Norm::linf) {
    // Faces of the cube have equal area: pick one, fill the rest uniformly.
    const auto face = static_cast<Eigen::Index>(rng.uniform() * double(d));
    for (Eigen::Index i = 0; i < d; ++i) u[i] = 2.0 * rng.uniform() - 1.0;
    u[std::min(face, d - 1)] = rng.sign();
    return u;
  }
  double n = 0.0;
  do {
    for (Eigen::Index i = 0; i < d; ++i) u[i] = rng.normal();
    n = u.norm();
  } while (n == 0.0);
  return u / n;
}

inline double sample_scalar_noise(const NoiseSpec& spec, double scale, CounterRng& rng) {
  switch (spec.cls) {
    case NoiseClass::gaussian: return scale * rng.normal();
    case NoiseClass::sym_weibull: return rng.sign() * sample_weibull_magnitude(scale, spec.theta, rng);
    case NoiseClass::sym_poly: return rng.sign() * sample_pareto_magnitude(scale, pareto_index(spec.p), rng);
  }
  return 0.0;
}

inline Point sample_noise(const NoiseSpec& spec, CounterRng& rng) {
  if (spec.second_moment == 0.0) return Point::Zero(spec.dim);
  const double s = sample_scalar_noise(spec, unit_variance_scale(spec), rng);
  return s * sample_direction(spec.dim, spec.dual, rng);
}

// E <xi, w>^2 for the law above: sigma^2 * w' E[u u'] w with
// E[u u'] = I/d (l2 sphere) or (1/d + (d-1)/(3d)) I (cube surface).
inline double noise_inner_second_moment(const NoiseSpec& spec, const Point& w) {
  const double d = static_cast<double>(spec.dim);
  double c = 1.0;
  if (spec.dim > 1) c = spec.dual == Norm::linf ? 1.0 / d + (d - 1.0) / (3.0 * d) : 1.0 / d;
  return spec.second_moment * c * w.squaredNorm();
}

}  // namespace mirrortail

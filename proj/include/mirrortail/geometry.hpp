#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mirrortail {

using Point = Eigen::VectorXd;

enum class Norm { l1, l2, linf };

inline double norm(const Point& v, Norm n) {
  switch (n) {
    case Norm::l1: return v.lpNorm<1>();
    case Norm::l2: return v.norm();
    case Norm::linf: return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
  }
  return 0.0;
}

inline std::string_view to_string(Norm n) {
  switch (n) {
    case Norm::l1: return "l1";
    case Norm::l2: return "l2";
    case Norm::linf: return "linf";
  }
  return "?";
}

inline bool all_finite(const Point& v) { return v.allFinite(); }

inline void require_same_dim(const Point& a, const Point& b, const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
}

// Closed convex feasible set X.
struct Domain {
  enum class Kind { unconstrained, l2_ball, box, simplex };

  Kind kind = Kind::unconstrained;
  double radius = 1.0;  // l2_ball
  double lo = 0.0;      // box, applied to every coordinate
  double hi = 1.0;

  static Domain unconstrained() { return {}; }
  static Domain ball(double r) {
    if (!(r > 0.0)) throw std::invalid_argument("l2-ball radius must be positive");
    return {Kind::l2_ball, r, 0.0, 0.0};
  }
  static Domain box(double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("box requires lo < hi");
    return {Kind::box, 0.0, lo, hi};
  }
  static Domain simplex() { return {Kind::simplex, 0.0, 0.0, 0.0}; }

  bool bounded() const { return kind != Kind::unconstrained; }

  bool contains(const Point& x, double tol = 1e-12) const {
    if (!all_finite(x)) return false;
    switch (kind) {
      case Kind::unconstrained: return true;
      case Kind::l2_ball: return x.norm() <= radius * (1.0 + tol) + tol;
      case Kind::box: return (x.array() >= lo - tol).all() && (x.array() <= hi + tol).all();
      case Kind::simplex:
        return (x.array() >= -tol).all() && std::abs(x.sum() - 1.0) <= tol * std::max<double>(1.0, double(x.size()));
    }
    return false;
  }

  // Euclidean projection onto the set.
  Point project(Point y) const {
    switch (kind) {
      case Kind::unconstrained: return y;
      case Kind::l2_ball: {
        const double n = y.norm();
        if (n > radius) y *= radius / n;
        return y;
      }
      case Kind::box: return y.cwiseMax(lo).cwiseMin(hi);
      case Kind::simplex: return project_simplex(std::move(y));
    }
    return y;
  }

 private:
  // Sort-based projection onto {x >= 0, sum x = 1}.
  static Point project_simplex(Point y) {
    std::vector<double> u(y.data(), y.data() + y.size());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0;
    double shift = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      cumulative += u[i];
      const double candidate = (cumulative - 1.0) / double(i + 1);
      if (u[i] - candidate > 0.0) shift = candidate;
    }
    return (y.array() - shift).cwiseMax(0.0).matrix();
  }
};

inline std::string_view to_string(Domain::Kind k) {
  switch (k) {
    case Domain::Kind::unconstrained: return "unconstrained";
    case Domain::Kind::l2_ball: return "l2-ball";
    case Domain::Kind::box: return "box";
    case Domain::Kind::simplex: return "simplex";
  }
  return "?";
}

enum class Regularizer { euclidean, neg_entropy };

inline std::string_view to_string(Regularizer r) {
  return r == Regularizer::euclidean ? "euclidean" : "neg-entropy";
}

// Regularizer + domain + norm pair. The regularizer is 1-strongly convex
// w.r.t. the primal norm on the domain: psi = 0.5|x|_2^2 w.r.t. l2, and
// psi = sum x_i ln x_i on the simplex w.r.t. l1 (Pinsker).
struct MirrorSetup {
  Regularizer regularizer = Regularizer::euclidean;
  Domain domain;
  Norm primal = Norm::l2;
  Norm dual = Norm::l2;

  static MirrorSetup euclidean(Domain d = Domain::unconstrained()) {
    return {Regularizer::euclidean, d, Norm::l2, Norm::l2};
  }
  static MirrorSetup entropic_simplex() {
    return {Regularizer::neg_entropy, Domain::simplex(), Norm::l1, Norm::linf};
  }

  void validate() const {
    if (regularizer == Regularizer::neg_entropy) {
      if (domain.kind != Domain::Kind::simplex || primal != Norm::l1 || dual != Norm::linf)
        throw std::invalid_argument("neg-entropy pairs only with the simplex and (l1, linf) norms");
    } else if (primal != Norm::l2 || dual != Norm::l2) {
      throw std::invalid_argument("euclidean regularizer pairs only with (l2, l2) norms");
    }
  }
};

// Smallest coordinate kept on the simplex so iterates stay in the interior
// of dom(psi).
inline constexpr double kSimplexFloor = 1e-300;

inline double regularizer_value(const MirrorSetup& setup, const Point& x) {
  if (setup.regularizer == Regularizer::euclidean) return 0.5 * x.squaredNorm();
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] < 0.0) throw std::domain_error("neg-entropy: negative coordinate");
    if (x[i] > 0.0) s += x[i] * std::log(x[i]);
  }
  return s;
}

// B(x, y) = psi(x) - psi(y) - <x - y, grad psi(y)>.
inline double bregman(const MirrorSetup& setup, const Point& x, const Point& y) {
  require_same_dim(x, y, "bregman");
  if (setup.regularizer == Regularizer::euclidean) return 0.5 * (x - y).squaredNorm();

  double b = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0.0)) throw std::domain_error("neg-entropy bregman: y must be strictly positive");
    if (x[i] < 0.0) throw std::domain_error("neg-entropy bregman: x outside the domain");
    // Generalized KL; equals sum x ln(x/y) when both lie on the simplex.
    if (x[i] > 0.0) b += x[i] * (std::log(x[i]) - std::log(y[i]));
    b += y[i] - x[i];
  }
  return std::max(b, 0.0);
}

// Exact argmin over X of <ghat, x> + B(x, x_t) / eta.
inline Point mirror_step(const MirrorSetup& setup, const Point& x_t, const Point& ghat, double eta) {
  require_same_dim(x_t, ghat, "mirror_step");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("mirror_step: eta must be positive");

  if (setup.regularizer == Regularizer::euclidean) {
    return setup.domain.project(x_t - eta * ghat);
  }

  // Multiplicative update in log space with a max shift.
  const Eigen::Index d = x_t.size();
  Eigen::ArrayXd logits(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(x_t[i] > 0.0)) throw std::domain_error("mirror_step: neg-entropy iterate must be interior");
    logits[i] = std::log(x_t[i]) - eta * ghat[i];
  }
  if (!logits.allFinite()) throw std::domain_error("mirror_step: non-finite exponent");
  const Eigen::ArrayXd w = (logits - logits.maxCoeff()).exp();
  Point next = (w / w.sum()).matrix();
  next = next.cwiseMax(kSimplexFloor);
  return next / next.sum();
}

struct StepSchedule {
  enum class Kind { constant, inverse_sqrt };

  Kind kind = Kind::constant;
  double eta = 1.0;

  static StepSchedule constant(double eta) { return checked({Kind::constant, eta}); }
  static StepSchedule inverse_sqrt(double eta) { return checked({Kind::inverse_sqrt, eta}); }

 private:
  static StepSchedule checked(StepSchedule s) {
    if (!(s.eta > 0.0) || !std::isfinite(s.eta)) throw std::invalid_argument("step schedule: eta must be positive");
    return s;
  }
};

inline std::string_view to_string(StepSchedule::Kind k) {
  return k == StepSchedule::Kind::constant ? "constant" : "inverse-sqrt";
}

inline double step_size(const StepSchedule& schedule, std::size_t t) {
  if (t == 0) throw std::invalid_argument("step_size: t starts at 1");
  if (schedule.kind == StepSchedule::Kind::constant) return schedule.eta;
  return schedule.eta / std::sqrt(static_cast<double>(t));
}

}  // namespace mirrortail

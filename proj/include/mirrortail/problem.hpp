#pragma once

#include "mirrortail/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string_view>

namespace mirrortail {

enum class Objective {
  abs_sum,               // f(x) = sum_i |x_i - c_i|
  piecewise_linear_max,  // f(x) = max_i |x_i - c_i|, pieces +-e_i
  quadratic              // f(x) = 0.5 |x - c|_2^2, bounded domains only
};

inline std::string_view to_string(Objective o) {
  switch (o) {
    case Objective::abs_sum: return "abs-sum";
    case Objective::piecewise_linear_max: return "piecewise-linear-max";
    case Objective::quadratic: return "quadratic";
  }
  return "?";
}

// Convex objective with a known minimizer c (so f* = 0) and a Lipschitz
// constant G valid in the dual norm of the setup it was built for.
class OracleProblem {
 public:
  OracleProblem(Objective objective, Point center, const MirrorSetup& setup)
      : objective_(objective), center_(std::move(center)) {
    setup.validate();
    if (center_.size() == 0 || !all_finite(center_)) throw std::invalid_argument("problem: bad minimizer");
    if (!setup.domain.contains(center_)) throw std::invalid_argument("problem: minimizer outside the domain");
    lipschitz_ = lipschitz_bound(setup);
  }

  Objective objective() const { return objective_; }
  const Point& minimizer() const { return center_; }
  double optimal_value() const { return 0.0; }
  double lipschitz() const { return lipschitz_; }
  Eigen::Index dim() const { return center_.size(); }

  double value(const Point& x) const {
    require_same_dim(x, center_, "objective");
    switch (objective_) {
      case Objective::abs_sum: return (x - center_).lpNorm<1>();
      case Objective::piecewise_linear_max: return (x - center_).lpNorm<Eigen::Infinity>();
      case Objective::quadratic: return 0.5 * (x - center_).squaredNorm();
    }
    return 0.0;
  }

  // The subgradient of |.| at 0 is taken as 0, so noise-free runs that land
  // on the optimum stay there.
  Point subgradient(const Point& x) const {
    require_same_dim(x, center_, "subgradient");
    const Point r = x - center_;
    switch (objective_) {
      case Objective::abs_sum: return r.unaryExpr([](double v) { return double((v > 0) - (v < 0)); });
      case Objective::piecewise_linear_max: {
        Point g = Point::Zero(r.size());
        Eigen::Index arg = 0;
        const double m = r.cwiseAbs().maxCoeff(&arg);
        if (m > 0.0) g[arg] = r[arg] > 0 ? 1.0 : -1.0;
        return g;
      }
      case Objective::quadratic: return r;
    }
    return r;
  }

 private:
  double lipschitz_bound(const MirrorSetup& setup) const {
    const double d = static_cast<double>(center_.size());
    switch (objective_) {
      case Objective::abs_sum: return setup.dual == Norm::linf ? 1.0 : std::sqrt(d);
      case Objective::piecewise_linear_max: return 1.0;
      case Objective::quadratic: break;
    }
    const Domain& dom = setup.domain;
    switch (dom.kind) {
      case Domain::Kind::unconstrained:
        throw std::invalid_argument("quadratic objective needs a bounded domain to be Lipschitz");
      case Domain::Kind::l2_ball: return dom.radius + center_.norm();
      case Domain::Kind::box: {
        const Point far = (center_.array() - dom.lo).abs().max((center_.array() - dom.hi).abs()).matrix();
        return setup.dual == Norm::linf ? far.maxCoeff() : far.norm();
      }
      case Domain::Kind::simplex: return setup.dual == Norm::linf ? 1.0 : std::sqrt(2.0);
    }
    return 0.0;
  }

  Objective objective_;
  Point center_;
  double lipschitz_ = 0.0;
};

}  // namespace mirrortail

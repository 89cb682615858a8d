#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace dda {

/// Feasible set of the problem. The l1 ball is the only bounded set in use;
/// the unconstrained case exists for the unconstrained-rate preset.
struct ConstraintSet {
  enum class Kind { l1_ball, unconstrained };
  Kind kind = Kind::unconstrained;
  double radius = 0.0;
  int dim = 0;

  static ConstraintSet l1_ball(double R, int m) {
    if (!(R > 0)) throw std::invalid_argument("l1 ball radius must be positive");
    return {Kind::l1_ball, R, m};
  }
  static ConstraintSet unconstrained(int m) {
    return {Kind::unconstrained, 0.0, m};
  }

  /// Euclidean diameter; 2R for the l1 ball (attained on an axis).
  double diameter() const {
    if (kind != Kind::l1_ball)
      throw std::logic_error("diameter undefined for unbounded set");
    return 2.0 * radius;
  }

  bool contains(const Eigen::VectorXd& x, double tol = 1e-12) const {
    if (kind == Kind::unconstrained) return true;
    return x.lpNorm<1>() <= radius + tol;
  }
};

/// Euclidean projection onto {x : ||x||_1 <= R}. Exact sort-and-threshold
/// scheme, O(m log m).
inline Eigen::VectorXd l1_ball_project(const Eigen::VectorXd& v, double R) {
  if (!(R > 0)) throw std::invalid_argument("radius must be positive");
  if (!v.allFinite()) throw std::invalid_argument("non-finite input");
  const double norm1 = v.lpNorm<1>();
  if (norm1 <= R) return v;

  const Eigen::Index m = v.size();
  std::vector<double> u(m);
  for (Eigen::Index i = 0; i < m; ++i) u[i] = std::abs(v[i]);
  std::sort(u.begin(), u.end(), std::greater<double>());

  // Largest k with u_k > (sum of top k - R)/k gives the threshold theta.
  double cum = 0.0, theta = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    cum += u[k];
    double cand = (cum - R) / static_cast<double>(k + 1);
    if (k + 1 == m || u[k + 1] <= cand) {
      theta = cand;
      break;
    }
  }

  Eigen::VectorXd out(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    double mag = std::abs(v[i]) - theta;
    out[i] = mag > 0 ? (v[i] > 0 ? mag : -mag) : 0.0;
  }
  return out;
}

inline Eigen::VectorXd project(const ConstraintSet& set, const Eigen::VectorXd& v) {
  if (set.kind == ConstraintSet::Kind::unconstrained) return v;
  return l1_ball_project(v, set.radius);
}

/// Reference function d(x) = ||x - center||^2 / 2 anchored at a feasible
/// center: 1-strongly convex, d(center) = 0, argmin over the set is the
/// center itself.
struct ProxSetup {
  Eigen::VectorXd center;
  ConstraintSet constraint;

  double d(const Eigen::VectorXd& x) const {
    return 0.5 * (x - center).squaredNorm();
  }
};

inline ProxSetup make_prox(const Eigen::VectorXd& x0, const ConstraintSet& c) {
  if (x0.size() != c.dim) throw std::invalid_argument("center dimension mismatch");
  if (!c.contains(x0)) throw std::invalid_argument("infeasible prox center");
  return {x0, c};
}

/// The conjugate map g -> argmax_{x in X} { <g,x> - d(x) }. For the
/// quadratic d this is the projection of center + g onto X.
inline Eigen::VectorXd conjugate_map(const ProxSetup& setup, const Eigen::VectorXd& g) {
  if (g.size() != setup.center.size())
    throw std::invalid_argument("dual point dimension mismatch");
  return project(setup.constraint, setup.center + g);
}

}  // namespace dda

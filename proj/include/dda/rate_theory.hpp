#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "dda/problem.hpp"
#include "dda/prox.hpp"
#include "dda/topology.hpp"

namespace dda {

/// The 2x2 error-propagation matrix governing the coupled consensus errors
/// of the dual accumulator and gradient tracker:
///   [ beta        beta          ]
///   [ aL(beta+1)  beta(aL+1)    ]
inline Eigen::Matrix2d consensus_matrix_M(double a, double L, double beta) {
  Eigen::Matrix2d M;
  M << beta, beta, a * L * (beta + 1.0), beta * (a * L + 1.0);
  return M;
}

/// Spectral radius of the matrix above, in closed form:
/// rho = (xi1 + xi2)/2 with xi1 = beta(2+aL),
/// xi2 = sqrt(a^2 beta^2 L^2 + 4 a L beta (beta+1)).
inline double rho_M(double a, double L, double beta) {
  if (!(a > 0) || !(L > 0) || beta < 0 || beta >= 1)
    throw std::invalid_argument("rho_M: need a>0, L>0, beta in [0,1)");
  const double aL = a * L;
  const double xi1 = beta * (2.0 + aL);
  const double xi2 = std::sqrt(aL * aL * beta * beta + 4.0 * aL * beta * (beta + 1.0));
  return 0.5 * (xi1 + xi2);
}

struct StepVerdict {
  bool admissible = false;
  double margin = 0.0;          // 1/a minus the exact requirement
  double explicit_max_step = 0; // beta-only sufficient bound on a
  double rho = 0.0;
};

/// Supremum of the admissible steps for a given (L, beta), found by
/// bisection. The margin of the admissibility condition is strictly
/// decreasing in a (1/a falls, the requirement grows), so the admissible
/// set is an interval (0, a*) and any a below the returned value passes
/// the exact check. A closed-form sufficient bound exists for sparse
/// spectra (beta below (3-sqrt(5))/2) but degrades to vacuous as beta
/// grows, so the bisected value is reported uniformly.
inline double dda_explicit_max_step(double L, double beta) {
  if (!(L > 0) || beta < 0 || beta >= 1)
    throw std::invalid_argument("need L>0, beta in [0,1)");
  auto admissible = [&](double a) {
    const double rho = rho_M(a, L, beta);
    if (rho >= 1.0) return false;
    const double req =
        2.0 * L * std::max(beta / ((1.0 - beta) * (1.0 - beta)),
                           1.0 + 8.0 / (9.0 * (1.0 - rho * rho)));
    return 1.0 / a > req;
  };
  double lo = 0.0, hi = 0.5 / L;  // 1/a > 2L is necessary
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (admissible(mid) ? lo : hi) = mid;
  }
  return lo;
}

/// Exact admissibility: 1/a > 2L max{ beta/(1-beta)^2,
/// 1 + 8/(9(1 - rho(M)^2)) }. rho depends on a, so this is evaluated at
/// the given a directly.
inline StepVerdict dda_stepsize_admissible(double a, double L, double beta) {
  if (!(a > 0) || !(L > 0) || beta < 0 || beta >= 1)
    throw std::invalid_argument("need a>0, L>0, beta in [0,1)");
  StepVerdict v;
  v.rho = rho_M(a, L, beta);
  v.explicit_max_step = dda_explicit_max_step(L, beta);
  if (v.rho >= 1.0) {
    v.admissible = false;
    v.margin = -std::numeric_limits<double>::infinity();
    return v;
  }
  const double req =
      2.0 * L * std::max(beta / ((1.0 - beta) * (1.0 - beta)),
                         1.0 + 8.0 / (9.0 * (1.0 - v.rho * v.rho)));
  v.margin = 1.0 / a - req;
  v.admissible = v.margin > 0;
  return v;
}

inline bool adda_stepsize_admissible(double a, double L) {
  if (!(a > 0)) throw std::invalid_argument("step must be positive");
  if (!(L > 0)) throw std::invalid_argument("L must be positive");
  return a <= 1.0 / (6.0 * L);
}

/// Weights of the accelerated scheme: a_t = a(t+1), A_t = a t(t+3)/2.
inline std::pair<double, double> adda_weights(double a, long t) {
  if (!(a > 0) || t < 1) throw std::invalid_argument("need a>0, t>=1");
  return {a * (t + 1), a * static_cast<double>(t) * (t + 3) / 2.0};
}

struct RateConstants {
  double pi_sq = 0.0;   // gradient variance at the start point
  double rho = 0.0;     // rho(M)
  double gamma = 0.0;
  double C = 0.0;       // objective bound: f(y~) - f* <= C/(at)
  double D = 0.0;       // consensus bound: ||x~_i - y~||^2 <= D/t
  double G = 0.0;       // set diameter
  double C_p = 0.0;
  double C_g = 0.0;
  double t2_slope = 0.0;  // accelerated objective bound is (d(x*) + t * t2_slope)/A_t
  double d_xstar = 0.0;
  double unconstrained_rhs = 0.0;  // t * (f(x~_i) - f*) bound when X is all of R^m
};

/// All rate-bound constants for a given instance, mixing
/// matrix, prox anchor and step. Throws if gamma <= 0, which signals a
/// violated step-size condition.
inline RateConstants compute_constants(const DecentralizedProblem& prob,
                                       const MixingMatrix& mixing,
                                       const ProxSetup& prox, double a,
                                       const Eigen::VectorXd& x_star) {
  RateConstants k;
  const double L = prob.L;
  const double beta = mixing.beta;
  const int n = prob.n;

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(prob.m);
  std::vector<Eigen::VectorXd> g(n);
  for (int i = 1; i <= n; ++i) {
    g[i - 1] = grad_i(prob, i, prox.center);
    mean += g[i - 1];
  }
  mean /= n;
  for (int i = 0; i < n; ++i) k.pi_sq += (g[i] - mean).squaredNorm();

  k.rho = rho_M(a, L, beta);
  const double one_m_rho2 = 1.0 - k.rho * k.rho;
  k.gamma = 0.5 - a * L - 8.0 * a * L / (9.0 * one_m_rho2);
  if (!(k.gamma > 0))
    throw std::domain_error("gamma <= 0: step-size condition violated");

  k.d_xstar = prox.d(x_star);
  k.C = k.d_xstar + 8.0 * a * k.pi_sq / (9.0 * n * L * one_m_rho2);
  k.D = 8.0 * n * k.C / (9.0 * k.gamma * (1.0 - k.rho) * (1.0 - k.rho)) +
        8.0 * k.pi_sq / (9.0 * L * L * one_m_rho2);

  if (prob.constraint.kind == ConstraintSet::Kind::l1_ball) {
    k.G = prob.constraint.diameter();
    const double ceil_term = std::ceil(3.0 / (1.0 - beta));
    const double sqn = std::sqrt(static_cast<double>(n));
    k.C_p = ceil_term * sqn * k.G;
    k.C_g = 2.0 * L * ceil_term * (sqn * k.G + k.C_p) / (1.0 - beta);
    k.t2_slope = 2.0 * k.G * (L * k.C_p + k.C_g) / sqn + 6.0 * L * k.C_p * k.C_p / n;
  }

  k.unconstrained_rhs = n / (2.0 * a) * x_star.squaredNorm() +
                        8.0 * k.pi_sq / (3.0 * L * one_m_rho2);
  return k;
}

}  // namespace dda

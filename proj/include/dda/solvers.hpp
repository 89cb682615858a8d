#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dda/problem.hpp"
#include "dda/prox.hpp"
#include "dda/rate_theory.hpp"
#include "dda/topology.hpp"

namespace dda {

/// Thrown when an iterate goes non-finite or the objective explodes.
struct SolverDivergence : std::runtime_error {
  long round;
  explicit SolverDivergence(long t)
      : std::runtime_error("solver diverged at round " + std::to_string(t)),
        round(t) {}
};

namespace detail {

inline void check_finite(const Eigen::MatrixXd& m, long t) {
  if (!m.allFinite()) throw SolverDivergence(t);
}

// Columns are agents; one communication round is X <- X P^T.
inline Eigen::MatrixXd mix_cols(const Eigen::MatrixXd& X, const MixingMatrix& P) {
  return X * P.weights.transpose();
}

inline Eigen::MatrixXd stack_gradients(const DecentralizedProblem& prob,
                                       const Eigen::MatrixXd& X) {
  Eigen::MatrixXd G(prob.m, prob.n);
  for (int i = 0; i < prob.n; ++i) G.col(i) = grad_i(prob, i + 1, X.col(i));
  return G;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// DDA: constant-step dual averaging with a second-order dynamic average
// consensus estimate of the accumulated dual variable.
// ---------------------------------------------------------------------------

struct DdaState {
  Eigen::MatrixXd x, z, s;  // m x n, agent per column
  Eigen::MatrixXd grad;     // gradients at the current x
  Eigen::MatrixXd x_run_sum;
  Eigen::VectorXd y;        // auxiliary iterate driven by the mean dual
  Eigen::VectorXd y_run_sum;
  long t = 0;
};

inline DdaState dda_init(const DecentralizedProblem& prob, const ProxSetup& prox) {
  DdaState st;
  st.x = prox.center.replicate(1, prob.n);
  st.z = Eigen::MatrixXd::Zero(prob.m, prob.n);
  st.grad = detail::stack_gradients(prob, st.x);
  st.s = st.grad;
  st.x_run_sum = Eigen::MatrixXd::Zero(prob.m, prob.n);
  st.y = prox.center;
  st.y_run_sum = Eigen::VectorXd::Zero(prob.m);
  return st;
}

/// One synchronous round: mix the (z, s) pair, map the new dual estimate to
/// a primal point, then refresh the gradient tracker with the new gradients.
inline void dda_round(DdaState& st, const DecentralizedProblem& prob,
                      const MixingMatrix& mixing, const ProxSetup& prox, double a) {
  const long t = st.t + 1;
  st.z = detail::mix_cols(st.z + st.s, mixing);
  Eigen::MatrixXd x_new(prob.m, prob.n);
  for (int i = 0; i < prob.n; ++i)
    x_new.col(i) = conjugate_map(prox, -a * st.z.col(i));
  Eigen::MatrixXd grad_new = detail::stack_gradients(prob, x_new);
  st.s = detail::mix_cols(st.s, mixing) + (grad_new - st.grad);
  st.x = std::move(x_new);
  st.grad = std::move(grad_new);
  st.y = conjugate_map(prox, -a * st.z.rowwise().mean());
  detail::check_finite(st.x, t);
  detail::check_finite(st.s, t);
  if (objective(prob, st.x.col(0)) > 1e12) throw SolverDivergence(t);
  st.x_run_sum += st.x;
  st.y_run_sum += st.y;
  st.t = t;
}

// ---------------------------------------------------------------------------
// ADDA: extrapolated dual averaging; agents agree on gradients only.
// ---------------------------------------------------------------------------

struct AddaState {
  Eigen::MatrixXd u, v, w, w_prev;
  Eigen::MatrixXd q;        // gradient tracker
  Eigen::MatrixXd grad_u;   // gradients at the current u
  Eigen::MatrixXd dual;     // running sum of a_tau q^(tau)
  double a = 0.0, a_t = 0.0, A_t = 0.0;
  long t = 0;
};

inline AddaState adda_init(const DecentralizedProblem& prob, const ProxSetup& prox,
                           double a) {
  if (!(a > 0)) throw std::invalid_argument("step must be positive");
  AddaState st;
  st.a = a;
  st.t = 1;
  st.a_t = 2.0 * a;
  st.A_t = 2.0 * a;
  st.u = prox.center.replicate(1, prob.n);
  st.w_prev = st.u;
  st.grad_u = detail::stack_gradients(prob, st.u);
  st.q = st.grad_u;
  st.dual = st.a_t * st.q;
  st.w.resize(prob.m, prob.n);
  for (int i = 0; i < prob.n; ++i)
    st.w.col(i) = conjugate_map(prox, -st.dual.col(i));
  st.v = st.w;
  return st;
}

inline void adda_round(AddaState& st, const DecentralizedProblem& prob,
                       const MixingMatrix& mixing, const ProxSetup& prox) {
  const long t = st.t + 1;
  const double A_prev = st.A_t;
  st.a_t = st.a * (t + 1);
  st.A_t = A_prev + st.a_t;

  // One consensus application, shared by the u and v updates.
  Eigen::MatrixXd cons = detail::mix_cols(st.v, mixing);
  Eigen::MatrixXd u_new = (A_prev / st.A_t) * cons + (st.a_t / st.A_t) * st.w;
  Eigen::MatrixXd grad_new = detail::stack_gradients(prob, u_new);
  st.q = detail::mix_cols(st.q, mixing) + (grad_new - st.grad_u);
  st.dual += st.a_t * st.q;
  st.w_prev = st.w;
  for (int i = 0; i < prob.n; ++i)
    st.w.col(i) = conjugate_map(prox, -st.dual.col(i));
  st.v = (A_prev / st.A_t) * cons + (st.a_t / st.A_t) * st.w;
  st.u = std::move(u_new);
  st.grad_u = std::move(grad_new);
  detail::check_finite(st.v, t);
  detail::check_finite(st.q, t);
  st.t = t;
}

// ---------------------------------------------------------------------------
// Classic DDA baseline: first-order dual accumulation and a decaying step.
// ---------------------------------------------------------------------------

struct ClassicDdaState {
  Eigen::MatrixXd x, z;
  Eigen::MatrixXd x_run_sum;
  long t = 0;
};

inline ClassicDdaState classic_dda_init(const DecentralizedProblem& prob,
                                        const ProxSetup& prox) {
  ClassicDdaState st;
  st.x = prox.center.replicate(1, prob.n);
  st.z = Eigen::MatrixXd::Zero(prob.m, prob.n);
  st.x_run_sum = Eigen::MatrixXd::Zero(prob.m, prob.n);
  return st;
}

/// a_t defaults to a/sqrt(t); pass a custom value via `step_override`.
inline void classic_dda_round(ClassicDdaState& st, const DecentralizedProblem& prob,
                              const MixingMatrix& mixing, const ProxSetup& prox,
                              double a, double step_override = -1.0) {
  const long t = st.t + 1;
  const double a_t = step_override > 0 ? step_override : a / std::sqrt(double(t));
  st.z = detail::mix_cols(st.z, mixing) + detail::stack_gradients(prob, st.x);
  for (int i = 0; i < prob.n; ++i)
    st.x.col(i) = conjugate_map(prox, -a_t * st.z.col(i));
  detail::check_finite(st.x, t);
  st.x_run_sum += st.x;
  st.t = t;
}

// ---------------------------------------------------------------------------
// PG-EXTRA baseline.
// ---------------------------------------------------------------------------

struct PgExtraState {
  Eigen::MatrixXd x, x_prev, xhat;
  Eigen::MatrixXd grad, grad_prev;
  long t = 0;
};

inline PgExtraState pg_extra_init(const DecentralizedProblem& prob,
                                  const ProxSetup& prox) {
  PgExtraState st;
  st.x = prox.center.replicate(1, prob.n);
  st.x_prev = st.x;
  st.grad = detail::stack_gradients(prob, st.x);
  st.grad_prev = st.grad;
  return st;
}

/// First round uses the standard EXTRA bootstrap (a plain DGD step); the
/// recursion needs two past iterates afterwards.
inline void pg_extra_round(PgExtraState& st, const DecentralizedProblem& prob,
                           const MixingMatrix& mixing, double a) {
  const long t = st.t + 1;
  if (st.t == 0) {
    st.xhat = detail::mix_cols(st.x, mixing) - a * st.grad;
  } else {
    Eigen::MatrixXd ptilde_x =
        0.5 * (detail::mix_cols(st.x_prev, mixing) + st.x_prev);
    st.xhat = detail::mix_cols(st.x, mixing) + st.xhat - ptilde_x -
              a * (st.grad - st.grad_prev);
  }
  st.x_prev = st.x;
  st.grad_prev = st.grad;
  for (int i = 0; i < prob.n; ++i)
    st.x.col(i) = project(prob.constraint, st.xhat.col(i));
  st.grad = detail::stack_gradients(prob, st.x);
  detail::check_finite(st.x, t);
  st.t = t;
}

// ---------------------------------------------------------------------------
// APM baseline: accelerated penalty method.
// ---------------------------------------------------------------------------

struct ApmState {
  Eigen::MatrixXd x, x_prev;
  double theta_prev = 1.0;
  double beta0 = 0.0;
  long t = 0;
};

inline ApmState apm_init(const DecentralizedProblem& prob, const ProxSetup& prox,
                         const MixingMatrix& mixing, double L_param) {
  const double l2 = lambda2(mixing.weights);
  if (l2 >= 1.0 - 1e-12)
    throw std::invalid_argument("APM: lambda_2(P) = 1, penalty undefined");
  ApmState st;
  st.x = prox.center.replicate(1, prob.n);
  st.x_prev = st.x;
  st.beta0 = L_param / std::sqrt(1.0 - l2);
  return st;
}

inline void apm_round(ApmState& st, const DecentralizedProblem& prob,
                      const MixingMatrix& mixing, double L_param) {
  const long t = st.t + 1;
  // theta_k = 1/(k+1); the first round has no momentum.
  const double theta = st.t == 0 ? 1.0 : st.theta_prev / (1.0 + st.theta_prev);
  Eigen::MatrixXd y;
  if (st.t == 0) {
    y = st.x;
  } else {
    const double mom = theta * (1.0 - st.theta_prev) / st.theta_prev;
    y = st.x + mom * (st.x - st.x_prev);
  }
  // Laplacian-style neighbor difference: sum_j p_ij (y_i - y_j).
  Eigen::MatrixXd lap = y - detail::mix_cols(y, mixing);
  Eigen::MatrixXd s = detail::stack_gradients(prob, y) + (st.beta0 / theta) * lap;
  const double step = 1.0 / (L_param + st.beta0 / theta);
  st.x_prev = st.x;
  for (int i = 0; i < prob.n; ++i)
    st.x.col(i) = project(prob.constraint, (y.col(i) - step * s.col(i)).eval());
  detail::check_finite(st.x, t);
  st.theta_prev = theta;
  st.t = t;
}

// ---------------------------------------------------------------------------
// Centralized baselines.
// ---------------------------------------------------------------------------

struct CentralDaState {
  Eigen::VectorXd x, z;
  Eigen::VectorXd x_run_sum;
  long t = 0;
};

inline Eigen::VectorXd mean_gradient(const DecentralizedProblem& prob,
                                     const Eigen::VectorXd& x) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(prob.m);
  for (int i = 1; i <= prob.n; ++i) g += grad_i(prob, i, x);
  return g / prob.n;
}

inline CentralDaState central_da_init(const DecentralizedProblem& prob,
                                      const ProxSetup& prox) {
  CentralDaState st;
  st.x = prox.center;
  st.z = Eigen::VectorXd::Zero(prob.m);
  st.x_run_sum = Eigen::VectorXd::Zero(prob.m);
  return st;
}

inline void central_da_round(CentralDaState& st, const DecentralizedProblem& prob,
                             const ProxSetup& prox, double a) {
  st.z += mean_gradient(prob, st.x);
  st.x = conjugate_map(prox, -a * st.z);
  detail::check_finite(st.x, st.t + 1);
  st.x_run_sum += st.x;
  ++st.t;
}

struct CentralAdaState {
  Eigen::VectorXd u, v, w, w_prev, dual;
  double a = 0.0, a_t = 0.0, A_t = 0.0;
  long t = 0;
};

inline CentralAdaState central_ada_init(const DecentralizedProblem& prob,
                                        const ProxSetup& prox, double a) {
  if (!(a > 0)) throw std::invalid_argument("step must be positive");
  CentralAdaState st;
  st.a = a;
  st.t = 1;
  st.a_t = 2.0 * a;
  st.A_t = 2.0 * a;
  st.u = prox.center;
  st.w_prev = prox.center;
  st.dual = st.a_t * mean_gradient(prob, st.u);
  st.w = conjugate_map(prox, -st.dual);
  st.v = st.w;
  return st;
}

inline void central_ada_round(CentralAdaState& st, const DecentralizedProblem& prob,
                              const ProxSetup& prox) {
  const long t = st.t + 1;
  const double A_prev = st.A_t;
  st.a_t = st.a * (t + 1);
  st.A_t = A_prev + st.a_t;
  st.u = (A_prev / st.A_t) * st.v + (st.a_t / st.A_t) * st.w;
  st.dual += st.a_t * mean_gradient(prob, st.u);
  st.w_prev = st.w;
  st.w = conjugate_map(prox, -st.dual);
  st.v = (A_prev / st.A_t) * st.v + (st.a_t / st.A_t) * st.w;
  detail::check_finite(st.v, t);
  st.t = t;
}

}  // namespace dda

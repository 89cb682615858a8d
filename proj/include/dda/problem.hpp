#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "dda/prox.hpp"

namespace dda {

/// Decentralized LASSO instance: f(x) = (1/2n) sum_i ||M_i x - c_i||^2
/// over the l1 ball of radius R.
struct DecentralizedProblem {
  std::vector<Eigen::MatrixXd> M;  // p_i x m per agent
  std::vector<Eigen::VectorXd> c;  // p_i per agent
  ConstraintSet constraint;
  double L = 0.0;  // max_i sigma_1(M_i)^2
  int n = 0;
  int m = 0;
};

inline double smoothness_constant(const DecentralizedProblem& prob) {
  double L = 0.0;
  for (const auto& Mi : prob.M) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Mi);
    double s1 = svd.singularValues()(0);
    L = std::max(L, s1 * s1);
  }
  if (!(L > 0)) throw std::invalid_argument("degenerate instance: L must be positive");
  return L;
}

inline Eigen::VectorXd grad_i(const DecentralizedProblem& prob, int i,
                              const Eigen::VectorXd& x) {
  if (i < 1 || i > prob.n) throw std::out_of_range("agent index");
  if (!x.allFinite()) throw std::invalid_argument("non-finite point");
  const auto& Mi = prob.M[i - 1];
  return Mi.transpose() * (Mi * x - prob.c[i - 1]);
}

inline double objective(const DecentralizedProblem& prob, const Eigen::VectorXd& x) {
  if (x.size() != prob.m) throw std::invalid_argument("dimension mismatch");
  double s = 0.0;
  for (int i = 0; i < prob.n; ++i) s += (prob.M[i] * x - prob.c[i]).squaredNorm();
  return s / (2.0 * prob.n);
}

/// Synthetic instance generator. Entries of each M_i and the nonzeros of
/// the planted vector are standard normal; c_i = M_i x_g + noise;
/// R = 1.1 ||x_g||_1. Deterministic in the seed.
inline std::pair<DecentralizedProblem, Eigen::VectorXd> synth_lasso(
    int n, int m, int p, int sparsity, double noise_sd, std::uint64_t seed) {
  if (n < 1 || m < 1 || p < 1) throw std::invalid_argument("sizes must be positive");
  if (sparsity < 1 || sparsity > m)
    throw std::invalid_argument("sparsity must be in [1, m]");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::VectorXd xg = Eigen::VectorXd::Zero(m);
  {
    std::vector<int> idx(m);
    for (int i = 0; i < m; ++i) idx[i] = i;
    for (int i = 0; i < sparsity; ++i) {
      std::uniform_int_distribution<int> pick(i, m - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    for (int i = 0; i < sparsity; ++i) xg[idx[i]] = normal(rng);
  }

  DecentralizedProblem prob;
  prob.n = n;
  prob.m = m;
  prob.M.resize(n);
  prob.c.resize(n);
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd Mi(p, m);
    for (int r = 0; r < p; ++r)
      for (int col = 0; col < m; ++col) Mi(r, col) = normal(rng);
    Eigen::VectorXd ci = Mi * xg;
    if (noise_sd > 0)
      for (int r = 0; r < p; ++r) ci[r] += noise_sd * normal(rng);
    prob.M[i] = std::move(Mi);
    prob.c[i] = std::move(ci);
  }
  double R = 1.1 * xg.lpNorm<1>();
  if (!(R > 0)) R = 1.0;  // all-zero planted vector
  prob.constraint = ConstraintSet::l1_ball(R, m);
  prob.L = smoothness_constant(prob);
  return {std::move(prob), std::move(xg)};
}

struct ReferenceSolution {
  Eigen::VectorXd x_star;
  double f_star = 0.0;
  double certificate = 0.0;  // linear optimality gap over the feasible set
};

/// Exact Frank-Wolfe style gap over the l1 ball: the linear function
/// <grad, x - q> attains its max at a vertex +-R e_u.
inline double optimality_gap(const DecentralizedProblem& prob, const Eigen::VectorXd& x) {
  if (prob.constraint.kind != ConstraintSet::Kind::l1_ball)
    throw std::logic_error("certificate requires a bounded set");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(prob.m);
  for (int i = 1; i <= prob.n; ++i) g += grad_i(prob, i, x);
  g /= prob.n;
  return g.dot(x) + prob.constraint.radius * g.lpNorm<Eigen::Infinity>();
}

/// High-accuracy optimum via accelerated dual averaging with a = 1/(6L),
/// run until the vertex gap certificate meets tol. Fails loudly if the
/// iteration cap is hit.
inline ReferenceSolution reference_optimum(const DecentralizedProblem& prob,
                                           double tol, long max_rounds = 2000000) {
  if (!(tol > 0)) throw std::invalid_argument("tolerance must be positive");
  const int m = prob.m;
  ProxSetup prox = make_prox(Eigen::VectorXd::Zero(m), prob.constraint);
  const double a = 1.0 / (6.0 * prob.L);

  auto grad_avg = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
    for (int i = 1; i <= prob.n; ++i) g += grad_i(prob, i, x);
    return Eigen::VectorXd(g / prob.n);
  };

  // t = 1 initialization of the accelerated scheme.
  Eigen::VectorXd u = prox.center, w_prev = prox.center;
  Eigen::VectorXd dual = (2.0 * a) * grad_avg(u);
  Eigen::VectorXd w = conjugate_map(prox, -dual);
  Eigen::VectorXd v = w;
  double a_t = 2.0 * a, A_t = 2.0 * a;

  long check_every = 50;
  for (long t = 2; t <= max_rounds; ++t) {
    double A_prev = A_t;
    a_t = a * (t + 1);
    A_t += a_t;
    w_prev = w;
    u = (A_prev / A_t) * v + (a_t / A_t) * w_prev;
    dual += a_t * grad_avg(u);
    w = conjugate_map(prox, -dual);
    v = (A_prev / A_t) * v + (a_t / A_t) * w;
    if (t % check_every == 0) {
      if (optimality_gap(prob, v) <= tol) {
        ReferenceSolution ref;
        ref.x_star = v;
        ref.f_star = objective(prob, v);
        ref.certificate = optimality_gap(prob, v);
        return ref;
      }
    }
  }
  throw std::runtime_error("reference_optimum: certificate " + std::to_string(tol) +
                           " not met within iteration cap");
}

/// FNV-1a over the instance bytes; identifies a problem across runs.
inline std::uint64_t problem_hash(const DecentralizedProblem& prob) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, size_t len) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  mix(&prob.n, sizeof prob.n);
  mix(&prob.m, sizeof prob.m);
  double R = prob.constraint.kind == ConstraintSet::Kind::l1_ball
                 ? prob.constraint.radius
                 : -1.0;
  mix(&R, sizeof R);
  for (int i = 0; i < prob.n; ++i) {
    mix(prob.M[i].data(), sizeof(double) * prob.M[i].size());
    mix(prob.c[i].data(), sizeof(double) * prob.c[i].size());
  }
  return h;
}

/// Text serialization. Header line `ddaprob 1`, then `n m R`, then the
/// row count p_i followed by M_i (row major) and c_i per agent, all at
/// full precision.
inline void save_problem(std::ostream& os, const DecentralizedProblem& prob) {
  os.precision(17);
  os << "ddaprob 1\n" << prob.n << " " << prob.m << " ";
  os << (prob.constraint.kind == ConstraintSet::Kind::l1_ball
             ? prob.constraint.radius
             : 0.0)
     << "\n";
  for (int i = 0; i < prob.n; ++i) {
    os << prob.M[i].rows() << "\n";
    for (int r = 0; r < prob.M[i].rows(); ++r) {
      for (int col = 0; col < prob.m; ++col)
        os << (col ? " " : "") << prob.M[i](r, col);
      os << "\n";
    }
    for (int r = 0; r < prob.c[i].size(); ++r)
      os << (r ? " " : "") << prob.c[i][r];
    os << "\n";
  }
}

inline DecentralizedProblem load_problem(std::istream& is) {
  std::string magic;
  int version;
  if (!(is >> magic >> version) || magic != "ddaprob" || version != 1)
    throw std::runtime_error("problem file: bad header");
  DecentralizedProblem prob;
  double R;
  if (!(is >> prob.n >> prob.m >> R)) throw std::runtime_error("problem file: bad sizes");
  if (prob.n < 1 || prob.m < 1) throw std::runtime_error("problem file: invalid sizes");
  prob.M.resize(prob.n);
  prob.c.resize(prob.n);
  for (int i = 0; i < prob.n; ++i) {
    int p;
    if (!(is >> p) || p < 1) throw std::runtime_error("problem file: bad row count");
    prob.M[i].resize(p, prob.m);
    for (int r = 0; r < p; ++r)
      for (int col = 0; col < prob.m; ++col)
        if (!(is >> prob.M[i](r, col)))
          throw std::runtime_error("problem file: truncated matrix");
    prob.c[i].resize(p);
    for (int r = 0; r < p; ++r)
      if (!(is >> prob.c[i][r])) throw std::runtime_error("problem file: truncated vector");
  }
  prob.constraint = R > 0 ? ConstraintSet::l1_ball(R, prob.m)
                          : ConstraintSet::unconstrained(prob.m);
  prob.L = smoothness_constant(prob);
  return prob;
}

}  // namespace dda

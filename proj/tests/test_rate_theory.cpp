#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dda/rate_theory.hpp"
#include "dda/topology.hpp"

using namespace dda;

TEST_CASE("rho_M pinned values and eigen oracle") {
  REQUIRE(rho_M(0.1, 1.0, 0.0) == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(rho_M(0.1, 1.0, 1.0 / 3) == Catch::Approx(0.561476).margin(1e-5));

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    double beta = unif(rng) * 0.95;
    double L = 0.1 + 10 * unif(rng);
    double a = 0.001 + 0.5 * unif(rng) / L;
    Eigen::Matrix2d M = consensus_matrix_M(a, L, beta);
    double rho_direct = M.eigenvalues().cwiseAbs().maxCoeff();
    REQUIRE(rho_M(a, L, beta) == Catch::Approx(rho_direct).margin(1e-12));
  }
}

TEST_CASE("rho_M monotone in the step") {
  for (double a : {1e-4, 1e-3, 1e-2, 1e-1})
    REQUIRE(rho_M(2 * a, 2.0, 0.4) > rho_M(a, 2.0, 0.4));
}

TEST_CASE("rho_M rejects bad parameters") {
  REQUIRE_THROWS_AS(rho_M(-1.0, 1.0, 0.5), std::invalid_argument);
  REQUIRE_THROWS_AS(rho_M(0.1, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("DDA admissibility boundary at beta = 0 is a = 9/(34L)") {
  const double L = 3.7;
  const double boundary = 9.0 / (34.0 * L);
  REQUIRE(dda_stepsize_admissible(boundary * (1 - 1e-10), L, 0.0).admissible);
  REQUIRE_FALSE(dda_stepsize_admissible(boundary * (1 + 1e-10), L, 0.0).admissible);
}

TEST_CASE("beta near one is inadmissible") {
  REQUIRE_FALSE(dda_stepsize_admissible(0.1, 1.0, 0.999999).admissible);
}

TEST_CASE("explicit bound implies the exact condition") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    double beta = unif(rng) * 0.97;
    double L = 0.05 + 20 * unif(rng);
    double a = dda_explicit_max_step(L, beta) * (0.05 + 0.94 * unif(rng));
    auto v = dda_stepsize_admissible(a, L, beta);
    REQUIRE(v.admissible);
    REQUIRE(v.rho < 1.0);
  }
}

TEST_CASE("xi2 exceeds 3 beta a L under the beta-only bound") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    double beta = 0.01 + unif(rng) * 0.95;
    double L = 0.05 + 20 * unif(rng);
    double a = unif(rng) * (1 - beta) * (1 - beta) / (2 * beta * L) * 0.999;
    double aL = a * L;
    double xi2 = std::sqrt(aL * aL * beta * beta + 4 * aL * beta * (beta + 1));
    REQUIRE(xi2 > 3 * beta * aL);
  }
}

TEST_CASE("ADDA admissibility") {
  const double L = 2.0;
  REQUIRE(adda_stepsize_admissible(1.0 / (6 * L), L));
  REQUIRE_FALSE(adda_stepsize_admissible(1.0 / (5 * L), L));
  REQUIRE_THROWS_AS(adda_stepsize_admissible(0.0, L), std::invalid_argument);
}

TEST_CASE("accelerated weights closed form") {
  auto [a1, A1] = adda_weights(0.01, 1);
  REQUIRE(a1 == Catch::Approx(0.02));
  REQUIRE(A1 == Catch::Approx(0.02));
  auto [a3, A3] = adda_weights(0.01, 3);
  REQUIRE(a3 == Catch::Approx(0.04));
  REQUIRE(A3 == Catch::Approx(0.09));
  REQUIRE(a3 / A3 == Catch::Approx(4.0 / 9));
  for (long t = 2; t <= 100; ++t) {
    auto [at, At] = adda_weights(0.01, t);
    auto [ap, Ap] = adda_weights(0.01, t - 1);
    REQUIRE(At - Ap == Catch::Approx(at).epsilon(1e-12));
    REQUIRE(at / At == Catch::Approx(2.0 * (t + 1) / (t * (t + 3.0))));
  }
}

namespace {

DecentralizedProblem two_agent_opposed_gradients() {
  // grad_i(0) = -c_i: choose c so the gradients at 0 are (1,0) and (-1,0)
  DecentralizedProblem prob;
  prob.n = 2;
  prob.m = 2;
  prob.M = {Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)};
  Eigen::VectorXd c1(2), c2(2);
  c1 << -1, 0;
  c2 << 1, 0;
  prob.c = {c1, c2};
  prob.constraint = ConstraintSet::l1_ball(1.0, 2);
  prob.L = 1.0;
  return prob;
}

}  // namespace

TEST_CASE("gradient variance pinned example") {
  auto prob = two_agent_opposed_gradients();
  auto mix = metropolis_weights(build_topology(TopologyKind::complete, 2));
  ProxSetup prox = make_prox(Eigen::VectorXd::Zero(2), prob.constraint);
  double a = 0.99 * dda_explicit_max_step(prob.L, mix.beta);
  auto k = compute_constants(prob, mix, prox, a, Eigen::VectorXd::Zero(2));
  REQUIRE(k.pi_sq == Catch::Approx(2.0));
}

TEST_CASE("gamma formula pinned example") {
  // aL = 0.05, rho = 0.5 -> gamma = 1/2 - 0.05 - 8*0.05/(9*0.75)
  double gamma = 0.5 - 0.05 - 8.0 * 0.05 / (9.0 * (1.0 - 0.25));
  REQUIRE(gamma == Catch::Approx(0.39074).margin(1e-5));
}

TEST_CASE("C_p pinned example: beta=1/3, n=4, G=2") {
  DecentralizedProblem prob;
  prob.n = 4;
  prob.m = 2;
  prob.M.assign(4, Eigen::MatrixXd::Identity(2, 2));
  prob.c.assign(4, Eigen::VectorXd::Zero(2));
  prob.constraint = ConstraintSet::l1_ball(1.0, 2);  // G = 2
  prob.L = 1.0;
  auto mix = metropolis_weights(build_topology(TopologyKind::cycle, 4));
  REQUIRE(mix.beta == Catch::Approx(1.0 / 3).margin(1e-12));
  ProxSetup prox = make_prox(Eigen::VectorXd::Zero(2), prob.constraint);
  double a = 0.99 * dda_explicit_max_step(prob.L, mix.beta);
  auto k = compute_constants(prob, mix, prox, a, Eigen::VectorXd::Zero(2));
  REQUIRE(k.C_p == Catch::Approx(20.0));
}

TEST_CASE("compute_constants rejects gamma <= 0") {
  auto prob = two_agent_opposed_gradients();
  auto mix = metropolis_weights(build_topology(TopologyKind::complete, 2));
  ProxSetup prox = make_prox(Eigen::VectorXd::Zero(2), prob.constraint);
  REQUIRE_THROWS_AS(compute_constants(prob, mix, prox, 5.0, Eigen::VectorXd::Zero(2)),
                    std::domain_error);
}

TEST_CASE("admissible steps give rho < 1 and gamma > 0") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int found = 0;
  while (found < 500) {
    double beta = unif(rng) * 0.97;
    double L = 0.05 + 20 * unif(rng);
    double a = unif(rng) / L;
    auto v = dda_stepsize_admissible(a, L, beta);
    if (!v.admissible) continue;
    ++found;
    REQUIRE(v.rho < 1.0);
    double gamma = 0.5 - a * L - 8 * a * L / (9 * (1 - v.rho * v.rho));
    REQUIRE(gamma > 0.0);
  }
}

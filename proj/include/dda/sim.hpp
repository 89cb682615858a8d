#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dda/problem.hpp"
#include "dda/prox.hpp"
#include "dda/rate_theory.hpp"
#include "dda/solvers.hpp"
#include "dda/topology.hpp"

namespace dda {

enum class Algorithm {
  dda,
  adda,
  classic_dda,
  pg_extra,
  apm,
  central_da,
  central_ada,
};

inline Algorithm algorithm_from_string(const std::string& s) {
  if (s == "dda") return Algorithm::dda;
  if (s == "adda") return Algorithm::adda;
  if (s == "classic_dda") return Algorithm::classic_dda;
  if (s == "pg_extra") return Algorithm::pg_extra;
  if (s == "apm") return Algorithm::apm;
  if (s == "central_da") return Algorithm::central_da;
  if (s == "central_ada") return Algorithm::central_ada;
  throw std::invalid_argument("unknown algorithm id: " + s);
}

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::dda: return "dda";
    case Algorithm::adda: return "adda";
    case Algorithm::classic_dda: return "classic_dda";
    case Algorithm::pg_extra: return "pg_extra";
    case Algorithm::apm: return "apm";
    case Algorithm::central_da: return "central_da";
    case Algorithm::central_ada: return "central_ada";
  }
  return "?";
}

struct TopologySpec {
  TopologyKind kind = TopologyKind::cycle;
  int n = 2;
  std::vector<std::pair<int, int>> edges;  // edge_list only
};

struct SynthSpec {
  int n = 2, m = 10, p = 5, sparsity = 2;
  double noise_sd = 0.1;
  std::uint64_t seed = 1;
};

struct RunConfig {
  Algorithm algorithm = Algorithm::dda;
  TopologySpec topology;
  std::variant<SynthSpec, std::string> problem;  // synth params or file path
  std::optional<double> step;  // nullopt = auto (theory-backed default)
  long rounds = 100;
  long cadence = 0;  // 0 = auto: every round up to 2000 records
  bool check_bounds = false;
  double oracle_tol = 1e-8;
  bool force = false;  // allow an inadmissible manual step
};

struct TraceRecord {
  long t = 0;
  double obj_err = nan("");
  double cons_err = nan("");
  double dual_cons_err = nan("");
  double avg_obj_err = nan("");
  double avg_cons_gap = nan("");
  double bound_t1 = nan("");
  double bound_t2 = nan("");
};

struct RunTrace {
  Algorithm algorithm;
  double step = 0.0;
  std::uint64_t problem_hash = 0;
  double f_star = 0.0;
  double certificate = 0.0;
  std::vector<std::string> warnings;
  bool diverged = false;
  long diverged_at = -1;
  std::optional<RateConstants> constants;
  std::vector<TraceRecord> records;
  double wall_ms = 0.0;  // sidecar only; the CSV keeps this column empty
};

inline double resolve_auto_step(Algorithm alg, const DecentralizedProblem& prob,
                                const MixingMatrix& mixing) {
  switch (alg) {
    case Algorithm::dda:
    case Algorithm::classic_dda:
      return 0.99 * dda_explicit_max_step(prob.L, mixing.beta);
    case Algorithm::adda:
    case Algorithm::central_ada:
      return 1.0 / (6.0 * prob.L);
    case Algorithm::central_da:
      return 0.99 * dda_explicit_max_step(prob.L, 0.0);
    case Algorithm::pg_extra:
      return 0.25 / prob.L;
    case Algorithm::apm:
      return prob.L;  // APM takes an L parameter, not a step
  }
  throw std::logic_error("unreachable");
}

inline long resolve_cadence(long T, long cadence) {
  if (cadence > 0) return cadence;
  return T <= 2000 ? 1 : (T + 1999) / 2000;
}

namespace detail {

inline double col_consensus_err(const Eigen::MatrixXd& X, const Eigen::VectorXd& ref) {
  double s = 0.0;
  for (int i = 0; i < X.cols(); ++i) s += (X.col(i) - ref).squaredNorm();
  return std::sqrt(s);
}

inline double dual_deviation(const Eigen::MatrixXd& Z) {
  Eigen::VectorXd mean = Z.rowwise().mean();
  double s = 0.0;
  for (int i = 0; i < Z.cols(); ++i) s += (Z.col(i) - mean).squaredNorm();
  return std::sqrt(s);
}

}  // namespace detail

/// Execute one run. The caller provides the already-built problem, mixing
/// matrix, and reference solution so that compare() can share them.
inline RunTrace run_solver(const RunConfig& cfg, const DecentralizedProblem& prob,
                           const MixingMatrix& mixing, const ProxSetup& prox,
                           const ReferenceSolution& ref) {
  RunTrace trace;
  trace.algorithm = cfg.algorithm;
  trace.problem_hash = problem_hash(prob);
  trace.f_star = ref.f_star;
  trace.certificate = ref.certificate;

  double a = cfg.step ? *cfg.step : resolve_auto_step(cfg.algorithm, prob, mixing);
  trace.step = a;

  if (cfg.algorithm == Algorithm::dda || cfg.algorithm == Algorithm::classic_dda) {
    auto v = dda_stepsize_admissible(a, prob.L, mixing.beta);
    if (!v.admissible)
      trace.warnings.push_back("step " + std::to_string(a) +
                               " violates the DDA admissibility condition");
  } else if (cfg.algorithm == Algorithm::adda) {
    if (!adda_stepsize_admissible(a, prob.L))
      trace.warnings.push_back("step " + std::to_string(a) + " exceeds 1/(6L)");
  }

  if (cfg.check_bounds) {
    try {
      trace.constants = compute_constants(prob, mixing, prox, a, ref.x_star);
    } catch (const std::domain_error& e) {
      trace.warnings.push_back(std::string("constants unavailable: ") + e.what());
    }
  }

  const long T = cfg.rounds;
  if (T < 1) throw std::invalid_argument("rounds must be >= 1");
  const long cadence = resolve_cadence(T, cfg.cadence);

  auto start = std::chrono::steady_clock::now();

  auto push_initial = [&] {
    TraceRecord r;
    r.t = 0;
    r.obj_err = objective(prob, prox.center) - ref.f_star;
    r.cons_err = 0.0;
    trace.records.push_back(r);
  };

  try {
    switch (cfg.algorithm) {
      case Algorithm::dda: {
        auto st = dda_init(prob, prox);
        push_initial();
        for (long t = 1; t <= T; ++t) {
          dda_round(st, prob, mixing, prox, a);
          if (t % cadence != 0 && t != T) continue;
          TraceRecord r;
          r.t = t;
          Eigen::VectorXd xbar = st.x.rowwise().mean();
          r.obj_err = objective(prob, xbar) - ref.f_star;
          r.cons_err = detail::col_consensus_err(st.x, ref.x_star);
          r.dual_cons_err = detail::dual_deviation(st.z);
          Eigen::VectorXd ytilde = st.y_run_sum / double(t);
          r.avg_obj_err = objective(prob, ytilde) - ref.f_star;
          double gap = 0.0;
          for (int i = 0; i < prob.n; ++i)
            gap = std::max(gap,
                           (st.x_run_sum.col(i) / double(t) - ytilde).squaredNorm());
          r.avg_cons_gap = gap;
          if (trace.constants) r.bound_t1 = trace.constants->C / (a * t);
          trace.records.push_back(r);
        }
        break;
      }
      case Algorithm::adda: {
        auto st = adda_init(prob, prox, a);
        push_initial();
        for (long t = 1; t <= T; ++t) {
          if (t >= 2) adda_round(st, prob, mixing, prox);
          if (t % cadence != 0 && t != T) continue;
          TraceRecord r;
          r.t = t;
          Eigen::VectorXd vbar = st.v.rowwise().mean();
          r.obj_err = objective(prob, vbar) - ref.f_star;
          r.cons_err = detail::col_consensus_err(st.v, ref.x_star);
          r.dual_cons_err = detail::dual_deviation(st.q);
          if (trace.constants && trace.constants->t2_slope > 0)
            r.bound_t2 = (trace.constants->d_xstar + t * trace.constants->t2_slope) /
                         st.A_t;
          trace.records.push_back(r);
        }
        break;
      }
      case Algorithm::classic_dda: {
        auto st = classic_dda_init(prob, prox);
        push_initial();
        for (long t = 1; t <= T; ++t) {
          classic_dda_round(st, prob, mixing, prox, a);
          if (t % cadence != 0 && t != T) continue;
          TraceRecord r;
          r.t = t;
          Eigen::VectorXd xbar = st.x.rowwise().mean();
          r.obj_err = objective(prob, xbar) - ref.f_star;
          r.cons_err = detail::col_consensus_err(st.x, ref.x_star);
          r.dual_cons_err = detail::dual_deviation(st.z);
          r.avg_obj_err =
              objective(prob, st.x_run_sum.rowwise().mean() / double(t)) - ref.f_star;
          trace.records.push_back(r);
        }
        break;
      }
      case Algorithm::pg_extra: {
        auto st = pg_extra_init(prob, prox);
        push_initial();
        for (long t = 1; t <= T; ++t) {
          pg_extra_round(st, prob, mixing, a);
          if (t % cadence != 0 && t != T) continue;
          TraceRecord r;
          r.t = t;
          r.obj_err = objective(prob, st.x.rowwise().mean()) - ref.f_star;
          r.cons_err = detail::col_consensus_err(st.x, ref.x_star);
          trace.records.push_back(r);
        }
        break;
      }
      case Algorithm::apm: {
        auto st = apm_init(prob, prox, mixing, a);
        push_initial();
        for (long t = 1; t <= T; ++t) {
          apm_round(st, prob, mixing, a);
          if (t % cadence != 0 && t != T) continue;
          TraceRecord r;
          r.t = t;
          r.obj_err = objective(prob, st.x.rowwise().mean()) - ref.f_star;
          r.cons_err = detail::col_consensus_err(st.x, ref.x_star);
          trace.records.push_back(r);
        }
        break;
      }
      case Algorithm::central_da: {
        auto st = central_da_init(prob, prox);
        push_initial();
        for (long t = 1; t <= T; ++t) {
          central_da_round(st, prob, prox, a);
          if (t % cadence != 0 && t != T) continue;
          TraceRecord r;
          r.t = t;
          r.obj_err = objective(prob, st.x) - ref.f_star;
          r.cons_err = (st.x - ref.x_star).norm();
          r.avg_obj_err = objective(prob, st.x_run_sum / double(t)) - ref.f_star;
          trace.records.push_back(r);
        }
        break;
      }
      case Algorithm::central_ada: {
        auto st = central_ada_init(prob, prox, a);
        push_initial();
        for (long t = 1; t <= T; ++t) {
          if (t >= 2) central_ada_round(st, prob, prox);
          if (t % cadence != 0 && t != T) continue;
          TraceRecord r;
          r.t = t;
          r.obj_err = objective(prob, st.v) - ref.f_star;
          r.cons_err = (st.v - ref.x_star).norm();
          trace.records.push_back(r);
        }
        break;
      }
    }
  } catch (const SolverDivergence& d) {
    trace.diverged = true;
    trace.diverged_at = d.round;
  }

  trace.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  return trace;
}

/// Build problem + mixing + oracle from a config, then run.
struct PreparedInstance {
  DecentralizedProblem problem;
  MixingMatrix mixing;
  ProxSetup prox;
  ReferenceSolution reference;
};

inline DecentralizedProblem build_problem(const RunConfig& cfg) {
  if (std::holds_alternative<SynthSpec>(cfg.problem)) {
    const auto& s = std::get<SynthSpec>(cfg.problem);
    return synth_lasso(s.n, s.m, s.p, s.sparsity, s.noise_sd, s.seed).first;
  }
  std::ifstream is(std::get<std::string>(cfg.problem));
  if (!is) throw std::runtime_error("cannot open problem file");
  return load_problem(is);
}

inline PreparedInstance prepare(const RunConfig& cfg) {
  PreparedInstance inst;
  inst.problem = build_problem(cfg);
  Graph g = build_topology(cfg.topology.kind, cfg.topology.n,
                           cfg.topology.kind == TopologyKind::edge_list
                               ? &cfg.topology.edges
                               : nullptr);
  if (inst.problem.n != g.n &&
      !(cfg.algorithm == Algorithm::central_da ||
        cfg.algorithm == Algorithm::central_ada))
    throw std::invalid_argument("topology size does not match agent count");
  inst.mixing = metropolis_weights(g);
  inst.prox = make_prox(Eigen::VectorXd::Zero(inst.problem.m), inst.problem.constraint);
  inst.reference = reference_optimum(inst.problem, cfg.oracle_tol);
  return inst;
}

inline RunTrace run(const RunConfig& cfg) {
  PreparedInstance inst = prepare(cfg);
  return run_solver(cfg, inst.problem, inst.mixing, inst.prox, inst.reference);
}

/// Run several algorithms on the identical instance; traces are aligned by
/// construction (same rounds, same cadence).
inline std::vector<RunTrace> compare(const std::vector<RunConfig>& configs) {
  if (configs.empty()) throw std::invalid_argument("compare: empty config list");
  PreparedInstance inst = prepare(configs.front());
  const std::uint64_t h = problem_hash(inst.problem);
  std::vector<RunTrace> out;
  for (const auto& cfg : configs) {
    DecentralizedProblem p = build_problem(cfg);
    if (problem_hash(p) != h)
      throw std::invalid_argument("compare: mismatched problem hashes");
    out.push_back(run_solver(cfg, inst.problem, inst.mixing, inst.prox, inst.reference));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trace persistence.
// ---------------------------------------------------------------------------

namespace detail {

inline void csv_field(std::ostream& os, double v) {
  if (std::isnan(v)) return;  // absent metric: empty field
  char buf[32];
  snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

}  // namespace detail

inline void write_trace_csv(std::ostream& os, const RunTrace& trace) {
  os << "t,obj_err,cons_err,dual_cons_err,avg_obj_err,avg_cons_gap,bound_t1,"
        "bound_t2,wall_ms\n";
  for (const auto& r : trace.records) {
    os << r.t << ",";
    detail::csv_field(os, r.obj_err);
    os << ",";
    detail::csv_field(os, r.cons_err);
    os << ",";
    detail::csv_field(os, r.dual_cons_err);
    os << ",";
    detail::csv_field(os, r.avg_obj_err);
    os << ",";
    detail::csv_field(os, r.avg_cons_gap);
    os << ",";
    detail::csv_field(os, r.bound_t1);
    os << ",";
    detail::csv_field(os, r.bound_t2);
    os << ",";  // wall clock lives in the JSON sidecar, never in the CSV
    os << "\n";
  }
}

/// Joined table for compare(): t plus one objective-error column per trace.
inline void write_compare_csv(std::ostream& os, const std::vector<RunTrace>& traces) {
  os << "t";
  for (const auto& tr : traces) os << "," << to_string(tr.algorithm) << "_obj_err";
  os << "\n";
  if (traces.empty()) return;
  const size_t rows = traces.front().records.size();
  for (size_t k = 0; k < rows; ++k) {
    os << traces.front().records[k].t;
    for (const auto& tr : traces) {
      os << ",";
      if (k < tr.records.size()) detail::csv_field(os, tr.records[k].obj_err);
    }
    os << "\n";
  }
}

}  // namespace dda

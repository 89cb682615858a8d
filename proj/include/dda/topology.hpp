#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dda {

/// Undirected graph over agents 1..n. Edges are stored as ordered pairs
/// (i,j) with i < j; no self-loops, no duplicates.
struct Graph {
  int n = 0;
  std::set<std::pair<int, int>> edges;

  bool has_edge(int i, int j) const {
    if (i > j) std::swap(i, j);
    return edges.count({i, j}) > 0;
  }

  int degree(int i) const {
    int d = 0;
    for (const auto& e : edges)
      if (e.first == i || e.second == i) ++d;
    return d;
  }
};

enum class TopologyKind { cycle, complete, mod_ring, edge_list };

namespace detail {

// Connected components via BFS; returns the component of node 1 first.
inline std::vector<std::vector<int>> components(const Graph& g) {
  std::vector<std::vector<int>> adj(g.n + 1);
  for (const auto& e : g.edges) {
    adj[e.first].push_back(e.second);
    adj[e.second].push_back(e.first);
  }
  std::vector<int> comp(g.n + 1, -1);
  std::vector<std::vector<int>> out;
  for (int start = 1; start <= g.n; ++start) {
    if (comp[start] >= 0) continue;
    int id = static_cast<int>(out.size());
    out.emplace_back();
    std::vector<int> stack{start};
    comp[start] = id;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      out[id].push_back(v);
      for (int w : adj[v])
        if (comp[w] < 0) {
          comp[w] = id;
          stack.push_back(w);
        }
    }
  }
  return out;
}

}  // namespace detail

inline bool is_connected(const Graph& g) {
  return detail::components(g).size() == 1;
}

inline void add_edge(Graph& g, int i, int j) {
  if (i == j) throw std::invalid_argument("self-loop (" + std::to_string(i) + ")");
  if (i < 1 || j < 1 || i > g.n || j > g.n)
    throw std::invalid_argument("edge endpoint out of range [1.." +
                                std::to_string(g.n) + "]");
  if (i > j) std::swap(i, j);
  g.edges.insert({i, j});
}

/// Build one of the standard topologies. `extra` is required for edge_list
/// and ignored otherwise. mod_ring is defined for n = 8 only: node i links
/// to {1+i mod 8, 1+(i+3) mod 8, 1+(i+6) mod 8}, then the edge set is
/// symmetrized.
inline Graph build_topology(TopologyKind kind, int n,
                            const std::vector<std::pair<int, int>>* extra = nullptr) {
  if (n < 2) throw std::invalid_argument("need at least 2 agents");
  Graph g;
  g.n = n;
  switch (kind) {
    case TopologyKind::cycle:
      for (int i = 1; i <= n; ++i) add_edge(g, i, i % n + 1);
      break;
    case TopologyKind::complete:
      for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j) add_edge(g, i, j);
      break;
    case TopologyKind::mod_ring: {
      if (n != 8) throw std::invalid_argument("mod_ring requires n = 8");
      for (int i = 1; i <= 8; ++i)
        for (int off : {0, 3, 6}) {
          int j = 1 + (i + off) % 8;
          if (j != i) add_edge(g, i, j);
        }
      break;
    }
    case TopologyKind::edge_list: {
      if (!extra) throw std::invalid_argument("edge_list requires an edge list");
      for (const auto& [i, j] : *extra) add_edge(g, i, j);
      auto comps = detail::components(g);
      if (comps.size() > 1) {
        std::ostringstream os;
        os << "edge list is disconnected; component {";
        for (size_t k = 0; k < comps[1].size(); ++k)
          os << (k ? "," : "") << comps[1][k];
        os << "} is unreachable from node 1";
        throw std::invalid_argument(os.str());
      }
      break;
    }
  }
  return g;
}

/// Edge-list text format: first line `n`, then one `i j` pair per line.
inline void save_graph(std::ostream& os, const Graph& g) {
  os << g.n << "\n";
  for (const auto& e : g.edges) os << e.first << " " << e.second << "\n";
}

inline Graph load_graph(std::istream& is) {
  int n;
  if (!(is >> n)) throw std::runtime_error("graph: cannot read agent count");
  std::vector<std::pair<int, int>> edges;
  int i, j;
  while (is >> i >> j) edges.emplace_back(i, j);
  return build_topology(TopologyKind::edge_list, n, &edges);
}

/// Doubly stochastic mixing matrix with cached second largest singular value.
struct MixingMatrix {
  Eigen::MatrixXd weights;
  double beta = 0.0;  // sigma_2(P)

  int n() const { return static_cast<int>(weights.rows()); }
};

/// sigma_2 of a square matrix. Full SVD; fine at desk scale.
inline double second_largest_singular(const Eigen::MatrixXd& P) {
  if (P.rows() != P.cols()) throw std::invalid_argument("matrix not square");
  if (!P.allFinite()) throw std::invalid_argument("non-finite entries");
  if (P.rows() < 2) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(P);
  return svd.singularValues()(1);
}

/// Metropolis-Hastings weights: p_ij = 1/(1+max(deg_i,deg_j)) on edges,
/// diagonal as the residual so rows sum to one exactly. Symmetric, hence
/// also column stochastic.
inline MixingMatrix metropolis_weights(const Graph& g) {
  if (!is_connected(g)) throw std::invalid_argument("graph is disconnected");
  const int n = g.n;
  std::vector<int> deg(n + 1);
  for (int i = 1; i <= n; ++i) deg[i] = g.degree(i);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [i, j] : g.edges) {
    double w = 1.0 / (1.0 + std::max(deg[i], deg[j]));
    P(i - 1, j - 1) = w;
    P(j - 1, i - 1) = w;
  }
  for (int i = 0; i < n; ++i) P(i, i) = 1.0 - (P.row(i).sum() - P(i, i));
  MixingMatrix mix;
  mix.weights = std::move(P);
  mix.beta = second_largest_singular(mix.weights);
  return mix;
}

/// Second largest (signed) eigenvalue of a symmetric mixing matrix.
/// Used by APM's penalty parameter.
inline double lambda2(const Eigen::MatrixXd& P) {
  if (P.rows() < 2) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
  const auto& ev = es.eigenvalues();  // ascending
  return ev(ev.size() - 2);
}

}  // namespace dda

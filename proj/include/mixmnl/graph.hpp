// Copyright 2026 The mixmnl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Comparison graphs: the fixed set of N item pairs on which outcomes are
// observed, plus connectivity, bipartiteness and spectral-gap diagnostics.
//
// Indexing is 0-based everywhere. Edge k is stored as (i_k, j_k) with
// i_k < j_k, and the edge list is sorted lexicographically, so the pair index
// k is a deterministic function of the edge set.

#ifndef MIXMNL_GRAPH_HPP_
#define MIXMNL_GRAPH_HPP_

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mixmnl/common.hpp"

namespace mixmnl {

struct Edge {
  int i = 0;
  int j = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct GraphDiagnostics {
  bool connected = false;
  bool bipartite = false;
  // 1 - max(lambda_2, -lambda_n) of D^{-1} A; 0 for disconnected or bipartite
  // graphs.
  double spectral_gap = 0.0;
  int d_min = 0;
  int d_max = 0;
  double lambda_2 = 0.0;
  double lambda_n = 0.0;
};

class ComparisonGraph {
 public:
  ComparisonGraph() = default;

  // Validates and canonicalizes a pair list: each pair is reoriented to
  // (min, max), duplicates are dropped and the result is sorted.
  static ComparisonGraph from_edges(int n, const std::vector<std::pair<int, int>>& pairs) {
    if (n < 1) throw ValidationError("graph must have at least one vertex");
    std::vector<Edge> edges;
    edges.reserve(pairs.size());
    for (const auto& [a, b] : pairs) {
      if (a < 0 || a >= n || b < 0 || b >= n) {
        std::ostringstream msg;
        msg << "pair (" << a << ", " << b << ") out of range for n=" << n;
        throw ValidationError(msg.str());
      }
      if (a == b) {
        std::ostringstream msg;
        msg << "pair (" << a << ", " << b << ") is a self-loop";
        throw ValidationError(msg.str());
      }
      edges.push_back({std::min(a, b), std::max(a, b)});
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return ComparisonGraph(n, std::move(edges));
  }

  int num_vertices() const { return n_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int k) const { return edges_[static_cast<std::size_t>(k)]; }
  const std::vector<int>& degrees() const { return degree_; }
  int degree(int v) const { return degree_[static_cast<std::size_t>(v)]; }
  int d_max() const { return degree_.empty() ? 0 : *std::max_element(degree_.begin(), degree_.end()); }
  int d_min() const { return degree_.empty() ? 0 : *std::min_element(degree_.begin(), degree_.end()); }

  // Neighbor lists as (neighbor, edge index).
  const std::vector<std::vector<std::pair<int, int>>>& adjacency() const { return adj_; }

  MatrixXd adjacency_matrix() const {
    MatrixXd a = MatrixXd::Zero(n_, n_);
    for (const Edge& e : edges_) a(e.i, e.j) = a(e.j, e.i) = 1.0;
    return a;
  }

  bool is_connected() const {
    if (n_ == 0) return false;
    std::vector<char> seen(static_cast<std::size_t>(n_), 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    int visited = 1;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (const auto& [u, k] : adj_[static_cast<std::size_t>(v)]) {
        if (!seen[static_cast<std::size_t>(u)]) {
          seen[static_cast<std::size_t>(u)] = 1;
          ++visited;
          queue.push_back(u);
        }
      }
    }
    return visited == n_;
  }

  // Two-coloring over every component.
  bool is_bipartite() const {
    std::vector<int> color(static_cast<std::size_t>(n_), -1);
    for (int s = 0; s < n_; ++s) {
      if (color[static_cast<std::size_t>(s)] >= 0) continue;
      color[static_cast<std::size_t>(s)] = 0;
      std::deque<int> queue{s};
      while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        for (const auto& [u, k] : adj_[static_cast<std::size_t>(v)]) {
          auto& cu = color[static_cast<std::size_t>(u)];
          const int cv = color[static_cast<std::size_t>(v)];
          if (cu < 0) {
            cu = 1 - cv;
            queue.push_back(u);
          } else if (cu == cv) {
            return false;
          }
        }
      }
    }
    return true;
  }

 private:
  ComparisonGraph(int n, std::vector<Edge> edges)
      : n_(n),
        edges_(std::move(edges)),
        degree_(static_cast<std::size_t>(n), 0),
        adj_(static_cast<std::size_t>(n)) {
    for (std::size_t k = 0; k < edges_.size(); ++k) {
      const Edge& e = edges_[k];
      ++degree_[static_cast<std::size_t>(e.i)];
      ++degree_[static_cast<std::size_t>(e.j)];
      adj_[static_cast<std::size_t>(e.i)].emplace_back(e.j, static_cast<int>(k));
      adj_[static_cast<std::size_t>(e.j)].emplace_back(e.i, static_cast<int>(k));
    }
  }

  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<int> degree_;
  std::vector<std::vector<std::pair<int, int>>> adj_;
};

// Eigenvalues of D^{-1} A in descending order, via the symmetric similarity
// D^{-1/2} A D^{-1/2}. Requires every degree to be positive.
inline VectorXd normalized_adjacency_spectrum(const ComparisonGraph& g) {
  const int n = g.num_vertices();
  VectorXd inv_sqrt_d(n);
  for (int v = 0; v < n; ++v) {
    if (g.degree(v) == 0) throw ValidationError("isolated vertex " + std::to_string(v));
    inv_sqrt_d(v) = 1.0 / std::sqrt(static_cast<double>(g.degree(v)));
  }
  MatrixXd s = MatrixXd::Zero(n, n);
  for (const Edge& e : g.edges()) {
    const double val = inv_sqrt_d(e.i) * inv_sqrt_d(e.j);
    s(e.i, e.j) = s(e.j, e.i) = val;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(s, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().reverse();
}

inline GraphDiagnostics diagnostics(const ComparisonGraph& g) {
  GraphDiagnostics d;
  d.connected = g.is_connected();
  d.bipartite = g.is_bipartite();
  d.d_min = g.d_min();
  d.d_max = g.d_max();
  if (!d.connected || g.num_vertices() < 2) {
    // Disconnected: lambda_2 = 1, so the gap vanishes. Isolated vertices make
    // D^{-1} A undefined; report the structural result only.
    d.lambda_2 = 1.0;
    d.lambda_n = d.bipartite ? -1.0 : 0.0;
    d.spectral_gap = 0.0;
    return d;
  }
  const VectorXd lambda = normalized_adjacency_spectrum(g);
  d.lambda_2 = lambda(1);
  d.lambda_n = lambda(lambda.size() - 1);
  if (d.bipartite) {
    d.spectral_gap = 0.0;
  } else {
    d.spectral_gap = std::clamp(1.0 - std::max(d.lambda_2, -d.lambda_n), 0.0, 1.0);
  }
  return d;
}

class GraphGenerationError : public NumericalError {
 public:
  GraphGenerationError(const std::string& what, GraphDiagnostics last)
      : NumericalError("graph generation", what), last_(last) {}
  const GraphDiagnostics& last_diagnostics() const { return last_; }

 private:
  GraphDiagnostics last_;
};

// G(n, dbar/n), resampled until connected and non-bipartite.
inline ComparisonGraph erdos_renyi(int n, double dbar, Rng& rng, int max_retries = 100) {
  if (n < 2) throw ValidationError("erdos_renyi requires n >= 2");
  if (!(dbar > 0.0) || dbar > n) throw ValidationError("erdos_renyi requires 0 < dbar <= n");
  if (max_retries < 1) throw ValidationError("max_retries must be >= 1");
  const double p = dbar / n;
  std::bernoulli_distribution coin(p);
  ComparisonGraph last;
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (coin(rng)) pairs.emplace_back(i, j);
    last = ComparisonGraph::from_edges(n, pairs);
    if (last.is_connected() && !last.is_bipartite()) return last;
  }
  throw GraphGenerationError("no connected non-bipartite graph after " +
                                 std::to_string(max_retries) + " attempts",
                             diagnostics(last));
}

}  // namespace mixmnl

#endif  // MIXMNL_GRAPH_HPP_

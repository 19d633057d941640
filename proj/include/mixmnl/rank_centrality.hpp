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

// RankCentrality: MNL weights as the stationary distribution of a random walk
// on the comparison graph whose edge rates come from expected pairwise
// outcomes.
//
// For edge k = (i, j) with expected outcome P_k in [-1, 1]:
//   p(i -> j) = (1 + P_k) / (2 d_max),  p(j -> i) = (1 - P_k) / (2 d_max),
// and each diagonal entry absorbs the remaining mass. With exact P_k the
// chain is reversible with stationary distribution w.

#ifndef MIXMNL_RANK_CENTRALITY_HPP_
#define MIXMNL_RANK_CENTRALITY_HPP_

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <vector>

#include "mixmnl/common.hpp"
#include "mixmnl/graph.hpp"

namespace mixmnl {

inline VectorXd project_p(const VectorXd& p_hat) {
  for (Eigen::Index k = 0; k < p_hat.size(); ++k)
    if (!std::isfinite(p_hat(k))) throw ValidationError("project_p: entry " + std::to_string(k) + " is not finite");
  return p_hat.cwiseMax(-1.0).cwiseMin(1.0);
}

// Row-stochastic transition matrix stored over the graph's edges.
class TransitionMatrix {
 public:
  TransitionMatrix(const ComparisonGraph& g, const VectorXd& p_tilde)
      : n_(g.num_vertices()), edges_(g.edges()) {
    if (p_tilde.size() != g.num_edges())
      throw ValidationError("build_transition: expected " + std::to_string(g.num_edges()) + " entries");
    const int d_max = g.d_max();
    if (d_max < 1) throw ValidationError("build_transition: graph has no edges");
    forward_.resize(g.num_edges());
    backward_.resize(g.num_edges());
    diag_ = VectorXd::Ones(n_);
    for (int k = 0; k < g.num_edges(); ++k) {
      const double pk = p_tilde(k);
      if (!(pk >= -1.0 && pk <= 1.0))
        throw ValidationError("build_transition: entry " + std::to_string(k) + " = " + std::to_string(pk) +
                              " lies outside [-1, 1]");
      forward_(k) = (1.0 + pk) / (2.0 * d_max);
      backward_(k) = (1.0 - pk) / (2.0 * d_max);
      diag_(edges_[static_cast<std::size_t>(k)].i) -= forward_(k);
      diag_(edges_[static_cast<std::size_t>(k)].j) -= backward_(k);
    }
    // Each vertex has at most d_max incident edges contributing at most
    // 1/d_max each, so the residual is nonnegative up to rounding.
    diag_ = diag_.cwiseMax(0.0);
  }

  int size() const { return n_; }
  const VectorXd& forward() const { return forward_; }
  const VectorXd& backward() const { return backward_; }
  const VectorXd& diagonal() const { return diag_; }

  // pi^T p
  VectorXd left_multiply(const VectorXd& pi) const {
    VectorXd out = pi.cwiseProduct(diag_);
    for (std::size_t k = 0; k < edges_.size(); ++k) {
      const Edge& e = edges_[k];
      out(e.j) += pi(e.i) * forward_(static_cast<Eigen::Index>(k));
      out(e.i) += pi(e.j) * backward_(static_cast<Eigen::Index>(k));
    }
    return out;
  }

  MatrixXd to_dense() const {
    MatrixXd p = diag_.asDiagonal();
    for (std::size_t k = 0; k < edges_.size(); ++k) {
      const Edge& e = edges_[k];
      p(e.i, e.j) += forward_(static_cast<Eigen::Index>(k));
      p(e.j, e.i) += backward_(static_cast<Eigen::Index>(k));
    }
    return p;
  }

  // Strong connectivity over positive-rate transitions.
  bool irreducible() const {
    auto reach = [&](bool reverse) {
      std::vector<std::vector<int>> out(static_cast<std::size_t>(n_));
      for (std::size_t k = 0; k < edges_.size(); ++k) {
        const Edge& e = edges_[k];
        const bool ij = forward_(static_cast<Eigen::Index>(k)) > 0.0;
        const bool ji = backward_(static_cast<Eigen::Index>(k)) > 0.0;
        if (reverse ? ji : ij) out[static_cast<std::size_t>(e.i)].push_back(e.j);
        if (reverse ? ij : ji) out[static_cast<std::size_t>(e.j)].push_back(e.i);
      }
      std::vector<char> seen(static_cast<std::size_t>(n_), 0);
      std::deque<int> queue{0};
      seen[0] = 1;
      int count = 1;
      while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        for (int u : out[static_cast<std::size_t>(v)])
          if (!seen[static_cast<std::size_t>(u)]) {
            seen[static_cast<std::size_t>(u)] = 1;
            ++count;
            queue.push_back(u);
          }
      }
      return count == n_;
    };
    return n_ > 0 && reach(false) && reach(true);
  }

 private:
  int n_;
  std::vector<Edge> edges_;
  VectorXd forward_;
  VectorXd backward_;
  VectorXd diag_;
};

inline TransitionMatrix build_transition(const ComparisonGraph& g, const VectorXd& p_tilde) {
  return TransitionMatrix(g, p_tilde);
}

struct StationaryResult {
  VectorXd pi;
  double last_change = 0.0;  // ||pi_T - pi_{T-1}||_2
  int iterations = 0;
};

// Runs T2 steps, or stops once a step moves pi by less than tolerance (0 runs
// all T2 steps).
inline StationaryResult stationary_power(const TransitionMatrix& tm, int iterations, const VectorXd& init,
                                         double tolerance = 0.0) {
  if (iterations < 1) throw ValidationError("stationary_power requires T2 >= 1");
  if (init.size() != tm.size()) throw ValidationError("stationary_power: initial distribution has wrong size");
  if ((init.array() < 0.0).any() || std::abs(init.sum() - 1.0) > 1e-9)
    throw ValidationError("stationary_power: initial vector is not a probability distribution");
  StationaryResult res;
  res.pi = init;
  for (int t = 0; t < iterations; ++t) {
    VectorXd next = tm.left_multiply(res.pi);
    next /= next.sum();
    res.last_change = (next - res.pi).norm();
    res.pi = std::move(next);
    ++res.iterations;
    if (res.last_change < tolerance) break;
  }
  return res;
}

inline constexpr int kMaxDenseStationary = 2000;

// Solves pi^T (p - I) = 0 with sum(pi) = 1 by a dense LU solve.
inline VectorXd exact_stationary(const TransitionMatrix& tm) {
  const int n = tm.size();
  if (n > kMaxDenseStationary)
    throw ValidationError("exact_stationary is limited to n <= " + std::to_string(kMaxDenseStationary));
  if (!tm.irreducible()) throw NumericalError("rank centrality", "transition matrix is reducible");
  MatrixXd a = tm.to_dense().transpose() - MatrixXd::Identity(n, n);
  a.row(n - 1).setOnes();
  VectorXd rhs = VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  return a.partialPivLu().solve(rhs);
}

// T2 = ceil(b^2 d_max (ln n + ln(1/eps)) / (xi d_min)) with unit constant.
inline int default_power_iterations(double b, int d_max, int d_min, double xi, int n, double eps = 1e-8) {
  if (!(xi > 0.0) || d_min < 1) throw ValidationError("default T2 requires a connected non-bipartite graph");
  const double t = b * b * d_max * (std::log(static_cast<double>(n)) + std::log(1.0 / eps)) / (xi * d_min);
  if (!(t < static_cast<double>(std::numeric_limits<int>::max()))) return std::numeric_limits<int>::max();
  return std::max(1, static_cast<int>(std::ceil(t)));
}

struct RankCentralityResult {
  VectorXd weights;  // sums to one
  StationaryResult power;
};

// A step that moves pi by less than this is a numerical fixed point.
inline constexpr double kPowerFixedPoint = 1e-15;

inline RankCentralityResult rank_centrality(const ComparisonGraph& g, const VectorXd& p_hat, int iterations) {
  const TransitionMatrix tm = build_transition(g, project_p(p_hat));
  const int n = g.num_vertices();
  RankCentralityResult res;
  res.power = stationary_power(tm, iterations, VectorXd::Constant(n, 1.0 / n), kPowerFixedPoint);
  res.weights = res.power.pi;
  return res;
}

}  // namespace mixmnl

#endif  // MIXMNL_RANK_CENTRALITY_HPP_

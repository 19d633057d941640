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

// Mixed MNL ground truth and pairwise-comparison sampling.
//
// Outcome convention: for pair k = (i_k, j_k), an entry of +1 means j_k was
// preferred over i_k. With that convention the conditional mean of an
// observed entry under component a is
//   P_ka = (w_j - w_i) / (w_j + w_i).

#ifndef MIXMNL_MODEL_HPP_
#define MIXMNL_MODEL_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "mixmnl/common.hpp"
#include "mixmnl/graph.hpp"

namespace mixmnl {

class MixedMNLModel {
 public:
  MixedMNLModel() = default;

  // weights[a] is the length-n weight vector of component a. Each component is
  // normalized to sum to one.
  static MixedMNLModel create(const std::vector<std::vector<double>>& weights,
                              const std::vector<double>& q) {
    if (weights.empty()) throw ValidationError("model needs at least one component");
    if (weights.size() != q.size())
      throw ValidationError("weights has " + std::to_string(weights.size()) +
                            " components but q has " + std::to_string(q.size()));
    const std::size_t n = weights.front().size();
    if (n < 2) throw ValidationError("model needs at least two items");
    const int r = static_cast<int>(weights.size());
    MixedMNLModel m;
    m.weights_.resize(static_cast<Eigen::Index>(n), r);
    m.q_.resize(r);
    for (int a = 0; a < r; ++a) {
      const auto& w = weights[static_cast<std::size_t>(a)];
      if (w.size() != n) throw ValidationError("component weight vectors differ in length");
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!(w[i] > 0.0) || !std::isfinite(w[i]))
          throw ValidationError("weight " + std::to_string(i) + " of component " +
                                std::to_string(a) + " is not positive");
        total += w[i];
      }
      // Already-normalized input is kept bit-for-bit so serialized models
      // round-trip exactly.
      const double scale = std::abs(total - 1.0) <= 1e-12 ? 1.0 : total;
      for (std::size_t i = 0; i < n; ++i) m.weights_(static_cast<Eigen::Index>(i), a) = w[i] / scale;
      const double qa = q[static_cast<std::size_t>(a)];
      if (!(qa > 0.0) || !std::isfinite(qa))
        throw ValidationError("mixture probability " + std::to_string(a) + " is not positive");
      m.q_(a) = qa;
    }
    if (std::abs(m.q_.sum() - 1.0) > 1e-12) m.q_ /= m.q_.sum();
    return m;
  }

  int num_components() const { return static_cast<int>(q_.size()); }
  int num_items() const { return static_cast<int>(weights_.rows()); }

  // n x r, column a is w^(a).
  const MatrixXd& weights() const { return weights_; }
  VectorXd weights(int a) const { return weights_.col(a); }
  const VectorXd& q() const { return q_; }

  double q_max() const { return q_.maxCoeff(); }
  double q_min() const { return q_.minCoeff(); }

  // Dynamic range b = max_a max_{i,j} w_i / w_j.
  double dynamic_range() const {
    double b = 1.0;
    for (int a = 0; a < num_components(); ++a)
      b = std::max(b, weights_.col(a).maxCoeff() / weights_.col(a).minCoeff());
    return b;
  }

 private:
  MatrixXd weights_;
  VectorXd q_;
};

inline double pairwise_win_prob(const MixedMNLModel& m, int a, int i, int j) {
  if (a < 0 || a >= m.num_components()) throw ValidationError("component index out of range");
  if (i < 0 || j < 0 || i >= m.num_items() || j >= m.num_items())
    throw ValidationError("item index out of range");
  if (i == j) throw ValidationError("pairwise_win_prob needs distinct items");
  const double wi = m.weights()(i, a);
  const double wj = m.weights()(j, a);
  return wi / (wi + wj);
}

inline void check_dimensions(const MixedMNLModel& m, const ComparisonGraph& g) {
  if (m.num_items() != g.num_vertices())
    throw ValidationError("model has " + std::to_string(m.num_items()) +
                          " items but graph has " + std::to_string(g.num_vertices()) + " vertices");
}

inline VectorXd component_p_vector(const MixedMNLModel& m, int a, const ComparisonGraph& g) {
  check_dimensions(m, g);
  if (a < 0 || a >= m.num_components()) throw ValidationError("component index out of range");
  VectorXd p(g.num_edges());
  for (int k = 0; k < g.num_edges(); ++k) {
    const Edge& e = g.edge(k);
    const double wi = m.weights()(e.i, a);
    const double wj = m.weights()(e.j, a);
    p(k) = (wj - wi) / (wj + wi);
  }
  return p;
}

// N x r matrix whose column a is component_p_vector(m, a, g).
inline MatrixXd p_matrix(const MixedMNLModel& m, const ComparisonGraph& g) {
  MatrixXd p(g.num_edges(), m.num_components());
  for (int a = 0; a < m.num_components(); ++a) p.col(a) = component_p_vector(m, a, g);
  return p;
}

struct ObservedPair {
  int pair = 0;
  int outcome = 0;  // +1: second endpoint preferred, -1: first endpoint preferred
  friend bool operator==(const ObservedPair&, const ObservedPair&) = default;
};

// Sparse {-1, 0, +1}^N vector with exactly ell nonzeros, sorted by pair.
struct Observation {
  std::vector<ObservedPair> entries;
  friend bool operator==(const Observation&, const Observation&) = default;
};

struct ObservationBatch {
  int num_pairs = 0;
  int ell = 0;
  std::vector<Observation> observations;

  std::size_t size() const { return observations.size(); }
  friend bool operator==(const ObservationBatch&, const ObservationBatch&) = default;

  void validate() const {
    if (ell < 1 || ell > num_pairs)
      throw ValidationError("ell=" + std::to_string(ell) + " must lie in [1, N=" +
                            std::to_string(num_pairs) + "]");
    for (std::size_t t = 0; t < observations.size(); ++t) {
      const auto& e = observations[t].entries;
      if (static_cast<int>(e.size()) != ell)
        throw ValidationError("observation " + std::to_string(t) + " has " +
                              std::to_string(e.size()) + " entries, expected " + std::to_string(ell));
      for (std::size_t s = 0; s < e.size(); ++s) {
        if (e[s].pair < 0 || e[s].pair >= num_pairs)
          throw ValidationError("observation " + std::to_string(t) + " has pair index out of range");
        if (s > 0 && e[s].pair <= e[s - 1].pair)
          throw ValidationError("observation " + std::to_string(t) +
                                " pair indices are not strictly increasing");
        if (e[s].outcome != 1 && e[s].outcome != -1)
          throw ValidationError("observation " + std::to_string(t) + " has outcome outside {-1, 1}");
      }
    }
  }
};

// ell distinct indices from [0, count), sorted (Floyd's algorithm).
inline std::vector<int> sample_without_replacement(int count, int ell, Rng& rng) {
  std::set<int> chosen;
  for (int j = count - ell; j < count; ++j) {
    std::uniform_int_distribution<int> pick(0, j);
    const int t = pick(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  return {chosen.begin(), chosen.end()};
}

inline Observation sample_observation(const MixedMNLModel& m, const ComparisonGraph& g, int ell,
                                      Rng& rng) {
  const int n_pairs = g.num_edges();
  if (ell < 1 || ell > n_pairs)
    throw ValidationError("ell=" + std::to_string(ell) + " must lie in [1, N=" +
                          std::to_string(n_pairs) + "]");
  std::discrete_distribution<int> component(m.q().data(), m.q().data() + m.q().size());
  const int a = component(rng);
  Observation obs;
  obs.entries.reserve(static_cast<std::size_t>(ell));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k : sample_without_replacement(n_pairs, ell, rng)) {
    const Edge& e = g.edge(k);
    const double wi = m.weights()(e.i, a);
    const double wj = m.weights()(e.j, a);
    const bool second_wins = unit(rng) < wj / (wi + wj);
    obs.entries.push_back({k, second_wins ? 1 : -1});
  }
  return obs;
}

inline ObservationBatch sample_batch(const MixedMNLModel& m, const ComparisonGraph& g, int ell,
                                     std::size_t count, Rng& rng) {
  check_dimensions(m, g);
  if (ell < 1 || ell > g.num_edges())
    throw ValidationError("ell=" + std::to_string(ell) + " must lie in [1, N=" +
                          std::to_string(g.num_edges()) + "]");
  ObservationBatch batch;
  batch.num_pairs = g.num_edges();
  batch.ell = ell;
  batch.observations.reserve(count);
  for (std::size_t t = 0; t < count; ++t) batch.observations.push_back(sample_observation(m, g, ell, rng));
  return batch;
}

// Weights drawn i.i.d. uniform on [lo, hi] per item and component, uniform q.
inline MixedMNLModel random_uniform_model(int n, int r, double lo, double hi, Rng& rng) {
  if (r < 1) throw ValidationError("r must be >= 1");
  if (!(lo > 0.0) || !(hi >= lo)) throw ValidationError("weight range must satisfy 0 < lo <= hi");
  std::uniform_real_distribution<double> unit(lo, hi);
  std::vector<std::vector<double>> w(static_cast<std::size_t>(r), std::vector<double>(static_cast<std::size_t>(n)));
  for (auto& comp : w)
    for (auto& x : comp) x = unit(rng);
  return MixedMNLModel::create(w, std::vector<double>(static_cast<std::size_t>(r), 1.0 / r));
}

// Pairwise marginals of a uniform mixture over deterministic rankings.
// Entry (u, v) is P(u ranked above v); the diagonal is zero.
inline MatrixXd ranking_mixture_marginals(const std::vector<std::array<int, 4>>& rankings) {
  MatrixXd out = MatrixXd::Zero(4, 4);
  for (const auto& ranking : rankings) {
    std::array<int, 4> position{};
    for (int p = 0; p < 4; ++p) position[static_cast<std::size_t>(ranking[static_cast<std::size_t>(p)])] = p;
    for (int u = 0; u < 4; ++u)
      for (int v = 0; v < 4; ++v)
        if (u != v && position[static_cast<std::size_t>(u)] < position[static_cast<std::size_t>(v)]) out(u, v) += 1.0;
  }
  return out / static_cast<double>(rankings.size());
}

struct Fig1Marginals {
  MatrixXd case1;
  MatrixXd case2;
};

// Items a, b, c, d are 0..3. Case 1 mixes a>b>c>d with b>a>d>c; case 2 mixes
// b>a>c>d with a>b>d>c. Both give identical pairwise marginals.
inline Fig1Marginals fig1_pairwise_marginals() {
  return {ranking_mixture_marginals({{0, 1, 2, 3}, {1, 0, 3, 2}}),
          ranking_mixture_marginals({{1, 0, 2, 3}, {0, 1, 3, 2}})};
}

}  // namespace mixmnl

#endif  // MIXMNL_MODEL_HPP_

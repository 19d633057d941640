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

// End-to-end learning of a mixed MNL model: moment decomposition for (q, P),
// then RankCentrality per component. Also component matching against ground
// truth, learnability diagnostics and |S| sweeps.

#ifndef MIXMNL_PIPELINE_HPP_
#define MIXMNL_PIPELINE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mixmnl/common.hpp"
#include "mixmnl/graph.hpp"
#include "mixmnl/model.hpp"
#include "mixmnl/moments.hpp"
#include "mixmnl/rank_centrality.hpp"
#include "mixmnl/spectral.hpp"

namespace mixmnl {

struct LearnConfig {
  int r = 2;
  std::optional<int> t1;
  std::optional<int> t2;
  std::uint64_t seed = 1;
  // Debug oracle: replace empirical moments with the exact moments of this
  // model.
  const MixedMNLModel* exact_moments_from = nullptr;
};

struct ComponentEstimates {
  VectorXd q_hat;  // length r
  MatrixXd w_hat;  // n x r, columns sum to one
  MatrixXd p_hat;  // N x r, before projection onto [-1, 1]
  int t1 = 0;
  int t2 = 0;
  double b_estimate = 0.0;  // dynamic range used for the default T2
  std::vector<double> power_last_change;
  MixtureMomentsEstimate spectral;
  bool exact_moments = false;
};

namespace internal {

inline MixtureMomentsEstimate exact_moment_estimate(const MixedMNLModel& m, const ComparisonGraph& g, int r,
                                                    Rng& rng) {
  check_dimensions(m, g);
  const M2Spectrum m2s = m2_spectrum(m, g);
  if (r > m2s.sigma.size() || !(m2s.sigma(r - 1) > 1e-10 * m2s.sigma(0)))
    throw RankDeficiencyError("second moment", "exact M2 has rank below r=" + std::to_string(r), m2s.sigma);
  WhiteningBasis basis{m2s.u.leftCols(r), m2s.sigma.head(r)};
  return decompose_whitened(basis, whitened_exact_m3(m, g, basis.whitening()), r, rng);
}

}  // namespace internal

inline ComponentEstimates learn_mixed_mnl(const ObservationBatch& batch, const ComparisonGraph& g,
                                          const LearnConfig& cfg) {
  if (cfg.r < 1) throw ValidationError("r must be >= 1");
  if (batch.num_pairs != g.num_edges())
    throw ValidationError("batch has N=" + std::to_string(batch.num_pairs) + " but graph has " +
                          std::to_string(g.num_edges()) + " edges");
  if (cfg.t1 && *cfg.t1 < 1) throw ValidationError("t1 must be >= 1");
  if (cfg.t2 && *cfg.t2 < 1) throw ValidationError("t2 must be >= 1");
  const GraphDiagnostics gd = diagnostics(g);
  if (!gd.connected) throw ValidationError("comparison graph is not connected");

  Rng rng(cfg.seed);
  ComponentEstimates out;
  if (cfg.exact_moments_from != nullptr) {
    out.exact_moments = true;
    out.spectral = internal::exact_moment_estimate(*cfg.exact_moments_from, g, cfg.r, rng);
  } else {
    batch.validate();
    SpectralOptions opts;
    opts.altmin_iterations = cfg.t1.value_or(default_spectral_iterations(batch.num_pairs, batch.size()));
    out.t1 = *opts.altmin_iterations;
    out.spectral = spectral_dist(batch, cfg.r, rng, opts);
  }
  out.q_hat = out.spectral.q_hat;
  out.p_hat = out.spectral.p_hat;

  const int n = g.num_vertices();
  out.w_hat.resize(n, cfg.r);
  for (int a = 0; a < cfg.r; ++a) {
    const VectorXd p_tilde = project_p(out.p_hat.col(a));
    int t2 = 0;
    if (cfg.t2) {
      t2 = *cfg.t2;
    } else {
      if (gd.bipartite) throw ValidationError("default T2 requires a non-bipartite comparison graph");
      // The dynamic range is unknown; estimate it from a b-free pilot run.
      const int pilot = default_power_iterations(1.0, gd.d_max, gd.d_min, gd.spectral_gap, n);
      const VectorXd w0 = rank_centrality(g, p_tilde, pilot).weights;
      const double b = std::clamp(w0.maxCoeff() / std::max(w0.minCoeff(), 1e-300), 1.0, 1e3);
      out.b_estimate = std::max(out.b_estimate, b);
      t2 = default_power_iterations(b, gd.d_max, gd.d_min, gd.spectral_gap, n);
    }
    out.t2 = std::max(out.t2, t2);
    const RankCentralityResult rc = rank_centrality(g, p_tilde, t2);
    out.w_hat.col(a) = rc.weights;
    out.power_last_change.push_back(rc.power.last_change);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Component matching.

// perm[a] = estimate index assigned to truth component a, minimizing
// sum_a cost(a, perm[a]). Exhaustive for r <= 8, Hungarian algorithm above.
inline std::vector<int> min_cost_assignment(const MatrixXd& cost) {
  const int r = static_cast<int>(cost.rows());
  if (cost.cols() != r) throw ValidationError("assignment cost matrix must be square");
  std::vector<int> perm(static_cast<std::size_t>(r));
  std::iota(perm.begin(), perm.end(), 0);
  if (r <= 8) {
    std::vector<int> best = perm;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
      double c = 0.0;
      for (int a = 0; a < r; ++a) c += cost(a, perm[static_cast<std::size_t>(a)]);
      if (c < best_cost) {
        best_cost = c;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  // Hungarian algorithm with potentials, 1-based internally.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(r + 1), 0.0), v(static_cast<std::size_t>(r + 1), 0.0);
  std::vector<int> p(static_cast<std::size_t>(r + 1), 0), way(static_cast<std::size_t>(r + 1), 0);
  for (int i = 1; i <= r; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(r + 1), inf);
    std::vector<char> used(static_cast<std::size_t>(r + 1), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= r; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= r; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  for (int j = 1; j <= r; ++j) perm[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return perm;
}

struct MatchResult {
  std::vector<int> permutation;      // truth a <-> estimate permutation[a]
  std::vector<double> q_error;       // |q_hat - q|
  std::vector<double> w_rel_error;   // ||w_hat - w|| / ||w||
  double total_cost = 0.0;

  double max_q_error() const { return q_error.empty() ? 0.0 : *std::max_element(q_error.begin(), q_error.end()); }
  double max_w_error() const {
    return w_rel_error.empty() ? 0.0 : *std::max_element(w_rel_error.begin(), w_rel_error.end());
  }
};

// Cost of pairing truth a with estimate b: |q_hat_b - q_a| + ||w_hat_b - w_a|| / ||w_a||.
inline MatrixXd matching_costs(const VectorXd& q_hat, const MatrixXd& w_hat, const VectorXd& q, const MatrixXd& w) {
  const int r = static_cast<int>(q.size());
  MatrixXd cost(r, r);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      cost(a, b) = std::abs(q_hat(b) - q(a)) + (w_hat.col(b) - w.col(a)).norm() / w.col(a).norm();
  return cost;
}

inline MatchResult match_components(const VectorXd& q_hat, const MatrixXd& w_hat, const MixedMNLModel& truth) {
  const int r = truth.num_components();
  if (q_hat.size() != r || w_hat.cols() != r) throw ValidationError("match_components: component counts differ");
  if (w_hat.rows() != truth.num_items()) throw ValidationError("match_components: item counts differ");
  const MatrixXd cost = matching_costs(q_hat, w_hat, truth.q(), truth.weights());
  MatchResult res;
  res.permutation = min_cost_assignment(cost);
  for (int a = 0; a < r; ++a) {
    const int b = res.permutation[static_cast<std::size_t>(a)];
    res.q_error.push_back(std::abs(q_hat(b) - truth.q()(a)));
    res.w_rel_error.push_back((w_hat.col(b) - truth.weights().col(a)).norm() / truth.weights().col(a).norm());
    res.total_cost += cost(a, b);
  }
  return res;
}

inline MatchResult match_components(const ComponentEstimates& est, const MixedMNLModel& truth) {
  return match_components(est.q_hat, est.w_hat, truth);
}

// ---------------------------------------------------------------------------
// Learnability diagnostics.

struct ConditionReport {
  int r = 0;
  int m2_rank = 0;
  double sigma_1 = 0.0;
  double sigma_r = 0.0;
  double condition_ratio = 0.0;  // sigma_1 / sigma_r
  double incoherence = 0.0;
  GraphDiagnostics graph;
  double b = 0.0;
  double q_min = 0.0;
  double q_max = 0.0;
  int n = 0;
  int num_pairs = 0;
  int ell = 0;
  double delta = 0.1;
  double epsilon = 0.1;
  // Order-of-magnitude values with universal constants omitted.
  double sample_size_expression = 0.0;
  double epsilon_upper_bound = 0.0;
  bool c1_full_rank = false;
  bool c3_connected = false;
};

inline ConditionReport check_conditions(const MixedMNLModel& m, const ComparisonGraph& g, int ell,
                                        double delta = 0.1, double epsilon = 0.1) {
  check_dimensions(m, g);
  ConditionReport rep;
  rep.r = m.num_components();
  rep.n = g.num_vertices();
  rep.num_pairs = g.num_edges();
  rep.ell = ell;
  rep.delta = delta;
  rep.epsilon = epsilon;
  rep.b = m.dynamic_range();
  rep.q_min = m.q_min();
  rep.q_max = m.q_max();
  rep.graph = diagnostics(g);
  rep.c3_connected = rep.graph.connected;

  const M2Spectrum m2s = m2_spectrum(m, g);
  const int r = rep.r;
  rep.sigma_1 = m2s.sigma.size() > 0 ? m2s.sigma(0) : 0.0;
  for (Eigen::Index a = 0; a < m2s.sigma.size(); ++a)
    if (m2s.sigma(a) > 1e-10 * rep.sigma_1) ++rep.m2_rank;
  rep.sigma_r = m2s.sigma.size() >= r ? m2s.sigma(r - 1) : 0.0;
  rep.c1_full_rank = rep.m2_rank == r;
  rep.condition_ratio = rep.sigma_r > 0.0 ? rep.sigma_1 / rep.sigma_r : std::numeric_limits<double>::infinity();
  if (m2s.u.cols() >= r) rep.incoherence = incoherence_of_basis(m2s.u.leftCols(r));

  const double n_pairs = rep.num_pairs;
  const double s1 = rep.sigma_1;
  const double sr = rep.sigma_r;
  const double bracket = 1.0 / (static_cast<double>(ell) * ell) + s1 / (ell * n_pairs) +
                         std::pow(r, 4) * std::pow(s1, 4) / std::pow(sr, 5);
  rep.sample_size_expression = r * std::pow(n_pairs, 4) * std::log(n_pairs / delta) /
                               (rep.q_min * s1 * s1 * epsilon * epsilon) * bracket;
  const double xi = rep.graph.spectral_gap;
  rep.epsilon_upper_bound =
      std::sqrt(rep.q_min * xi * xi * rep.graph.d_min * rep.graph.d_min /
                (16.0 * rep.q_max * r * s1 * std::pow(rep.b, 5) * rep.graph.d_max * rep.graph.d_max));
  return rep;
}

// ---------------------------------------------------------------------------
// Sample-size sweeps on the uniform-weight illustration model.

struct SweepConfig {
  int n = 30;
  double dbar = 8.0;
  int r = 2;
  int ell = 10;
  double w_lo = 1.0;
  double w_hi = 2.0;
  std::optional<int> t1;
  std::optional<int> t2;
  std::uint64_t base_seed = 1;
  unsigned workers = 0;  // 0: hardware concurrency
};

struct SweepRow {
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  double q_error = std::numeric_limits<double>::infinity();  // max over components
  double w_error = std::numeric_limits<double>::infinity();
  std::string detail;
};

struct SweepSummary {
  std::size_t samples = 0;
  double median_q_error = 0.0;
  double median_w_error = 0.0;
  int failures = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepSummary> summary;
};

struct SweepInstance {
  MixedMNLModel model;
  ComparisonGraph graph;
};

// Model and graph depend on the seed only, so every |S| in the grid sees the
// same instance.
inline SweepInstance sweep_instance(const SweepConfig& cfg, std::uint64_t seed) {
  Rng rng(derive_seed(cfg.base_seed, {seed, 0}));
  ComparisonGraph g = erdos_renyi(cfg.n, cfg.dbar, rng);
  MixedMNLModel m = random_uniform_model(cfg.n, cfg.r, cfg.w_lo, cfg.w_hi, rng);
  return {std::move(m), std::move(g)};
}

inline SweepRow run_sweep_cell(const SweepConfig& cfg, std::size_t samples, std::uint64_t seed) {
  SweepRow row;
  row.samples = samples;
  row.seed = seed;
  try {
    const SweepInstance inst = sweep_instance(cfg, seed);
    Rng sampler(derive_seed(cfg.base_seed, {seed, samples, 1}));
    const ObservationBatch batch = sample_batch(inst.model, inst.graph, cfg.ell, samples, sampler);
    LearnConfig lc;
    lc.r = cfg.r;
    lc.t1 = cfg.t1;
    lc.t2 = cfg.t2;
    lc.seed = derive_seed(cfg.base_seed, {seed, samples, 2});
    const ComponentEstimates est = learn_mixed_mnl(batch, inst.graph, lc);
    const MatchResult match = match_components(est, inst.model);
    row.ok = true;
    row.q_error = match.max_q_error();
    row.w_error = match.max_w_error();
  } catch (const std::exception& e) {
    row.ok = false;
    row.detail = e.what();
  }
  return row;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  if (v.size() % 2 == 1) return v[m];
  // inf + inf stays inf; inf + finite is inf.
  return 0.5 * (v[m - 1] + v[m]);
}

// Failed runs count as infinite error in the medians.
inline SweepResult run_sweep(const SweepConfig& cfg, const std::vector<std::size_t>& sample_sizes,
                             const std::vector<std::uint64_t>& seeds) {
  SweepResult res;
  if (seeds.empty() || sample_sizes.empty()) return res;
  std::vector<std::pair<std::size_t, std::uint64_t>> cells;
  for (std::size_t s : sample_sizes)
    for (std::uint64_t seed : seeds) cells.emplace_back(s, seed);
  res.rows.resize(cells.size());
  const unsigned workers =
      std::max(1u, cfg.workers != 0 ? cfg.workers : std::thread::hardware_concurrency());
  std::size_t next = 0;
  while (next < cells.size()) {
    std::vector<std::future<SweepRow>> batch;
    const std::size_t stop = std::min(cells.size(), next + workers);
    for (std::size_t c = next; c < stop; ++c)
      batch.push_back(std::async(std::launch::async, run_sweep_cell, std::cref(cfg), cells[c].first, cells[c].second));
    for (std::size_t c = next; c < stop; ++c) res.rows[c] = batch[c - next].get();
    next = stop;
  }
  for (std::size_t s : sample_sizes) {
    SweepSummary sum;
    sum.samples = s;
    std::vector<double> qe, we;
    for (const SweepRow& row : res.rows) {
      if (row.samples != s) continue;
      qe.push_back(row.q_error);
      we.push_back(row.w_error);
      if (!row.ok) ++sum.failures;
    }
    sum.median_q_error = median(qe);
    sum.median_w_error = median(we);
    res.summary.push_back(sum);
  }
  return res;
}

inline std::string format_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

inline std::string sweep_to_csv(const SweepResult& res) {
  std::ostringstream os;
  os << "kind,samples,seed,status,q_error,w_error,detail\n";
  for (const SweepRow& row : res.rows)
    os << "run," << row.samples << ',' << row.seed << ',' << (row.ok ? "ok" : "failed") << ','
       << format_double(row.q_error) << ',' << format_double(row.w_error) << ',' << csv_escape(row.detail) << '\n';
  for (const SweepSummary& s : res.summary)
    os << "median," << s.samples << ",," << (s.failures == 0 ? "ok" : std::to_string(s.failures) + "_failed") << ','
       << format_double(s.median_q_error) << ',' << format_double(s.median_w_error) << ",\n";
  return os.str();
}

}  // namespace mixmnl

#endif  // MIXMNL_PIPELINE_HPP_

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

// JSON (de)serialization of datasets, learned estimates and diagnostics.
//
// Dataset:
//   {"n": int, "ell": int, "graph": {"n": int, "edges": [[i, j], ...]},
//    "observations": [[[k, s], ...], ...],
//    "ground_truth": {"q": [...], "weights": [[...], ...]}}   (optional)
// Results:
//   {"q_hat": [...], "w_hat": [[...]], "p_hat": [[...]], "diagnostics": {...},
//    "matching": {...}}                                        (optional)

#ifndef MIXMNL_IO_HPP_
#define MIXMNL_IO_HPP_

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mixmnl/common.hpp"
#include "mixmnl/graph.hpp"
#include "mixmnl/model.hpp"
#include "mixmnl/pipeline.hpp"

namespace mixmnl {

using json = nlohmann::json;

struct Dataset {
  ComparisonGraph graph;
  ObservationBatch batch;
  std::optional<MixedMNLModel> ground_truth;
};

inline json vector_to_json(const VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

// One JSON array per column.
inline json columns_to_json(const MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(vector_to_json(m.col(c)));
  return out;
}

inline json matrix_rows_to_json(const MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_to_json(m.row(r).transpose()));
  return out;
}

inline json tensor_to_json(const Tensor3& t) {
  json out = json::array();
  for (int i = 0; i < t.dim(); ++i) {
    json plane = json::array();
    for (int j = 0; j < t.dim(); ++j) {
      json row = json::array();
      for (int k = 0; k < t.dim(); ++k) row.push_back(t(i, j, k));
      plane.push_back(row);
    }
    out.push_back(plane);
  }
  return out;
}

inline json graph_to_json(const ComparisonGraph& g) {
  json edges = json::array();
  for (const Edge& e : g.edges()) edges.push_back({e.i, e.j});
  return {{"n", g.num_vertices()}, {"edges", edges}};
}

inline json model_to_json(const MixedMNLModel& m) {
  return {{"q", vector_to_json(m.q())}, {"weights", columns_to_json(m.weights())}};
}

inline json dataset_to_json(const Dataset& d) {
  json obs = json::array();
  for (const Observation& o : d.batch.observations) {
    json entries = json::array();
    for (const ObservedPair& p : o.entries) entries.push_back({p.pair, p.outcome});
    obs.push_back(std::move(entries));
  }
  json out = {{"n", d.graph.num_vertices()},
              {"ell", d.batch.ell},
              {"graph", graph_to_json(d.graph)},
              {"observations", std::move(obs)}};
  if (d.ground_truth) out["ground_truth"] = model_to_json(*d.ground_truth);
  return out;
}

namespace internal {

template <typename T>
T get_field(const json& j, const char* key, const char* where) {
  if (!j.is_object() || !j.contains(key))
    throw ValidationError(std::string(where) + ": missing field \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string(where) + ": field \"" + key + "\" has the wrong type");
  }
}

}  // namespace internal

inline ComparisonGraph graph_from_json(const json& j) {
  const int n = internal::get_field<int>(j, "n", "graph");
  const auto edges = internal::get_field<std::vector<std::vector<int>>>(j, "edges", "graph");
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(edges.size());
  for (const auto& e : edges) {
    if (e.size() != 2) throw ValidationError("graph: every edge must have two endpoints");
    pairs.emplace_back(e[0], e[1]);
  }
  return ComparisonGraph::from_edges(n, pairs);
}

inline MixedMNLModel model_from_json(const json& j) {
  return MixedMNLModel::create(internal::get_field<std::vector<std::vector<double>>>(j, "weights", "ground_truth"),
                               internal::get_field<std::vector<double>>(j, "q", "ground_truth"));
}

inline Dataset dataset_from_json(const json& j) {
  Dataset d;
  const int n = internal::get_field<int>(j, "n", "dataset");
  d.graph = graph_from_json(internal::get_field<json>(j, "graph", "dataset"));
  if (d.graph.num_vertices() != n) throw ValidationError("dataset: n disagrees with graph.n");
  d.batch.num_pairs = d.graph.num_edges();
  d.batch.ell = internal::get_field<int>(j, "ell", "dataset");
  const auto obs = internal::get_field<json>(j, "observations", "dataset");
  if (!obs.is_array()) throw ValidationError("dataset: observations must be an array");
  d.batch.observations.reserve(obs.size());
  for (const json& o : obs) {
    if (!o.is_array()) throw ValidationError("dataset: each observation must be an array");
    Observation ob;
    ob.entries.reserve(o.size());
    for (const json& e : o) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
        throw ValidationError("dataset: each observation entry must be [pair, outcome] integers");
      ob.entries.push_back({e[0].get<int>(), e[1].get<int>()});
    }
    d.batch.observations.push_back(std::move(ob));
  }
  d.batch.validate();
  if (j.contains("ground_truth")) {
    d.ground_truth = model_from_json(j.at("ground_truth"));
    check_dimensions(*d.ground_truth, d.graph);
  }
  return d;
}

inline json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(origin + ": invalid JSON (" + e.what() + ")");
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out << content;
}

// Datasets are written compactly, everything else indented.
inline std::string dump(const json& j, bool pretty = true) { return (pretty ? j.dump(2) : j.dump()) + "\n"; }

inline Dataset load_dataset(const std::string& path) { return dataset_from_json(parse_json_text(read_file(path), path)); }

inline json graph_diagnostics_to_json(const GraphDiagnostics& d) {
  return {{"connected", d.connected},   {"bipartite", d.bipartite}, {"spectral_gap", d.spectral_gap},
          {"lambda_2", d.lambda_2},     {"lambda_n", d.lambda_n},   {"d_min", d.d_min},
          {"d_max", d.d_max}};
}

inline json conditions_to_json(const ConditionReport& c) {
  return {{"r", c.r},
          {"m2_rank", c.m2_rank},
          {"c1_full_rank", c.c1_full_rank},
          {"c3_connected", c.c3_connected},
          {"sigma_1", c.sigma_1},
          {"sigma_r", c.sigma_r},
          {"sigma_ratio", c.condition_ratio},
          {"incoherence", c.incoherence},
          {"graph", graph_diagnostics_to_json(c.graph)},
          {"b", c.b},
          {"q_min", c.q_min},
          {"q_max", c.q_max},
          {"n", c.n},
          {"num_pairs", c.num_pairs},
          {"ell", c.ell},
          {"delta", c.delta},
          {"epsilon", c.epsilon},
          {"sample_size_expression", c.sample_size_expression},
          {"epsilon_upper_bound", c.epsilon_upper_bound},
          {"note", "order-of-magnitude, constants omitted"}};
}

inline json match_to_json(const MatchResult& m) {
  return {{"permutation", m.permutation},
          {"q_error", m.q_error},
          {"w_relative_error", m.w_rel_error},
          {"max_q_error", m.max_q_error()},
          {"max_w_relative_error", m.max_w_error()}};
}

inline json estimates_to_json(const ComponentEstimates& est, bool dump_intermediates) {
  const auto& sd = est.spectral.diagnostics;
  json diag = {{"t1", est.t1},
               {"t2", est.t2},
               {"b_estimate", est.b_estimate},
               {"exact_moments", est.exact_moments},
               {"sigma_1", sd.sigma_1},
               {"sigma_r", sd.sigma_r},
               {"incoherence", sd.incoherence},
               {"q_sum", sd.q_sum},
               {"q_sum_out_of_band", sd.q_sum_out_of_band},
               {"altmin_ridge_rows", sd.altmin_ridge_rows},
               {"tensor_ls_condition", sd.tensor_ls_condition},
               {"tensor_ls_pseudo_inverse", sd.tensor_ls_pseudo_inverse},
               {"power_last_change", est.power_last_change}};
  json out = {{"q_hat", vector_to_json(est.q_hat)},
              {"w_hat", columns_to_json(est.w_hat)},
              {"p_hat", columns_to_json(est.p_hat)},
              {"diagnostics", std::move(diag)}};
  if (dump_intermediates) {
    out["intermediates"] = {{"altmin_objective", sd.altmin_objective},
                            {"whitening_sigma", vector_to_json(est.spectral.basis.sigma)},
                            {"whitening_u", columns_to_json(est.spectral.basis.u)},
                            {"whitened_tensor", tensor_to_json(est.spectral.whitened)},
                            {"tensor_eigenvalues", vector_to_json(est.spectral.eigenpairs.lambda)},
                            {"tensor_eigenvectors", columns_to_json(est.spectral.eigenpairs.v)}};
  }
  return out;
}

// Reads q_hat and w_hat back from a results file.
inline std::pair<VectorXd, MatrixXd> estimates_from_json(const json& j) {
  const auto q = internal::get_field<std::vector<double>>(j, "q_hat", "results");
  const auto w = internal::get_field<std::vector<std::vector<double>>>(j, "w_hat", "results");
  if (w.size() != q.size()) throw ValidationError("results: q_hat and w_hat disagree on r");
  VectorXd qv = Eigen::Map<const VectorXd>(q.data(), static_cast<Eigen::Index>(q.size()));
  const Eigen::Index n = w.empty() ? 0 : static_cast<Eigen::Index>(w.front().size());
  MatrixXd wm(n, static_cast<Eigen::Index>(w.size()));
  for (std::size_t a = 0; a < w.size(); ++a) {
    if (static_cast<Eigen::Index>(w[a].size()) != n) throw ValidationError("results: ragged w_hat");
    wm.col(static_cast<Eigen::Index>(a)) = Eigen::Map<const VectorXd>(w[a].data(), n);
  }
  return {qv, wm};
}

}  // namespace mixmnl

#endif  // MIXMNL_IO_HPP_

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

// Second and third moments of the observation vectors.
//
// Population moments are M2 = P Q P^T and M3 = sum_a q_a P_a (x) P_a (x) P_a.
// Only entries with pairwise-distinct indices are observable from samples;
// the empirical estimators below are rescaled so that, with ell distinct pairs
// drawn without replacement per observation, they are unbiased for exactly
// those entries.

#ifndef MIXMNL_MOMENTS_HPP_
#define MIXMNL_MOMENTS_HPP_

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mixmnl/common.hpp"
#include "mixmnl/graph.hpp"
#include "mixmnl/model.hpp"

namespace mixmnl {

inline constexpr int kDefaultM3Cap = 60;

// Half-open range [begin, end) of sample indices.
struct SampleRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

struct SecondMomentEstimate {
  MatrixXd matrix;  // N x N, symmetric, zero diagonal
  std::size_t sample_count = 0;
};

// Top-r eigenpairs of a (completed) second moment.
struct WhiteningBasis {
  MatrixXd u;      // N x r, orthonormal columns
  VectorXd sigma;  // r positive eigenvalues, descending

  int rank() const { return static_cast<int>(sigma.size()); }
  // Q = U Sigma^{-1/2}: maps M2 to the identity.
  MatrixXd whitening() const { return u * sigma.cwiseSqrt().cwiseInverse().asDiagonal(); }
  // B = U Sigma^{1/2}.
  MatrixXd coloring() const { return u * sigma.cwiseSqrt().asDiagonal(); }
};

inline MatrixXd exact_m2(const MixedMNLModel& m, const ComparisonGraph& g) {
  const MatrixXd p = p_matrix(m, g);
  return p * m.q().asDiagonal() * p.transpose();
}

inline Tensor3 exact_m3(const MixedMNLModel& m, const ComparisonGraph& g, int cap = kDefaultM3Cap) {
  const int n_pairs = g.num_edges();
  if (n_pairs > cap)
    throw ValidationError("exact_m3: N=" + std::to_string(n_pairs) + " exceeds the cap of " +
                          std::to_string(cap) +
                          "; use whitened_exact_m3 or the streaming statistic instead");
  const MatrixXd p = p_matrix(m, g);
  Tensor3 t(n_pairs);
  for (int a = 0; a < m.num_components(); ++a) t += Tensor3::rank_one(p.col(a), m.q()(a));
  return t;
}

// M3[W, W, W] = sum_a q_a (W^T P_a)^{(x)3}, with no N^3 intermediate.
inline Tensor3 whitened_exact_m3(const MixedMNLModel& m, const ComparisonGraph& g, const MatrixXd& w) {
  const MatrixXd y = w.transpose() * p_matrix(m, g);
  Tensor3 t(static_cast<int>(w.cols()));
  for (int a = 0; a < m.num_components(); ++a) t += Tensor3::rank_one(y.col(a), m.q()(a));
  return t;
}

// P_{Omega3}(M3)[W, W, W]: the whitened third moment restricted to entries
// with pairwise-distinct indices, by inclusion-exclusion over
// {i=j}, {j=k}, {i=k}, {i=j=k}.
inline Tensor3 projected_whitened_exact_m3(const MixedMNLModel& m, const ComparisonGraph& g,
                                           const MatrixXd& w) {
  const MatrixXd p = p_matrix(m, g);
  const int r = static_cast<int>(w.cols());
  const int n_pairs = static_cast<int>(w.rows());
  Tensor3 out(r);
  for (int comp = 0; comp < m.num_components(); ++comp) {
    const VectorXd pa = p.col(comp);
    const VectorXd y = w.transpose() * pa;
    // s2(b, c) = sum_i P_i^2 W_ib W_ic; s3(a, b, c) = sum_i P_i^3 W_ia W_ib W_ic
    const MatrixXd s2 = w.transpose() * pa.array().square().matrix().asDiagonal() * w;
    Tensor3 s3(r);
    for (int i = 0; i < n_pairs; ++i) {
      const double c3 = pa(i) * pa(i) * pa(i);
      if (c3 == 0.0) continue;
      for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b)
          for (int c = 0; c < r; ++c) s3(a, b, c) += c3 * w(i, a) * w(i, b) * w(i, c);
    }
    const double qa = m.q()(comp);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b)
        for (int c = 0; c < r; ++c)
          out(a, b, c) += qa * (y(a) * y(b) * y(c) - y(a) * s2(b, c) - y(b) * s2(a, c) -
                                y(c) * s2(a, b) + 2.0 * s3(a, b, c));
  }
  return out;
}

inline double second_moment_scale(int n_pairs, int ell) {
  return static_cast<double>(n_pairs) * (n_pairs - 1) / (static_cast<double>(ell) * (ell - 1));
}

inline double third_moment_scale(int n_pairs, int ell) {
  return static_cast<double>(n_pairs) * (n_pairs - 1) * (n_pairs - 2) /
         (static_cast<double>(ell) * (ell - 1) * (ell - 2));
}

inline void check_range(const ObservationBatch& batch, SampleRange range, const char* who) {
  if (range.begin >= range.end) throw ValidationError(std::string(who) + ": empty sample range");
  if (range.end > batch.size()) throw ValidationError(std::string(who) + ": sample range exceeds batch size");
}

// Scaled off-diagonal sample second moment over batch[range].
inline SecondMomentEstimate empirical_s2(const ObservationBatch& batch, SampleRange range) {
  if (batch.ell < 2) throw ValidationError("empirical_s2 requires ell >= 2");
  check_range(batch, range, "empirical_s2");
  const int n_pairs = batch.num_pairs;
  // Integer co-occurrence sums are exact, so the result does not depend on
  // sample order.
  Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> counts =
      Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>::Zero(n_pairs, n_pairs);
  for (std::size_t t = range.begin; t < range.end; ++t) {
    const auto& e = batch.observations[t].entries;
    for (std::size_t s = 0; s < e.size(); ++s)
      for (std::size_t u = s + 1; u < e.size(); ++u) counts(e[s].pair, e[u].pair) += e[s].outcome * e[u].outcome;
  }
  const double scale = second_moment_scale(n_pairs, batch.ell) / static_cast<double>(range.size());
  SecondMomentEstimate est;
  est.sample_count = range.size();
  est.matrix = MatrixXd::Zero(n_pairs, n_pairs);
  for (int k = 0; k < n_pairs; ++k)
    for (int l = k + 1; l < n_pairs; ++l) {
      const long long c = counts(k, l) + counts(l, k);
      if (c != 0) est.matrix(k, l) = est.matrix(l, k) = scale * static_cast<double>(c);
    }
  return est;
}

// Per-sample statistic Y^t = P_{Omega3}(x (x) x (x) x)[W, W, W], accumulated
// into out (unscaled). Uses x_i^2 = 1 and x_i^3 = x_i on observed pairs.
inline void accumulate_projected_s3(const Observation& obs, const MatrixXd& w, Tensor3& out) {
  const int r = static_cast<int>(w.cols());
  VectorXd y = VectorXd::Zero(r);
  MatrixXd s2 = MatrixXd::Zero(r, r);
  Tensor3 s3(r);
  for (const auto& [k, x] : obs.entries) {
    const auto row = w.row(k);
    y += x * row.transpose();
    s2 += row.transpose() * row;
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) {
        const double xab = x * row(a) * row(b);
        for (int c = 0; c < r; ++c) s3(a, b, c) += xab * row(c);
      }
  }
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      for (int c = 0; c < r; ++c)
        out(a, b, c) += y(a) * y(b) * y(c) - y(a) * s2(b, c) - y(b) * s2(a, c) - y(c) * s2(a, b) +
                        2.0 * s3(a, b, c);
}

// Scaled mean of Y^t over batch[range]; an unbiased estimate of
// P_{Omega3}(M3)[W, W, W]. w is the N x r whitening map.
inline Tensor3 projected_s3_statistic(const ObservationBatch& batch, SampleRange range, const MatrixXd& w) {
  if (batch.ell < 3) throw ValidationError("projected_s3_statistic requires ell >= 3");
  check_range(batch, range, "projected_s3_statistic");
  if (w.rows() != batch.num_pairs) throw ValidationError("whitening map has wrong row count");
  Tensor3 out(static_cast<int>(w.cols()));
  for (std::size_t t = range.begin; t < range.end; ++t) accumulate_projected_s3(batch.observations[t], w, out);
  out *= third_moment_scale(batch.num_pairs, batch.ell) / static_cast<double>(range.size());
  return out;
}

// sqrt(N / r) * max row norm of an N x r orthonormal basis.
inline double incoherence_of_basis(const MatrixXd& u) {
  const double n = static_cast<double>(u.rows());
  const double r = static_cast<double>(u.cols());
  return std::sqrt(n / r) * u.rowwise().norm().maxCoeff();
}

struct IncoherenceResult {
  double mu = 0.0;
  // Set when r exceeds the numerical rank; mu is still computed on the top-r
  // eigenvectors.
  bool rank_warning = false;
};

// Incoherence of a symmetric matrix over its top-r eigenvectors (by magnitude).
inline IncoherenceResult incoherence(const MatrixXd& m, int r) {
  if (m.rows() != m.cols()) throw ValidationError("incoherence requires a square matrix");
  if (r < 1 || r > m.rows()) throw ValidationError("incoherence: rank out of range");
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(m);
  const VectorXd& lambda = eig.eigenvalues();
  std::vector<int> order(static_cast<std::size_t>(lambda.size()));
  for (int i = 0; i < lambda.size(); ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return std::abs(lambda(x)) > std::abs(lambda(y)); });
  MatrixXd u(m.rows(), r);
  for (int a = 0; a < r; ++a) u.col(a) = eig.eigenvectors().col(order[static_cast<std::size_t>(a)]);
  IncoherenceResult res;
  res.mu = incoherence_of_basis(u);
  const double top = std::abs(lambda(order[0]));
  res.rank_warning = !(std::abs(lambda(order[static_cast<std::size_t>(r - 1)])) > 1e-10 * top);
  return res;
}

// Nonzero spectrum and eigenvectors of M2 = P Q P^T from the thin SVD of
// P Q^{1/2}, without forming the N x N matrix.
struct M2Spectrum {
  VectorXd sigma;  // descending, length r
  MatrixXd u;      // N x r
};

inline M2Spectrum m2_spectrum(const MixedMNLModel& m, const ComparisonGraph& g) {
  const MatrixXd f = p_matrix(m, g) * m.q().cwiseSqrt().asDiagonal();
  Eigen::JacobiSVD<MatrixXd> svd(f, Eigen::ComputeThinU);
  return {svd.singularValues().array().square().matrix(), svd.matrixU()};
}

}  // namespace mixmnl

#endif  // MIXMNL_MOMENTS_HPP_

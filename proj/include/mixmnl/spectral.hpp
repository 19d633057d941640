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

// Moment-method estimation of the mixture weights q and the per-component
// expected-outcome vectors P_a.
//
// If M2 = U Sigma U^T (rank r) and H = M3[W, W, W] with W = U Sigma^{-1/2},
// then H = sum_a lambda_a v_a^{(x)3} with orthonormal v_a, and
//   P = U Sigma^{1/2} V diag(lambda),  q_a = lambda_a^{-2}.

#ifndef MIXMNL_SPECTRAL_HPP_
#define MIXMNL_SPECTRAL_HPP_

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mixmnl/altmin.hpp"
#include "mixmnl/common.hpp"
#include "mixmnl/moments.hpp"
#include "mixmnl/tensor.hpp"

namespace mixmnl {

struct SpectralDiagnostics {
  double sigma_1 = 0.0;
  double sigma_r = 0.0;
  double incoherence = 0.0;
  double q_sum = 0.0;
  bool q_sum_out_of_band = false;  // q_sum outside [0.5, 1.5]
  int altmin_iterations = 0;
  int altmin_ridge_rows = 0;
  std::vector<double> altmin_objective;
  double tensor_ls_condition = 0.0;
  bool tensor_ls_pseudo_inverse = false;
};

struct MixtureMomentsEstimate {
  VectorXd q_hat;  // length r, raw (not renormalized)
  MatrixXd p_hat;  // N x r
  SpectralDiagnostics diagnostics;

  // Populated for --dump-intermediates.
  WhiteningBasis basis;
  Tensor3 whitened;
  TensorEigenpairs eigenpairs;
};

struct SpectralOptions {
  std::optional<int> altmin_iterations;  // unset: ceil(ln(N |S|))
  RtpmOptions rtpm;
};

inline int default_spectral_iterations(int n_pairs, std::size_t samples) {
  const double v = std::log(static_cast<double>(n_pairs) * static_cast<double>(samples));
  return std::max(1, static_cast<int>(std::ceil(v)));
}

// Reconstructs (q, P) from a whitening basis and the whitened tensor.
inline MixtureMomentsEstimate decompose_whitened(const WhiteningBasis& basis, const Tensor3& h, int r, Rng& rng,
                                                 const RtpmOptions& opts = {}) {
  MixtureMomentsEstimate est;
  est.basis = basis;
  est.whitened = h;
  est.eigenpairs = rtpm(h, r, rng, opts);
  const VectorXd& lambda = est.eigenpairs.lambda;
  est.p_hat = basis.coloring() * est.eigenpairs.v * lambda.asDiagonal();
  est.q_hat = lambda.array().square().inverse().matrix();
  auto& d = est.diagnostics;
  d.sigma_1 = basis.sigma(0);
  d.sigma_r = basis.sigma(r - 1);
  d.incoherence = incoherence_of_basis(basis.u);
  d.q_sum = est.q_hat.sum();
  d.q_sum_out_of_band = d.q_sum < 0.5 || d.q_sum > 1.5;
  return est;
}

// Noise-free path: exact M2 and the fully materialized M3.
inline MixtureMomentsEstimate consistency_from_exact(const MatrixXd& m2, const Tensor3& m3, int r, Rng& rng,
                                                     const RtpmOptions& opts = {}) {
  if (m3.dim() != m2.rows()) throw ValidationError("consistency_from_exact: M2 and M3 dimensions differ");
  const WhiteningBasis basis = symmetrize_and_eig(m2, r);
  return decompose_whitened(basis, m3.contract(basis.whitening()), r, rng, opts);
}

// Sample sizes of the two halves: ceil(|S|/2) for M2, floor(|S|/2) for M3.
inline std::pair<SampleRange, SampleRange> split_batch(std::size_t total) {
  const std::size_t first = (total + 1) / 2;
  return {{0, first}, {first, total}};
}

inline MixtureMomentsEstimate spectral_dist(const ObservationBatch& batch, int r, Rng& rng,
                                            const SpectralOptions& opts = {}) {
  if (batch.size() < 2) throw ValidationError("spectral_dist requires at least two samples");
  if (batch.ell < 3) throw ValidationError("spectral_dist requires ell >= 3");
  if (r < 1) throw ValidationError("spectral_dist requires r >= 1");
  if (batch.num_pairs <= r) throw ValidationError("spectral_dist requires N > r");
  const auto [first, second] = split_batch(batch.size());

  const SecondMomentEstimate s2 = empirical_s2(batch, first);
  const int iterations = opts.altmin_iterations.value_or(default_spectral_iterations(batch.num_pairs, batch.size()));
  const AltMinResult completed = matrix_alt_min(s2, r, iterations);
  const WhiteningBasis basis = symmetrize_and_eig(completed.completed, r);
  const WhitenedTensor h = tensor_ls(batch, second, basis);

  MixtureMomentsEstimate est = decompose_whitened(basis, h.tensor, r, rng, opts.rtpm);
  auto& d = est.diagnostics;
  d.altmin_iterations = completed.report.iterations;
  d.altmin_ridge_rows = completed.report.ridge_rows;
  d.altmin_objective = completed.report.objective;
  d.tensor_ls_condition = h.report.condition_number;
  d.tensor_ls_pseudo_inverse = h.report.pseudo_inverse;
  return est;
}

}  // namespace mixmnl

#endif  // MIXMNL_SPECTRAL_HPP_

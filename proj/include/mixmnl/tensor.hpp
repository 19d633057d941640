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

// Whitened third-moment estimation and orthogonal tensor decomposition.
//
// With B = U Sigma^{1/2} and W = U Sigma^{-1/2} from the whitening basis, the
// least-squares operator is
//   A(Z) = P_{Omega3}(Z[B^T, B^T, B^T])[W, W, W],
// i.e. Z lifted to N^3, restricted to pairwise-distinct indices and whitened
// back. Since B^T W = I, A(Z) = Z minus the diagonal-class corrections, which
// only involve r^4 and r^6 intermediates.

#ifndef MIXMNL_TENSOR_HPP_
#define MIXMNL_TENSOR_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mixmnl/common.hpp"
#include "mixmnl/model.hpp"
#include "mixmnl/moments.hpp"

namespace mixmnl {

struct TensorLsReport {
  double condition_number = 0.0;
  bool pseudo_inverse = false;  // condition number exceeded 1e12
};

struct WhitenedTensor {
  Tensor3 tensor;
  TensorLsReport report;
};

// Linear operator Z -> A(Z) on r x r x r tensors for a fixed whitening basis.
class TensorLsOperator {
 public:
  explicit TensorLsOperator(const WhiteningBasis& basis)
      : r_(basis.rank()), b_(basis.coloring()), w_(basis.whitening()) {
    const int n = static_cast<int>(b_.rows());
    const int r2 = r_ * r_;
    // pair_(ab, de) = sum_i B_ia B_ib W_id W_ie
    MatrixXd bb(n, r2), ww(n, r2);
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < r_; ++a)
        for (int b = 0; b < r_; ++b) {
          bb(i, a * r_ + b) = b_(i, a) * b_(i, b);
          ww(i, a * r_ + b) = w_(i, a) * w_(i, b);
        }
    pair_ = bb.transpose() * ww;
    // triple_(abc, def) = sum_i B_ia B_ib B_ic W_id W_ie W_if
    const int r3 = r2 * r_;
    MatrixXd bbb(n, r3), www(n, r3);
    for (int i = 0; i < n; ++i)
      for (int ab = 0; ab < r2; ++ab)
        for (int c = 0; c < r_; ++c) {
          bbb(i, ab * r_ + c) = bb(i, ab) * b_(i, c);
          www(i, ab * r_ + c) = ww(i, ab) * w_(i, c);
        }
    triple_ = bbb.transpose() * www;
  }

  int rank() const { return r_; }

  // A(Z) by inclusion-exclusion: full - [i=j] - [j=k] - [i=k] + 2 [i=j=k].
  Tensor3 apply(const Tensor3& z) const {
    const int r = r_;
    Tensor3 out = z;
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b)
        for (int c = 0; c < r; ++c) {
          const double zabc = z(a, b, c);
          if (zabc == 0.0) continue;
          for (int d = 0; d < r; ++d)
            for (int e = 0; e < r; ++e)
              for (int f = 0; f < r; ++f) {
                double corr = 0.0;
                if (c == f) corr += pair_(a * r + b, d * r + e);
                if (a == d) corr += pair_(b * r + c, e * r + f);
                if (b == e) corr += pair_(a * r + c, d * r + f);
                corr -= 2.0 * triple_((a * r + b) * r + c, (d * r + e) * r + f);
                out(d, e, f) -= zabc * corr;
              }
        }
    return out;
  }

  // r^3 x r^3 matrix, column abc = A(e_abc).
  MatrixXd materialize() const {
    const int r3 = r_ * r_ * r_;
    MatrixXd a(r3, r3);
    Tensor3 basis(r_);
    for (int col = 0; col < r3; ++col) {
      basis.data()[static_cast<std::size_t>(col)] = 1.0;
      a.col(col) = apply(basis).flat();
      basis.data()[static_cast<std::size_t>(col)] = 0.0;
    }
    return a;
  }

 private:
  int r_;
  MatrixXd b_;
  MatrixXd w_;
  MatrixXd pair_;
  MatrixXd triple_;
};

inline constexpr double kTensorLsMaxCondition = 1e12;

// argmin_Z ||A(Z) - rhs||_F, symmetrized. rhs is P_{Omega3}(M3)[W, W, W].
inline WhitenedTensor solve_tensor_ls(const WhiteningBasis& basis, const Tensor3& rhs) {
  if (rhs.dim() != basis.rank()) throw ValidationError("tensor_ls: right-hand side has wrong dimension");
  const MatrixXd a = TensorLsOperator(basis).materialize();
  Eigen::JacobiSVD<MatrixXd> svd(a);
  const VectorXd& s = svd.singularValues();
  WhitenedTensor out;
  out.report.condition_number =
      s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
  VectorXd z;
  if (out.report.condition_number > kTensorLsMaxCondition) {
    out.report.pseudo_inverse = true;
    z = a.completeOrthogonalDecomposition().solve(rhs.flat());
  } else {
    z = a.colPivHouseholderQr().solve(rhs.flat());
  }
  Tensor3 zt(basis.rank());
  zt.flat() = z;
  out.tensor = zt.symmetrized();
  return out;
}

// Whitened tensor from the samples batch[range] (the second half of the batch
// in the full pipeline).
inline WhitenedTensor tensor_ls(const ObservationBatch& batch, SampleRange range, const WhiteningBasis& basis) {
  if (batch.ell < 3) throw ValidationError("tensor_ls requires ell >= 3");
  const Tensor3 rhs = projected_s3_statistic(batch, range, basis.whitening());
  return solve_tensor_ls(basis, rhs);
}

// v_a = sum_{b,c} T_abc u_b u_c
inline VectorXd apply_tensor(const Tensor3& t, const VectorXd& u) {
  if (u.size() != t.dim()) throw ValidationError("apply_tensor: dimension mismatch");
  if (!(u.norm() > 0.0)) throw ValidationError("apply_tensor: zero input vector");
  const int r = t.dim();
  VectorXd v = VectorXd::Zero(r);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      for (int c = 0; c < r; ++c) v(a) += t(a, b, c) * u(b) * u(c);
  return v;
}

inline double tensor_form(const Tensor3& t, const VectorXd& u) { return u.dot(apply_tensor(t, u)); }

struct TensorEigenpairs {
  VectorXd lambda;  // positive, descending
  MatrixXd v;       // r x r, unit columns
};

struct RtpmOptions {
  std::optional<int> restarts;  // unset: ceil(20 r log(r + 1))
  int iterations = 50;
  double tolerance = 1e-12;
};

inline int default_rtpm_restarts(int r) {
  return std::max(1, static_cast<int>(std::ceil(20.0 * r * std::log(r + 1.0))));
}

// Robust tensor power method with deflation.
inline TensorEigenpairs rtpm(const Tensor3& tensor, int r, Rng& rng, RtpmOptions opts = {}) {
  if (r < 1 || r > tensor.dim()) throw ValidationError("rtpm: r out of range");
  const int restarts = opts.restarts.value_or(default_rtpm_restarts(r));
  if (restarts < 1) throw ValidationError("rtpm requires restarts >= 1");
  if (opts.iterations < 1) throw ValidationError("rtpm requires iters >= 1");
  const int dim = tensor.dim();
  std::normal_distribution<double> gauss(0.0, 1.0);
  Tensor3 t = tensor;
  std::vector<std::pair<double, VectorXd>> pairs;
  for (int round = 0; round < r; ++round) {
    double best_lambda = 0.0;
    VectorXd best;
    for (int trial = 0; trial < restarts; ++trial) {
      VectorXd u(dim);
      for (int i = 0; i < dim; ++i) u(i) = gauss(rng);
      u.normalize();
      for (int it = 0; it < opts.iterations; ++it) {
        VectorXd next = apply_tensor(t, u);
        const double norm = next.norm();
        if (!(norm > 0.0)) break;
        next /= norm;
        const double change = std::min((next - u).norm(), (next + u).norm());
        u = std::move(next);
        if (change < opts.tolerance) break;
      }
      double lambda = tensor_form(t, u);
      if (lambda < 0.0) {
        lambda = -lambda;
        u = -u;
      }
      if (best.size() == 0 || lambda > best_lambda) {
        best_lambda = lambda;
        best = u;
      }
    }
    if (!(best_lambda >= 1e-12))
      throw NumericalError("tensor decomposition", "degenerate tensor: all candidates have |lambda| < 1e-12 in round " +
                                                       std::to_string(round));
    t -= Tensor3::rank_one(best, best_lambda);
    pairs.emplace_back(best_lambda, best);
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  TensorEigenpairs out;
  out.lambda.resize(r);
  out.v.resize(dim, r);
  for (int a = 0; a < r; ++a) {
    out.lambda(a) = pairs[static_cast<std::size_t>(a)].first;
    out.v.col(a) = pairs[static_cast<std::size_t>(a)].second;
  }
  return out;
}

}  // namespace mixmnl

#endif  // MIXMNL_TENSOR_HPP_

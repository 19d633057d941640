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

// Completing the diagonal of a rank-r symmetric matrix from its off-diagonal
// entries by alternating minimization, and the eigendecomposition that turns
// the completed matrix into a whitening basis.

#ifndef MIXMNL_ALTMIN_HPP_
#define MIXMNL_ALTMIN_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mixmnl/common.hpp"
#include "mixmnl/moments.hpp"

namespace mixmnl {

inline constexpr double kAltMinRidge = 1e-12;

struct AltMinReport {
  // Off-diagonal residual ||P_Omega(M - Uhat_{t+1} U_t^T)||_F^2 after each
  // least-squares step.
  std::vector<double> objective;
  int ridge_rows = 0;  // row regressions that needed the ridge fallback
  int iterations = 0;
};

struct AltMinResult {
  MatrixXd completed;  // Uhat_T U_{T-1}^T, not symmetric in general
  MatrixXd basis;      // U_{T-1}
  AltMinReport report;
};

// Default iteration count ceil(log2(2 ||M||_F / eps)).
inline int default_altmin_iterations(const MatrixXd& offdiag, double eps = 1e-8) {
  const double f = offdiag.norm();
  if (!(f > 0.0)) return 1;
  return std::max(1, static_cast<int>(std::ceil(std::log2(2.0 * f / eps))));
}

namespace internal {

// Eigenvector indices of a symmetric matrix ordered by |lambda| descending.
inline std::vector<int> by_magnitude(const VectorXd& lambda) {
  std::vector<int> order(static_cast<std::size_t>(lambda.size()));
  for (int i = 0; i < lambda.size(); ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return std::abs(lambda(x)) > std::abs(lambda(y)); });
  return order;
}

inline double offdiag_residual(const MatrixXd& m, const MatrixXd& left, const MatrixXd& right) {
  MatrixXd diff = m - left * right.transpose();
  diff.diagonal().setZero();
  return diff.squaredNorm();
}

inline MatrixXd orthonormalize(const MatrixXd& x) {
  Eigen::HouseholderQR<MatrixXd> qr(x);
  return qr.householderQ() * MatrixXd::Identity(x.rows(), x.cols());
}

}  // namespace internal

// offdiag must be symmetric with a zero diagonal; its diagonal is ignored.
inline AltMinResult matrix_alt_min(const MatrixXd& offdiag, int r, int iterations) {
  const int n = static_cast<int>(offdiag.rows());
  if (offdiag.cols() != n) throw ValidationError("matrix_alt_min requires a square matrix");
  if (r < 1) throw ValidationError("matrix_alt_min requires r >= 1");
  if (iterations < 1) throw ValidationError("matrix_alt_min requires T >= 1");
  if (n <= r) throw ValidationError("matrix_alt_min requires N > r");

  MatrixXd m = offdiag;
  m.diagonal().setZero();

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(m);
  const auto order = internal::by_magnitude(eig.eigenvalues());
  MatrixXd u(n, r);
  for (int a = 0; a < r; ++a) u.col(a) = eig.eigenvectors().col(order[static_cast<std::size_t>(a)]);

  AltMinResult result;
  MatrixXd u_hat;
  for (int t = 0; t < iterations; ++t) {
    // Row i solves (sum_{j != i} U_j U_j^T) x = sum_{j != i} M_ij U_j.
    const MatrixXd gram = u.transpose() * u;
    const MatrixXd rhs = m * u;
    u_hat.resize(n, r);
    for (int i = 0; i < n; ++i) {
      const VectorXd ui = u.row(i).transpose();
      const MatrixXd gi = gram - ui * ui.transpose();
      Eigen::LLT<MatrixXd> llt(gi);
      VectorXd x;
      if (llt.info() == Eigen::Success && llt.rcond() > kAltMinRidge) {
        x = llt.solve(rhs.row(i).transpose());
      } else {
        ++result.report.ridge_rows;
        x = (gi + kAltMinRidge * MatrixXd::Identity(r, r)).ldlt().solve(rhs.row(i).transpose());
      }
      u_hat.row(i) = x.transpose();
    }
    result.report.objective.push_back(internal::offdiag_residual(m, u_hat, u));
    ++result.report.iterations;
    if (t + 1 < iterations) u = internal::orthonormalize(u_hat);
  }
  result.completed = u_hat * u.transpose();
  result.basis = u;
  return result;
}

inline AltMinResult matrix_alt_min(const SecondMomentEstimate& est, int r, int iterations) {
  return matrix_alt_min(est.matrix, r, iterations);
}

class RankDeficiencyError : public NumericalError {
 public:
  RankDeficiencyError(const std::string& stage, const std::string& what, VectorXd spectrum)
      : NumericalError(stage, what), spectrum_(std::move(spectrum)) {}
  const VectorXd& spectrum() const { return spectrum_; }

 private:
  VectorXd spectrum_;
};

// Top-r eigenpairs of (M + M^T) / 2, which must all be positive.
inline WhiteningBasis symmetrize_and_eig(const MatrixXd& m, int r) {
  if (m.rows() != m.cols()) throw ValidationError("symmetrize_and_eig requires a square matrix");
  if (r < 1 || r > m.rows()) throw ValidationError("symmetrize_and_eig: rank out of range");
  const MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sym);
  const VectorXd lambda = eig.eigenvalues().reverse();
  const double floor = 1e-10 * std::max(std::abs(lambda(0)), std::numeric_limits<double>::min());
  int positive = 0;
  while (positive < lambda.size() && lambda(positive) > floor) ++positive;
  if (positive < r) {
    std::ostringstream msg;
    msg << "only " << positive << " positive eigenvalues, need r=" << r << "; top spectrum:";
    for (int i = 0; i < std::min<Eigen::Index>(lambda.size(), r + 2); ++i) msg << ' ' << lambda(i);
    throw RankDeficiencyError("second moment", msg.str(), lambda);
  }
  WhiteningBasis basis;
  basis.sigma = lambda.head(r);
  basis.u = eig.eigenvectors().rowwise().reverse().leftCols(r);
  return basis;
}

}  // namespace mixmnl

#endif  // MIXMNL_ALTMIN_HPP_

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


#include <gtest/gtest.h>

#include "mixmnl/moments.hpp"
#include "test_support.hpp"

namespace mixmnl {
namespace {

using testing::brute_contract;
using testing::brute_projected_outer;
using testing::complete_graph;
using testing::random_model;

MatrixXd random_matrix(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = gauss(rng);
  return m;
}

TEST(ExactMomentsTest, M2IsMixtureOfOuterProducts) {
  Rng rng(1);
  const auto g = complete_graph(5);
  const auto m = random_model(5, 3, rng);
  MatrixXd expected = MatrixXd::Zero(g.num_edges(), g.num_edges());
  for (int a = 0; a < 3; ++a) {
    const VectorXd p = component_p_vector(m, a, g);
    expected += m.q()(a) * p * p.transpose();
  }
  EXPECT_TRUE(exact_m2(m, g).isApprox(expected, 1e-14));
}

TEST(ExactMomentsTest, M3Entries) {
  Rng rng(2);
  const auto g = complete_graph(4);
  const auto m = random_model(4, 2, rng);
  const Tensor3 t = exact_m3(m, g);
  const MatrixXd p = p_matrix(m, g);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      for (int k = 0; k < 6; ++k) {
        const double e = m.q()(0) * p(i, 0) * p(j, 0) * p(k, 0) + m.q()(1) * p(i, 1) * p(j, 1) * p(k, 1);
        EXPECT_NEAR(t(i, j, k), e, 1e-15);
      }
}

TEST(ExactMomentsTest, M3CapIsEnforced) {
  Rng rng(3);
  const auto g = complete_graph(12);  // N = 66
  const auto m = random_model(12, 2, rng);
  EXPECT_THROW(exact_m3(m, g), ValidationError);
  EXPECT_NO_THROW(exact_m3(m, g, 66));
}

TEST(ExactMomentsTest, WhitenedAndProjectedMatchBruteForce) {
  Rng rng(4);
  const auto g = complete_graph(5);  // N = 10
  const auto m = random_model(5, 3, rng);
  const MatrixXd w = random_matrix(g.num_edges(), 3, rng);
  const Tensor3 full = exact_m3(m, g);
  const Tensor3 whitened = whitened_exact_m3(m, g, w);
  const Tensor3 projected = projected_whitened_exact_m3(m, g, w);
  const Tensor3 brute_full = brute_contract(full, w, false);
  const Tensor3 brute_proj = brute_contract(full, w, true);
  for (std::size_t i = 0; i < whitened.size(); ++i) {
    EXPECT_NEAR(whitened.data()[i], brute_full.data()[i], 1e-12);
    EXPECT_NEAR(projected.data()[i], brute_proj.data()[i], 1e-12);
  }
  // Tensor3::contract agrees too.
  const Tensor3 contracted = full.contract(w);
  for (std::size_t i = 0; i < whitened.size(); ++i) EXPECT_NEAR(contracted.data()[i], brute_full.data()[i], 1e-12);
}

TEST(ScaleTest, WithoutReplacementFactors) {
  EXPECT_DOUBLE_EQ(second_moment_scale(15, 3), 15.0 * 14.0 / 6.0);
  EXPECT_DOUBLE_EQ(third_moment_scale(15, 3), 15.0 * 14.0 * 13.0 / 6.0);
  EXPECT_DOUBLE_EQ(second_moment_scale(10, 10), 1.0);
}

TEST(EmpiricalS2Test, SymmetricZeroDiagonalAndOrderInvariant) {
  Rng rng(5);
  const auto g = complete_graph(5);
  const auto m = random_model(5, 2, rng);
  ObservationBatch batch = sample_batch(m, g, 4, 500, rng);
  const auto s2 = empirical_s2(batch, {0, batch.size()});
  EXPECT_EQ(s2.sample_count, 500u);
  EXPECT_TRUE(s2.matrix.isApprox(s2.matrix.transpose(), 0.0));
  EXPECT_TRUE(s2.matrix.diagonal().isZero(0.0));
  std::shuffle(batch.observations.begin(), batch.observations.end(), rng);
  EXPECT_EQ(empirical_s2(batch, {0, batch.size()}).matrix, s2.matrix);
}

TEST(EmpiricalS2Test, SingleSampleByHand) {
  // N = 3, ell = 2, x = (1, 0, -1): only (0, 2) co-occurs, scaled by 3.
  ObservationBatch b{3, 2, {Observation{{{0, 1}, {2, -1}}}}};
  const auto s2 = empirical_s2(b, {0, 1});
  EXPECT_DOUBLE_EQ(s2.matrix(0, 2), -3.0);
  EXPECT_DOUBLE_EQ(s2.matrix(2, 0), -3.0);
  EXPECT_DOUBLE_EQ(s2.matrix(0, 1), 0.0);
}

TEST(EmpiricalS2Test, RejectsBadRanges) {
  ObservationBatch b{3, 2, {Observation{{{0, 1}, {2, -1}}}}};
  EXPECT_THROW(empirical_s2(b, {0, 0}), ValidationError);
  EXPECT_THROW(empirical_s2(b, {0, 2}), ValidationError);
  ObservationBatch one{3, 1, {Observation{{{0, 1}}}}};
  EXPECT_THROW(empirical_s2(one, {0, 1}), ValidationError);
}

TEST(EmpiricalS2Test, UnbiasedWithinFourStandardErrors) {
  Rng rng(6);
  const auto g = complete_graph(4);  // N = 6
  const auto m = random_model(4, 2, rng);
  const int ell = 3;
  const std::size_t count = 200000;
  const ObservationBatch batch = sample_batch(m, g, ell, count, rng);
  const MatrixXd est = empirical_s2(batch, {0, count}).matrix;
  const MatrixXd truth = exact_m2(m, g);
  // Per-sample statistic z = scale x_k x_l has E[z^2] = scale.
  const double scale = second_moment_scale(6, ell);
  for (int k = 0; k < 6; ++k)
    for (int l = k + 1; l < 6; ++l) {
      const double se = std::sqrt((scale - truth(k, l) * truth(k, l)) / count);
      EXPECT_NEAR(est(k, l), truth(k, l), 4.0 * se) << k << "," << l;
    }
}

TEST(ProjectedS3Test, StreamingMatchesTripleLoop) {
  Rng rng(7);
  const auto g = complete_graph(6);  // N = 15
  const auto m = random_model(6, 3, rng);
  const ObservationBatch batch = sample_batch(m, g, 5, 100, rng);
  const MatrixXd w = random_matrix(15, 3, rng);
  for (const Observation& obs : batch.observations) {
    Tensor3 got(3);
    accumulate_projected_s3(obs, w, got);
    const Tensor3 want = brute_projected_outer(testing::dense(obs, 15), w);
    for (std::size_t i = 0; i < got.size(); ++i) ASSERT_NEAR(got.data()[i], want.data()[i], 1e-12);
  }
}

TEST(ProjectedS3Test, UnbiasedWithinFourStandardErrors) {
  Rng rng(8);
  const auto g = complete_graph(4);  // N = 6
  const auto m = random_model(4, 2, rng);
  const int ell = 3;
  const std::size_t count = 200000;
  const ObservationBatch batch = sample_batch(m, g, ell, count, rng);
  const MatrixXd w = random_matrix(6, 2, rng);
  const double scale = third_moment_scale(6, ell);
  Tensor3 mean(2), sq(2);
  for (const Observation& obs : batch.observations) {
    Tensor3 y(2);
    accumulate_projected_s3(obs, w, y);
    y *= scale;
    for (std::size_t i = 0; i < y.size(); ++i) {
      mean.data()[i] += y.data()[i];
      sq.data()[i] += y.data()[i] * y.data()[i];
    }
  }
  const Tensor3 stat = projected_s3_statistic(batch, {0, count}, w);
  const Tensor3 truth = projected_whitened_exact_m3(m, g, w);
  for (std::size_t i = 0; i < stat.size(); ++i) {
    const double mu = mean.data()[i] / count;
    EXPECT_NEAR(stat.data()[i], mu, 1e-9 * (1.0 + std::abs(mu)));
    const double se = std::sqrt((sq.data()[i] / count - mu * mu) / count);
    EXPECT_NEAR(stat.data()[i], truth.data()[i], 4.0 * se) << "entry " << i;
  }
}

TEST(ProjectedS3Test, RequiresEllAtLeastThree) {
  ObservationBatch b{3, 2, {Observation{{{0, 1}, {2, -1}}}}};
  EXPECT_THROW(projected_s3_statistic(b, {0, 1}, MatrixXd::Ones(3, 1)), ValidationError);
}

TEST(IncoherenceTest, SpikyAndFlatBases) {
  MatrixXd spiky = MatrixXd::Zero(16, 1);
  spiky(3, 0) = 1.0;
  EXPECT_NEAR(incoherence_of_basis(spiky), 4.0, 1e-15);
  const MatrixXd flat = MatrixXd::Constant(16, 1, 0.25);
  EXPECT_NEAR(incoherence_of_basis(flat), 1.0, 1e-15);
  const IncoherenceResult r = incoherence(flat * flat.transpose(), 1);
  EXPECT_NEAR(r.mu, 1.0, 1e-12);
  EXPECT_FALSE(r.rank_warning);
  EXPECT_TRUE(incoherence(flat * flat.transpose(), 2).rank_warning);
}

TEST(M2SpectrumTest, MatchesDenseEigensolve) {
  Rng rng(9);
  const auto g = complete_graph(7);
  const auto m = random_model(7, 3, rng);
  const M2Spectrum m2s = m2_spectrum(m, g);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(exact_m2(m, g));
  const VectorXd top = eig.eigenvalues().reverse().head(3);
  for (int a = 0; a < 3; ++a) EXPECT_NEAR(m2s.sigma(a), top(a), 1e-12);
  const MatrixXd u = m2s.u;
  EXPECT_TRUE((u.transpose() * u).isIdentity(1e-12));
  EXPECT_TRUE((u * m2s.sigma.asDiagonal() * u.transpose()).isApprox(exact_m2(m, g), 1e-10));
}

}  // namespace
}  // namespace mixmnl

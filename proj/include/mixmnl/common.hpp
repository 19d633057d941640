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

// Shared error types, random number generation and the small dense cube used
// for third-order moments.

#ifndef MIXMNL_COMMON_HPP_
#define MIXMNL_COMMON_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mixmnl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Invalid arguments or malformed input data. The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical stage could not produce a result (rank deficiency, degenerate
// tensor, reducible chain, ...). The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent sub-seeds from a base seed
// and grid coordinates.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> coords) {
  std::uint64_t h = mix_seed(base);
  for (std::uint64_t c : coords) h = mix_seed(h ^ mix_seed(c));
  return h;
}

// Dense d x d x d array, row-major in (i, j, k).
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int dim) : dim_(dim), data_(static_cast<std::size_t>(dim) * dim * dim, 0.0) {}

  int dim() const { return dim_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
  double operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Eigen::Map<const VectorXd> flat() const {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
  }
  Eigen::Map<VectorXd> flat() {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
  }

  double frobenius_norm() const { return flat().norm(); }

  Tensor3& operator+=(const Tensor3& o) {
    flat() += o.flat();
    return *this;
  }
  Tensor3& operator-=(const Tensor3& o) {
    flat() -= o.flat();
    return *this;
  }
  Tensor3& operator*=(double s) {
    flat() *= s;
    return *this;
  }

  // scale * (v (x) v (x) v)
  static Tensor3 rank_one(const VectorXd& v, double scale = 1.0) {
    const int d = static_cast<int>(v.size());
    Tensor3 t(d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) t(i, j, k) = scale * v(i) * v(j) * v(k);
    return t;
  }

  // Average over the six index permutations.
  Tensor3 symmetrized() const {
    Tensor3 s(dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        for (int k = 0; k < dim_; ++k) {
          const auto& t = *this;
          s(i, j, k) = (t(i, j, k) + t(i, k, j) + t(j, i, k) + t(j, k, i) +
                        t(k, i, j) + t(k, j, i)) /
                       6.0;
        }
    return s;
  }

  // Multilinear map T[W, W, W]: result(a,b,c) = sum_ijk T_ijk W_ia W_jb W_kc.
  Tensor3 contract(const MatrixXd& w) const {
    const int d = dim_;
    const int r = static_cast<int>(w.cols());
    // Contract one mode at a time: d^3 r + d^2 r^2 + d r^3.
    std::vector<double> s1(static_cast<std::size_t>(d) * d * r, 0.0);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
          const double t = (*this)(i, j, k);
          if (t == 0.0) continue;
          for (int c = 0; c < r; ++c) s1[(static_cast<std::size_t>(i) * d + j) * r + c] += t * w(k, c);
        }
    std::vector<double> s2(static_cast<std::size_t>(d) * r * r, 0.0);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int b = 0; b < r; ++b) {
          const double wjb = w(j, b);
          for (int c = 0; c < r; ++c)
            s2[(static_cast<std::size_t>(i) * r + b) * r + c] +=
                wjb * s1[(static_cast<std::size_t>(i) * d + j) * r + c];
        }
    Tensor3 out(r);
    for (int i = 0; i < d; ++i)
      for (int a = 0; a < r; ++a) {
        const double wia = w(i, a);
        for (int b = 0; b < r; ++b)
          for (int c = 0; c < r; ++c)
            out(a, b, c) += wia * s2[(static_cast<std::size_t>(i) * r + b) * r + c];
      }
    return out;
  }

 private:
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * dim_ + j) * dim_ + k;
  }

  int dim_ = 0;
  std::vector<double> data_;
};

}  // namespace mixmnl

#endif  // MIXMNL_COMMON_HPP_

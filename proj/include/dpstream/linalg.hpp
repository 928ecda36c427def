// Copyright 2026 The dpstream Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPSTREAM_LINALG_HPP
#define DPSTREAM_LINALG_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace dpstream {

using Vector = std::vector<double>;

/// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  double trace() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Products on the active SIMD kernel set.

/// a * b
Matrix matmul(const Matrix& a, const Matrix& b);
/// a^T * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a * b^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);

double squared_frobenius(const Matrix& a);
/// ||a - b||_F^2
double squared_frobenius_distance(const Matrix& a, const Matrix& b);

/// Lower-triangular factor L with a = L L^T, or nullopt when a is not
/// numerically positive definite.
std::optional<Matrix> cholesky(const Matrix& a);

/// Cholesky after adding the escalating diagonal jitter: starting at
/// 1e-8 * trace(a) / n (or 1e-8 when the trace is not positive), times 10 per
/// retry, giving up past 1e-2 of that scale. The first attempt is unjittered.
/// Throws NumericalError on failure.
Matrix cholesky_with_jitter(const Matrix& a);

/// Adds the smallest jitter from the same ladder that makes `a` factorable.
void make_positive_definite(Matrix& a);

/// Solves L y = b for lower-triangular L.
Vector forward_substitute(const Matrix& lower, std::span<const double> b);

/// log|a| from its Cholesky factor.
double log_det_from_cholesky(const Matrix& lower);

}  // namespace dpstream

#endif  // DPSTREAM_LINALG_HPP

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

#include "dpstream/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dpstream/error.hpp"
#include "dpstream/simd/kernels.hpp"

namespace dpstream {
namespace {

constexpr double kJitterStart = 1e-8;
constexpr double kJitterLimit = 1e-2;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

double jitter_scale(const Matrix& a) {
  const double t = a.trace() / static_cast<double>(a.rows());
  return (std::isfinite(t) && t > 0.0) ? t : 1.0;
}

Matrix add_diagonal(const Matrix& a, double v) {
  Matrix out = a;
  for (std::size_t i = 0; i < a.rows(); ++i) out(i, i) += v;
  return out;
}

}  // namespace

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double Matrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  const auto& k = simd::active_kernels();
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* out = c.row(i).data();
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double s = a(i, p);
      if (s != 0.0) k.axpy(s, b.row(p).data(), out, b.cols());
    }
  }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), "matmul_tn: row counts differ");
  const auto& k = simd::active_kernels();
  Matrix c(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* src = b.row(i).data();
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double s = a(i, p);
      if (s != 0.0) k.axpy(s, src, c.row(p).data(), b.cols());
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), "matmul_nt: column counts differ");
  const auto& k = simd::active_kernels();
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      c(i, j) = k.dot(a.row(i).data(), b.row(j).data(), a.cols());
    }
  }
  return c;
}

double squared_frobenius(const Matrix& a) {
  const auto& d = a.data();
  return simd::active_kernels().dot(d.data(), d.data(), d.size());
}

double squared_frobenius_distance(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "frobenius distance: shapes differ");
  return simd::active_kernels().squared_distance(a.data().data(), b.data().data(),
                                                 a.data().size());
}

std::optional<Matrix> cholesky(const Matrix& a) {
  require(a.rows() == a.cols(), "cholesky: matrix not square");
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (std::size_t p = 0; p < j; ++p) diag -= l(j, p) * l(j, p);
    if (!(diag > 0.0) || !std::isfinite(diag)) return std::nullopt;
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t p = 0; p < j; ++p) s -= l(i, p) * l(j, p);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

Matrix cholesky_with_jitter(const Matrix& a) {
  if (auto l = cholesky(a)) return *std::move(l);
  const double scale = jitter_scale(a);
  for (double j = kJitterStart; j <= kJitterLimit * (1.0 + 1e-9); j *= 10.0) {
    if (auto l = cholesky(add_diagonal(a, j * scale))) return *std::move(l);
  }
  throw NumericalError("Cholesky failed after jitter escalation to " +
                       std::to_string(kJitterLimit) + " x trace/n");
}

void make_positive_definite(Matrix& a) {
  if (cholesky(a)) return;
  const double scale = jitter_scale(a);
  for (double j = kJitterStart; j <= kJitterLimit * (1.0 + 1e-9); j *= 10.0) {
    Matrix candidate = add_diagonal(a, j * scale);
    if (cholesky(candidate)) {
      a = std::move(candidate);
      return;
    }
  }
  throw NumericalError("matrix cannot be made positive definite within the jitter limit");
}

Vector forward_substitute(const Matrix& lower, std::span<const double> b) {
  const std::size_t n = lower.rows();
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t p = 0; p < i; ++p) s -= lower(i, p) * y[p];
    y[i] = s / lower(i, i);
  }
  return y;
}

double log_det_from_cholesky(const Matrix& lower) {
  double s = 0.0;
  for (std::size_t i = 0; i < lower.rows(); ++i) s += std::log(lower(i, i));
  return 2.0 * s;
}

}  // namespace dpstream

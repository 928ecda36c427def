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

#ifndef DPSTREAM_NNMF_HPP
#define DPSTREAM_NNMF_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "dpstream/linalg.hpp"

namespace dpstream {

/// Latent embedding of one record: h non-negative coefficients.
using LatentVector = Vector;

/// h x d non-negative basis; row r is the r-th basis vector.
struct Basis {
  Matrix rows;

  std::size_t latent_dim() const noexcept { return rows.rows(); }
  std::size_t feature_dim() const noexcept { return rows.cols(); }
};

struct NnmfOptions {
  std::size_t latent_dim = 10;
  std::size_t max_iters = 2000;
  double tol = 1e-6;  // stop once the relative objective improvement drops below this
  std::uint64_t seed = 1;
};

struct NnmfResult {
  Matrix coefficients;  // n x h
  Basis basis;          // h x d
  std::vector<double> objective_trace;  // ||X - CB||_F^2 at init and after every iteration
  std::size_t iterations = 0;
};

/// Lee-Seung multiplicative updates on the squared Frobenius objective.
///
/// Initial entries are uniform in (0, 1] times mean(X) / h, drawn from `seed`.
/// Throws ConfigError for h outside [1, min(n, d)], DataError for negative,
/// non-finite or all-zero X.
NnmfResult nnmf_fit(const Matrix& x, const NnmfOptions& options);

struct NnlsOptions {
  double tol = 1e-6;  // KKT residual target
  std::size_t max_iters = 10000;
};

struct NnlsResult {
  LatentVector coefficients;
  double objective = 0.0;     // ||x - cB||^2
  double kkt_residual = 0.0;  // max violation of the KKT conditions
  std::size_t iterations = 0;
  bool converged = false;
};

/// Precomputed Gram matrix B B^T for repeated projections onto one basis.
class NnlsProjector {
 public:
  explicit NnlsProjector(const Basis& basis, NnlsOptions options = {});

  /// argmin_{c >= 0} ||x - cB||^2 by projected gradient with an Armijo
  /// backtracking line search along the projection arc. Throws DataError on
  /// non-finite or mis-sized input.
  NnlsResult solve(std::span<const double> x) const;

  const Basis& basis() const noexcept { return *basis_; }

 private:
  std::shared_ptr<const Basis> basis_;
  NnlsOptions options_;
  Matrix gram_;
};

LatentVector nnls_project(std::span<const double> x, const Basis& basis, NnlsOptions options = {});

/// Largest KKT violation of c for min ||x - cB||^2, c >= 0, given the
/// gradient g = 2(cB - x)B^T: coordinates at the bound need g >= 0, interior
/// coordinates need g = 0. Coordinates with c <= tol count as at the bound.
double nnls_kkt_residual(std::span<const double> c, std::span<const double> gradient, double tol);

}  // namespace dpstream

#endif  // DPSTREAM_NNMF_HPP

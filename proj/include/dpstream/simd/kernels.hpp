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

#ifndef DPSTREAM_SIMD_KERNELS_HPP
#define DPSTREAM_SIMD_KERNELS_HPP

#include <cstddef>

// Dense double-precision kernels behind the NNMF and NNLS inner loops.
//
// Every kernel has a scalar reference implementation. Vector variants
// (AVX2+FMA on x86-64, NEON on AArch64) are compiled separately and picked
// once at runtime; tests check each variant against the scalar one.

namespace dpstream::simd {

struct KernelSet {
  const char* name;

  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  /// sum_i (a[i] - b[i])^2
  double (*squared_distance)(const double* a, const double* b, std::size_t n);

  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  /// x[i] *= num[i] / (den[i] + eps). Lee-Seung multiplicative step.
  void (*multiplicative_update)(double* x, const double* num, const double* den,
                                std::size_t n, double eps);

  /// out[i] = max(0, c[i] - step * g[i]). Projected gradient step.
  void (*project_step)(const double* c, const double* g, double step, double* out,
                       std::size_t n);
};

/// Portable reference kernels.
const KernelSet& scalar_kernels() noexcept;

/// The vector variant for this build and CPU, or nullptr when none applies.
const KernelSet* vector_kernels() noexcept;

/// Kernels used by the library: the vector variant when available unless the
/// environment variable DPSTREAM_SIMD is set to "scalar". Resolved once.
const KernelSet& active_kernels() noexcept;

}  // namespace dpstream::simd

#endif  // DPSTREAM_SIMD_KERNELS_HPP

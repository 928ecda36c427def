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

#include <algorithm>

#include "dpstream/simd/kernels.hpp"
#include "kernels_impl.hpp"

namespace dpstream::simd::detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_distance_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void multiplicative_update_scalar(double* x, const double* num, const double* den,
                                  std::size_t n, double eps) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= num[i] / (den[i] + eps);
}

void project_step_scalar(const double* c, const double* g, double step, double* out,
                         std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::max(0.0, c[i] - step * g[i]);
}

const KernelSet kScalar{
    "scalar",
    dot_scalar,
    squared_distance_scalar,
    axpy_scalar,
    multiplicative_update_scalar,
    project_step_scalar,
};

}  // namespace dpstream::simd::detail

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

#include <arm_neon.h>

#include <algorithm>

#include "kernels_impl.hpp"

namespace dpstream::simd::detail {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_distance_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, d, d);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void multiplicative_update_neon(double* x, const double* num, const double* den, std::size_t n,
                                double eps) {
  const float64x2_t ve = vdupq_n_f64(eps);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t ratio = vdivq_f64(vld1q_f64(num + i), vaddq_f64(vld1q_f64(den + i), ve));
    vst1q_f64(x + i, vmulq_f64(vld1q_f64(x + i), ratio));
  }
  for (; i < n; ++i) x[i] *= num[i] / (den[i] + eps);
}

void project_step_neon(const double* c, const double* g, double step, double* out,
                       std::size_t n) {
  const float64x2_t vs = vdupq_n_f64(step);
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vsubq_f64(vld1q_f64(c + i), vmulq_f64(vs, vld1q_f64(g + i)));
    vst1q_f64(out + i, vmaxq_f64(v, zero));
  }
  for (; i < n; ++i) out[i] = std::max(0.0, c[i] - step * g[i]);
}

}  // namespace

const KernelSet kNeon{
    "neon",
    dot_neon,
    squared_distance_neon,
    axpy_neon,
    multiplicative_update_neon,
    project_step_neon,
};

}  // namespace dpstream::simd::detail

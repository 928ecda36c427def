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

#include <cstdlib>
#include <cstring>

#include "dpstream/simd/kernels.hpp"
#include "kernels_impl.hpp"

namespace dpstream::simd {

const KernelSet& scalar_kernels() noexcept { return detail::kScalar; }

const KernelSet* vector_kernels() noexcept {
#if defined(DPSTREAM_HAVE_AVX2_KERNELS)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &detail::kAvx2 : nullptr;
#elif defined(DPSTREAM_HAVE_NEON_KERNELS)
  return &detail::kNeon;
#else
  return nullptr;
#endif
}

const KernelSet& active_kernels() noexcept {
  static const KernelSet& chosen = [&]() -> const KernelSet& {
    const char* env = std::getenv("DPSTREAM_SIMD");
    if (env != nullptr && std::strcmp(env, "scalar") == 0) return scalar_kernels();
    const KernelSet* v = vector_kernels();
    return v != nullptr ? *v : scalar_kernels();
  }();
  return chosen;
}

}  // namespace dpstream::simd

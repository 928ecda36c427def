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

#ifndef DPSTREAM_SRC_SIMD_KERNELS_IMPL_HPP
#define DPSTREAM_SRC_SIMD_KERNELS_IMPL_HPP

#include "dpstream/simd/kernels.hpp"

namespace dpstream::simd::detail {

extern const KernelSet kScalar;

#if defined(__x86_64__) || defined(_M_X64)
extern const KernelSet kAvx2;
#define DPSTREAM_HAVE_AVX2_KERNELS 1
#endif

#if defined(__aarch64__)
extern const KernelSet kNeon;
#define DPSTREAM_HAVE_NEON_KERNELS 1
#endif

}  // namespace dpstream::simd::detail

#endif  // DPSTREAM_SRC_SIMD_KERNELS_IMPL_HPP

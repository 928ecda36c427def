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

#ifndef DPSTREAM_RNG_HPP
#define DPSTREAM_RNG_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace dpstream {

/// Tags separating the independent random streams consumed by one run.
enum class StreamTag : std::uint64_t {
  kGibbsStep = 1,
  kParticleProposal = 2,
  kResample = 3,
  kRandomQuery = 4,
  kNnmfInit = 5,
  kSynthetic = 6,
};

/// Mixes (seed, tag, index) into a fresh 64-bit seed with splitmix64 rounds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) noexcept;

/// mt19937_64 with hand-rolled transforms. The std distributions are
/// implementation-defined, so every draw here is reproducible across
/// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n); n must be positive.
  std::size_t below(std::size_t n);

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Inverse-CDF draw from `probs` (in index order) with one uniform u in [0, 1).
/// Rounding slack at the top goes to the last index with positive mass.
std::size_t inverse_cdf(std::span<const double> probs, double u);

inline Rng substream(std::uint64_t seed, StreamTag tag, std::uint64_t index) {
  return Rng(derive_seed(seed, static_cast<std::uint64_t>(tag), index));
}

}  // namespace dpstream

#endif  // DPSTREAM_RNG_HPP

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

#ifndef DPSTREAM_SYNTHETIC_HPP
#define DPSTREAM_SYNTHETIC_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dpstream/eval.hpp"

namespace dpstream {

/// Gaussian clusters in h dimensions with power-law class sizes. Known classes
/// ("K1", "K2", ...) appear in training and in the stream; emerging classes
/// ("E1", ...) only in the stream.
struct SyntheticConfig {
  std::size_t h = 10;
  std::size_t known = 3;
  std::size_t emerging = 2;
  double separation = 10.0;  // minimum distance between class means, in units of sigma
  double sigma = 1.0;        // isotropic within-class standard deviation
  std::size_t n_train = 50;
  std::size_t n_stream = 50;
  double power = 1.0;  // class of rank r gets weight r^-power
  std::size_t min_per_class = 2;

  void validate() const;
};

/// Splits `total` into parts proportional to r^-power (r = 1..k), each at
/// least `minimum`, by largest remainder. Throws ConfigError when
/// k * minimum > total.
std::vector<std::size_t> power_law_sizes(std::size_t total, std::size_t k, double power,
                                         std::size_t minimum);

/// Deterministic in (config, seed). The stream order is a uniform shuffle.
LatentDataset generate_synthetic(const SyntheticConfig& config, std::uint64_t seed);

}  // namespace dpstream

#endif  // DPSTREAM_SYNTHETIC_HPP

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

#ifndef DPSTREAM_GIBBS_HPP
#define DPSTREAM_GIBBS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dpstream/dpgmm.hpp"
#include "dpstream/rng.hpp"

namespace dpstream {

struct GibbsOptions {
  std::uint64_t seed = 1;
  /// Take the posterior argmax (ties to the smallest label) instead of
  /// sampling. Debugging aid; sampling is the algorithm.
  bool map_mode = false;
};

struct GibbsRun {
  std::vector<std::string> predictions;
  std::uint64_t seed = 0;
};

/// Samples the class of x from the full conditional, commits it and updates
/// that class's statistics. A "new class" draw creates the next novel-<k>
/// class. Consumes exactly one uniform from `rng`: an inverse-CDF draw over
/// the model's class order (training classes by label, then online classes by
/// creation, then the new-class outcome).
std::string gibbs_step(ModelState& model, std::span<const double> x, Rng& rng,
                       bool map_mode = false);

/// One pass over `stream` in order. The uniform for record i comes from the
/// substream (seed, gibbs-step, n_online_seen before the step), so a run
/// resumed from a snapshot continues the same sequence.
GibbsRun gibbs_run(ModelState& model, std::span<const LatentVector> stream,
                   const GibbsOptions& options);

}  // namespace dpstream

#endif  // DPSTREAM_GIBBS_HPP

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

#ifndef DPSTREAM_PARTICLE_HPP
#define DPSTREAM_PARTICLE_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpstream/dpgmm.hpp"
#include "dpstream/rng.hpp"

namespace dpstream {

/// One hypothesis over the class assignments of every processed online record.
struct Particle {
  ClassTable table;
  std::vector<std::size_t> assignments;  // index into table.classes, per record
  std::size_t novel_count = 0;           // classes born from the new-class outcome
  double log_weight = 0.0;               // normalized
  double weight = 0.0;                   // exp(log_weight); exactly 1/M after a resample
  double last_log_factor = 0.0;          // log predictive density applied at the last record

  const std::string& label_at(std::size_t position) const {
    return table.classes[assignments.at(position)].stats.label;
  }
  /// Next canonical "novel-<birth order>" label not already taken.
  std::string next_novel_label() const;

  friend bool operator==(const Particle&, const Particle&) = default;
};

struct Ensemble {
  std::vector<Particle> particles;
  NIWHyper hyper;
  double enp_threshold = 0.0;
  std::uint64_t seed = 0;
  std::size_t records_processed = 0;
  LatentVector last_x;  // the most recent record, needed to revise it on feedback

  std::size_t size() const noexcept { return particles.size(); }
  friend bool operator==(const Ensemble&, const Ensemble&) = default;
};

/// M particles sharing the training partition, weights 1/M. A negative
/// `enp_threshold` selects the default M / 2. Throws ConfigError for M < 1.
Ensemble pf_init(std::size_t particles, const NIWHyper& hyper, const ClassTable& train,
                 double enp_threshold, std::uint64_t seed);

/// Proposes particle m's class for x from its CRP prior (one uniform from the
/// substream (seed, proposal, m * 2^32 + record index)), multiplies its weight
/// by the student-t predictive of x under that class given earlier data, then
/// commits x. Does not normalize.
void propagate_particle(Ensemble& ensemble, std::size_t m, std::span<const double> x);

/// Log-sum-exp normalization. Throws NumericalError when every weight is zero.
void normalize_weights(Ensemble& ensemble);

/// propagate_particle for every particle, then normalize_weights.
void pf_propagate(Ensemble& ensemble, std::span<const double> x);

/// Effective number of particles 1 / sum w^2.
double enp(const Ensemble& ensemble);

/// Stratified resampling with a shared offset: the j-th point is (j + u) / M,
/// one per stratum [j/M, (j+1)/M), each selecting by inverse CDF. Particle
/// copies are deep; weights are reset to exactly 1/M.
void pf_resample(Ensemble& ensemble, Rng& rng);

/// Indices of the particles selected by pf_resample for offset u (exposed for tests).
std::vector<std::size_t> stratified_selection(std::span<const double> weights, double u);

using LabelDistribution = std::vector<std::pair<std::string, double>>;

struct PfPrediction {
  std::string label;
  LabelDistribution distribution;  // sorted by label, masses sum to 1
};

/// Sums particle weights by the label each particle holds at `position`
/// (0-based). Novel classes compare by their canonical within-particle name.
/// The label with the most mass wins; ties go to the smallest label. Throws
/// std::out_of_range for a record not yet processed.
PfPrediction pf_predict(const Ensemble& ensemble, std::size_t position);

struct PfStep {
  PfPrediction prediction;
  double enp_before_resample = 0.0;
  bool resampled = false;
};

/// One record: propagate, normalize, resample when ENP <= threshold, predict.
PfStep pf_step(Ensemble& ensemble, std::span<const double> x);

/// Resample substream index for record i; feedback-triggered resampling uses odd slots.
inline std::uint64_t resample_stream_index(std::size_t record, bool after_feedback) {
  return 2 * static_cast<std::uint64_t>(record) + (after_feedback ? 1 : 0);
}

struct PfRun {
  std::vector<std::string> predictions;
  std::vector<LabelDistribution> distributions;
  std::size_t resamples = 0;
};

PfRun pf_run(const ClassTable& train, const NIWHyper& hyper, std::span<const LatentVector> stream,
             std::size_t particles, double enp_threshold, std::uint64_t seed);

}  // namespace dpstream

#endif  // DPSTREAM_PARTICLE_HPP

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

#ifndef DPSTREAM_ACTIVE_HPP
#define DPSTREAM_ACTIVE_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "dpstream/particle.hpp"
#include "dpstream/rng.hpp"

namespace dpstream {

enum class ActiveMode { kOff, kOracle, kInteractive };

std::string_view to_string(ActiveMode mode) noexcept;
ActiveMode active_mode_from_string(std::string_view s);

struct ActiveConfig {
  double tau = 1.0;  // interactiveness threshold in [0, 1]
  std::optional<std::size_t> budget;
  ActiveMode mode = ActiveMode::kOff;

  void validate() const;
};

/// Labels with aggregated mass above this count toward |J|.
inline constexpr double kSupportMass = 1e-12;

/// Shannon entropy in nats, 0 log 0 = 0.
double entropy(std::span<const double> probabilities);
double entropy(const LabelDistribution& dist);

/// Number of labels with mass > kSupportMass.
std::size_t support_size(const LabelDistribution& dist);

/// True iff entropy exceeds tau * log|J| (strictly; equality within 1e-12
/// counts as a tie and does not query), |J| > 1, the mode is not off, and
/// fewer than `budget` queries were issued. tau = 0 queries every record.
bool should_query(const LabelDistribution& dist, const ActiveConfig& config,
                  std::size_t queries_issued);

struct QueryEvent {
  enum class Resolution { kPending, kAnswered, kSkipped };

  std::size_t index = 0;
  std::string record_id;
  LabelDistribution posterior;
  double entropy = 0.0;
  double threshold = 0.0;
  Resolution resolution = Resolution::kPending;
  std::string label;  // answer, or the model's own prediction when skipped
};

std::string_view to_string(QueryEvent::Resolution r) noexcept;

QueryEvent make_query_event(std::size_t index, std::string record_id, LabelDistribution posterior,
                            const ActiveConfig& config);

struct FeedbackOutcome {
  std::size_t particles_changed = 0;
  bool resampled = false;
};

/// Conditions every particle on the true label of the most recent record:
/// particles that disagree move x from the wrongly credited class (removing a
/// class born at this record) to the true class, creating it when the
/// particle lacks it. Each particle's last weight factor is replaced by the
/// predictive density of x under the true class given earlier data; weights
/// are renormalized and resampled when ENP <= threshold. Throws
/// std::invalid_argument when `position` is not the most recent record.
FeedbackOutcome apply_feedback(Ensemble& ensemble, std::size_t position, const std::string& label);

/// Random-selection baseline: query with probability p in (0, 1).
bool random_selection_baseline(double p, Rng& rng);

}  // namespace dpstream

#endif  // DPSTREAM_ACTIVE_HPP

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

#include "dpstream/active.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dpstream/error.hpp"

namespace dpstream {
namespace {

constexpr double kTieTolerance = 1e-12;

}  // namespace

std::string_view to_string(ActiveMode mode) noexcept {
  switch (mode) {
    case ActiveMode::kOff: return "off";
    case ActiveMode::kOracle: return "oracle";
    case ActiveMode::kInteractive: return "interactive";
  }
  return "off";
}

ActiveMode active_mode_from_string(std::string_view s) {
  if (s == "off") return ActiveMode::kOff;
  if (s == "oracle") return ActiveMode::kOracle;
  if (s == "interactive") return ActiveMode::kInteractive;
  throw ConfigError("unknown active mode '" + std::string(s) + "'");
}

void ActiveConfig::validate() const {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in [0, 1]");
}

std::string_view to_string(QueryEvent::Resolution r) noexcept {
  switch (r) {
    case QueryEvent::Resolution::kPending: return "pending";
    case QueryEvent::Resolution::kAnswered: return "answered";
    case QueryEvent::Resolution::kSkipped: return "skipped";
  }
  return "pending";
}

double entropy(std::span<const double> probabilities) {
  double h = 0.0;
  for (double p : probabilities) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::max(h, 0.0);  // masses a few ulps above 1 would go negative
}

double entropy(const LabelDistribution& dist) {
  Vector p;
  p.reserve(dist.size());
  for (const auto& entry : dist) p.push_back(entry.second);
  return entropy(p);
}

std::size_t support_size(const LabelDistribution& dist) {
  std::size_t n = 0;
  for (const auto& [label, p] : dist) n += p > kSupportMass ? 1 : 0;
  return n;
}

bool should_query(const LabelDistribution& dist, const ActiveConfig& config,
                  std::size_t queries_issued) {
  if (config.mode == ActiveMode::kOff) return false;
  if (config.budget && queries_issued >= *config.budget) return false;
  if (config.tau == 0.0) return true;  // full supervision
  const std::size_t support = support_size(dist);
  if (support <= 1) return false;
  const double threshold = config.tau * std::log(static_cast<double>(support));
  return entropy(dist) > threshold + kTieTolerance;
}

QueryEvent make_query_event(std::size_t index, std::string record_id, LabelDistribution posterior,
                            const ActiveConfig& config) {
  QueryEvent q;
  q.index = index;
  q.record_id = std::move(record_id);
  q.entropy = entropy(posterior);
  const std::size_t support = support_size(posterior);
  q.threshold = support > 1 ? config.tau * std::log(static_cast<double>(support)) : 0.0;
  q.posterior = std::move(posterior);
  return q;
}

FeedbackOutcome apply_feedback(Ensemble& ensemble, std::size_t position, const std::string& label) {
  if (ensemble.records_processed == 0 || position + 1 != ensemble.records_processed) {
    throw std::invalid_argument("feedback is only accepted for the most recent record");
  }
  if (label.empty()) throw std::invalid_argument("feedback label is empty");
  const auto& x = ensemble.last_x;
  FeedbackOutcome out;
  for (auto& p : ensemble.particles) {
    const std::size_t current = p.assignments.at(position);
    if (p.table.classes[current].stats.label == label) continue;
    ++out.particles_changed;

    const bool born_here = p.table.classes[current].stats.n == 1 &&
                           p.table.classes[current].train_count == 0;
    if (born_here && current + 1 != p.table.classes.size()) {
      throw std::logic_error("a class born at the current record must be the newest class");
    }
    const bool auto_novel = born_here && p.novel_count > 0 &&
                            p.table.classes[current].stats.label == "novel-" + std::to_string(p.novel_count);
    p.table.unassign(current, x);
    if (born_here && auto_novel) --p.novel_count;

    double log_density = 0.0;
    if (auto target = p.table.find(label)) {
      log_density = studentt_logpdf(x, predictive_params(p.table.classes[*target].stats, ensemble.hyper));
      p.table.assign(*target, x);
      p.assignments[position] = *target;
    } else {
      log_density = studentt_logpdf(x, empty_predictive_params(ensemble.hyper));
      p.assignments[position] = p.table.create(label, x);
    }
    p.log_weight += log_density - p.last_log_factor;
    p.last_log_factor = log_density;
  }
  if (out.particles_changed == 0) return out;
  normalize_weights(ensemble);
  if (enp(ensemble) <= ensemble.enp_threshold) {
    Rng rng = substream(ensemble.seed, StreamTag::kResample, resample_stream_index(position, true));
    pf_resample(ensemble, rng);
    out.resampled = true;
  }
  return out;
}

bool random_selection_baseline(double p, Rng& rng) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("random query probability must lie in (0, 1)");
  return rng.uniform() < p;
}

}  // namespace dpstream

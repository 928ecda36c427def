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

#include "dpstream/particle.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "dpstream/error.hpp"

namespace dpstream {

std::string Particle::next_novel_label() const {
  for (std::size_t k = novel_count + 1;; ++k) {
    std::string label = "novel-" + std::to_string(k);
    if (!table.find(label)) return label;
  }
}

Ensemble pf_init(std::size_t particles, const NIWHyper& hyper, const ClassTable& train,
                 double enp_threshold, std::uint64_t seed) {
  if (particles < 1) throw ConfigError("particle count must be at least 1");
  hyper.validate();
  Ensemble e;
  e.hyper = hyper;
  e.seed = seed;
  e.enp_threshold = enp_threshold < 0.0 ? 0.5 * static_cast<double>(particles) : enp_threshold;
  Particle p;
  p.table = train;
  p.weight = 1.0 / static_cast<double>(particles);
  p.log_weight = -std::log(static_cast<double>(particles));
  e.particles.assign(particles, p);
  return e;
}

void propagate_particle(Ensemble& ensemble, std::size_t m, std::span<const double> x) {
  Particle& p = ensemble.particles.at(m);
  const CrpLogWeights prior = crp_log_weights(p.table, ensemble.hyper.alpha);
  Vector probs;
  probs.reserve(prior.existing.size() + 1);
  for (double lw : prior.existing) probs.push_back(std::exp(lw));
  probs.push_back(std::exp(prior.novel));

  const std::uint64_t index = (static_cast<std::uint64_t>(m) << 32) + ensemble.records_processed;
  Rng rng = substream(ensemble.seed, StreamTag::kParticleProposal, index);
  const std::size_t choice = inverse_cdf(probs, rng.uniform());

  double log_density = 0.0;
  if (choice == prior.existing.size()) {
    log_density = studentt_logpdf(x, empty_predictive_params(ensemble.hyper));
    std::string label = p.next_novel_label();
    p.assignments.push_back(p.table.create(std::move(label), x));
    ++p.novel_count;
  } else {
    log_density = studentt_logpdf(x, predictive_params(p.table.classes[choice].stats, ensemble.hyper));
    p.table.assign(choice, x);
    p.assignments.push_back(choice);
  }
  p.last_log_factor = log_density;
  p.log_weight += log_density;
}

void normalize_weights(Ensemble& ensemble) {
  Vector lw;
  lw.reserve(ensemble.size());
  for (const auto& p : ensemble.particles) lw.push_back(p.log_weight);
  const double lse = log_sum_exp(lw);
  if (!std::isfinite(lse)) {
    throw NumericalError("particle weights degenerated: every weight underflowed to zero");
  }
  for (auto& p : ensemble.particles) {
    p.log_weight -= lse;
    p.weight = std::exp(p.log_weight);
  }
}

void pf_propagate(Ensemble& ensemble, std::span<const double> x) {
  for (std::size_t m = 0; m < ensemble.size(); ++m) propagate_particle(ensemble, m, x);
  ensemble.last_x.assign(x.begin(), x.end());
  ++ensemble.records_processed;
  normalize_weights(ensemble);
}

double enp(const Ensemble& ensemble) {
  double s = 0.0;
  for (const auto& p : ensemble.particles) s += p.weight * p.weight;
  return 1.0 / s;
}

std::vector<std::size_t> stratified_selection(std::span<const double> weights, double u) {
  const std::size_t m = weights.size();
  std::vector<std::size_t> picks;
  picks.reserve(m);
  double total = 0.0;
  for (double w : weights) total += w;
  double cum = weights.empty() ? 0.0 : weights[0] / total;
  std::size_t i = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const double point = (static_cast<double>(j) + u) / static_cast<double>(m);
    while (point >= cum && i + 1 < m) cum += weights[++i] / total;
    picks.push_back(i);
  }
  return picks;
}

void pf_resample(Ensemble& ensemble, Rng& rng) {
  Vector w;
  w.reserve(ensemble.size());
  for (const auto& p : ensemble.particles) w.push_back(p.weight);
  const auto picks = stratified_selection(w, rng.uniform());
  std::vector<Particle> next;
  next.reserve(picks.size());
  const double uniform = 1.0 / static_cast<double>(picks.size());
  const double log_uniform = -std::log(static_cast<double>(picks.size()));
  for (std::size_t idx : picks) {
    next.push_back(ensemble.particles[idx]);
    next.back().weight = uniform;
    next.back().log_weight = log_uniform;
  }
  ensemble.particles = std::move(next);
}

PfPrediction pf_predict(const Ensemble& ensemble, std::size_t position) {
  if (position >= ensemble.records_processed) {
    throw std::out_of_range("record " + std::to_string(position) + " has not been processed");
  }
  std::map<std::string, double> mass;
  for (const auto& p : ensemble.particles) mass[p.label_at(position)] += p.weight;
  PfPrediction out;
  double best = -1.0;
  for (const auto& [label, w] : mass) {
    out.distribution.emplace_back(label, w);
    if (w > best) {
      best = w;
      out.label = label;
    }
  }
  return out;
}

PfStep pf_step(Ensemble& ensemble, std::span<const double> x) {
  PfStep step;
  pf_propagate(ensemble, x);
  const std::size_t position = ensemble.records_processed - 1;
  step.enp_before_resample = enp(ensemble);
  if (step.enp_before_resample <= ensemble.enp_threshold) {
    Rng rng = substream(ensemble.seed, StreamTag::kResample, resample_stream_index(position, false));
    pf_resample(ensemble, rng);
    step.resampled = true;
  }
  step.prediction = pf_predict(ensemble, position);
  return step;
}

PfRun pf_run(const ClassTable& train, const NIWHyper& hyper, std::span<const LatentVector> stream,
             std::size_t particles, double enp_threshold, std::uint64_t seed) {
  Ensemble e = pf_init(particles, hyper, train, enp_threshold, seed);
  PfRun run;
  for (const auto& x : stream) {
    PfStep s = pf_step(e, x);
    run.resamples += s.resampled ? 1 : 0;
    run.predictions.push_back(std::move(s.prediction.label));
    run.distributions.push_back(std::move(s.prediction.distribution));
  }
  return run;
}

}  // namespace dpstream

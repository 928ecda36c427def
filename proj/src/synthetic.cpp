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

#include "dpstream/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "dpstream/error.hpp"
#include "dpstream/rng.hpp"

namespace dpstream {

void SyntheticConfig::validate() const {
  if (h == 0) throw ConfigError("synthetic: h must be positive");
  if (known == 0) throw ConfigError("synthetic: at least one known class is required");
  if (!(separation > 0.0) || !(sigma > 0.0)) {
    throw ConfigError("synthetic: separation and sigma must be positive");
  }
  if (!std::isfinite(power) || power < 0.0) throw ConfigError("synthetic: power must be >= 0");
  if (known * min_per_class > n_train || (known + emerging) * min_per_class > n_stream) {
    throw ConfigError("synthetic: too few records for the per-class minimum");
  }
}

std::vector<std::size_t> power_law_sizes(std::size_t total, std::size_t k, double power,
                                         std::size_t minimum) {
  if (k == 0) return {};
  if (k * minimum > total) throw ConfigError("power_law_sizes: minimum exceeds total");
  std::vector<double> w(k);
  for (std::size_t r = 0; r < k; ++r) w[r] = std::pow(static_cast<double>(r + 1), -power);
  const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  const auto spare = static_cast<double>(total - k * minimum);

  std::vector<std::size_t> sizes(k, minimum);
  std::vector<std::pair<double, std::size_t>> remainder(k);
  std::size_t given = k * minimum;
  for (std::size_t r = 0; r < k; ++r) {
    const double share = spare * w[r] / wsum;
    const auto whole = static_cast<std::size_t>(std::floor(share));
    sizes[r] += whole;
    given += whole;
    remainder[r] = {share - static_cast<double>(whole), r};
  }
  std::stable_sort(remainder.begin(), remainder.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; given < total; ++i, ++given) ++sizes[remainder[i % k].second];
  return sizes;
}

LatentDataset generate_synthetic(const SyntheticConfig& config, std::uint64_t seed) {
  config.validate();
  const std::size_t k = config.known + config.emerging;
  const double min_dist = config.separation * config.sigma;
  Rng rng = substream(seed, StreamTag::kSynthetic, 0);

  std::vector<Vector> means;
  for (std::size_t j = 0; j < k; ++j) {
    Vector c(config.h);
    for (int attempt = 0;; ++attempt) {
      for (auto& v : c) v = min_dist * rng.normal();
      const bool clear = std::all_of(means.begin(), means.end(), [&](const Vector& o) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < config.h; ++i) d2 += (c[i] - o[i]) * (c[i] - o[i]);
        return d2 >= min_dist * min_dist;
      });
      if (clear) break;
      if (attempt == 10000) throw ConfigError("synthetic: could not place separated class means");
    }
    means.push_back(c);
  }

  std::vector<std::string> labels;
  for (std::size_t j = 0; j < config.known; ++j) labels.push_back("K" + std::to_string(j + 1));
  for (std::size_t j = 0; j < config.emerging; ++j) labels.push_back("E" + std::to_string(j + 1));

  auto draw = [&](std::size_t j) {
    Vector x(config.h);
    for (std::size_t i = 0; i < config.h; ++i) x[i] = means[j][i] + config.sigma * rng.normal();
    return x;
  };

  LatentDataset d;
  d.name = "synthetic";
  const auto train_sizes =
      power_law_sizes(config.n_train, config.known, config.power, config.min_per_class);
  for (std::size_t j = 0; j < config.known; ++j) {
    for (std::size_t t = 0; t < train_sizes[j]; ++t) {
      d.train_ids.push_back("t" + std::to_string(d.train_ids.size()));
      d.train_x.push_back(draw(j));
      d.train_labels.push_back(labels[j]);
    }
  }

  const auto stream_sizes = power_law_sizes(config.n_stream, k, config.power, config.min_per_class);
  std::vector<std::size_t> order;
  for (std::size_t j = 0; j < k; ++j) order.insert(order.end(), stream_sizes[j], j);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  for (std::size_t j : order) {
    d.stream_ids.push_back("s" + std::to_string(d.stream_ids.size()));
    d.stream_x.push_back(draw(j));
    d.stream_labels.push_back(labels[j]);
  }
  return d;
}

}  // namespace dpstream

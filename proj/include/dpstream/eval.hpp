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

#ifndef DPSTREAM_EVAL_HPP
#define DPSTREAM_EVAL_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dpstream/active.hpp"
#include "dpstream/dpgmm.hpp"

namespace dpstream {

/// Latent training data plus a labelled online stream.
struct LatentDataset {
  std::string name;
  std::vector<std::string> train_ids;
  std::vector<LatentVector> train_x;
  std::vector<std::string> train_labels;
  std::vector<std::string> stream_ids;
  std::vector<LatentVector> stream_x;
  std::vector<std::string> stream_labels;  // ground truth; may be empty when unknown

  std::size_t latent_dim() const { return train_x.empty() ? 0 : train_x.front().size(); }
};

/// Predicted label -> true label, or nullopt when a novel label stays unmatched.
struct LabelAlignment {
  std::map<std::string, std::optional<std::string>> mapping;

  std::vector<std::optional<std::string>> apply(std::span<const std::string> predicted) const;
};

inline constexpr const char* kAlignmentRule =
    "training labels map to themselves; other predicted labels are matched greedily to "
    "unclaimed true labels by descending overlap, ties by (predicted, true) label order";

/// Greedy maximum-overlap alignment. Predicted labels in `training_labels`
/// map to themselves and claim that true label. Throws DataError on a length
/// mismatch.
LabelAlignment align_labels(std::span<const std::string> predicted, std::span<const std::string> truth,
                            const std::set<std::string>& training_labels);

/// Unweighted mean over true classes of per-class F1 after alignment.
/// Throws DataError for an empty truth sequence.
double mean_f1(std::span<const std::string> predicted, std::span<const std::string> truth,
               const LabelAlignment& alignment);

/// Distinct labels among the predictions.
std::size_t count_distinct(std::span<const std::string> predicted);

enum class Engine { kGibbs, kParticle };

std::string_view to_string(Engine e) noexcept;
Engine engine_from_string(std::string_view s);

struct EngineConfig {
  Engine engine = Engine::kParticle;
  PriorConfig prior;
  std::size_t particles = 100;
  double enp_threshold = -1.0;  // negative: particles / 2
  ActiveConfig active;
  /// When set, queries each record with this probability instead of by entropy.
  std::optional<double> random_query_probability;
  bool map_mode = false;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<std::string> predictions;
  double mean_f1 = 0.0;
  std::size_t distinct = 0;
  std::size_t queries = 0;
  double runtime_ms = 0.0;
};

/// One seeded run of the configured engine over `data`. Oracle feedback uses
/// stream_labels as the answers.
RunResult run_once(const LatentDataset& data, const EngineConfig& config, std::uint64_t seed);

struct ExperimentReport {
  std::string dataset;
  std::string engine;
  std::vector<RunResult> runs;
  double f1_mean = 0.0;
  double f1_std = 0.0;
  double distinct_mean = 0.0;
  double distinct_std = 0.0;
  double queries_mean = 0.0;
  double query_ratio = 0.0;  // queries per stream record, averaged over runs
  double runtime_ms_mean = 0.0;
};

/// Mean and sample standard deviation (0 for a single run) of run results.
ExperimentReport summarize(std::string dataset, std::string engine, std::vector<RunResult> runs,
                           std::size_t stream_length);

ExperimentReport run_experiment(const LatentDataset& data, const EngineConfig& config,
                                std::span<const std::uint64_t> seeds);

/// Paired-seed experiment where each seed also generates its own dataset.
ExperimentReport run_generated_experiment(const std::function<LatentDataset(std::uint64_t)>& make_data,
                                          const EngineConfig& config,
                                          std::span<const std::uint64_t> seeds);

struct SweepRow {
  double value = 0.0;
  ExperimentReport report;
};

struct SweepTable {
  std::string parameter;
  std::vector<SweepRow> rows;
};

/// One report per value. Throws ConfigError for an empty value list.
SweepTable sweep(const std::string& parameter, std::span<const double> values,
                 const std::function<ExperimentReport(double)>& run);

/// Plot-ready CSV: parameter,value,engine,runs,f1_mean,f1_std,distinct_mean,distinct_std,query_ratio.
void write_sweep_csv(std::ostream& out, const SweepTable& table);

/// Seeds first, first + 1, ...
std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count);

}  // namespace dpstream

#endif  // DPSTREAM_EVAL_HPP

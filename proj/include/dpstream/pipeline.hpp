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

#ifndef DPSTREAM_PIPELINE_HPP
#define DPSTREAM_PIPELINE_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpstream/active.hpp"
#include "dpstream/dpgmm.hpp"
#include "dpstream/eval.hpp"
#include "dpstream/nnmf.hpp"
#include "dpstream/particle.hpp"
#include "dpstream/records.hpp"
#include "dpstream/synthetic.hpp"

namespace dpstream {

struct PipelineConfig {
  std::filesystem::path dataset;
  std::filesystem::path artifacts = "artifacts";
  std::string name_ref;  // required when the dataset holds several name references
  int test_years = 2;    // T0
  std::size_t h = 10;
  PriorConfig prior;
  Engine engine = Engine::kParticle;
  std::size_t particles = 100;
  double enp_threshold = -1.0;
  ActiveConfig active;
  bool map_mode = false;
  std::uint64_t seed = 1;
  std::size_t runs = 1;
  std::size_t nnmf_max_iters = 2000;
  double nnmf_tol = 1e-6;
  /// Use the synthetic generator instead of prepared artifacts.
  bool synthetic = false;
  SyntheticConfig synthetic_config;
  std::filesystem::path snapshot;             // where to write a snapshot
  std::filesystem::path resume;               // snapshot to continue from
  std::optional<std::size_t> stop_after;      // records to process before snapshotting
  std::filesystem::path output;               // defaults to `artifacts`

  /// Throws ConfigError for out-of-range fields.
  void validate() const;
  std::filesystem::path output_dir() const { return output.empty() ? artifacts : output; }
};

/// Keys mirror the CLI flags (dataset, artifacts, name_ref, T0, h, alpha,
/// kappa, m_offset, engine, M, enp_threshold, tau, mode, budget, seed, runs,
/// ...). Unknown keys are a ConfigError.
void apply_config_json(PipelineConfig& config, const nlohmann::json& j);
nlohmann::json config_to_json(const PipelineConfig& config);

/// Reads the dataset, keeping one name reference.
std::vector<RawRecord> load_dataset(const PipelineConfig& config);

struct Prepared {
  StreamSplit split;
  FeatureVocabulary vocabulary;
  Basis basis;
  LatentDataset latent;
  std::size_t nnmf_iterations = 0;
  double nnmf_objective = 0.0;
};

/// Split, vocabulary, NNMF on the training matrix and NNLS projection of the
/// test records. Training records must carry true labels.
Prepared prepare(const std::vector<RawRecord>& records, const PipelineConfig& config);

/// prepare() on the configured dataset, writing vocabulary.json, basis.json,
/// latent.json, split.json, train.jsonl and test.jsonl into `artifacts`.
/// Throws ConfigError when the dataset file does not exist.
Prepared cmd_prepare(const PipelineConfig& config);

struct Artifacts {
  FeatureVocabulary vocabulary;
  Basis basis;
  LatentDataset latent;
  std::vector<RawRecord> train_records;
  std::vector<RawRecord> test_records;
};

Artifacts load_artifacts(const std::filesystem::path& dir);

/// Maps raw records into the latent space of a prepared basis.
class RecordEmbedder {
 public:
  RecordEmbedder(FeatureVocabulary vocabulary, Basis basis, Normalizer normalizer = Normalizer::english());
  LatentVector embed(const RawRecord& record) const;

 private:
  FeatureVocabulary vocabulary_;
  std::shared_ptr<const Basis> basis_;
  Normalizer normalizer_;
  NnlsProjector projector_;
};

/// Append-only JSONL event log with strictly increasing sequence numbers.
class EventLog {
 public:
  explicit EventLog(std::ostream* out = nullptr, std::uint64_t first_seq = 0)
      : out_(out), seq_(first_seq) {}

  nlohmann::json append(const std::string& type, nlohmann::json fields);
  std::uint64_t next_seq() const noexcept { return seq_; }
  const std::vector<nlohmann::json>& events() const noexcept { return events_; }

 private:
  std::ostream* out_;
  std::uint64_t seq_;
  std::vector<nlohmann::json> events_;
};

struct SessionOptions {
  Engine engine = Engine::kParticle;
  std::size_t particles = 100;
  double enp_threshold = -1.0;
  ActiveConfig active;
  bool map_mode = false;
  std::uint64_t seed = 1;
  PriorConfig prior;
};

SessionOptions session_options(const PipelineConfig& config);

/// One live pass over a stream: prediction, query decisions and feedback,
/// with the state needed to snapshot, resume and replay.
class StreamSession {
 public:
  /// Uses the training columns of `data`. Active feedback requires the
  /// particle engine (ConfigError otherwise).
  StreamSession(const LatentDataset& data, SessionOptions options, EventLog* log = nullptr);

  struct Step {
    std::size_t index = 0;
    std::string record_id;
    std::string prediction;
    LabelDistribution posterior;
    std::optional<QueryEvent> query;
    bool resampled = false;
  };

  /// Processes the next record. Throws std::logic_error while a query is pending.
  Step process(const std::string& record_id, std::span<const double> x,
               std::optional<std::string> truth = std::nullopt);

  /// Resolves the pending query with its true label. Throws
  /// std::invalid_argument when `index` is not the pending query.
  FeedbackOutcome answer(std::size_t index, const std::string& label);
  /// Resolves the pending query with the model's own prediction.
  void skip(std::size_t index);

  const std::optional<QueryEvent>& pending() const noexcept { return pending_; }
  std::size_t processed() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<std::string>& record_ids() const noexcept { return ids_; }
  const std::vector<std::optional<std::string>>& truths() const noexcept { return truths_; }
  const std::set<std::string>& training_labels() const noexcept { return training_labels_; }
  const SessionOptions& options() const noexcept { return options_; }
  std::size_t queries_issued() const noexcept { return queries_; }
  std::size_t queries_answered() const noexcept { return answered_; }
  std::size_t queries_skipped() const noexcept { return skipped_; }

  /// Mean-F1 over processed records that carry a true label.
  std::optional<double> running_mean_f1() const;
  /// Classes in the model (Gibbs) or in the heaviest particle.
  std::size_t class_count() const;
  /// ENP of the ensemble; 1 for the Gibbs engine.
  double current_enp() const;
  std::vector<std::string> class_labels() const;

  void attach_log(EventLog* log) noexcept { log_ = log; }
  /// Sequence number the attached log should continue from after a restore.
  std::uint64_t log_seq() const noexcept { return log_ ? log_->next_seq() : log_seq_; }
  /// Appends an arbitrary event to the attached log, if any.
  void log_event(const std::string& type, nlohmann::json fields) { emit(type, std::move(fields)); }
  /// Log header carrying the seed and options.
  void log_header(const nlohmann::json& extra = nlohmann::json::object());

  /// The full session state; restore(snapshot()) continues bit-identically.
  nlohmann::json snapshot() const;
  static StreamSession restore(const nlohmann::json& body, EventLog* log = nullptr);

  void save(const std::filesystem::path& path) const;
  /// Throws DataError on a truncated or mismatched file; nothing is returned
  /// in that case.
  static StreamSession load(const std::filesystem::path& path, EventLog* log = nullptr);

 private:
  StreamSession() = default;
  void emit(const std::string& type, nlohmann::json fields);

  SessionOptions options_;
  std::optional<ModelState> gibbs_;
  std::optional<Ensemble> ensemble_;
  std::set<std::string> training_labels_;
  std::vector<std::string> ids_;
  std::vector<std::string> labels_;
  std::vector<std::optional<std::string>> truths_;
  std::optional<QueryEvent> pending_;
  std::size_t queries_ = 0;
  std::size_t answered_ = 0;
  std::size_t skipped_ = 0;
  EventLog* log_ = nullptr;
  std::uint64_t log_seq_ = 0;
};

SessionOptions decode_session_options(const nlohmann::json& j);
nlohmann::json encode_session_options(const SessionOptions& o);

/// Rebuilds a session from an event log: the header's options, the given
/// training data, then every record-seen and feedback-received event in order.
StreamSession replay(std::istream& log, const LatentDataset& training);

struct StreamOutcome {
  std::vector<std::string> predictions;  // the first seed's session
  std::optional<ExperimentReport> report;  // when the stream has true labels
  std::size_t processed = 0;
  bool stopped_early = false;
};

/// Runs the session for the first seed (writing predictions.jsonl,
/// events.jsonl and, when stopping early, the snapshot) and, when labels are
/// known, the seeded experiment for report.json.
StreamOutcome cmd_stream(const PipelineConfig& config);

/// parameter in {alpha, kappa, M, tau, h, T0}; writes sweep.csv to the output dir.
SweepTable cmd_sweep(const PipelineConfig& config, const std::string& parameter,
                     const std::vector<double>& values);

/// Plain-text report table.
void print_report(std::ostream& out, const ExperimentReport& report);

}  // namespace dpstream

#endif  // DPSTREAM_PIPELINE_HPP

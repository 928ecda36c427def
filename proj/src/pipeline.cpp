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

#include "dpstream/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include "dpstream/error.hpp"
#include "dpstream/gibbs.hpp"
#include "dpstream/persist.hpp"

namespace dpstream {

namespace fs = std::filesystem;
using nlohmann::json;

void PipelineConfig::validate() const {
  if (test_years < 1) throw ConfigError("T0 must be at least 1");
  if (h < 1) throw ConfigError("h must be at least 1");
  if (!(prior.alpha > 0.0) || !std::isfinite(prior.alpha)) throw ConfigError("alpha must be positive");
  if (!(prior.kappa > 0.0) || !std::isfinite(prior.kappa)) throw ConfigError("kappa must be positive");
  if (!(prior.m_offset > -1.0)) throw ConfigError("m_offset must exceed -1 so that m + 1 - h > 0");
  if (particles < 1) throw ConfigError("M must be at least 1");
  if (runs < 1) throw ConfigError("runs must be at least 1");
  if (nnmf_max_iters < 1 || !(nnmf_tol >= 0.0)) throw ConfigError("bad NNMF stopping settings");
  active.validate();
  if (synthetic) synthetic_config.validate();
}

void apply_config_json(PipelineConfig& c, const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "dataset") {
        c.dataset = v.get<std::string>();
      } else if (key == "artifacts") {
        c.artifacts = v.get<std::string>();
      } else if (key == "name_ref") {
        c.name_ref = v.get<std::string>();
      } else if (key == "T0") {
        c.test_years = v.get<int>();
      } else if (key == "h") {
        c.h = v.get<std::size_t>();
        c.synthetic_config.h = c.h;
      } else if (key == "alpha") {
        c.prior.alpha = v.get<double>();
      } else if (key == "kappa") {
        c.prior.kappa = v.get<double>();
      } else if (key == "m_offset") {
        c.prior.m_offset = v.get<double>();
      } else if (key == "engine") {
        c.engine = engine_from_string(v.get<std::string>());
      } else if (key == "M") {
        c.particles = v.get<std::size_t>();
      } else if (key == "enp_threshold") {
        c.enp_threshold = v.get<double>();
      } else if (key == "tau") {
        c.active.tau = v.get<double>();
      } else if (key == "mode") {
        c.active.mode = active_mode_from_string(v.get<std::string>());
      } else if (key == "budget") {
        if (v.is_null()) {
          c.active.budget.reset();
        } else {
          c.active.budget = v.get<std::size_t>();
        }
      } else if (key == "map") {
        c.map_mode = v.get<bool>();
      } else if (key == "seed") {
        c.seed = v.get<std::uint64_t>();
      } else if (key == "runs") {
        c.runs = v.get<std::size_t>();
      } else if (key == "nnmf_max_iters") {
        c.nnmf_max_iters = v.get<std::size_t>();
      } else if (key == "nnmf_tol") {
        c.nnmf_tol = v.get<double>();
      } else if (key == "synthetic") {
        c.synthetic = v.get<bool>();
      } else if (key == "separation") {
        c.synthetic_config.separation = v.get<double>();
      } else if (key == "known") {
        c.synthetic_config.known = v.get<std::size_t>();
      } else if (key == "emerging") {
        c.synthetic_config.emerging = v.get<std::size_t>();
      } else if (key == "n_train") {
        c.synthetic_config.n_train = v.get<std::size_t>();
      } else if (key == "n_stream") {
        c.synthetic_config.n_stream = v.get<std::size_t>();
      } else if (key == "snapshot") {
        c.snapshot = v.get<std::string>();
      } else if (key == "resume") {
        c.resume = v.get<std::string>();
      } else if (key == "stop_after") {
        c.stop_after = v.get<std::size_t>();
      } else if (key == "output") {
        c.output = v.get<std::string>();
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

json config_to_json(const PipelineConfig& c) {
  json j = {{"dataset", c.dataset.string()},
            {"artifacts", c.artifacts.string()},
            {"name_ref", c.name_ref},
            {"T0", c.test_years},
            {"h", c.h},
            {"alpha", c.prior.alpha},
            {"kappa", c.prior.kappa},
            {"m_offset", c.prior.m_offset},
            {"engine", to_string(c.engine)},
            {"M", c.particles},
            {"enp_threshold", c.enp_threshold},
            {"tau", c.active.tau},
            {"mode", to_string(c.active.mode)},
            {"map", c.map_mode},
            {"seed", c.seed},
            {"runs", c.runs},
            {"nnmf_max_iters", c.nnmf_max_iters},
            {"nnmf_tol", c.nnmf_tol},
            {"synthetic", c.synthetic}};
  j["budget"] = c.active.budget ? json(*c.active.budget) : json(nullptr);
  return j;
}

std::vector<RawRecord> load_dataset(const PipelineConfig& config) {
  if (config.dataset.empty()) throw ConfigError("no dataset given");
  if (!fs::exists(config.dataset)) throw ConfigError("dataset not found: " + config.dataset.string());
  std::ifstream in(config.dataset);
  if (!in) throw ConfigError("cannot open dataset " + config.dataset.string());
  std::vector<RawRecord> all;
  try {
    all = parse_records(in);
  } catch (const DataError& e) {
    throw DataError(config.dataset.string() + ": " + e.what());
  }
  std::set<std::string> names;
  for (const auto& r : all) names.insert(Normalizer::normalize_name(r.name_ref));
  std::string wanted = Normalizer::normalize_name(config.name_ref);
  if (wanted.empty()) {
    if (names.size() > 1) {
      std::string list;
      for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
      throw ConfigError("dataset holds several name references (" + list + "); pick one with name_ref");
    }
    return all;
  }
  std::vector<RawRecord> kept;
  for (auto& r : all) {
    if (Normalizer::normalize_name(r.name_ref) == wanted) kept.push_back(std::move(r));
  }
  if (kept.empty()) throw DataError("no records for name reference '" + config.name_ref + "'");
  return kept;
}

Prepared prepare(const std::vector<RawRecord>& records, const PipelineConfig& config) {
  Prepared p;
  p.split = temporal_split(records, config.test_years);
  if (p.split.train.empty()) throw DataError("the temporal split left no training records");
  for (const auto& r : p.split.train) {
    if (!r.true_label) throw DataError("training record '" + r.id + "' has no true_label");
  }
  const Normalizer normalizer = Normalizer::english();
  p.vocabulary = build_vocabulary(p.split.train, normalizer);
  const Matrix x = feature_matrix(p.split.train, p.vocabulary, normalizer);

  NnmfOptions nopt;
  nopt.latent_dim = config.h;
  nopt.max_iters = config.nnmf_max_iters;
  nopt.tol = config.nnmf_tol;
  nopt.seed = config.seed;
  NnmfResult fit = nnmf_fit(x, nopt);
  p.basis = std::move(fit.basis);
  p.nnmf_iterations = fit.iterations;
  p.nnmf_objective = fit.objective_trace.back();

  LatentDataset& d = p.latent;
  d.name = records.empty() ? "" : Normalizer::normalize_name(records.front().name_ref);
  for (std::size_t i = 0; i < p.split.train.size(); ++i) {
    const auto row = fit.coefficients.row(i);
    d.train_ids.push_back(p.split.train[i].id);
    d.train_x.emplace_back(row.begin(), row.end());
    d.train_labels.push_back(*p.split.train[i].true_label);
  }
  const NnlsProjector projector(p.basis);
  bool all_labelled = true;
  for (const auto& r : p.split.test) {
    d.stream_ids.push_back(r.id);
    d.stream_x.push_back(projector.solve(featurize(r, p.vocabulary, normalizer).to_dense()).coefficients);
    all_labelled = all_labelled && r.true_label.has_value();
  }
  if (all_labelled) {
    for (const auto& r : p.split.test) d.stream_labels.push_back(*r.true_label);
  }
  return p;
}

namespace {

void write_records(const fs::path& path, const std::vector<RawRecord>& records) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    for (const auto& r : records) out << persist::encode(r).dump() << '\n';
  }
  fs::rename(tmp, path);
}

std::vector<RawRecord> read_records(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return parse_records(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

template <class F>
auto guarded(const std::string& what, F f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(what + ": " + e.what());
  }
}

}  // namespace

Prepared cmd_prepare(const PipelineConfig& config) {
  config.validate();
  Prepared p = prepare(load_dataset(config), config);
  const fs::path dir = config.artifacts;
  fs::create_directories(dir);
  persist::write_file(dir / "vocabulary.json", persist::wrap("vocabulary", persist::encode(p.vocabulary)));
  persist::write_file(dir / "basis.json", persist::wrap("basis", persist::encode(p.basis)));
  json latent = persist::encode(p.latent);
  latent["nnmf"] = {{"iterations", p.nnmf_iterations}, {"objective", persist::encode(p.nnmf_objective)}};
  persist::write_file(dir / "latent.json", persist::wrap("latent", latent));
  json split = {{"T0", config.test_years},
                {"boundary_year", p.split.boundary_year},
                {"train_count", p.split.train.size()},
                {"test_count", p.split.test.size()},
                {"train_ids", p.latent.train_ids},
                {"test_ids", p.latent.stream_ids},
                {"h", config.h},
                {"seed", config.seed},
                {"feature_dim", p.vocabulary.size()}};
  split["warning"] = p.split.warning ? json(*p.split.warning) : json(nullptr);
  persist::write_file(dir / "split.json", persist::wrap("split", split));
  write_records(dir / "train.jsonl", p.split.train);
  write_records(dir / "test.jsonl", p.split.test);
  return p;
}

Artifacts load_artifacts(const fs::path& dir) {
  if (!fs::exists(dir / "latent.json")) {
    throw ConfigError("no prepared artifacts in " + dir.string() + " (run prepare first)");
  }
  Artifacts a;
  a.vocabulary = guarded("vocabulary.json", [&] {
    return persist::decode_vocabulary(persist::unwrap(persist::read_file(dir / "vocabulary.json"), "vocabulary"));
  });
  a.basis = guarded("basis.json", [&] {
    return persist::decode_basis(persist::unwrap(persist::read_file(dir / "basis.json"), "basis"));
  });
  a.latent = guarded("latent.json", [&] {
    return persist::decode_dataset(persist::unwrap(persist::read_file(dir / "latent.json"), "latent"));
  });
  if (fs::exists(dir / "train.jsonl")) a.train_records = read_records(dir / "train.jsonl");
  if (fs::exists(dir / "test.jsonl")) a.test_records = read_records(dir / "test.jsonl");
  return a;
}

RecordEmbedder::RecordEmbedder(FeatureVocabulary vocabulary, Basis basis, Normalizer normalizer)
    : vocabulary_(std::move(vocabulary)),
      basis_(std::make_shared<const Basis>(std::move(basis))),
      normalizer_(std::move(normalizer)),
      projector_(*basis_) {
  if (vocabulary_.size() != basis_->feature_dim()) {
    throw DataError("vocabulary and basis disagree on the feature dimension");
  }
}

LatentVector RecordEmbedder::embed(const RawRecord& record) const {
  return projector_.solve(featurize(record, vocabulary_, normalizer_).to_dense()).coefficients;
}

json EventLog::append(const std::string& type, json fields) {
  fields["seq"] = seq_++;
  fields["type"] = type;
  if (out_) {
    *out_ << fields.dump() << '\n';
    out_->flush();
  }
  events_.push_back(fields);
  return fields;
}

SessionOptions session_options(const PipelineConfig& c) {
  SessionOptions o;
  o.engine = c.engine;
  o.particles = c.particles;
  o.enp_threshold = c.enp_threshold;
  o.active = c.active;
  o.map_mode = c.map_mode;
  o.seed = c.seed;
  o.prior = c.prior;
  return o;
}

json encode_session_options(const SessionOptions& o) {
  json j = {{"engine", to_string(o.engine)},
            {"particles", o.particles},
            {"enp_threshold", persist::encode(o.enp_threshold)},
            {"tau", persist::encode(o.active.tau)},
            {"mode", to_string(o.active.mode)},
            {"map", o.map_mode},
            {"seed", o.seed},
            {"alpha", persist::encode(o.prior.alpha)},
            {"kappa", persist::encode(o.prior.kappa)},
            {"m_offset", persist::encode(o.prior.m_offset)}};
  j["budget"] = o.active.budget ? json(*o.active.budget) : json(nullptr);
  return j;
}

SessionOptions decode_session_options(const json& j) {
  SessionOptions o;
  o.engine = engine_from_string(j.at("engine").get<std::string>());
  o.particles = j.at("particles").get<std::size_t>();
  o.enp_threshold = persist::decode_double(j.at("enp_threshold"));
  o.active.tau = persist::decode_double(j.at("tau"));
  o.active.mode = active_mode_from_string(j.at("mode").get<std::string>());
  if (!j.at("budget").is_null()) o.active.budget = j.at("budget").get<std::size_t>();
  o.map_mode = j.at("map").get<bool>();
  o.seed = j.at("seed").get<std::uint64_t>();
  o.prior.alpha = persist::decode_double(j.at("alpha"));
  o.prior.kappa = persist::decode_double(j.at("kappa"));
  o.prior.m_offset = persist::decode_double(j.at("m_offset"));
  return o;
}

StreamSession::StreamSession(const LatentDataset& data, SessionOptions options, EventLog* log)
    : options_(std::move(options)), log_(log) {
  options_.active.validate();
  if (options_.engine != Engine::kParticle && options_.active.mode != ActiveMode::kOff) {
    throw ConfigError("label feedback requires the particle filter engine");
  }
  const NIWHyper hyper =
      estimate_hyperparams(data.train_x, data.train_labels, data.latent_dim(), options_.prior);
  if (options_.engine == Engine::kGibbs) {
    gibbs_ = make_model(data.train_x, data.train_labels, hyper);
  } else {
    ensemble_ = pf_init(options_.particles, hyper, build_class_table(data.train_x, data.train_labels),
                        options_.enp_threshold, options_.seed);
  }
  training_labels_.insert(data.train_labels.begin(), data.train_labels.end());
}

void StreamSession::emit(const std::string& type, json fields) {
  if (log_) log_->append(type, std::move(fields));
}

void StreamSession::log_header(const json& extra) {
  json h = {{"seed", options_.seed}, {"options", encode_session_options(options_)}};
  for (const auto& [k, v] : extra.items()) h[k] = v;
  emit("header", std::move(h));
}

StreamSession::Step StreamSession::process(const std::string& record_id, std::span<const double> x,
                                           std::optional<std::string> truth) {
  if (pending_) throw std::logic_error("a query is pending; resolve it before the next record");
  const std::size_t h = gibbs_ ? gibbs_->hyper.h : ensemble_->hyper.h;
  if (x.size() != h) {
    throw DataError("record " + record_id + " has dimension " + std::to_string(x.size()) + ", expected " +
                    std::to_string(h));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw DataError("record " + record_id + " has a non-finite coordinate");
  }
  Step s;
  s.index = processed();
  s.record_id = record_id;
  json seen = {{"index", s.index}, {"id", record_id}, {"x", persist::encode(Vector(x.begin(), x.end()))}};
  seen["truth"] = truth ? json(*truth) : json(nullptr);
  emit("record-seen", std::move(seen));

  if (gibbs_) {
    const ClassPosterior post = posterior_over_classes(x, *gibbs_);
    std::map<std::string, double> by_label;
    for (std::size_t j = 0; j < gibbs_->table.classes.size(); ++j) {
      by_label[gibbs_->table.classes[j].stats.label] = post.probabilities[j];
    }
    if (post.novel() > 0.0) by_label[gibbs_->peek_novel_label()] = post.novel();
    s.posterior.assign(by_label.begin(), by_label.end());
    Rng rng = substream(options_.seed, StreamTag::kGibbsStep, gibbs_->table.n_online_seen);
    s.prediction = gibbs_step(*gibbs_, x, rng, options_.map_mode);
  } else {
    PfStep step = pf_step(*ensemble_, x);
    s.resampled = step.resampled;
    if (step.resampled) {
      emit("resample", {{"index", s.index}, {"enp", persist::encode(step.enp_before_resample)}});
    }
    s.prediction = std::move(step.prediction.label);
    s.posterior = std::move(step.prediction.distribution);
  }
  emit("prediction",
       {{"index", s.index}, {"label", s.prediction}, {"posterior", persist::encode(s.posterior)}});

  ids_.push_back(record_id);
  labels_.push_back(s.prediction);
  truths_.push_back(std::move(truth));

  if (ensemble_ && should_query(s.posterior, options_.active, queries_)) {
    ++queries_;
    pending_ = make_query_event(s.index, record_id, s.posterior, options_.active);
    s.query = pending_;
    emit("query-issued", persist::encode(*pending_));
  }
  return s;
}

FeedbackOutcome StreamSession::answer(std::size_t index, const std::string& label) {
  if (!pending_ || pending_->index != index) {
    throw std::invalid_argument("no pending query for record " + std::to_string(index));
  }
  if (label.empty()) throw std::invalid_argument("empty label");
  const FeedbackOutcome out = apply_feedback(*ensemble_, index, label);
  labels_[index] = label;
  ++answered_;
  pending_.reset();
  emit("feedback-received", {{"index", index},
                             {"label", label},
                             {"resolution", "answered"},
                             {"particles_changed", out.particles_changed},
                             {"resampled", out.resampled}});
  return out;
}

void StreamSession::skip(std::size_t index) {
  if (!pending_ || pending_->index != index) {
    throw std::invalid_argument("no pending query for record " + std::to_string(index));
  }
  ++skipped_;
  pending_.reset();
  emit("feedback-received", {{"index", index}, {"label", labels_[index]}, {"resolution", "skipped"}});
}

std::optional<double> StreamSession::running_mean_f1() const {
  std::vector<std::string> pred;
  std::vector<std::string> truth;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!truths_[i]) continue;
    pred.push_back(labels_[i]);
    truth.push_back(*truths_[i]);
  }
  if (truth.empty()) return std::nullopt;
  return mean_f1(pred, truth, align_labels(pred, truth, training_labels_));
}

namespace {

const Particle& heaviest(const Ensemble& e) {
  return *std::max_element(e.particles.begin(), e.particles.end(),
                           [](const Particle& a, const Particle& b) { return a.weight < b.weight; });
}

}  // namespace

std::size_t StreamSession::class_count() const {
  return gibbs_ ? gibbs_->table.classes.size() : heaviest(*ensemble_).table.classes.size();
}

double StreamSession::current_enp() const { return ensemble_ ? enp(*ensemble_) : 1.0; }

std::vector<std::string> StreamSession::class_labels() const {
  const ClassTable& t = gibbs_ ? gibbs_->table : heaviest(*ensemble_).table;
  std::vector<std::string> out;
  for (const auto& c : t.classes) out.push_back(c.stats.label);
  return out;
}

json StreamSession::snapshot() const {
  json j;
  j["options"] = encode_session_options(options_);
  j["training_labels"] = training_labels_;
  if (gibbs_) j["model"] = persist::encode(*gibbs_);
  if (ensemble_) j["ensemble"] = persist::encode(*ensemble_);
  j["ids"] = ids_;
  j["labels"] = labels_;
  json truths = json::array();
  for (const auto& t : truths_) truths.push_back(t ? json(*t) : json(nullptr));
  j["truths"] = truths;
  j["pending"] = pending_ ? persist::encode(*pending_) : json(nullptr);
  j["queries"] = queries_;
  j["answered"] = answered_;
  j["skipped"] = skipped_;
  j["log_seq"] = log_seq();
  return j;
}

StreamSession StreamSession::restore(const json& j, EventLog* log) {
  return guarded("session snapshot", [&] {
    StreamSession s;
    s.options_ = decode_session_options(j.at("options"));
    s.training_labels_ = j.at("training_labels").get<std::set<std::string>>();
    if (j.contains("model")) s.gibbs_ = persist::decode_model(j.at("model"));
    if (j.contains("ensemble")) s.ensemble_ = persist::decode_ensemble(j.at("ensemble"));
    if (s.gibbs_.has_value() == s.ensemble_.has_value()) {
      throw DataError("session snapshot must hold exactly one engine state");
    }
    s.ids_ = j.at("ids").get<std::vector<std::string>>();
    s.labels_ = j.at("labels").get<std::vector<std::string>>();
    for (const auto& t : j.at("truths")) {
      s.truths_.push_back(t.is_null() ? std::nullopt : std::optional<std::string>(t.get<std::string>()));
    }
    if (s.ids_.size() != s.labels_.size() || s.truths_.size() != s.labels_.size()) {
      throw DataError("session snapshot columns differ in length");
    }
    if (!j.at("pending").is_null()) s.pending_ = persist::decode_query(j.at("pending"));
    s.queries_ = j.at("queries").get<std::size_t>();
    s.answered_ = j.at("answered").get<std::size_t>();
    s.skipped_ = j.at("skipped").get<std::size_t>();
    s.log_seq_ = j.at("log_seq").get<std::uint64_t>();
    s.log_ = log;
    return s;
  });
}

void StreamSession::save(const fs::path& path) const {
  persist::write_file(path, persist::wrap("session", snapshot()));
}

StreamSession StreamSession::load(const fs::path& path, EventLog* log) {
  const json doc = persist::read_file(path);
  return restore(guarded(path.string(), [&] { return persist::unwrap(doc, "session"); }), log);
}

StreamSession replay(std::istream& in, const LatentDataset& training) {
  std::optional<StreamSession> session;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    guarded("event log line " + std::to_string(line_no), [&] {
      const json ev = json::parse(line);
      const auto type = ev.at("type").get<std::string>();
      if (type == "header") {
        if (session) throw DataError("event log has a second header");
        session.emplace(training, decode_session_options(ev.at("options")));
        return 0;
      }
      if (!session) throw DataError("event log does not start with a header");
      if (type == "record-seen") {
        const auto& t = ev.at("truth");
        const std::size_t index = ev.at("index").get<std::size_t>();
        if (index != session->processed()) throw DataError("event log skips a record");
        session->process(ev.at("id").get<std::string>(), persist::decode_vector(ev.at("x")),
                         t.is_null() ? std::nullopt : std::optional<std::string>(t.get<std::string>()));
      } else if (type == "prediction") {
        const std::size_t index = ev.at("index").get<std::size_t>();
        if (session->labels().at(index) != ev.at("label").get<std::string>()) {
          throw DataError("replay diverged at record " + std::to_string(index));
        }
      } else if (type == "feedback-received") {
        const std::size_t index = ev.at("index").get<std::size_t>();
        if (ev.at("resolution").get<std::string>() == "answered") {
          session->answer(index, ev.at("label").get<std::string>());
        } else {
          session->skip(index);
        }
      }
      return 0;
    });
  }
  if (!session) throw DataError("empty event log");
  return std::move(*session);
}

namespace {

EngineConfig engine_config(const PipelineConfig& c) {
  EngineConfig e;
  e.engine = c.engine;
  e.prior = c.prior;
  e.particles = c.particles;
  e.enp_threshold = c.enp_threshold;
  e.active = c.active;
  if (e.active.mode == ActiveMode::kInteractive) e.active.mode = ActiveMode::kOracle;
  e.map_mode = c.map_mode;
  return e;
}

json report_json(const ExperimentReport& r) {
  json runs = json::array();
  for (const auto& run : r.runs) {
    runs.push_back({{"seed", run.seed},
                    {"mean_f1", run.mean_f1},
                    {"distinct", run.distinct},
                    {"queries", run.queries},
                    {"runtime_ms", run.runtime_ms}});
  }
  return {{"alignment_rule", kAlignmentRule},
          {"dataset", r.dataset},
          {"engine", r.engine},
          {"f1_mean", r.f1_mean},
          {"f1_std", r.f1_std},
          {"distinct_mean", r.distinct_mean},
          {"distinct_std", r.distinct_std},
          {"queries_mean", r.queries_mean},
          {"query_ratio", r.query_ratio},
          {"runtime_ms_mean", r.runtime_ms_mean},
          {"runs", runs}};
}

}  // namespace

void print_report(std::ostream& out, const ExperimentReport& r) {
  out << "# alignment: " << kAlignmentRule << '\n';
  out << std::left << std::setw(16) << "dataset" << std::setw(8) << "engine" << std::setw(6) << "runs"
      << std::setw(18) << "mean-F1" << std::setw(16) << "distinct" << std::setw(10) << "queried"
      << "ms/run\n";
  std::ostringstream f1;
  f1 << std::fixed << std::setprecision(4) << r.f1_mean << " +- " << r.f1_std;
  std::ostringstream distinct;
  distinct << std::fixed << std::setprecision(2) << r.distinct_mean << " +- " << r.distinct_std;
  std::ostringstream q;
  q << std::fixed << std::setprecision(3) << r.query_ratio;
  out << std::setw(16) << r.dataset << std::setw(8) << r.engine << std::setw(6) << r.runs.size()
      << std::setw(18) << f1.str() << std::setw(16) << distinct.str() << std::setw(10) << q.str()
      << std::fixed << std::setprecision(1) << r.runtime_ms_mean << '\n';
}

StreamOutcome cmd_stream(const PipelineConfig& config) {
  config.validate();
  if (config.active.mode == ActiveMode::kInteractive) {
    throw ConfigError("interactive feedback needs the serve command; use mode=oracle or off");
  }
  const LatentDataset data = config.synthetic ? generate_synthetic(config.synthetic_config, config.seed)
                                              : load_artifacts(config.artifacts).latent;
  const bool labelled = data.stream_labels.size() == data.stream_x.size() && !data.stream_x.empty();
  if (config.active.mode == ActiveMode::kOracle && !labelled) {
    throw DataError("oracle feedback needs true labels for every stream record");
  }
  const fs::path out_dir = config.output_dir();
  fs::create_directories(out_dir);

  StreamOutcome outcome;
  std::optional<StreamSession> session;
  std::ofstream events;
  std::optional<EventLog> log;
  if (!config.resume.empty()) {
    session.emplace(StreamSession::load(config.resume));
    events.open(out_dir / "events.jsonl", std::ios::app);
    log.emplace(&events, session->log_seq());
    session->attach_log(&*log);
  } else {
    events.open(out_dir / "events.jsonl", std::ios::trunc);
    log.emplace(&events);
    session.emplace(data, session_options(config), &*log);
    session->log_header({{"dataset", data.name}, {"records", data.stream_x.size()}});
  }
  if (!events) throw DataError("cannot write " + (out_dir / "events.jsonl").string());

  const std::size_t end = config.stop_after
                              ? std::min(data.stream_x.size(), *config.stop_after)
                              : data.stream_x.size();
  for (std::size_t i = session->processed(); i < end; ++i) {
    std::optional<std::string> truth;
    if (labelled) truth = data.stream_labels[i];
    const auto step = session->process(data.stream_ids[i], data.stream_x[i], truth);
    if (step.query) session->answer(step.index, *truth);
  }
  outcome.processed = session->processed();
  outcome.predictions = session->labels();
  outcome.stopped_early = outcome.processed < data.stream_x.size();

  if (outcome.stopped_early) {
    const fs::path snap = config.snapshot.empty() ? out_dir / "snapshot.json" : config.snapshot;
    log->append("snapshot", {{"path", snap.string()}, {"index", outcome.processed}});
    session->save(snap);
  }

  {
    std::ofstream preds(out_dir / "predictions.jsonl", std::ios::trunc);
    for (std::size_t i = 0; i < session->processed(); ++i) {
      json p = {{"index", i}, {"id", session->record_ids()[i]}, {"prediction", session->labels()[i]}};
      if (session->truths()[i]) p["truth"] = *session->truths()[i];
      preds << p.dump() << '\n';
    }
  }

  if (labelled && !outcome.stopped_early) {
    const auto seeds = seed_range(config.seed, config.runs);
    const EngineConfig ec = engine_config(config);
    ExperimentReport report =
        config.synthetic
            ? run_generated_experiment(
                  [&](std::uint64_t s) { return generate_synthetic(config.synthetic_config, s); }, ec, seeds)
            : run_experiment(data, ec, seeds);
    persist::write_file(out_dir / "report.json", report_json(report));
    outcome.report = std::move(report);
  }
  return outcome;
}

SweepTable cmd_sweep(const PipelineConfig& config, const std::string& parameter,
                     const std::vector<double>& values) {
  config.validate();
  std::optional<std::vector<RawRecord>> records;
  std::optional<LatentDataset> prepared;
  const bool reprepare = parameter == "h" || parameter == "T0";
  if (config.synthetic && parameter == "T0") throw ConfigError("T0 does not apply to synthetic data");
  if (!config.synthetic) {
    if (reprepare) {
      records = load_dataset(config);
    } else {
      prepared = load_artifacts(config.artifacts).latent;
    }
  }
  const auto seeds = seed_range(config.seed, config.runs);

  SweepTable table = sweep(parameter, values, [&](double v) {
    PipelineConfig c = config;
    if (parameter == "alpha") {
      c.prior.alpha = v;
    } else if (parameter == "kappa") {
      c.prior.kappa = v;
    } else if (parameter == "M") {
      c.particles = static_cast<std::size_t>(std::llround(v));
    } else if (parameter == "tau") {
      c.active.tau = v;
      if (c.active.mode == ActiveMode::kOff) c.active.mode = ActiveMode::kOracle;
    } else if (parameter == "h") {
      c.h = static_cast<std::size_t>(std::llround(v));
      c.synthetic_config.h = c.h;
    } else if (parameter == "T0") {
      c.test_years = static_cast<int>(std::llround(v));
    } else {
      throw ConfigError("cannot sweep '" + parameter + "' (alpha, kappa, M, tau, h, T0)");
    }
    c.validate();
    const EngineConfig ec = engine_config(c);
    if (c.synthetic) {
      return run_generated_experiment(
          [&](std::uint64_t s) { return generate_synthetic(c.synthetic_config, s); }, ec, seeds);
    }
    if (reprepare) return run_experiment(prepare(*records, c).latent, ec, seeds);
    return run_experiment(*prepared, ec, seeds);
  });

  const fs::path out_dir = config.output_dir();
  fs::create_directories(out_dir);
  std::ofstream csv(out_dir / "sweep.csv", std::ios::trunc);
  write_sweep_csv(csv, table);
  return table;
}

}  // namespace dpstream

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

#include "dpstream/persist.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "dpstream/error.hpp"

namespace dpstream::persist {

json encode(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double decode_double(const json& j) {
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw DataError("bad number '" + s + "'");
  }
  return j.get<double>();
}

json encode(const Vector& v) {
  json a = json::array();
  for (double x : v) a.push_back(encode(x));
  return a;
}

Vector decode_vector(const json& j) {
  Vector v;
  v.reserve(j.size());
  for (const auto& x : j) v.push_back(decode_double(x));
  return v;
}

json encode(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", encode(m.data())}};
}

Matrix decode_matrix(const json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  Vector data = decode_vector(j.at("data"));
  if (data.size() != m.data().size()) throw DataError("matrix data has the wrong size");
  m.data() = std::move(data);
  return m;
}

json encode(const NIWHyper& h) {
  return {{"mu0", encode(h.mu0)}, {"sigma0", encode(h.sigma0)}, {"kappa", encode(h.kappa)},
          {"m", encode(h.m)},     {"alpha", encode(h.alpha)},   {"h", h.h}};
}

NIWHyper decode_hyper(const json& j) {
  NIWHyper h;
  h.mu0 = decode_vector(j.at("mu0"));
  h.sigma0 = decode_matrix(j.at("sigma0"));
  h.kappa = decode_double(j.at("kappa"));
  h.m = decode_double(j.at("m"));
  h.alpha = decode_double(j.at("alpha"));
  h.h = j.at("h").get<std::size_t>();
  h.validate();
  return h;
}

json encode(const ClassTable& t) {
  json classes = json::array();
  for (const auto& e : t.classes) {
    classes.push_back({{"label", e.stats.label},
                       {"n", e.stats.n},
                       {"mean", encode(e.stats.mean)},
                       {"scatter", encode(e.stats.scatter)},
                       {"train_count", e.train_count}});
  }
  return {{"classes", classes}, {"n_train", t.n_train}, {"n_online_seen", t.n_online_seen}};
}

ClassTable decode_table(const json& j) {
  ClassTable t;
  for (const auto& c : j.at("classes")) {
    ClassEntry e;
    e.stats.label = c.at("label").get<std::string>();
    e.stats.n = c.at("n").get<std::size_t>();
    e.stats.mean = decode_vector(c.at("mean"));
    e.stats.scatter = decode_matrix(c.at("scatter"));
    e.train_count = c.at("train_count").get<std::size_t>();
    t.classes.push_back(std::move(e));
  }
  t.n_train = j.at("n_train").get<std::size_t>();
  t.n_online_seen = j.at("n_online_seen").get<std::size_t>();
  return t;
}

json encode(const ModelState& m) {
  return {{"hyper", encode(m.hyper)},
          {"table", encode(m.table)},
          {"next_novel_index", m.next_novel_index}};
}

ModelState decode_model(const json& j) {
  ModelState m;
  m.hyper = decode_hyper(j.at("hyper"));
  m.table = decode_table(j.at("table"));
  m.next_novel_index = j.at("next_novel_index").get<std::size_t>();
  return m;
}

json encode(const Ensemble& e) {
  json particles = json::array();
  for (const auto& p : e.particles) {
    particles.push_back({{"table", encode(p.table)},
                         {"assignments", p.assignments},
                         {"novel_count", p.novel_count},
                         {"log_weight", encode(p.log_weight)},
                         {"weight", encode(p.weight)},
                         {"last_log_factor", encode(p.last_log_factor)}});
  }
  return {{"hyper", encode(e.hyper)},
          {"particles", particles},
          {"enp_threshold", encode(e.enp_threshold)},
          {"seed", e.seed},
          {"records_processed", e.records_processed},
          {"last_x", encode(e.last_x)}};
}

Ensemble decode_ensemble(const json& j) {
  Ensemble e;
  e.hyper = decode_hyper(j.at("hyper"));
  for (const auto& pj : j.at("particles")) {
    Particle p;
    p.table = decode_table(pj.at("table"));
    p.assignments = pj.at("assignments").get<std::vector<std::size_t>>();
    for (auto a : p.assignments) {
      if (a >= p.table.classes.size()) throw DataError("particle assignment out of range");
    }
    p.novel_count = pj.at("novel_count").get<std::size_t>();
    p.log_weight = decode_double(pj.at("log_weight"));
    p.weight = decode_double(pj.at("weight"));
    p.last_log_factor = decode_double(pj.at("last_log_factor"));
    e.particles.push_back(std::move(p));
  }
  if (e.particles.empty()) throw DataError("ensemble has no particles");
  e.enp_threshold = decode_double(j.at("enp_threshold"));
  e.seed = j.at("seed").get<std::uint64_t>();
  e.records_processed = j.at("records_processed").get<std::size_t>();
  e.last_x = decode_vector(j.at("last_x"));
  return e;
}

json encode(const FeatureVocabulary& v) {
  json tokens = json::array();
  for (const auto& t : v.tokens()) tokens.push_back({{"kind", to_string(t.kind)}, {"token", t.token}});
  return {{"size", v.size()}, {"tokens", tokens}};
}

FeatureVocabulary decode_vocabulary(const json& j) {
  std::vector<FeatureToken> tokens;
  for (const auto& t : j.at("tokens")) {
    tokens.push_back({feature_kind_from_string(t.at("kind").get<std::string>()),
                      t.at("token").get<std::string>()});
  }
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    if (!(tokens[i - 1] < tokens[i])) throw DataError("vocabulary tokens are not strictly ordered");
  }
  return FeatureVocabulary(std::move(tokens));
}

json encode(const Basis& b) { return {{"rows", encode(b.rows)}}; }

Basis decode_basis(const json& j) {
  Basis b{decode_matrix(j.at("rows"))};
  for (double v : b.rows.data()) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DataError("basis entries must be finite and >= 0");
  }
  return b;
}

namespace {

json encode_rows(const std::vector<LatentVector>& rows) {
  json a = json::array();
  for (const auto& r : rows) a.push_back(encode(r));
  return a;
}

std::vector<LatentVector> decode_rows(const json& j) {
  std::vector<LatentVector> rows;
  for (const auto& r : j) rows.push_back(decode_vector(r));
  return rows;
}

}  // namespace

json encode(const LatentDataset& d) {
  return {{"name", d.name},
          {"train_ids", d.train_ids},
          {"train_x", encode_rows(d.train_x)},
          {"train_labels", d.train_labels},
          {"stream_ids", d.stream_ids},
          {"stream_x", encode_rows(d.stream_x)},
          {"stream_labels", d.stream_labels}};
}

LatentDataset decode_dataset(const json& j) {
  LatentDataset d;
  d.name = j.at("name").get<std::string>();
  d.train_ids = j.at("train_ids").get<std::vector<std::string>>();
  d.train_x = decode_rows(j.at("train_x"));
  d.train_labels = j.at("train_labels").get<std::vector<std::string>>();
  d.stream_ids = j.at("stream_ids").get<std::vector<std::string>>();
  d.stream_x = decode_rows(j.at("stream_x"));
  d.stream_labels = j.at("stream_labels").get<std::vector<std::string>>();
  if (d.train_ids.size() != d.train_x.size() || d.train_labels.size() != d.train_x.size() ||
      d.stream_ids.size() != d.stream_x.size() ||
      (!d.stream_labels.empty() && d.stream_labels.size() != d.stream_x.size())) {
    throw DataError("latent dataset columns differ in length");
  }
  return d;
}

json encode(const LabelDistribution& d) {
  json a = json::array();
  for (const auto& [label, mass] : d) a.push_back({{"label", label}, {"mass", encode(mass)}});
  return a;
}

LabelDistribution decode_distribution(const json& j) {
  LabelDistribution d;
  for (const auto& e : j) d.emplace_back(e.at("label").get<std::string>(), decode_double(e.at("mass")));
  return d;
}

json encode(const QueryEvent& q) {
  return {{"index", q.index},
          {"record_id", q.record_id},
          {"posterior", encode(q.posterior)},
          {"entropy", encode(q.entropy)},
          {"threshold", encode(q.threshold)},
          {"resolution", to_string(q.resolution)},
          {"label", q.label}};
}

QueryEvent decode_query(const json& j) {
  QueryEvent q;
  q.index = j.at("index").get<std::size_t>();
  q.record_id = j.at("record_id").get<std::string>();
  q.posterior = decode_distribution(j.at("posterior"));
  q.entropy = decode_double(j.at("entropy"));
  q.threshold = decode_double(j.at("threshold"));
  const auto r = j.at("resolution").get<std::string>();
  if (r == "pending") {
    q.resolution = QueryEvent::Resolution::kPending;
  } else if (r == "answered") {
    q.resolution = QueryEvent::Resolution::kAnswered;
  } else if (r == "skipped") {
    q.resolution = QueryEvent::Resolution::kSkipped;
  } else {
    throw DataError("unknown query resolution '" + r + "'");
  }
  q.label = j.at("label").get<std::string>();
  return q;
}

json encode(const RawRecord& r) {
  json j = {{"id", r.id},
            {"name_ref", r.name_ref},
            {"year", r.year},
            {"coauthors", r.coauthors},
            {"title", r.title},
            {"venue", r.venue}};
  if (r.true_label) j["true_label"] = *r.true_label;
  return j;
}

json wrap(std::string_view kind, json body) {
  return {{"format", kFormat}, {"version", kVersion}, {"kind", kind}, {"body", std::move(body)}};
}

json unwrap(const json& doc, std::string_view kind) {
  if (!doc.is_object() || doc.value("format", "") != kFormat) {
    throw DataError("not a dpstream document");
  }
  const auto version = doc.at("version").get<int>();
  if (version != kVersion) {
    throw DataError("version mismatch: file has version " + std::to_string(version) +
                    ", expected " + std::to_string(kVersion));
  }
  if (doc.at("kind").get<std::string>() != kind) {
    throw DataError("expected a '" + std::string(kind) + "' document, found '" +
                    doc.at("kind").get<std::string>() + "'");
  }
  return doc.at("body");
}

void write_file(const std::filesystem::path& path, const json& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << doc.dump(1) << '\n';
    if (!out.flush()) throw DataError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

json read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace dpstream::persist

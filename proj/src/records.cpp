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

#include "dpstream/records.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "dpstream/error.hpp"

namespace dpstream {
namespace detail {
extern const char* const kStopwordsText;
}  // namespace detail

namespace {

using nlohmann::json;

char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

// Bytes >= 0x80 belong to UTF-8 sequences and are kept as letters.
bool is_letter(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalpha(u) != 0;
}

RawRecord record_from_json(const json& j) {
  if (!j.is_object()) throw DataError("expected a JSON object");
  auto required_string = [&](const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
      throw DataError(std::string("missing or non-string field '") + key + "'");
    }
    return it->get<std::string>();
  };
  auto optional_string = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return {};
    if (!it->is_string()) throw DataError(std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
  };

  RawRecord r;
  r.id = required_string("id");
  r.name_ref = required_string("name_ref");
  if (r.name_ref.empty()) throw DataError("field 'name_ref' is empty");
  auto year = j.find("year");
  if (year == j.end() || !year->is_number_integer()) {
    throw DataError("missing or non-integer field 'year'");
  }
  r.year = year->get<int>();
  if (r.year <= 0) throw DataError("field 'year' must be positive");
  if (auto co = j.find("coauthors"); co != j.end() && !co->is_null()) {
    if (!co->is_array()) throw DataError("field 'coauthors' must be an array");
    for (const auto& a : *co) {
      if (!a.is_string()) throw DataError("coauthor entries must be strings");
      r.coauthors.insert(a.get<std::string>());
    }
  }
  r.title = optional_string("title");
  r.venue = optional_string("venue");
  if (auto lbl = j.find("true_label"); lbl != j.end() && !lbl->is_null()) {
    if (!lbl->is_string()) throw DataError("field 'true_label' must be a string");
    r.true_label = lbl->get<std::string>();
  }
  return r;
}

}  // namespace

std::vector<RawRecord> parse_records(std::istream& in) {
  std::vector<RawRecord> out;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); })) {
      continue;
    }
    RawRecord r;
    try {
      r = record_from_json(json::parse(line));
    } catch (const json::exception& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!ids.insert(r.id).second) {
      throw DataError("line " + std::to_string(line_no) + ": duplicate id '" + r.id + "'");
    }
    out.push_back(std::move(r));
  }
  return out;
}

RawRecord parse_record(std::string_view json_text) {
  try {
    return record_from_json(json::parse(json_text));
  } catch (const json::exception& e) {
    throw DataError(e.what());
  }
}

std::string_view to_string(FeatureKind kind) noexcept {
  switch (kind) {
    case FeatureKind::kCoauthor: return "coauthor";
    case FeatureKind::kTitleWord: return "title";
    case FeatureKind::kVenue: return "venue";
  }
  return "unknown";
}

FeatureKind feature_kind_from_string(std::string_view s) {
  if (s == "coauthor") return FeatureKind::kCoauthor;
  if (s == "title") return FeatureKind::kTitleWord;
  if (s == "venue") return FeatureKind::kVenue;
  throw DataError("unknown feature kind '" + std::string(s) + "'");
}

Normalizer Normalizer::english() {
  Normalizer n;
  std::istringstream in(detail::kStopwordsText);
  std::string line;
  while (std::getline(in, line)) {
    std::string w = normalize_name(line);
    if (w.empty() || w.front() == '#') continue;
    n.stopwords.insert(std::move(w));
  }
  return n;
}

std::string Normalizer::normalize_name(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(ascii_lower(c));
  }
  return out;
}

std::vector<std::string> Normalizer::title_words(std::string_view title) const {
  std::vector<std::string> words;
  std::string cur;
  auto flush = [&] {
    if (cur.size() > 1 && !stopwords.contains(cur)) words.push_back(cur);
    cur.clear();
  };
  for (char c : title) {
    if (is_letter(c)) {
      cur.push_back(ascii_lower(c));
    } else {
      flush();
    }
  }
  flush();
  return words;
}

std::vector<FeatureToken> Normalizer::tokens(const RawRecord& record) const {
  std::vector<FeatureToken> out;
  const std::string self = normalize_name(record.name_ref);
  for (const auto& a : record.coauthors) {
    std::string name = normalize_name(a);
    if (!name.empty() && name != self) out.push_back({FeatureKind::kCoauthor, std::move(name)});
  }
  for (auto& w : title_words(record.title)) out.push_back({FeatureKind::kTitleWord, std::move(w)});
  if (std::string v = normalize_name(record.venue); !v.empty()) {
    out.push_back({FeatureKind::kVenue, std::move(v)});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

FeatureVocabulary::FeatureVocabulary(std::vector<FeatureToken> tokens) : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second) {
      throw DataError("duplicate vocabulary token '" + tokens_[i].token + "'");
    }
  }
}

std::optional<std::size_t> FeatureVocabulary::index_of(const FeatureToken& t) const {
  auto it = index_.find(t);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vector BinaryFeatureVector::to_dense() const {
  Vector v(dimension, 0.0);
  for (auto b : bits) v[b] = 1.0;
  return v;
}

FeatureVocabulary build_vocabulary(const std::vector<RawRecord>& train,
                                   const Normalizer& normalizer) {
  if (train.empty()) throw DataError("cannot build a vocabulary from zero training records");
  std::set<FeatureToken> all;
  for (const auto& r : train) {
    for (auto& t : normalizer.tokens(r)) all.insert(std::move(t));
  }
  // FeatureToken orders by kind first, so the set is already in block order.
  return FeatureVocabulary(std::vector<FeatureToken>(all.begin(), all.end()));
}

BinaryFeatureVector featurize(const RawRecord& record, const FeatureVocabulary& vocab,
                              const Normalizer& normalizer) {
  BinaryFeatureVector v;
  v.dimension = vocab.size();
  for (const auto& t : normalizer.tokens(record)) {
    if (auto idx = vocab.index_of(t)) v.bits.push_back(*idx);
  }
  std::sort(v.bits.begin(), v.bits.end());
  return v;
}

Matrix feature_matrix(const std::vector<RawRecord>& records, const FeatureVocabulary& vocab,
                      const Normalizer& normalizer) {
  Matrix x(records.size(), vocab.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (auto b : featurize(records[i], vocab, normalizer).bits) x(i, b) = 1.0;
  }
  return x;
}

StreamSplit temporal_split(const std::vector<RawRecord>& records, int years) {
  if (years < 1) throw ConfigError("T0 must be at least 1 year");
  StreamSplit split;
  if (records.empty()) {
    split.warning = "no records to split";
    return split;
  }
  std::vector<RawRecord> sorted = records;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const RawRecord& a, const RawRecord& b) { return a.year < b.year; });
  const int newest = sorted.back().year;
  split.boundary_year = newest - years;
  for (auto& r : sorted) {
    (r.year > split.boundary_year ? split.test : split.train).push_back(std::move(r));
  }
  if (split.train.empty()) {
    split.warning = "temporal split left the training set empty";
  } else if (split.test.empty()) {
    split.warning = "temporal split left the test stream empty";
  }
  return split;
}

}  // namespace dpstream

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

#ifndef DPSTREAM_RECORDS_HPP
#define DPSTREAM_RECORDS_HPP

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dpstream/linalg.hpp"

namespace dpstream {

/// One bibliographic citation for a single ambiguous name reference.
struct RawRecord {
  std::string id;
  std::string name_ref;
  int year = 0;
  std::set<std::string> coauthors;
  std::string title;
  std::string venue;
  std::optional<std::string> true_label;

  friend bool operator==(const RawRecord&, const RawRecord&) = default;
};

/// Parses one JSON object per line. Blank lines are skipped. Throws
/// DataError naming the 1-based line on malformed input or duplicate ids.
std::vector<RawRecord> parse_records(std::istream& in);

/// Parses a single JSON object (the service request body).
RawRecord parse_record(std::string_view json_text);

enum class FeatureKind : std::uint8_t { kCoauthor = 0, kTitleWord = 1, kVenue = 2 };

std::string_view to_string(FeatureKind kind) noexcept;
FeatureKind feature_kind_from_string(std::string_view s);

struct FeatureToken {
  FeatureKind kind;
  std::string token;

  friend auto operator<=>(const FeatureToken&, const FeatureToken&) = default;
};

/// Text normalization shared by vocabulary construction and featurization.
struct Normalizer {
  std::set<std::string, std::less<>> stopwords;

  /// The stopword list shipped in data/stopwords.txt.
  static Normalizer english();
  /// No stopwords; only case folding and punctuation/number stripping.
  static Normalizer without_stopwords() { return {}; }

  /// Lowercases ASCII, trims and collapses runs of whitespace.
  static std::string normalize_name(std::string_view s);

  /// Splits on every character that is not a letter (digits and punctuation
  /// are separators), lowercases, drops stopwords and single letters.
  std::vector<std::string> title_words(std::string_view title) const;

  /// Distinct (kind, token) pairs of a record, sorted.
  std::vector<FeatureToken> tokens(const RawRecord& record) const;
};

/// Ordered binary feature space built from training records: coauthors, then
/// title words, then venues, each block in lexicographic order.
class FeatureVocabulary {
 public:
  FeatureVocabulary() = default;
  /// `tokens` must already be sorted and free of duplicates.
  explicit FeatureVocabulary(std::vector<FeatureToken> tokens);

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<FeatureToken>& tokens() const noexcept { return tokens_; }
  std::optional<std::size_t> index_of(const FeatureToken& t) const;

  friend bool operator==(const FeatureVocabulary& a, const FeatureVocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  std::vector<FeatureToken> tokens_;
  std::map<FeatureToken, std::size_t> index_;
};

struct BinaryFeatureVector {
  std::size_t dimension = 0;
  std::vector<std::size_t> bits;  // sorted, all < dimension

  Vector to_dense() const;
  friend bool operator==(const BinaryFeatureVector&, const BinaryFeatureVector&) = default;
};

/// Throws DataError when `train` is empty.
FeatureVocabulary build_vocabulary(const std::vector<RawRecord>& train,
                                   const Normalizer& normalizer);

/// Tokens missing from the vocabulary are dropped.
BinaryFeatureVector featurize(const RawRecord& record, const FeatureVocabulary& vocab,
                              const Normalizer& normalizer);

/// Stacks dense feature rows into an n x d matrix.
Matrix feature_matrix(const std::vector<RawRecord>& records, const FeatureVocabulary& vocab,
                      const Normalizer& normalizer);

struct StreamSplit {
  std::vector<RawRecord> train;
  std::vector<RawRecord> test;
  int boundary_year = 0;  // t0: train years <= t0 < test years
  std::optional<std::string> warning;
};

/// Holds out the most recent `years` calendar years as the test stream. Both
/// halves are sorted by year, ties in input order. A one-sided split is
/// reported through `warning`, not an error.
StreamSplit temporal_split(const std::vector<RawRecord>& records, int years);

}  // namespace dpstream

#endif  // DPSTREAM_RECORDS_HPP

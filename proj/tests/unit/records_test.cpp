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

#include <algorithm>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "dpstream/error.hpp"
#include "dpstream/records.hpp"

namespace dpstream {
namespace {

RawRecord rec(std::string id, int year, std::set<std::string> coauthors, std::string title,
              std::string venue) {
  RawRecord r;
  r.id = std::move(id);
  r.name_ref = "Kim Park";
  r.year = year;
  r.coauthors = std::move(coauthors);
  r.title = std::move(title);
  r.venue = std::move(venue);
  return r;
}

TEST(ParseRecords, ReadsAllFields) {
  std::istringstream in(
      R"({"id":"1","name_ref":"Kai Zhang","year":2008,"coauthors":["a b","c d"],"title":"Deep Parsing","venue":"ACL","true_label":"p7"})"
      "\n");
  const auto rs = parse_records(in);
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_EQ(rs[0].id, "1");
  EXPECT_EQ(rs[0].name_ref, "Kai Zhang");
  EXPECT_EQ(rs[0].year, 2008);
  EXPECT_EQ(rs[0].coauthors, (std::set<std::string>{"a b", "c d"}));
  EXPECT_EQ(rs[0].title, "Deep Parsing");
  EXPECT_EQ(rs[0].venue, "ACL");
  EXPECT_EQ(rs[0].true_label, "p7");
}

TEST(ParseRecords, EmptyInputGivesNothing) {
  std::istringstream in("");
  EXPECT_TRUE(parse_records(in).empty());
  std::istringstream blank("\n\n");
  EXPECT_TRUE(parse_records(blank).empty());
}

TEST(ParseRecords, MissingYearNamesTheLine) {
  std::istringstream in(
      R"({"id":"1","name_ref":"K","year":2001,"coauthors":[],"title":"t","venue":"v"})"
      "\n"
      R"({"id":"2","name_ref":"K","coauthors":[],"title":"t","venue":"v"})"
      "\n");
  try {
    parse_records(in);
    FAIL() << "expected a DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(ParseRecords, RejectsDuplicateIdsAndGarbage) {
  std::istringstream dup(
      R"({"id":"1","name_ref":"K","year":2001,"coauthors":[],"title":"t","venue":"v"})"
      "\n"
      R"({"id":"1","name_ref":"K","year":2002,"coauthors":[],"title":"t","venue":"v"})"
      "\n");
  EXPECT_THROW(parse_records(dup), DataError);
  std::istringstream junk("{not json}\n");
  EXPECT_THROW(parse_records(junk), DataError);
  std::istringstream bad_year(R"({"id":"1","name_ref":"K","year":0,"coauthors":[],"title":"t","venue":"v"})");
  EXPECT_THROW(parse_records(bad_year), DataError);
}

TEST(Vocabulary, HandEnumerationWithoutStopwords) {
  const auto v = build_vocabulary({rec("1", 2000, {"x"}, "graph mining", "V")}, Normalizer::without_stopwords());
  ASSERT_EQ(v.size(), 4u);
  EXPECT_EQ(v.tokens()[0], (FeatureToken{FeatureKind::kCoauthor, "x"}));
  EXPECT_EQ(v.tokens()[1], (FeatureToken{FeatureKind::kTitleWord, "graph"}));
  EXPECT_EQ(v.tokens()[2], (FeatureToken{FeatureKind::kTitleWord, "mining"}));
  EXPECT_EQ(v.tokens()[3], (FeatureToken{FeatureKind::kVenue, "v"}));
}

TEST(Vocabulary, DuplicateRecordsAreIdempotent) {
  const auto r = rec("1", 2000, {"a", "b"}, "Mining Graphs", "KDD");
  auto r2 = r;
  r2.id = "2";
  const auto n = Normalizer::english();
  EXPECT_EQ(build_vocabulary({r, r2}, n), build_vocabulary({r}, n));
}

TEST(Vocabulary, StripsNumbersPunctuationAndStopwords) {
  const auto n = Normalizer::english();
  EXPECT_EQ(n.title_words("The 2nd Study of Graph-Mining, in 2008!"),
            (std::vector<std::string>{"nd", "study", "graph", "mining"}));
}

TEST(Vocabulary, CoauthorsAreWholeNormalizedNamesWithoutTheNameItself) {
  auto r = rec("1", 2000, {"  Wei   CHEN ", "Kim Park"}, "", "");
  const auto t = Normalizer::english().tokens(r);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0], (FeatureToken{FeatureKind::kCoauthor, "wei chen"}));
}

TEST(Vocabulary, EmptyTrainingSetIsAnError) {
  EXPECT_THROW(build_vocabulary({}, Normalizer::english()), DataError);
}

TEST(Vocabulary, TrainPlusTestRestrictedToTrainEqualsTrain) {
  const auto n = Normalizer::english();
  std::vector<RawRecord> train = {rec("1", 2000, {"a"}, "graph mining", "KDD"),
                                  rec("2", 2001, {"b"}, "protein folding", "RECOMB")};
  std::vector<RawRecord> both = train;
  both.push_back(rec("3", 2002, {"c"}, "robot grasping", "ICRA"));
  const auto vt = build_vocabulary(train, n);
  const auto vb = build_vocabulary(both, n);
  std::vector<FeatureToken> restricted;
  for (const auto& t : vb.tokens()) {
    if (vt.index_of(t)) restricted.push_back(t);
  }
  EXPECT_EQ(restricted, vt.tokens());
}

TEST(Featurize, BitsFollowVocabulary) {
  const auto n = Normalizer::without_stopwords();
  const auto r = rec("1", 2000, {"x"}, "graph mining", "V");
  const auto v = build_vocabulary({r}, n);
  EXPECT_EQ(featurize(r, v, n).bits, (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_TRUE(featurize(rec("2", 2000, {"q"}, "other words", "W"), v, n).bits.empty());
  const auto half = featurize(rec("3", 2000, {"x"}, "mining deeply", "W"), v, n);
  EXPECT_EQ(half.bits, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(half.dimension, 4u);
  const auto dense = half.to_dense();
  EXPECT_EQ(dense, (Vector{1, 0, 1, 0}));
}

TEST(Featurize, IgnoresTokenOrder) {
  const auto n = Normalizer::english();
  const auto a = rec("1", 2000, {"p", "q"}, "graph mining systems", "V");
  const auto b = rec("2", 2000, {"q", "p"}, "systems mining graph", "V");
  const auto v = build_vocabulary({a}, n);
  EXPECT_EQ(featurize(a, v, n), featurize(b, v, n));
}

TEST(TemporalSplit, HoldsOutTheLastYears) {
  const auto s = temporal_split({rec("a", 2003, {}, "", ""), rec("b", 2001, {}, "", ""),
                                 rec("c", 2002, {}, "", "")},
                                2);
  ASSERT_EQ(s.train.size(), 1u);
  EXPECT_EQ(s.train[0].year, 2001);
  ASSERT_EQ(s.test.size(), 2u);
  EXPECT_EQ(s.test[0].year, 2002);
  EXPECT_EQ(s.test[1].year, 2003);
  EXPECT_EQ(s.boundary_year, 2001);
  EXPECT_FALSE(s.warning.has_value());
}

TEST(TemporalSplit, LongWindowEmptiesTrainWithWarning) {
  const auto s = temporal_split({rec("a", 2003, {}, "", ""), rec("b", 2001, {}, "", "")}, 5);
  EXPECT_TRUE(s.train.empty());
  EXPECT_EQ(s.test.size(), 2u);
  EXPECT_TRUE(s.warning.has_value());
}

TEST(TemporalSplit, StableWithinYearAndPartitions) {
  std::vector<RawRecord> rs;
  for (int i = 0; i < 20; ++i) rs.push_back(rec("r" + std::to_string(i), 2000 + (i * 7) % 5, {}, "", ""));
  const auto s = temporal_split(rs, 2);
  EXPECT_EQ(s.train.size() + s.test.size(), rs.size());
  for (const auto& r : s.test) EXPECT_GE(r.year, 2003);
  for (const auto& r : s.train) EXPECT_LE(r.year, 2002);
  auto order_ok = [](const std::vector<RawRecord>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (v[i - 1].year > v[i].year) return false;
      if (v[i - 1].year == v[i].year && std::stoi(v[i - 1].id.substr(1)) > std::stoi(v[i].id.substr(1))) return false;
    }
    return true;
  };
  EXPECT_TRUE(order_ok(s.train));
  EXPECT_TRUE(order_ok(s.test));
}

TEST(TemporalSplit, RejectsNonPositiveWindow) {
  EXPECT_THROW(temporal_split({rec("a", 2003, {}, "", "")}, 0), ConfigError);
}

}  // namespace
}  // namespace dpstream

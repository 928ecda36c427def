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

#include <sstream>

#include <gtest/gtest.h>

#include "dpstream/error.hpp"
#include "dpstream/eval.hpp"
#include "dpstream/synthetic.hpp"

namespace dpstream {
namespace {

using Labels = std::vector<std::string>;

double f1(const Labels& pred, const Labels& truth, const std::set<std::string>& training = {}) {
  return mean_f1(pred, truth, align_labels(pred, truth, training));
}

TEST(MeanF1, HandCase) {
  EXPECT_NEAR(f1({"a", "b", "b"}, {"a", "a", "b"}, {"a", "b"}), 2.0 / 3.0, 1e-15);
}

TEST(MeanF1, PerfectAndHopeless) {
  EXPECT_EQ(f1({"a", "b", "c"}, {"a", "b", "c"}, {"a", "b", "c"}), 1.0);
  EXPECT_EQ(f1({"z", "z", "z"}, {"a", "b", "a"}, {"a", "b", "z"}), 0.0);
  EXPECT_THROW(f1({}, {}), DataError);
  EXPECT_THROW(f1({"a"}, {"a", "b"}), DataError);
}

TEST(MeanF1, InvariantUnderNovelRelabelling) {
  const Labels truth = {"a", "E1", "E1", "E2", "a", "E2", "E1"};
  const Labels p1 = {"a", "novel-1", "novel-1", "novel-2", "a", "novel-2", "novel-2"};
  const Labels p2 = {"a", "novel-7", "novel-7", "novel-3", "a", "novel-3", "novel-3"};
  EXPECT_NEAR(f1(p1, truth, {"a"}), f1(p2, truth, {"a"}), 1e-15);
  EXPECT_LT(f1(p1, truth, {"a"}), 1.0);
}

TEST(Alignment, TrainingLabelsMapToThemselves) {
  const auto a = align_labels(Labels{"a", "b", "a"}, Labels{"b", "a", "a"}, {"a", "b"});
  EXPECT_EQ(a.mapping.at("a"), "a");
  EXPECT_EQ(a.mapping.at("b"), "b");
}

TEST(Alignment, NovelLabelMatchesEmergingClass) {
  const auto a = align_labels(Labels{"a", "novel-1", "novel-1"}, Labels{"a", "E", "E"}, {"a"});
  EXPECT_EQ(a.mapping.at("novel-1"), "E");
}

TEST(Alignment, LargerOverlapWinsOtherStaysUnmatched) {
  const Labels pred = {"n1", "n1", "n1", "n2"};
  const Labels truth = {"E", "E", "E", "E"};
  const auto a = align_labels(pred, truth, {});
  EXPECT_EQ(a.mapping.at("n1"), "E");
  EXPECT_FALSE(a.mapping.at("n2").has_value());
  const auto mapped = a.apply(pred);
  EXPECT_FALSE(mapped[3].has_value());
}

TEST(Alignment, TiesByLabelOrder) {
  const auto a = align_labels(Labels{"n2", "n1"}, Labels{"E", "E"}, {});
  EXPECT_EQ(a.mapping.at("n1"), "E");
  EXPECT_FALSE(a.mapping.at("n2").has_value());
}

TEST(Alignment, NovelCannotClaimTrainingLabel) {
  const auto a = align_labels(Labels{"a", "n1", "n1"}, Labels{"a", "a", "a"}, {"a"});
  EXPECT_FALSE(a.mapping.at("n1").has_value());
}

TEST(CountDistinct, Examples) {
  EXPECT_EQ(count_distinct(Labels{"A", "A"}), 1u);
  EXPECT_EQ(count_distinct(Labels{"A", "B", "novel-1", "A"}), 3u);
  EXPECT_EQ(count_distinct(Labels{}), 0u);
}

TEST(Engine, Names) {
  EXPECT_EQ(engine_from_string("gibbs"), Engine::kGibbs);
  EXPECT_EQ(engine_from_string("pf"), Engine::kParticle);
  EXPECT_EQ(engine_from_string(to_string(Engine::kParticle)), Engine::kParticle);
  EXPECT_THROW(engine_from_string("mcmc"), ConfigError);
}

LatentDataset small_data(std::uint64_t seed) {
  SyntheticConfig c;
  c.h = 3;
  c.n_train = 20;
  c.n_stream = 20;
  return generate_synthetic(c, seed);
}

TEST(Experiment, SingleRunHasZeroStd) {
  EngineConfig cfg;
  cfg.particles = 10;
  const auto seeds = seed_range(4, 1);
  const auto rep = run_experiment(small_data(1), cfg, seeds);
  EXPECT_EQ(rep.runs.size(), 1u);
  EXPECT_EQ(rep.f1_std, 0.0);
  EXPECT_EQ(rep.distinct_std, 0.0);
  EXPECT_EQ(rep.engine, "pf");
}

TEST(Experiment, RepeatedSeedsGiveIdenticalRuns) {
  EngineConfig cfg;
  cfg.engine = Engine::kGibbs;
  const std::vector<std::uint64_t> seeds = {9, 9, 9};
  const auto rep = run_experiment(small_data(2), cfg, seeds);
  for (const auto& r : rep.runs) {
    EXPECT_EQ(r.predictions, rep.runs[0].predictions);
    EXPECT_EQ(r.mean_f1, rep.runs[0].mean_f1);
  }
  EXPECT_EQ(rep.f1_std, 0.0);
}

TEST(Experiment, SummaryStatistics) {
  std::vector<RunResult> runs(3);
  runs[0].mean_f1 = 0.5;
  runs[1].mean_f1 = 0.7;
  runs[2].mean_f1 = 0.9;
  runs[0].queries = 2;
  runs[1].queries = 4;
  runs[2].queries = 6;
  const auto rep = summarize("d", "pf", runs, 8);
  EXPECT_NEAR(rep.f1_mean, 0.7, 1e-15);
  EXPECT_NEAR(rep.f1_std, 0.2, 1e-15);
  EXPECT_NEAR(rep.query_ratio, 0.5, 1e-15);
}

TEST(Experiment, FullOracleSupervisionIsPerfect) {
  EngineConfig cfg;
  cfg.particles = 5;
  cfg.active = {.tau = 0.0, .budget = std::nullopt, .mode = ActiveMode::kOracle};
  const auto data = small_data(3);
  const auto r = run_once(data, cfg, 1);
  EXPECT_EQ(r.mean_f1, 1.0);
  EXPECT_EQ(r.queries, data.stream_x.size());
}

TEST(Experiment, BudgetCapsQueries) {
  EngineConfig cfg;
  cfg.particles = 5;
  cfg.active = {.tau = 0.0, .budget = 3, .mode = ActiveMode::kOracle};
  EXPECT_EQ(run_once(small_data(3), cfg, 1).queries, 3u);
}

TEST(Experiment, FeedbackNeedsParticleFilter) {
  EngineConfig cfg;
  cfg.engine = Engine::kGibbs;
  cfg.active.mode = ActiveMode::kOracle;
  EXPECT_THROW(run_once(small_data(1), cfg, 1), ConfigError);
  cfg.active.mode = ActiveMode::kOff;
  cfg.random_query_probability = 0.5;
  EXPECT_THROW(run_once(small_data(1), cfg, 1), ConfigError);
}

TEST(Experiment, GeneratedDatasetsPerSeed) {
  EngineConfig cfg;
  cfg.engine = Engine::kGibbs;
  const auto seeds = seed_range(1, 3);
  const auto rep = run_generated_experiment(small_data, cfg, seeds);
  ASSERT_EQ(rep.runs.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(rep.runs[i].predictions, run_once(small_data(seeds[i]), cfg, seeds[i]).predictions);
  }
}

TEST(Sweep, SingleValueEqualsExperiment) {
  EngineConfig cfg;
  cfg.particles = 8;
  const auto data = small_data(5);
  const auto seeds = seed_range(1, 2);
  const std::vector<double> values = {8};
  const auto table = sweep("M", values, [&](double v) {
    EngineConfig c = cfg;
    c.particles = static_cast<std::size_t>(v);
    return run_experiment(data, c, seeds);
  });
  const auto direct = run_experiment(data, cfg, seeds);
  ASSERT_EQ(table.rows.size(), 1u);
  EXPECT_EQ(table.rows[0].report.f1_mean, direct.f1_mean);
  EXPECT_EQ(table.rows[0].report.runs[1].predictions, direct.runs[1].predictions);
  EXPECT_THROW(sweep("M", std::vector<double>{}, [&](double) { return direct; }), ConfigError);
}

TEST(Sweep, CsvShape) {
  SweepTable t;
  t.parameter = "alpha";
  ExperimentReport r;
  r.engine = "pf";
  r.f1_mean = 0.5;
  r.runs.resize(2);
  t.rows.push_back({10, r});
  std::ostringstream out;
  write_sweep_csv(out, t);
  EXPECT_EQ(out.str(),
            "parameter,value,engine,runs,f1_mean,f1_std,distinct_mean,distinct_std,query_ratio\n"
            "alpha,10,pf,2,0.5,0,0,0,0\n");
}

TEST(Seeds, Range) { EXPECT_EQ(seed_range(5, 3), (std::vector<std::uint64_t>{5, 6, 7})); }

}  // namespace
}  // namespace dpstream

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

#include <cmath>
#include <algorithm>
#include <map>
#include <set>
#include <numeric>

#include <gtest/gtest.h>

#include "dpstream/error.hpp"
#include "dpstream/synthetic.hpp"

namespace dpstream {
namespace {

TEST(PowerLaw, SizesSumAndDecrease) {
  const auto s = power_law_sizes(50, 3, 1.0, 2);
  EXPECT_EQ(std::accumulate(s.begin(), s.end(), std::size_t{0}), 50u);
  EXPECT_TRUE(std::is_sorted(s.rbegin(), s.rend()));
  for (auto v : s) EXPECT_GE(v, 2u);
  EXPECT_EQ(power_law_sizes(6, 3, 0.0, 1), (std::vector<std::size_t>{2, 2, 2}));
  EXPECT_THROW(power_law_sizes(5, 3, 1.0, 2), ConfigError);
}

TEST(Synthetic, ShapeAndLabels) {
  const auto d = generate_synthetic(SyntheticConfig{}, 1);
  EXPECT_EQ(d.train_x.size(), 50u);
  EXPECT_EQ(d.stream_x.size(), 50u);
  EXPECT_EQ(d.latent_dim(), 10u);
  std::set<std::string> train(d.train_labels.begin(), d.train_labels.end());
  std::set<std::string> stream(d.stream_labels.begin(), d.stream_labels.end());
  EXPECT_EQ(train, (std::set<std::string>{"K1", "K2", "K3"}));
  EXPECT_TRUE(stream.contains("E1"));
  EXPECT_TRUE(stream.contains("E2"));
  for (const auto& s : stream) EXPECT_TRUE(s[0] == 'E' || train.contains(s));
}

TEST(Synthetic, MeansAreSeparated) {
  SyntheticConfig c;
  c.n_train = 3000;
  c.n_stream = 3000;
  const auto d = generate_synthetic(c, 7);
  std::map<std::string, std::pair<Vector, std::size_t>> acc;
  auto add = [&](const std::vector<LatentVector>& xs, const std::vector<std::string>& ys) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      auto& [sum, n] = acc[ys[i]];
      sum.resize(c.h, 0.0);
      for (std::size_t k = 0; k < c.h; ++k) sum[k] += xs[i][k];
      ++n;
    }
  };
  add(d.train_x, d.train_labels);
  add(d.stream_x, d.stream_labels);
  std::vector<Vector> means;
  for (auto& [label, v] : acc) {
    for (auto& s : v.first) s /= static_cast<double>(v.second);
    means.push_back(v.first);
  }
  ASSERT_EQ(means.size(), 5u);
  for (std::size_t a = 0; a < means.size(); ++a) {
    for (std::size_t b = a + 1; b < means.size(); ++b) {
      double d2 = 0;
      for (std::size_t k = 0; k < c.h; ++k) d2 += (means[a][k] - means[b][k]) * (means[a][k] - means[b][k]);
      EXPECT_GT(std::sqrt(d2), 9.0);
    }
  }
}

TEST(Synthetic, DeterministicPerSeed) {
  const auto a = generate_synthetic(SyntheticConfig{}, 3);
  const auto b = generate_synthetic(SyntheticConfig{}, 3);
  const auto c = generate_synthetic(SyntheticConfig{}, 4);
  EXPECT_EQ(a.stream_x, b.stream_x);
  EXPECT_EQ(a.stream_labels, b.stream_labels);
  EXPECT_NE(a.stream_x, c.stream_x);
}

TEST(Synthetic, ValidateRejectsBadConfig) {
  SyntheticConfig c;
  c.known = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.sigma = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

}  // namespace
}  // namespace dpstream

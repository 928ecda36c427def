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

#include "dpstream/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <tuple>

#include "dpstream/error.hpp"
#include "dpstream/gibbs.hpp"
#include "dpstream/particle.hpp"

namespace dpstream {
namespace {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd r;
  if (v.empty()) return r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return r;
}

}  // namespace

std::vector<std::optional<std::string>> LabelAlignment::apply(
    std::span<const std::string> predicted) const {
  std::vector<std::optional<std::string>> out;
  out.reserve(predicted.size());
  for (const auto& p : predicted) {
    auto it = mapping.find(p);
    out.push_back(it == mapping.end() ? std::nullopt : it->second);
  }
  return out;
}

LabelAlignment align_labels(std::span<const std::string> predicted, std::span<const std::string> truth,
                            const std::set<std::string>& training_labels) {
  if (predicted.size() != truth.size()) {
    throw DataError("prediction and truth sequences differ in length");
  }
  LabelAlignment a;
  std::set<std::string> claimed(training_labels.begin(), training_labels.end());
  std::map<std::pair<std::string, std::string>, std::size_t> overlap;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto& p = predicted[i];
    if (training_labels.contains(p)) {
      a.mapping[p] = p;
      continue;
    }
    a.mapping.emplace(p, std::nullopt);
    ++overlap[{p, truth[i]}];
  }
  std::vector<std::tuple<std::size_t, std::string, std::string>> pairs;
  for (const auto& [key, count] : overlap) pairs.emplace_back(count, key.first, key.second);
  std::sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) {
    if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) > std::get<0>(y);
    return std::tie(std::get<1>(x), std::get<2>(x)) < std::tie(std::get<1>(y), std::get<2>(y));
  });
  for (const auto& [count, pred, tru] : pairs) {
    auto& slot = a.mapping[pred];
    if (slot || claimed.contains(tru)) continue;
    slot = tru;
    claimed.insert(tru);
  }
  return a;
}

double mean_f1(std::span<const std::string> predicted, std::span<const std::string> truth,
               const LabelAlignment& alignment) {
  if (truth.empty()) throw DataError("mean-F1 needs at least one true label");
  if (predicted.size() != truth.size()) {
    throw DataError("prediction and truth sequences differ in length");
  }
  const auto mapped = alignment.apply(predicted);
  std::map<std::string, std::size_t> true_count;
  std::map<std::string, std::size_t> pred_count;
  std::map<std::string, std::size_t> hits;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++true_count[truth[i]];
    if (mapped[i]) {
      ++pred_count[*mapped[i]];
      if (*mapped[i] == truth[i]) ++hits[truth[i]];
    }
  }
  double sum = 0.0;
  for (const auto& [label, n_true] : true_count) {
    const auto tp = static_cast<double>(hits[label]);
    const auto n_pred = static_cast<double>(pred_count[label]);
    const double precision = n_pred > 0 ? tp / n_pred : 0.0;
    const double recall = tp / static_cast<double>(n_true);
    sum += precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  }
  return sum / static_cast<double>(true_count.size());
}

std::size_t count_distinct(std::span<const std::string> predicted) {
  return std::set<std::string>(predicted.begin(), predicted.end()).size();
}

std::string_view to_string(Engine e) noexcept {
  return e == Engine::kGibbs ? "gibbs" : "pf";
}

Engine engine_from_string(std::string_view s) {
  if (s == "gibbs") return Engine::kGibbs;
  if (s == "pf" || s == "particle") return Engine::kParticle;
  throw ConfigError("unknown engine '" + std::string(s) + "'");
}

RunResult run_once(const LatentDataset& data, const EngineConfig& config, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  config.active.validate();
  const bool wants_feedback =
      config.random_query_probability.has_value() || config.active.mode != ActiveMode::kOff;
  if (wants_feedback && config.engine != Engine::kParticle) {
    throw ConfigError("label feedback requires the particle filter engine");
  }
  if (wants_feedback && data.stream_labels.size() != data.stream_x.size()) {
    throw DataError("oracle feedback needs a true label for every stream record");
  }

  const NIWHyper hyper =
      estimate_hyperparams(data.train_x, data.train_labels, data.latent_dim(), config.prior);
  RunResult r;
  r.seed = seed;
  r.predictions.reserve(data.stream_x.size());

  if (config.engine == Engine::kGibbs) {
    ModelState model = make_model(data.train_x, data.train_labels, hyper);
    r.predictions = gibbs_run(model, data.stream_x, {seed, config.map_mode}).predictions;
  } else {
    const ClassTable train = build_class_table(data.train_x, data.train_labels);
    Ensemble e = pf_init(config.particles, hyper, train, config.enp_threshold, seed);
    for (std::size_t i = 0; i < data.stream_x.size(); ++i) {
      PfStep step = pf_step(e, data.stream_x[i]);
      bool query = false;
      if (config.random_query_probability) {
        Rng rng = substream(seed, StreamTag::kRandomQuery, i);
        query = random_selection_baseline(*config.random_query_probability, rng);
      } else {
        query = should_query(step.prediction.distribution, config.active, r.queries);
      }
      if (query) {
        ++r.queries;
        apply_feedback(e, i, data.stream_labels[i]);
        r.predictions.push_back(data.stream_labels[i]);
      } else {
        r.predictions.push_back(std::move(step.prediction.label));
      }
    }
  }

  r.distinct = count_distinct(r.predictions);
  if (!data.stream_labels.empty()) {
    const std::set<std::string> known(data.train_labels.begin(), data.train_labels.end());
    r.mean_f1 = mean_f1(r.predictions, data.stream_labels,
                        align_labels(r.predictions, data.stream_labels, known));
  }
  r.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

ExperimentReport summarize(std::string dataset, std::string engine, std::vector<RunResult> runs,
                           std::size_t stream_length) {
  ExperimentReport rep;
  rep.dataset = std::move(dataset);
  rep.engine = std::move(engine);
  std::vector<double> f1;
  std::vector<double> distinct;
  double queries = 0.0;
  double runtime = 0.0;
  for (const auto& r : runs) {
    f1.push_back(r.mean_f1);
    distinct.push_back(static_cast<double>(r.distinct));
    queries += static_cast<double>(r.queries);
    runtime += r.runtime_ms;
  }
  const auto f = mean_std(f1);
  const auto d = mean_std(distinct);
  rep.f1_mean = f.mean;
  rep.f1_std = f.std;
  rep.distinct_mean = d.mean;
  rep.distinct_std = d.std;
  if (!runs.empty()) {
    rep.queries_mean = queries / static_cast<double>(runs.size());
    rep.runtime_ms_mean = runtime / static_cast<double>(runs.size());
    if (stream_length > 0) rep.query_ratio = rep.queries_mean / static_cast<double>(stream_length);
  }
  rep.runs = std::move(runs);
  return rep;
}

ExperimentReport run_experiment(const LatentDataset& data, const EngineConfig& config,
                                std::span<const std::uint64_t> seeds) {
  std::vector<RunResult> runs;
  runs.reserve(seeds.size());
  for (auto s : seeds) runs.push_back(run_once(data, config, s));
  return summarize(data.name, std::string(to_string(config.engine)), std::move(runs),
                   data.stream_x.size());
}

ExperimentReport run_generated_experiment(const std::function<LatentDataset(std::uint64_t)>& make_data,
                                          const EngineConfig& config,
                                          std::span<const std::uint64_t> seeds) {
  std::vector<RunResult> runs;
  runs.reserve(seeds.size());
  std::string name;
  std::size_t stream_total = 0;
  for (auto s : seeds) {
    const LatentDataset data = make_data(s);
    name = data.name;
    stream_total += data.stream_x.size();
    runs.push_back(run_once(data, config, s));
  }
  const std::size_t stream_length = seeds.empty() ? 0 : stream_total / seeds.size();
  return summarize(name, std::string(to_string(config.engine)), std::move(runs), stream_length);
}

SweepTable sweep(const std::string& parameter, std::span<const double> values,
                 const std::function<ExperimentReport(double)>& run) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  SweepTable t;
  t.parameter = parameter;
  for (double v : values) t.rows.push_back({v, run(v)});
  return t;
}

void write_sweep_csv(std::ostream& out, const SweepTable& table) {
  out << "parameter,value,engine,runs,f1_mean,f1_std,distinct_mean,distinct_std,query_ratio\n";
  for (const auto& row : table.rows) {
    const auto& r = row.report;
    out << table.parameter << ',' << row.value << ',' << r.engine << ',' << r.runs.size() << ','
        << r.f1_mean << ',' << r.f1_std << ',' << r.distinct_mean << ',' << r.distinct_std << ','
        << r.query_ratio << '\n';
  }
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> s(count);
  for (std::size_t i = 0; i < count; ++i) s[i] = first + i;
  return s;
}

}  // namespace dpstream

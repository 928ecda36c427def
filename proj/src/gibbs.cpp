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

#include "dpstream/gibbs.hpp"

namespace dpstream {
namespace {

std::size_t argmax_by_label(const ModelState& model, const ClassPosterior& post,
                            const std::string& novel_label) {
  auto label_of = [&](std::size_t j) -> const std::string& {
    return j < model.table.classes.size() ? model.table.classes[j].stats.label : novel_label;
  };
  std::size_t best = 0;
  for (std::size_t j = 1; j < post.probabilities.size(); ++j) {
    const double pj = post.log_probabilities[j];
    const double pb = post.log_probabilities[best];
    if (pj > pb || (pj == pb && label_of(j) < label_of(best))) best = j;
  }
  return best;
}

}  // namespace

std::string gibbs_step(ModelState& model, std::span<const double> x, Rng& rng, bool map_mode) {
  const ClassPosterior post = posterior_over_classes(x, model);
  const double u = rng.uniform();
  std::size_t choice = 0;
  if (map_mode) {
    choice = argmax_by_label(model, post, model.peek_novel_label());
  } else {
    choice = inverse_cdf(post.probabilities, u);
  }
  if (choice == post.novel_index()) {
    std::string label = model.take_novel_label();
    model.table.create(label, x);
    return label;
  }
  model.table.assign(choice, x);
  return model.table.classes[choice].stats.label;
}

GibbsRun gibbs_run(ModelState& model, std::span<const LatentVector> stream,
                   const GibbsOptions& options) {
  GibbsRun run;
  run.seed = options.seed;
  run.predictions.reserve(stream.size());
  for (const auto& x : stream) {
    Rng rng = substream(options.seed, StreamTag::kGibbsStep, model.table.n_online_seen);
    run.predictions.push_back(gibbs_step(model, x, rng, options.map_mode));
  }
  return run;
}

}  // namespace dpstream

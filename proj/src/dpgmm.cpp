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

#include "dpstream/dpgmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

#include "dpstream/error.hpp"

namespace dpstream {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kFallbackSigma = 1e-8;

void require_finite(std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) throw DataError("latent vector contains a non-finite value");
  }
}

void check_dim(std::span<const double> x, std::size_t h) {
  if (x.size() != h) {
    throw DataError("latent vector has dimension " + std::to_string(x.size()) + ", expected " +
                    std::to_string(h));
  }
}

}  // namespace

void NIWHyper::validate() const {
  if (h == 0 || mu0.size() != h || sigma0.rows() != h || sigma0.cols() != h) {
    throw ConfigError("NIW hyperparameters have inconsistent dimensions");
  }
  if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be non-negative");
  if (!(m + 1.0 - static_cast<double>(h) > 0.0)) throw ConfigError("m + 1 - h must be positive");
  const double tol = 1e-12 * std::max(1.0, std::abs(sigma0.trace()));
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(sigma0(i, j) - sigma0(j, i)) > tol) throw ConfigError("sigma0 is not symmetric");
    }
  }
  if (!cholesky(sigma0)) throw ConfigError("sigma0 is not positive definite");
}

ClassStats ClassStats::from_point(std::string label, std::span<const double> x) {
  ClassStats s;
  s.label = std::move(label);
  s.n = 1;
  s.mean.assign(x.begin(), x.end());
  s.scatter = Matrix(x.size(), x.size());
  return s;
}

void ClassStats::add(std::span<const double> x) {
  check_dim(x, mean.size());
  const std::size_t h = mean.size();
  Vector delta(h);
  for (std::size_t i = 0; i < h; ++i) delta[i] = x[i] - mean[i];
  const double nn = static_cast<double>(n + 1);
  const double w = static_cast<double>(n) / nn;
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < h; ++j) scatter(i, j) += w * delta[i] * delta[j];
  }
  for (std::size_t i = 0; i < h; ++i) mean[i] += delta[i] / nn;
  ++n;
}

void ClassStats::remove(std::span<const double> x) {
  check_dim(x, mean.size());
  if (n < 2) throw std::logic_error("ClassStats::remove on a class with fewer than two points");
  const std::size_t h = mean.size();
  const double n_now = static_cast<double>(n);
  const double n_prev = n_now - 1.0;
  Vector old_mean(h);
  for (std::size_t i = 0; i < h; ++i) old_mean[i] = (n_now * mean[i] - x[i]) / n_prev;
  // delta is x minus the mean before x was added; add() used weight (n-1)/n.
  Vector delta(h);
  for (std::size_t i = 0; i < h; ++i) delta[i] = x[i] - old_mean[i];
  const double w = n_prev / n_now;
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < h; ++j) scatter(i, j) -= w * delta[i] * delta[j];
  }
  mean = std::move(old_mean);
  --n;
}

ClassStats class_stats_update(ClassStats stats, std::span<const double> x) {
  require_finite(x);
  stats.add(x);
  return stats;
}

std::optional<ClassStats> class_stats_downdate(ClassStats stats, std::span<const double> x) {
  require_finite(x);
  if (stats.n <= 1) return std::nullopt;
  stats.remove(x);
  return stats;
}

PredictiveParams predictive_params(const ClassStats& stats, const NIWHyper& hyper) {
  if (stats.n == 0) return empty_predictive_params(hyper);
  const std::size_t h = hyper.h;
  const double n = static_cast<double>(stats.n);
  const double k = hyper.kappa;
  PredictiveParams p;
  p.dof = n + hyper.m + 1.0 - static_cast<double>(h);
  p.mean.resize(h);
  Vector diff(h);
  for (std::size_t i = 0; i < h; ++i) {
    p.mean[i] = (n * stats.mean[i] + k * hyper.mu0[i]) / (n + k);
    diff[i] = hyper.mu0[i] - stats.mean[i];
  }
  const double coef = (n + k + 1.0) / ((n + k) * p.dof);
  const double shrink = n * k / (n + k);
  p.scale = Matrix(h, h);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < h; ++j) {
      p.scale(i, j) =
          coef * (hyper.sigma0(i, j) + stats.scatter(i, j) + shrink * diff[i] * diff[j]);
    }
  }
  return p;
}

PredictiveParams empty_predictive_params(const NIWHyper& hyper) {
  const std::size_t h = hyper.h;
  const double k = hyper.kappa;
  PredictiveParams p;
  p.dof = hyper.m + 1.0 - static_cast<double>(h);
  p.mean = hyper.mu0;
  p.scale = Matrix(h, h);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < h; ++j) p.scale(i, j) = hyper.sigma0(i, j) / k * (k + 1.0) / p.dof;
  }
  return p;
}

double studentt_logpdf(std::span<const double> x, const PredictiveParams& p) {
  const std::size_t h = p.mean.size();
  check_dim(x, h);
  const Matrix lower = cholesky_with_jitter(p.scale);
  Vector q(h);
  for (std::size_t i = 0; i < h; ++i) q[i] = x[i] - p.mean[i];
  const Vector z = forward_substitute(lower, q);
  double maha = 0.0;
  for (double v : z) maha += v * v;
  const double dh = static_cast<double>(h);
  const double v = p.dof;
  return std::lgamma(0.5 * (v + dh)) - std::lgamma(0.5 * v) -
         0.5 * dh * std::log(v * std::numbers::pi) - 0.5 * log_det_from_cholesky(lower) -
         0.5 * (v + dh) * std::log1p(maha / v);
}

std::optional<std::size_t> ClassTable::find(std::string_view label) const {
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i].stats.label == label) return i;
  }
  return std::nullopt;
}

void ClassTable::assign(std::size_t index, std::span<const double> x) {
  require_finite(x);
  classes.at(index).stats.add(x);
  ++n_online_seen;
}

std::size_t ClassTable::create(std::string label, std::span<const double> x) {
  require_finite(x);
  if (find(label)) throw std::logic_error("class '" + label + "' already exists");
  classes.push_back({ClassStats::from_point(std::move(label), x), 0});
  ++n_online_seen;
  return classes.size() - 1;
}

void ClassTable::unassign(std::size_t index, std::span<const double> x) {
  ClassEntry& e = classes.at(index);
  if (e.online_count() == 0) throw std::logic_error("class has no online points to remove");
  if (e.stats.n == 1) {
    classes.erase(classes.begin() + static_cast<std::ptrdiff_t>(index));
  } else {
    e.stats.remove(x);
  }
  --n_online_seen;
}

ClassTable build_class_table(std::span<const LatentVector> train_x,
                             std::span<const std::string> train_labels) {
  if (train_x.size() != train_labels.size()) {
    throw DataError("training vectors and labels differ in length");
  }
  std::map<std::string, ClassStats> by_label;
  for (std::size_t i = 0; i < train_x.size(); ++i) {
    require_finite(train_x[i]);
    auto it = by_label.find(train_labels[i]);
    if (it == by_label.end()) {
      by_label.emplace(train_labels[i], ClassStats::from_point(train_labels[i], train_x[i]));
    } else {
      it->second.add(train_x[i]);
    }
  }
  ClassTable t;
  for (auto& [label, stats] : by_label) {
    const std::size_t n = stats.n;
    t.classes.push_back({std::move(stats), n});
  }
  t.n_train = train_x.size();
  return t;
}

NIWHyper estimate_hyperparams(std::span<const LatentVector> train_x,
                              std::span<const std::string> train_labels, std::size_t h,
                              const PriorConfig& prior) {
  if (train_x.empty()) throw DataError("hyperparameter estimation needs at least one training record");
  for (const auto& x : train_x) check_dim(x, h);
  const ClassTable table = build_class_table(train_x, train_labels);

  NIWHyper hyper;
  hyper.h = h;
  hyper.kappa = prior.kappa;
  hyper.alpha = prior.alpha;
  hyper.m = static_cast<double>(h) + prior.m_offset;
  hyper.mu0.assign(h, 0.0);
  for (const auto& x : train_x) {
    for (std::size_t i = 0; i < h; ++i) hyper.mu0[i] += x[i];
  }
  for (double& v : hyper.mu0) v /= static_cast<double>(train_x.size());

  const auto dof = static_cast<double>(train_x.size()) - static_cast<double>(table.classes.size());
  if (dof > 0.0) {
    hyper.sigma0 = Matrix(h, h);
    for (const auto& e : table.classes) {
      for (std::size_t i = 0; i < h * h; ++i) hyper.sigma0.data()[i] += e.stats.scatter.data()[i];
    }
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        const double v = 0.5 * (hyper.sigma0(i, j) + hyper.sigma0(j, i)) / dof;
        hyper.sigma0(i, j) = v;
        hyper.sigma0(j, i) = v;
      }
    }
    make_positive_definite(hyper.sigma0);
  } else {
    hyper.sigma0 = Matrix::identity(h);
    for (double& v : hyper.sigma0.data()) v *= kFallbackSigma;
  }
  hyper.validate();
  return hyper;
}

std::string ModelState::peek_novel_label() const {
  for (std::size_t k = next_novel_index;; ++k) {
    std::string label = "novel-" + std::to_string(k);
    if (!table.find(label)) return label;
  }
}

std::string ModelState::take_novel_label() {
  std::string label = peek_novel_label();
  next_novel_index = std::stoul(label.substr(6)) + 1;
  return label;
}

ModelState make_model(std::span<const LatentVector> train_x,
                      std::span<const std::string> train_labels, const NIWHyper& hyper) {
  hyper.validate();
  ModelState model;
  model.hyper = hyper;
  model.table = build_class_table(train_x, train_labels);
  return model;
}

CrpLogWeights crp_log_weights(const ClassTable& table, double alpha) {
  const double total = alpha + static_cast<double>(table.n_train + table.n_online_seen);
  if (!(total > 0.0)) throw ConfigError("CRP prior is improper: alpha = 0 and no observed points");
  CrpLogWeights w;
  w.log_normalizer = std::log(total);
  w.existing.reserve(table.classes.size());
  for (const auto& e : table.classes) {
    w.existing.push_back(std::log(static_cast<double>(e.stats.n)) - w.log_normalizer);
  }
  w.novel = alpha > 0.0 ? std::log(alpha) - w.log_normalizer : kNegInf;
  return w;
}

CrpLogWeights crp_log_weights(const ModelState& model) {
  return crp_log_weights(model.table, model.hyper.alpha);
}

double log_sum_exp(std::span<const double> v) {
  double mx = kNegInf;
  for (double x : v) mx = std::max(mx, x);
  if (mx == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

ClassPosterior posterior_over_classes(std::span<const double> x, const ClassTable& table,
                                      const NIWHyper& hyper) {
  check_dim(x, hyper.h);
  require_finite(x);
  const CrpLogWeights prior = crp_log_weights(table, hyper.alpha);
  ClassPosterior post;
  post.log_probabilities.reserve(table.classes.size() + 1);
  for (std::size_t j = 0; j < table.classes.size(); ++j) {
    post.log_probabilities.push_back(
        prior.existing[j] + studentt_logpdf(x, predictive_params(table.classes[j].stats, hyper)));
  }
  post.log_probabilities.push_back(
      prior.novel == kNegInf ? kNegInf
                             : prior.novel + studentt_logpdf(x, empty_predictive_params(hyper)));
  const double lse = log_sum_exp(post.log_probabilities);
  if (!std::isfinite(lse)) throw NumericalError("class posterior has no finite mass");
  post.probabilities.reserve(post.log_probabilities.size());
  for (double& lp : post.log_probabilities) {
    lp -= lse;
    post.probabilities.push_back(std::exp(lp));
  }
  return post;
}

ClassPosterior posterior_over_classes(std::span<const double> x, const ModelState& model) {
  return posterior_over_classes(x, model.table, model.hyper);
}

}  // namespace dpstream

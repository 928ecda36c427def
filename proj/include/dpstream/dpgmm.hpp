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

#ifndef DPSTREAM_DPGMM_HPP
#define DPSTREAM_DPGMM_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpstream/linalg.hpp"
#include "dpstream/nnmf.hpp"

namespace dpstream {

/// Normal x inverse-Wishart base measure NIW(mu0, sigma0, kappa, m) plus the
/// DP concentration alpha.
struct NIWHyper {
  Vector mu0;
  Matrix sigma0;
  double kappa = 100.0;
  double m = 110.0;
  double alpha = 100.0;
  std::size_t h = 0;

  /// Throws ConfigError unless sigma0 is symmetric positive definite,
  /// kappa > 0, alpha >= 0 and m + 1 - h > 0.
  void validate() const;

  friend bool operator==(const NIWHyper&, const NIWHyper&) = default;
};

/// User-facing prior settings; m is derived as h + m_offset.
struct PriorConfig {
  double alpha = 100.0;
  double kappa = 100.0;
  double m_offset = 100.0;
};

/// Count, mean and scatter (sum of squared deviations, i.e. (n-1) S) of one
/// class, maintained with Welford updates.
struct ClassStats {
  std::string label;
  std::size_t n = 0;
  Vector mean;
  Matrix scatter;

  static ClassStats from_point(std::string label, std::span<const double> x);

  /// Welford update: mean' = mean + (x - mean)/(n+1),
  /// scatter' = scatter + n/(n+1) (x - mean)(x - mean)^T.
  void add(std::span<const double> x);

  /// Exact inverse of add(). Requires n >= 2; a class of one point cannot be
  /// downdated, the caller removes it instead.
  void remove(std::span<const double> x);

  friend bool operator==(const ClassStats&, const ClassStats&) = default;
};

/// Value-returning form of ClassStats::add. Throws DataError for non-finite x.
ClassStats class_stats_update(ClassStats stats, std::span<const double> x);

/// Value-returning form of ClassStats::remove; nullopt when the class empties.
std::optional<ClassStats> class_stats_downdate(ClassStats stats, std::span<const double> x);

/// Location, scale and degrees of freedom of a multivariate student-t.
struct PredictiveParams {
  Vector mean;
  Matrix scale;
  double dof = 0.0;
};

/// Posterior predictive of the conjugate Gaussian-NIW model for one class:
///   mean  = (n mu_j + kappa mu0) / (n + kappa)
///   scale = (n + kappa + 1) / ((n + kappa)(n + m + 1 - h))
///           * (sigma0 + scatter + n kappa / (n + kappa) (mu0 - mu_j)(mu0 - mu_j)^T)
///   dof   = n + m + 1 - h
PredictiveParams predictive_params(const ClassStats& stats, const NIWHyper& hyper);

/// The same formula with every sufficient statistic empty (n = 0): the
/// predictive of a class that does not exist yet.
PredictiveParams empty_predictive_params(const NIWHyper& hyper);

/// log T(x | mean, scale, dof) for the standard h-variate student-t, using a
/// (jittered) Cholesky factor for the log-determinant and quadratic form.
double studentt_logpdf(std::span<const double> x, const PredictiveParams& p);

/// A class together with how many of its points came from training.
struct ClassEntry {
  ClassStats stats;
  std::size_t train_count = 0;

  std::size_t online_count() const noexcept { return stats.n - train_count; }
  friend bool operator==(const ClassEntry&, const ClassEntry&) = default;
};

/// The partition a sampler conditions on: training classes (sorted by label)
/// followed by classes created online, in creation order.
struct ClassTable {
  std::vector<ClassEntry> classes;
  std::size_t n_train = 0;
  std::size_t n_online_seen = 0;

  std::optional<std::size_t> find(std::string_view label) const;
  /// Online assignment of x to an existing class.
  void assign(std::size_t index, std::span<const double> x);
  /// Online creation of a class seeded with x; returns its index.
  std::size_t create(std::string label, std::span<const double> x);
  /// Undoes an online assignment of x. A class left empty is erased.
  void unassign(std::size_t index, std::span<const double> x);

  friend bool operator==(const ClassTable&, const ClassTable&) = default;
};

/// Builds the training partition, classes sorted by label.
ClassTable build_class_table(std::span<const LatentVector> train_x,
                             std::span<const std::string> train_labels);

/// Grand mean, pooled within-class covariance sum_j scatter_j / (N - k), and
/// the prior constants. Singleton classes contribute no scatter; when N - k <= 0
/// sigma0 falls back to 1e-8 * I. Throws DataError when there is no training
/// data.
NIWHyper estimate_hyperparams(std::span<const LatentVector> train_x,
                              std::span<const std::string> train_labels, std::size_t h,
                              const PriorConfig& prior = {});

/// Global model for the one-pass Gibbs sampler.
struct ModelState {
  NIWHyper hyper;
  ClassTable table;
  std::size_t next_novel_index = 1;

  /// The next "novel-<k>" label not used by any class.
  std::string peek_novel_label() const;
  /// peek_novel_label(), advancing the counter past it.
  std::string take_novel_label();

  friend bool operator==(const ModelState&, const ModelState&) = default;
};

ModelState make_model(std::span<const LatentVector> train_x,
                      std::span<const std::string> train_labels, const NIWHyper& hyper);

/// Chinese restaurant process prior in log space. existing[j] = log(n_j / D),
/// novel = log(alpha / D) with D = alpha + n_train + n_online_seen.
struct CrpLogWeights {
  Vector existing;
  double novel = 0.0;
  double log_normalizer = 0.0;
};

/// Throws ConfigError when the prior is improper (alpha = 0 and no points).
CrpLogWeights crp_log_weights(const ClassTable& table, double alpha);
CrpLogWeights crp_log_weights(const ModelState& model);

/// Posterior over the k existing classes followed by one "new class" outcome.
struct ClassPosterior {
  Vector log_probabilities;
  Vector probabilities;

  std::size_t novel_index() const noexcept { return probabilities.size() - 1; }
  double novel() const { return probabilities.back(); }
};

/// p(y = j | x, partition) proportional to CRP weight times student-t
/// predictive, normalized by log-sum-exp.
ClassPosterior posterior_over_classes(std::span<const double> x, const ClassTable& table,
                                      const NIWHyper& hyper);
ClassPosterior posterior_over_classes(std::span<const double> x, const ModelState& model);

/// log(sum(exp(v))); -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> v);

}  // namespace dpstream

#endif  // DPSTREAM_DPGMM_HPP

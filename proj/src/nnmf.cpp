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

#include "dpstream/nnmf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dpstream/error.hpp"
#include "dpstream/rng.hpp"
#include "dpstream/simd/kernels.hpp"

namespace dpstream {
namespace {

// Keeps 0/0 at zero. Any eps >= 0 preserves monotonicity: it only adds
// curvature to the auxiliary function the update minimizes.
constexpr double kUpdateEps = 1e-16;
constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;

void multiplicative_step(Matrix& target, const Matrix& num, const Matrix& den) {
  simd::active_kernels().multiplicative_update(target.data().data(), num.data().data(),
                                               den.data().data(), target.data().size(),
                                               kUpdateEps);
}

}  // namespace

NnmfResult nnmf_fit(const Matrix& x, const NnmfOptions& options) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const std::size_t h = options.latent_dim;
  if (h < 1 || h > std::min(n, d)) {
    throw ConfigError("latent dimension " + std::to_string(h) + " outside [1, min(n=" +
                      std::to_string(n) + ", d=" + std::to_string(d) + ")]");
  }
  double total = 0.0;
  for (double v : x.data()) {
    if (!std::isfinite(v) || v < 0.0) throw DataError("NNMF input must be finite and non-negative");
    total += v;
  }
  if (total == 0.0) throw DataError("NNMF input is all zeros; factorization is degenerate");

  const double scale = total / static_cast<double>(n * d) / static_cast<double>(h);
  Rng rng = substream(options.seed, StreamTag::kNnmfInit, 0);
  NnmfResult out;
  out.coefficients = Matrix(n, h);
  out.basis.rows = Matrix(h, d);
  for (double& v : out.coefficients.data()) v = (1.0 - rng.uniform()) * scale;
  for (double& v : out.basis.rows.data()) v = (1.0 - rng.uniform()) * scale;

  Matrix& c = out.coefficients;
  Matrix& b = out.basis.rows;
  double err = squared_frobenius_distance(x, matmul(c, b));
  out.objective_trace.push_back(err);

  for (std::size_t it = 0; it < options.max_iters; ++it) {
    multiplicative_step(b, matmul_tn(c, x), matmul(matmul_tn(c, c), b));
    multiplicative_step(c, matmul_nt(x, b), matmul(c, matmul_nt(b, b)));
    const double next = squared_frobenius_distance(x, matmul(c, b));
    out.objective_trace.push_back(next);
    out.iterations = it + 1;
    const double improvement = err > 0.0 ? (err - next) / err : 0.0;
    err = next;
    if (err == 0.0 || improvement < options.tol) break;
  }
  return out;
}

double nnls_kkt_residual(std::span<const double> c, std::span<const double> gradient, double tol) {
  double worst = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double v = c[j] <= tol ? std::max(0.0, -gradient[j]) : std::abs(gradient[j]);
    worst = std::max(worst, v);
  }
  return worst;
}

NnlsProjector::NnlsProjector(const Basis& basis, NnlsOptions options)
    : basis_(std::make_shared<const Basis>(basis)), options_(options), gram_(matmul_nt(basis.rows, basis.rows)) {}

NnlsResult NnlsProjector::solve(std::span<const double> x) const {
  const auto& k = simd::active_kernels();
  const std::size_t h = basis_->latent_dim();
  const std::size_t d = basis_->feature_dim();
  if (x.size() != d) {
    throw DataError("NNLS input has " + std::to_string(x.size()) + " features, basis has " +
                    std::to_string(d));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw DataError("NNLS input contains a non-finite value");
  }

  // Everything below lives in h dimensions: f(c) = |x|^2 - 2 c.rhs + c G c.
  Vector rhs(h);
  for (std::size_t r = 0; r < h; ++r) rhs[r] = k.dot(basis_->rows.row(r).data(), x.data(), d);

  auto gradient = [&](const Vector& c) {
    Vector g(h);
    for (std::size_t r = 0; r < h; ++r) g[r] = 2.0 * (k.dot(gram_.row(r).data(), c.data(), h) - rhs[r]);
    return g;
  };
  // Objective without the constant |x|^2.
  auto partial_objective = [&](const Vector& c) {
    double quad = 0.0;
    for (std::size_t r = 0; r < h; ++r) quad += c[r] * k.dot(gram_.row(r).data(), c.data(), h);
    return quad - 2.0 * k.dot(c.data(), rhs.data(), h);
  };

  NnlsResult res;
  Vector c(h, 0.0);
  Vector g = gradient(c);
  double f = partial_objective(c);
  Vector prev_c;
  Vector prev_g;
  const double trace = std::max(gram_.trace(), 1e-300);
  Vector trial(h);

  for (res.iterations = 0; res.iterations < options_.max_iters; ++res.iterations) {
    res.kkt_residual = nnls_kkt_residual(c, g, options_.tol);
    if (res.kkt_residual <= options_.tol) {
      res.converged = true;
      break;
    }
    // Barzilai-Borwein trial step, falling back to 1 / (2 tr G).
    double step = 0.5 / trace;
    if (!prev_c.empty()) {
      double ss = 0.0;
      double sy = 0.0;
      for (std::size_t r = 0; r < h; ++r) {
        const double s = c[r] - prev_c[r];
        ss += s * s;
        sy += s * (g[r] - prev_g[r]);
      }
      if (sy > 0.0 && std::isfinite(ss / sy)) step = ss / sy;
    }
    double f_trial = f;
    bool accepted = false;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      k.project_step(c.data(), g.data(), step, trial.data(), h);
      double decrease = 0.0;
      for (std::size_t r = 0; r < h; ++r) decrease += g[r] * (trial[r] - c[r]);
      f_trial = partial_objective(trial);
      if (f_trial <= f + kArmijo * decrease) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no representable descent left
    prev_c = c;
    prev_g = g;
    c = trial;
    f = f_trial;
    g = gradient(c);
  }
  if (!res.converged) {
    res.kkt_residual = nnls_kkt_residual(c, g, options_.tol);
    res.converged = res.kkt_residual <= options_.tol;
  }

  Vector recon(d, 0.0);
  for (std::size_t r = 0; r < h; ++r) {
    if (c[r] != 0.0) k.axpy(c[r], basis_->rows.row(r).data(), recon.data(), d);
  }
  res.objective = k.squared_distance(recon.data(), x.data(), d);
  res.coefficients = std::move(c);
  return res;
}

LatentVector nnls_project(std::span<const double> x, const Basis& basis, NnlsOptions options) {
  return NnlsProjector(basis, options).solve(x).coefficients;
}

}  // namespace dpstream

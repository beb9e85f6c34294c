// Copyright 2026 The Authors.
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

// Quantities built on top of the posterior variance: uncertainty reduction,
// marginal gains, submodularity probing, irreducible uncertainty, convergence
// and confidence-width formulas, the information-gain view, and the adaptive
// stopping rule. All logarithms are natural.

#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "sift/core.hpp"

namespace sift {

struct ConfidenceParams {
  std::size_t vocab_size = 2;  // V
  double norm_bound = 1.0;     // B
  double lipschitz = 0.25;     // L
  std::size_t dim = 1;         // d
  double reg = 1.0;            // lambda
  double noise = 1.0;          // rho, regression only
  double kappa = 4.0;

  void validate() const {
    if (vocab_size < 2) throw InvalidParameter("vocab_size must be at least 2");
    if (dim < 1) throw InvalidParameter("dim must be positive");
    if (!(norm_bound > 0.0) || !(lipschitz > 0.0) || !(reg > 0.0) ||
        !(noise > 0.0) || !(kappa > 0.0)) {
      throw InvalidParameter("confidence parameters must be positive");
    }
  }
};

struct StoppingPolicy {
  double alpha = 0.1;
  std::size_t n_max = 50;

  void validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
      throw InvalidParameter("alpha must be positive");
    }
    if (n_max < 1) throw InvalidParameter("n_max must be at least 1");
  }
};

/// psi(X) = sigma_0^2(q) - sigma_X^2(q).
inline double uncertainty_reduction(const Eigen::Ref<const RowMatrix>& selected,
                                    const QueryEmbedding& q, const KernelConfig& cfg) {
  const double prior = q.vector().squaredNorm();
  return clamp_nonnegative(prior - posterior_variance(selected, q, cfg),
                           "uncertainty reduction");
}

namespace detail {

inline RowMatrix append_row(const Eigen::Ref<const RowMatrix>& rows,
                            const Eigen::Ref<const Vector>& x) {
  RowMatrix out(rows.rows() + 1, x.size());
  if (rows.rows() > 0) {
    check_dims(static_cast<std::size_t>(x.size()),
               static_cast<std::size_t>(rows.cols()));
    out.topRows(rows.rows()) = rows;
  }
  out.row(rows.rows()) = x.transpose();
  return out;
}

}  // namespace detail

/// Delta(x | X) = psi(X + {x}) - psi(X), the one-step decrease of sigma^2(q).
inline double marginal_gain(const Eigen::Ref<const Vector>& x,
                            const Eigen::Ref<const RowMatrix>& selected,
                            const QueryEmbedding& q, const KernelConfig& cfg) {
  check_dims(q.dim(), static_cast<std::size_t>(x.size()));
  const double before = posterior_variance(selected, q, cfg);
  const double after = posterior_variance(detail::append_row(selected, x), q, cfg);
  return before - after;
}

struct ProbeReport {
  bool passed = true;
  /// Smallest observed Delta(x|X') - Delta(x|X); negative means a violation.
  double worst_slack = std::numeric_limits<double>::infinity();
  std::size_t checks = 0;
  std::size_t violations = 0;
};

/// Empirical check of diminishing returns. Each trial grows a random nested
/// chain of multisets X_0 = {} c X_1 c ... c X_m and checks, for every
/// candidate x and every pair i < j, that Delta(x|X_i) >= Delta(x|X_j) - 1e-9.
/// Chain elements are drawn half uniformly and half from the rows most
/// aligned with the query, where greedy selection concentrates.
inline ProbeReport submodularity_probe(const EmbeddingSet& candidates,
                                       const QueryEmbedding& q,
                                       const KernelConfig& cfg, std::size_t trials,
                                       std::uint64_t seed) {
  cfg.validate();
  if (trials < 1) throw InvalidParameter("trials must be at least 1");
  if (candidates.empty()) throw InvalidParameter("no candidates");
  check_dims(candidates.dim(), q.dim());

  // Same input preparation as the selectors.
  const bool rescale = cfg.normalize_inputs && !candidates.normalized();
  const RowMatrix scaled = rescale ? normalize_rows(candidates).data() : RowMatrix();
  const RowMatrix& data = rescale ? scaled : candidates.data();
  const auto k = static_cast<Eigen::Index>(candidates.rows());
  const Vector qv = cfg.normalize_inputs ? normalize_query(q).vector() : q.vector();
  const Vector scores = (data * qv).cwiseAbs();

  std::vector<std::size_t> by_relevance(candidates.rows());
  for (std::size_t i = 0; i < by_relevance.size(); ++i) by_relevance[i] = i;
  std::stable_sort(by_relevance.begin(), by_relevance.end(),
                   [&](std::size_t a, std::size_t b) { return scores(a) > scores(b); });
  const std::size_t top = std::max<std::size_t>(1, std::min<std::size_t>(8, by_relevance.size()));

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> any_row(0, candidates.rows() - 1);
  std::uniform_int_distribution<std::size_t> top_row(0, top - 1);
  std::uniform_int_distribution<std::size_t> chain_len(1, 6);
  std::bernoulli_distribution coin(0.5);

  ProbeReport report;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t len = chain_len(rng);
    RowMatrix chain(0, data.cols());
    // gains(j, x): Delta(x | X_j) for every prefix j of the chain.
    Eigen::MatrixXd gains(static_cast<Eigen::Index>(len) + 1, k);
    for (std::size_t j = 0; j <= len; ++j) {
      // Gains from the conditional kernel given the prefix.
      Eigen::MatrixXd gram = chain * chain.transpose();
      gram.diagonal().array() += cfg.lambda_prime;
      const Vector kq = chain * qv;
      Eigen::MatrixXd kx = chain * data.transpose();  // j x K
      Vector cov_q = data * qv;
      Vector var = data.rowwise().squaredNorm();
      if (chain.rows() > 0) {
        const auto llt = spd_factor(gram, cfg.jitter);
        const Vector v = llt.solve(kq);
        const Eigen::MatrixXd w = llt.solve(kx);
        cov_q -= kx.transpose() * v;
        var -= (kx.cwiseProduct(w)).colwise().sum().transpose();
      }
      for (Eigen::Index x = 0; x < k; ++x) {
        const double vx = std::max(var(x), 0.0);
        gains(static_cast<Eigen::Index>(j), x) =
            cov_q(x) * cov_q(x) / (vx + cfg.lambda_prime);
      }
      if (j == len) break;
      const std::size_t next = coin(rng) ? any_row(rng) : by_relevance[top_row(rng)];
      chain = detail::append_row(chain, data.row(static_cast<Eigen::Index>(next)).transpose());
    }
    for (Eigen::Index x = 0; x < k; ++x) {
      for (Eigen::Index i = 0; i <= static_cast<Eigen::Index>(len); ++i) {
        for (Eigen::Index j = i + 1; j <= static_cast<Eigen::Index>(len); ++j) {
          const double slack = gains(i, x) - gains(j, x);
          ++report.checks;
          report.worst_slack = std::min(report.worst_slack, slack);
          if (slack < -kNegativeTolerance) ++report.violations;
        }
      }
    }
  }
  report.passed = report.violations == 0;
  return report;
}

/// eta^2(q): squared norm of the component of q orthogonal to the row span,
/// with rank decided by a singular-value cutoff of 1e-10 * sigma_max.
inline double irreducible_uncertainty(const EmbeddingSet& space, const QueryEmbedding& q) {
  if (space.empty()) throw InvalidParameter("data space is empty");
  check_dims(space.dim(), q.dim());
  Eigen::BDCSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(space.data()), Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? 1e-10 * sv(0) : 0.0;
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > cutoff) ++rank;
  const Vector& qv = q.vector();
  if (rank == 0) return qv.squaredNorm();
  const auto basis = svd.matrixV().leftCols(rank);
  const Vector residual = qv - basis * (basis.transpose() * qv);
  return residual.squaredNorm();
}

/// d (1 + 2 d lambda' / lambda_min) log(1 + lambda_hat_n / lambda') / sqrt(n).
inline double convergence_bound_rhs(std::size_t n, std::size_t d, double lambda_prime,
                                    double lambda_min, double lambda_hat_n) {
  if (n < 1) throw InvalidParameter("n must be at least 1");
  if (!(lambda_min > 0.0)) throw InvalidParameter("lambda_min must be positive");
  if (!(lambda_prime > 0.0)) throw InvalidParameter("lambda_prime must be positive");
  if (!(lambda_hat_n >= 0.0)) throw InvalidParameter("lambda_hat_n must be non-negative");
  const double dd = static_cast<double>(d);
  return dd * (1.0 + 2.0 * dd * lambda_prime / lambda_min) *
         std::log1p(lambda_hat_n / lambda_prime) / std::sqrt(static_cast<double>(n));
}

/// Rows forming a basis of the data space's span, chosen by column-pivoted
/// QR on the transposed embedding matrix.
inline RowMatrix basis_rows(const EmbeddingSet& space) {
  if (space.empty()) throw InvalidParameter("data space is empty");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(space.data().transpose());
  qr.setThreshold(1e-10);
  const Eigen::Index rank = qr.rank();
  std::vector<std::size_t> picked;
  for (Eigen::Index i = 0; i < rank; ++i) {
    picked.push_back(static_cast<std::size_t>(qr.colsPermutation().indices()(i)));
  }
  std::sort(picked.begin(), picked.end());
  RowMatrix basis(rank, space.data().cols());
  for (Eigen::Index i = 0; i < rank; ++i) {
    basis.row(i) = space.row(picked[static_cast<std::size_t>(i)]);
  }
  return basis;
}

/// Smallest eigenvalue of Phi Phi^T for the basis returned by basis_rows.
inline double basis_lambda_min(const EmbeddingSet& space) {
  const RowMatrix basis = basis_rows(space);
  if (basis.rows() == 0) throw NumericalFailure("data space has rank zero");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(basis * basis.transpose(),
                                                     Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

/// Largest eigenvalue of the Gram matrix of the selected rows (0 when empty).
inline double selected_lambda_max(const Eigen::Ref<const RowMatrix>& selected) {
  if (selected.rows() == 0) return 0.0;
  // Phi_n Phi_n^T and Phi_n^T Phi_n share non-zero eigenvalues; use the smaller.
  Eigen::MatrixXd gram = selected.rows() <= selected.cols()
                             ? Eigen::MatrixXd(selected * selected.transpose())
                             : Eigen::MatrixXd(selected.transpose() * selected);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  return std::max(0.0, eig.eigenvalues().maxCoeff());
}

inline void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidParameter("delta must lie in (0, 1)");
}

/// Confidence width for categorical feedback:
/// 2 sqrt(V (1 + 2B)) [B + (L V^{3/2} d / lambda) log((2/delta) sqrt(1 + n/(d lambda)))].
inline double beta_classification(std::size_t n, double delta, const ConfidenceParams& p) {
  check_delta(delta);
  if (n < 1) throw InvalidParameter("n must be at least 1");
  p.validate();
  const double v = static_cast<double>(p.vocab_size);
  const double d = static_cast<double>(p.dim);
  const double lead = 2.0 * std::sqrt(v * (1.0 + 2.0 * p.norm_bound));
  const double log_term =
      std::log((2.0 / delta) * std::sqrt(1.0 + static_cast<double>(n) / (d * p.reg)));
  return lead * (p.norm_bound + p.lipschitz * std::pow(v, 1.5) * d / p.reg * log_term);
}

/// Confidence width for regression: B + rho sqrt(2 (gamma_n + 1 + log(1/delta))).
/// `n` only fixes which gamma_n the caller supplies.
inline double beta_regression(std::size_t n, double delta, double norm_bound,
                              double rho, double gamma_n) {
  check_delta(delta);
  if (n < 1) throw InvalidParameter("n must be at least 1");
  if (!(norm_bound > 0.0) || !(rho > 0.0)) {
    throw InvalidParameter("B and rho must be positive");
  }
  if (!(gamma_n >= 0.0)) throw InvalidParameter("gamma_n must be non-negative");
  return norm_bound + rho * std::sqrt(2.0 * (gamma_n + 1.0 + std::log(1.0 / delta)));
}

/// Realized information gain 0.5 log det(I + K_X / lambda') of a selection.
inline double realized_information_gain(const Eigen::Ref<const RowMatrix>& selected,
                                        const KernelConfig& cfg) {
  cfg.validate();
  if (selected.rows() == 0) return 0.0;
  Eigen::MatrixXd m = selected * selected.transpose() / cfg.lambda_prime;
  m.diagonal().array() += 1.0;
  const auto llt = spd_factor(m, cfg.jitter);
  const Eigen::MatrixXd l = llt.matrixL();
  return l.diagonal().array().log().sum();  // 0.5 * 2 * sum log L_ii
}

struct InfoGain {
  double gain = 0.0;
  double relevance = 0.0;
  double redundancy = 0.0;
};

/// Information gain of observing x about the response to q, given X, with
/// observation noise rho^2 = lambda'; split into relevance minus redundancy.
inline InfoGain marginal_info_gain(const Eigen::Ref<const Vector>& x,
                                   const Eigen::Ref<const RowMatrix>& selected,
                                   const QueryEmbedding& q, const KernelConfig& cfg) {
  check_dims(q.dim(), static_cast<std::size_t>(x.size()));
  constexpr double kFloor = 1e-15;
  const double prior = posterior_variance(RowMatrix(0, x.size()), q, cfg);
  const double before = posterior_variance(selected, q, cfg);
  const double after = posterior_variance(detail::append_row(selected, x), q, cfg);
  const double alone = posterior_variance(detail::append_row(RowMatrix(0, x.size()), x), q, cfg);
  if (before <= kFloor || after <= kFloor || alone <= kFloor) {
    throw DegenerateVariance("query variance is numerically zero");
  }
  InfoGain out;
  out.gain = 0.5 * (std::log(before) - std::log(after));
  out.relevance = 0.5 * (std::log(prior) - std::log(alone));
  out.redundancy = out.relevance - out.gain;
  if (out.gain < -1e-12) throw NumericalFailure("negative information gain");
  out.gain = std::max(out.gain, 0.0);
  return out;
}

/// Stop after iteration n when sigma_n > 1 / (alpha n) or when the budget
/// n_max is exhausted. Takes sigma, not sigma^2.
inline bool adaptive_should_stop(double sigma_n, std::size_t n, const StoppingPolicy& policy) {
  policy.validate();
  if (n < 1) throw InvalidParameter("n must be at least 1");
  if (n >= policy.n_max) return true;
  return sigma_n > 1.0 / (policy.alpha * static_cast<double>(n));
}

struct PerformanceGain {
  double gain = 1.0;
  std::optional<double> denormalized;
};

/// Predicted gain 1/sigma_n (sigma_0 = 1 for unit queries); optionally the
/// denormalized uncertainty sigma_n * baseline.
inline PerformanceGain predicted_performance_gain(double sigma_n,
                                                  std::optional<double> baseline_metric = {}) {
  if (!(sigma_n > 0.0) || !std::isfinite(sigma_n)) {
    throw InvalidParameter("sigma_n must be positive");
  }
  PerformanceGain out;
  out.gain = 1.0 / sigma_n;
  if (baseline_metric) out.denormalized = sigma_n * *baseline_metric;
  return out;
}

}  // namespace sift

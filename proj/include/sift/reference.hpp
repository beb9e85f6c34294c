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

// Brute-force oracles for tests. Nothing here reuses the production paths
// beyond plain dot products: variances come from a fresh extended-precision
// Gaussian elimination, and greedy steps re-solve from scratch.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "sift/core.hpp"
#include "sift/selectors.hpp"

namespace sift::reference {

namespace detail {

inline long double dot(const double* a, const double* b, std::size_t d) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < d; ++i) s += static_cast<long double>(a[i]) * b[i];
  return s;
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<long double> solve(std::vector<std::vector<long double>> a,
                                      std::vector<long double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    }
    if (a[piv][col] == 0.0L) throw NumericalFailure("singular system in oracle");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const long double f = a[r][col] / a[col][col];
      if (f == 0.0L) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<long double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    long double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

}  // namespace detail

/// sigma^2 of q given the listed rows of `data` (repeats allowed), by a
/// fresh dense solve of (K_X + lambda' I) v = k_X(q).
inline long double direct_variance(const RowMatrix& data, const std::vector<std::size_t>& rows,
                                   const Vector& q, double lambda_prime) {
  const std::size_t d = static_cast<std::size_t>(q.size());
  const std::size_t m = rows.size();
  const long double prior = detail::dot(q.data(), q.data(), d);
  if (m == 0) return prior;
  std::vector<std::vector<long double>> k(m, std::vector<long double>(m));
  std::vector<long double> kq(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double* xi = data.row(static_cast<Eigen::Index>(rows[i])).data();
    kq[i] = detail::dot(xi, q.data(), d);
    for (std::size_t j = 0; j < m; ++j) {
      const double* xj = data.row(static_cast<Eigen::Index>(rows[j])).data();
      k[i][j] = detail::dot(xi, xj, d);
    }
    k[i][i] += lambda_prime;
  }
  const auto v = detail::solve(k, kq);
  long double quad = 0.0L;
  for (std::size_t i = 0; i < m; ++i) quad += kq[i] * v[i];
  return prior - quad;
}

/// Greedy selection that, at every step, evaluates sigma^2_{X + {x}}(q) for
/// every candidate from scratch and keeps the minimizer (ties: lowest index).
/// Inputs are used as given; normalize beforehand if needed.
inline SelectionResult greedy_direct_oracle(const EmbeddingSet& candidates,
                                            const QueryEmbedding& q, std::size_t n_select,
                                            const KernelConfig& cfg) {
  cfg.validate();
  if (candidates.rows() > 256 || n_select > 64) {
    throw InstanceTooLarge("oracle is limited to 256 candidates and 64 steps");
  }
  check_dims(candidates.dim(), q.dim());
  const RowMatrix& data = candidates.data();
  const Vector& qv = q.vector();

  SelectionResult out;
  out.method = Method::kSift;
  out.lambda_prime = cfg.lambda_prime;
  std::vector<std::size_t> chosen;
  long double current = direct_variance(data, chosen, qv, cfg.lambda_prime);
  out.sigma_trace.push_back(static_cast<double>(current));
  for (std::size_t step = 0; step < n_select; ++step) {
    std::size_t best = 0;
    long double best_var = 0.0L;
    for (std::size_t x = 0; x < candidates.rows(); ++x) {
      chosen.push_back(x);
      const long double v = direct_variance(data, chosen, qv, cfg.lambda_prime);
      chosen.pop_back();
      if (x == 0 || v < best_var) {
        best = x;
        best_var = v;
      }
    }
    chosen.push_back(best);
    out.order.push_back(best);
    out.objective_trace.push_back(static_cast<double>(current - best_var));
    out.sigma_trace.push_back(static_cast<double>(best_var));
    current = best_var;
  }
  return out;
}

struct ExhaustiveResult {
  std::vector<std::size_t> best;
  double psi = 0.0;
};

/// The multiset of `subset_size` rows with maximal uncertainty reduction,
/// found by enumerating every multiset in lexicographic order.
inline ExhaustiveResult exhaustive_optimum(const EmbeddingSet& candidates,
                                           const QueryEmbedding& q, std::size_t subset_size,
                                           const KernelConfig& cfg) {
  cfg.validate();
  if (candidates.rows() > 7 || subset_size > 3) {
    throw InstanceTooLarge("exhaustive search is limited to 7 candidates and size 3");
  }
  check_dims(candidates.dim(), q.dim());
  const RowMatrix& data = candidates.data();
  const Vector& qv = q.vector();
  const long double prior = direct_variance(data, {}, qv, cfg.lambda_prime);

  ExhaustiveResult out;
  if (subset_size == 0) return out;
  if (candidates.empty()) throw InvalidParameter("no candidates");

  std::vector<std::size_t> idx(subset_size, 0);
  long double best_psi = -1.0L;
  const std::size_t k = candidates.rows();
  for (;;) {
    const long double psi = prior - direct_variance(data, idx, qv, cfg.lambda_prime);
    if (psi > best_psi) {
      best_psi = psi;
      out.best = idx;
    }
    // Next non-decreasing tuple.
    std::size_t pos = subset_size;
    while (pos > 0 && idx[pos - 1] == k - 1) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t j = pos; j < subset_size; ++j) idx[j] = idx[pos - 1];
  }
  out.psi = static_cast<double>(best_psi);
  return out;
}

/// Basis vectors e_1..e_d, each repeated `copies` times (all e_1 copies
/// first), with query (2, 1, ..., 1) / sqrt(4 + (d - 1)).
inline std::pair<EmbeddingSet, QueryEmbedding> prop_h1_instance(std::size_t d,
                                                                std::size_t copies) {
  if (d < 2) throw InvalidParameter("d must be at least 2");
  if (copies < 1) throw InvalidParameter("copies must be at least 1");
  const auto n = static_cast<Eigen::Index>(d * copies);
  RowMatrix rows = RowMatrix::Zero(n, static_cast<Eigen::Index>(d));
  for (std::size_t axis = 0; axis < d; ++axis) {
    for (std::size_t c = 0; c < copies; ++c) {
      rows(static_cast<Eigen::Index>(axis * copies + c), static_cast<Eigen::Index>(axis)) = 1.0;
    }
  }
  Vector q = Vector::Ones(static_cast<Eigen::Index>(d));
  q(0) = 2.0;
  q /= std::sqrt(4.0 + static_cast<double>(d - 1));
  return {EmbeddingSet(std::move(rows), {}, {}, true), QueryEmbedding(std::move(q))};
}

struct OracleReport {
  std::vector<double> oracle_sigma;
  double max_sigma_deviation = 0.0;
  double max_objective_deviation = 0.0;
  bool order_matches = true;
  /// First step where the orders differ (== size when they agree).
  std::size_t first_mismatch = 0;
};

inline OracleReport compare(const SelectionResult& optimized, const SelectionResult& oracle) {
  OracleReport r;
  r.oracle_sigma = oracle.sigma_trace;
  const std::size_t steps = std::min(optimized.order.size(), oracle.order.size());
  r.order_matches = optimized.order.size() == oracle.order.size();
  r.first_mismatch = steps;
  for (std::size_t i = 0; i < steps; ++i) {
    if (optimized.order[i] != oracle.order[i] && r.first_mismatch == steps) {
      r.first_mismatch = i;
      r.order_matches = false;
    }
    r.max_objective_deviation = std::max(
        r.max_objective_deviation, std::abs(optimized.objective_trace[i] - oracle.objective_trace[i]));
  }
  for (std::size_t i = 0; i <= steps; ++i) {
    r.max_sigma_deviation =
        std::max(r.max_sigma_deviation, std::abs(optimized.sigma_trace[i] - oracle.sigma_trace[i]));
  }
  return r;
}

}  // namespace sift::reference

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

// Selection strategies over an embedding set for a single query:
//
//   sift_select                  greedy variance minimization over the full
//                                conditional kernel (or a column cache)
//   sift_fast_select             lazy greedy with a max-heap of upper bounds
//                                and a cached regularized inverse
//   nn_select                    nearest neighbor, distinct or repeated
//   uncertainty_sampling_select  maximal own conditional variance
//   preselect_candidates         top-k inner-product filter
//
// Ties are always broken by the smallest row index. SIFT and uncertainty
// sampling may select the same row any number of times.

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sift/core.hpp"
#include "sift/uncertainty.hpp"

namespace sift {

enum class Method { kSift, kSiftFast, kNearestNeighbor, kNearestNeighborFailure, kUncertaintySampling };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::kSift: return "sift";
    case Method::kSiftFast: return "sift-fast";
    case Method::kNearestNeighbor: return "nn";
    case Method::kNearestNeighborFailure: return "nn-f";
    case Method::kUncertaintySampling: return "us";
  }
  return "unknown";
}

inline std::optional<Method> parse_method(const std::string& name) {
  for (Method m : {Method::kSift, Method::kSiftFast, Method::kNearestNeighbor,
                   Method::kNearestNeighborFailure, Method::kUncertaintySampling}) {
    if (method_name(m) == name) return m;
  }
  return std::nullopt;
}

struct SelectionResult {
  /// Selected candidate rows in selection order (repeats allowed).
  std::vector<std::size_t> order;
  /// Value of the maximized objective at each step.
  std::vector<double> objective_trace;
  /// sigma^2(q) before any selection and after each one; size order.size() + 1.
  std::vector<double> sigma_trace;
  Method method = Method::kSift;
  double lambda_prime = 0.01;

  std::size_t size() const { return order.size(); }
  double sigma0_sq() const { return sigma_trace.front(); }
  double final_sigma_sq() const { return sigma_trace.back(); }
};

/// How the exact selector stores the conditional kernel.
enum class KernelStorage {
  /// Full (K+1) x (K+1) matrix over the query and every candidate.
  kFull,
  /// Only the diagonal, the query row, and one column per selected pivot.
  kColumnCache,
};

struct SelectOptions {
  /// Enables adaptive stopping with this alpha (budget n_select).
  std::optional<double> adaptive_alpha;
  KernelStorage storage = KernelStorage::kFull;
};

namespace detail {

/// Candidates and query after optional unit normalization. Borrows the
/// caller's matrix when no rescaling is needed.
class PreparedInputs {
 public:
  PreparedInputs(const EmbeddingSet& candidates, const QueryEmbedding& q,
                 const KernelConfig& cfg) {
    cfg.validate();
    if (candidates.empty()) throw InvalidParameter("candidate set is empty");
    check_dims(candidates.dim(), q.dim());
    if (cfg.normalize_inputs && !candidates.normalized()) {
      owned_ = normalize_rows(candidates).data();
      rows_ = &owned_;
    } else {
      rows_ = &candidates.data();
    }
    query_ = cfg.normalize_inputs ? normalize_query(q).vector() : q.vector();
  }

  PreparedInputs(const PreparedInputs&) = delete;
  PreparedInputs& operator=(const PreparedInputs&) = delete;

  const RowMatrix& rows() const { return *rows_; }
  const Vector& query() const { return query_; }
  std::size_t count() const { return static_cast<std::size_t>(rows_->rows()); }

 private:
  RowMatrix owned_;
  const RowMatrix* rows_ = nullptr;
  Vector query_;
};

inline void check_count(std::size_t n_select) {
  if (n_select < 1) throw InvalidParameter("n_select must be at least 1");
}

/// Scores within this relative distance are ties. Mathematically equal
/// scores (unit rows all have variance 1) differ by rounding otherwise.
inline constexpr double kTieTolerance = 1e-12;

/// A clearly greater score wins; ties keep the smaller index. Offer
/// candidates in ascending index order.
struct ArgMax {
  double score = -std::numeric_limits<double>::infinity();
  std::size_t index = 0;
  bool found = false;

  void offer(double s, std::size_t i) {
    if (!found || s > score + kTieTolerance * std::abs(score)) {
      score = s;
      index = i;
      found = true;
    }
  }
};

inline bool should_stop(const SelectOptions& opts, std::size_t n, std::size_t n_select,
                        double sigma_sq) {
  if (!opts.adaptive_alpha) return false;
  return adaptive_should_stop(std::sqrt(std::max(sigma_sq, 0.0)), n,
                              StoppingPolicy{*opts.adaptive_alpha, n_select});
}

/// Full conditional kernel over [q, x_0, ..., x_{K-1}] (index 0 is q).
class FullConditionalKernel {
 public:
  FullConditionalKernel(const RowMatrix& rows, const Vector& q, double lambda_prime)
      : lambda_prime_(lambda_prime) {
    RowMatrix tracked(rows.rows() + 1, rows.cols());
    tracked.row(0) = q.transpose();
    tracked.bottomRows(rows.rows()) = rows;
    k_ = tracked * tracked.transpose();
  }

  double query_variance() const { return k_(0, 0); }
  double query_cov(std::size_t i) const { return k_(0, static_cast<Eigen::Index>(i) + 1); }
  double variance(std::size_t i) const {
    const auto j = static_cast<Eigen::Index>(i) + 1;
    return k_(j, j);
  }
  void condition_on(std::size_t i) { conditional_downdate_inplace(k_, i + 1, lambda_prime_); }
  const RowMatrix& matrix() const { return k_; }

 private:
  double lambda_prime_;
  RowMatrix k_;
};

/// Memory-light variant: keeps the query row, the candidate variances, and
/// the conditional column of each selected pivot, O(K * selected) memory.
class ColumnCacheConditionalKernel {
 public:
  ColumnCacheConditionalKernel(const RowMatrix& rows, const Vector& q, double lambda_prime)
      : rows_(rows), lambda_prime_(lambda_prime) {
    qq_ = q.squaredNorm();
    qrow_ = rows * q;
    diag_ = rows.rowwise().squaredNorm();
  }

  double query_variance() const { return qq_; }
  double query_cov(std::size_t i) const { return qrow_(static_cast<Eigen::Index>(i)); }
  double variance(std::size_t i) const { return diag_(static_cast<Eigen::Index>(i)); }

  void condition_on(std::size_t i) {
    const auto p = static_cast<Eigen::Index>(i);
    // Column k_{n-1}(., p) over candidates, plus its query entry.
    Vector col = rows_ * rows_.row(p).transpose();
    const double col_q = qrow_(p);
    for (std::size_t j = 0; j < pivots_.size(); ++j) {
      const Vector& c = columns_[j];
      const double scale = c(p) / denoms_[j];
      col -= scale * c;
    }
    const double denom = diag_(p) + lambda_prime_;
    if (!(denom > 0.0)) throw NumericalFailure("non-positive downdate denominator");
    qq_ = clamp_nonnegative(qq_ - col_q * col_q / denom, "query variance");
    qrow_ -= (col_q / denom) * col;
    diag_ -= col.cwiseProduct(col) / denom;
    for (Eigen::Index j = 0; j < diag_.size(); ++j) {
      diag_(j) = clamp_nonnegative(diag_(j), "conditional variance");
    }
    pivots_.push_back(i);
    columns_.push_back(std::move(col));
    denoms_.push_back(denom);
  }

 private:
  const RowMatrix& rows_;
  double lambda_prime_;
  double qq_ = 0.0;
  Vector qrow_;
  Vector diag_;
  std::vector<std::size_t> pivots_;
  std::vector<Vector> columns_;
  std::vector<double> denoms_;
};

/// Greedy loop shared by exact SIFT and uncertainty sampling. `score(kernel, i)`
/// is the per-candidate objective under the current conditional kernel.
template <class Kernel, class Score>
SelectionResult run_greedy(Kernel& kernel, std::size_t candidates, std::size_t n_select,
                           Score score, Method method, double lambda_prime,
                           const SelectOptions& opts) {
  SelectionResult result;
  result.method = method;
  result.lambda_prime = lambda_prime;
  result.sigma_trace.push_back(kernel.query_variance());
  for (std::size_t n = 1; n <= n_select; ++n) {
    ArgMax best;
    for (std::size_t i = 0; i < candidates; ++i) best.offer(score(kernel, i), i);
    kernel.condition_on(best.index);
    result.order.push_back(best.index);
    result.objective_trace.push_back(best.score);
    result.sigma_trace.push_back(kernel.query_variance());
    if (should_stop(opts, n, n_select, result.sigma_trace.back())) break;
  }
  return result;
}

}  // namespace detail

/// Exact greedy SIFT: at every step pick argmax_x k(q,x)^2 / (k(x,x) + lambda')
/// under the current conditional kernel, then condition on the pick.
inline SelectionResult sift_select(const EmbeddingSet& candidates, const QueryEmbedding& q,
                                   std::size_t n_select, const KernelConfig& cfg,
                                   const SelectOptions& opts = {}) {
  detail::check_count(n_select);
  const detail::PreparedInputs in(candidates, q, cfg);
  const double lp = cfg.lambda_prime;

  auto objective = [lp](const auto& kernel, std::size_t i) {
    const double c = kernel.query_cov(i);
    return c * c / (kernel.variance(i) + lp);
  };

  SelectionResult result;
  if (opts.storage == KernelStorage::kFull) {
    detail::FullConditionalKernel kernel(in.rows(), in.query(), lp);
    result = detail::run_greedy(kernel, in.count(), n_select, objective, Method::kSift, lp, opts);
  } else {
    detail::ColumnCacheConditionalKernel kernel(in.rows(), in.query(), lp);
    result = detail::run_greedy(kernel, in.count(), n_select, objective, Method::kSift, lp, opts);
  }
  // The query variance drops by exactly the objective at each step.
  for (std::size_t i = 0; i < result.order.size(); ++i) {
    result.sigma_trace[i + 1] =
        clamp_nonnegative(result.sigma_trace[i] - result.objective_trace[i], "query variance");
  }
  return result;
}

/// Uncertainty sampling: pick the candidate with the largest conditional
/// variance k(x,x), ignoring the query. sigma_trace still tracks the query.
inline SelectionResult uncertainty_sampling_select(const EmbeddingSet& candidates,
                                                   const QueryEmbedding& q,
                                                   std::size_t n_select,
                                                   const KernelConfig& cfg,
                                                   const SelectOptions& opts = {}) {
  detail::check_count(n_select);
  const detail::PreparedInputs in(candidates, q, cfg);
  auto objective = [](const auto& kernel, std::size_t i) { return kernel.variance(i); };
  if (opts.storage == KernelStorage::kFull) {
    detail::FullConditionalKernel kernel(in.rows(), in.query(), cfg.lambda_prime);
    return detail::run_greedy(kernel, in.count(), n_select, objective,
                              Method::kUncertaintySampling, cfg.lambda_prime, opts);
  }
  detail::ColumnCacheConditionalKernel kernel(in.rows(), in.query(), cfg.lambda_prime);
  return detail::run_greedy(kernel, in.count(), n_select, objective,
                            Method::kUncertaintySampling, cfg.lambda_prime, opts);
}

/// Regularized inverse (K_S + lambda' I)^{-1} of a growing selection S,
/// extended by block inversion as rows are appended.
class InverseCache {
 public:
  InverseCache(Eigen::Index dim, const Vector& query, double lambda_prime, double jitter)
      : rows_(0, dim), query_(query), lambda_prime_(lambda_prime), jitter_(jitter) {}

  std::size_t size() const { return static_cast<std::size_t>(rows_.rows()); }
  const RowMatrix& rows() const { return rows_; }
  const Eigen::MatrixXd& inverse() const { return inverse_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  /// k_S(q).
  const Vector& query_cross() const { return query_cross_; }

  /// Appends rows R. With A = S R^T and B = R R^T + lambda' I, the Schur
  /// complement C^{-1} = B - A^T L A gives
  ///   [[L + L A C A^T L, -L A C], [-C A^T L, C]].
  void append(const Eigen::Ref<const RowMatrix>& added) {
    const Eigen::Index i = rows_.rows();
    const Eigen::Index j = added.rows();
    if (j == 0) return;
    Eigen::MatrixXd a = rows_ * added.transpose();  // i x j
    Eigen::MatrixXd b = added * added.transpose();  // j x j
    Eigen::MatrixXd b_reg = b;
    b_reg.diagonal().array() += lambda_prime_;

    Eigen::MatrixXd la = inverse_ * a;  // i x j
    Eigen::MatrixXd schur = b_reg - a.transpose() * la;
    schur = 0.5 * (schur + schur.transpose()).eval();
    const Eigen::MatrixXd c = spd_inverse(schur, jitter_);

    Eigen::MatrixXd next(i + j, i + j);
    next.topLeftCorner(i, i) = inverse_ + la * c * la.transpose();
    next.topRightCorner(i, j) = -la * c;
    next.bottomLeftCorner(j, i) = next.topRightCorner(i, j).transpose();
    next.bottomRightCorner(j, j) = c;
    inverse_ = 0.5 * (next + next.transpose());

    Eigen::MatrixXd g(i + j, i + j);
    g.topLeftCorner(i, i) = gram_;
    g.topRightCorner(i, j) = a;
    g.bottomLeftCorner(j, i) = a.transpose();
    g.bottomRightCorner(j, j) = b;
    gram_ = std::move(g);

    Vector qc(i + j);
    qc.head(i) = query_cross_;
    qc.tail(j) = added * query_;
    query_cross_ = std::move(qc);

    RowMatrix r(i + j, rows_.cols());
    r.topRows(i) = rows_;
    r.bottomRows(j) = added;
    rows_ = std::move(r);
  }

  /// Conditional covariance with the query and conditional variance of x,
  /// given the cached selection. `qx` and `xx` are the prior values.
  std::pair<double, double> conditional(const Eigen::Ref<const Vector>& x, double qx,
                                        double xx) const {
    if (rows_.rows() == 0) return {qx, xx};
    const Vector kx = rows_ * x;
    const Vector v = inverse_ * kx;
    return {qx - query_cross_.dot(v), xx - kx.dot(v)};
  }

 private:
  RowMatrix rows_;
  Vector query_;
  double lambda_prime_;
  double jitter_;
  Eigen::MatrixXd inverse_ = Eigen::MatrixXd(0, 0);
  Eigen::MatrixXd gram_ = Eigen::MatrixXd(0, 0);
  Vector query_cross_ = Vector(0);
};

struct HeapEntry {
  /// Upper bound on the candidate's current marginal objective.
  double bound = 0.0;
  /// Iteration in which `bound` was last computed.
  std::size_t stamp = 0;
  std::size_t row = 0;
};

/// Max-heap order: larger bound first, then smaller row index.
struct HeapLess {
  bool operator()(const HeapEntry& a, const HeapEntry& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.row > b.row;
  }
};

struct FastState {
  std::vector<HeapEntry> heap;
  InverseCache inv_cache;
  /// Conditional kernel over [q, selected...].
  RowMatrix cond_kernel;
  std::vector<std::size_t> selected;
};

/// Lazy-greedy SIFT. Exact whenever the uncertainty reduction is submodular
/// along the selection path; otherwise stale bounds may hide the true argmax.
class FastSelector {
 public:
  FastSelector(const EmbeddingSet& candidates, const QueryEmbedding& q, const KernelConfig& cfg)
      : in_(candidates, q, cfg),
        cfg_(cfg),
        state_{{}, InverseCache(in_.rows().cols(), in_.query(), cfg.lambda_prime, cfg.jitter),
               RowMatrix::Constant(1, 1, in_.query().squaredNorm()), {}} {
    // Initial bounds are the exact first-step objective: nearest-neighbor scoring.
    qx_ = in_.rows() * in_.query();
    xx_ = in_.rows().rowwise().squaredNorm();
    state_.heap.reserve(in_.count());
    for (std::size_t i = 0; i < in_.count(); ++i) {
      const auto e = static_cast<Eigen::Index>(i);
      state_.heap.push_back({qx_(e) * qx_(e) / (xx_(e) + cfg_.lambda_prime), 1, i});
    }
    std::make_heap(state_.heap.begin(), state_.heap.end(), HeapLess{});
    sigma_sq_ = in_.query().squaredNorm();
  }

  const FastState& state() const { return state_; }
  double sigma_sq() const { return sigma_sq_; }
  std::size_t iteration() const { return state_.selected.size(); }
  std::size_t recomputations() const { return recomputations_; }

  /// Selects the next row; returns (row, objective).
  std::pair<std::size_t, double> step() {
    const std::size_t n = state_.selected.size() + 1;
    auto& heap = state_.heap;
    for (;;) {
      std::pop_heap(heap.begin(), heap.end(), HeapLess{});
      HeapEntry top = heap.back();
      heap.pop_back();
      if (top.stamp == n) {
        // Fresh and still maximal: no stale bound can exceed it.
        select(top.row, top.bound);
        heap.push_back(top);
        std::push_heap(heap.begin(), heap.end(), HeapLess{});
        return {top.row, top.bound};
      }
      top.bound = recompute(top.row);
      top.stamp = n;
      heap.push_back(top);
      std::push_heap(heap.begin(), heap.end(), HeapLess{});
    }
  }

  /// Current objective k(q,x)^2 / (k(x,x) + lambda') of candidate `row`.
  double recompute(std::size_t row) {
    sync_inverse();
    ++recomputations_;
    const auto [cov, var] = conditional(row);
    return cov * cov / (std::max(var, 0.0) + cfg_.lambda_prime);
  }

 private:
  std::pair<double, double> conditional(std::size_t row) const {
    const auto e = static_cast<Eigen::Index>(row);
    return state_.inv_cache.conditional(in_.rows().row(e).transpose(), qx_(e), xx_(e));
  }

  /// Brings the cached inverse up to date with all selected rows.
  void sync_inverse() {
    auto& cache = state_.inv_cache;
    const std::size_t have = cache.size();
    const std::size_t want = state_.selected.size();
    if (have == want) return;
    RowMatrix added(static_cast<Eigen::Index>(want - have), in_.rows().cols());
    for (std::size_t k = have; k < want; ++k) {
      added.row(static_cast<Eigen::Index>(k - have)) =
          in_.rows().row(static_cast<Eigen::Index>(state_.selected[k]));
    }
    cache.append(added);
  }

  /// Extends the conditional kernel over [q, selected] with the new row's
  /// conditional column, then conditions on it.
  void select(std::size_t row, double objective) {
    sync_inverse();
    const auto& cache = state_.inv_cache;
    const auto e = static_cast<Eigen::Index>(row);
    const Vector x = in_.rows().row(e).transpose();
    const Eigen::Index m = static_cast<Eigen::Index>(cache.size());

    // Prior kernel between the tracked points [q, s_1..s_m] and x.
    Vector prior(m + 1);
    prior(0) = qx_(e);
    if (m > 0) prior.tail(m) = cache.rows() * x;
    Vector column = prior;
    double var = xx_(e);
    if (m > 0) {
      const Vector v = cache.inverse() * prior.tail(m);
      column(0) -= cache.query_cross().dot(v);
      column.tail(m) -= cache.gram() * v;
      var -= prior.tail(m).dot(v);
    }

    RowMatrix& k = state_.cond_kernel;
    const Eigen::Index t = k.rows();
    RowMatrix grown(t + 1, t + 1);
    grown.topLeftCorner(t, t) = k;
    grown.topRightCorner(t, 1) = column;
    grown.bottomLeftCorner(1, t) = column.transpose();
    grown(t, t) = std::max(var, 0.0);
    conditional_downdate_inplace(grown, static_cast<std::size_t>(t), cfg_.lambda_prime);
    k = std::move(grown);

    state_.selected.push_back(row);
    sigma_sq_ = clamp_nonnegative(sigma_sq_ - objective, "query variance");
  }

  detail::PreparedInputs in_;
  KernelConfig cfg_;
  FastState state_;
  Vector qx_;
  Vector xx_;
  double sigma_sq_ = 0.0;
  std::size_t recomputations_ = 0;
};

inline SelectionResult sift_fast_select(const EmbeddingSet& candidates, const QueryEmbedding& q,
                                        std::size_t n_select, const KernelConfig& cfg,
                                        const SelectOptions& opts = {}) {
  detail::check_count(n_select);
  FastSelector selector(candidates, q, cfg);
  SelectionResult result;
  result.method = Method::kSiftFast;
  result.lambda_prime = cfg.lambda_prime;
  result.sigma_trace.push_back(selector.sigma_sq());
  for (std::size_t n = 1; n <= n_select; ++n) {
    const auto [row, objective] = selector.step();
    result.order.push_back(row);
    result.objective_trace.push_back(objective);
    result.sigma_trace.push_back(selector.sigma_sq());
    if (detail::should_stop(opts, n, n_select, result.sigma_trace.back())) break;
  }
  return result;
}

/// Nearest neighbor by inner product. Distinct mode returns the n_select
/// best rows; failure mode repeats the single best row. sigma_trace reports
/// the query variance after each inclusion for comparison.
inline SelectionResult nn_select(const EmbeddingSet& candidates, const QueryEmbedding& q,
                                 std::size_t n_select, bool failure_mode,
                                 const KernelConfig& cfg = {}, const SelectOptions& opts = {}) {
  detail::check_count(n_select);
  const detail::PreparedInputs in(candidates, q, cfg);
  if (!failure_mode && n_select > in.count()) throw NotEnoughCandidates(n_select, in.count());

  const Vector scores = in.rows() * in.query();
  std::vector<std::size_t> ranked(in.count());
  for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i] = i;
  const std::size_t keep = failure_mode ? 1 : n_select;
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double sa = scores(static_cast<Eigen::Index>(a));
                      const double sb = scores(static_cast<Eigen::Index>(b));
                      return sa != sb ? sa > sb : a < b;
                    });

  SelectionResult result;
  result.method = failure_mode ? Method::kNearestNeighborFailure : Method::kNearestNeighbor;
  result.lambda_prime = cfg.lambda_prime;
  InverseCache cache(in.rows().cols(), in.query(), cfg.lambda_prime, cfg.jitter);
  double sigma_sq = in.query().squaredNorm();
  result.sigma_trace.push_back(sigma_sq);
  for (std::size_t n = 1; n <= n_select; ++n) {
    const std::size_t row = failure_mode ? ranked[0] : ranked[n - 1];
    const auto e = static_cast<Eigen::Index>(row);
    const auto x = in.rows().row(e);
    const auto [cov, var] = cache.conditional(x.transpose(), scores(e), x.squaredNorm());
    sigma_sq = clamp_nonnegative(sigma_sq - cov * cov / (std::max(var, 0.0) + cfg.lambda_prime),
                                 "query variance");
    cache.append(x);
    result.order.push_back(row);
    result.objective_trace.push_back(scores(e));
    result.sigma_trace.push_back(sigma_sq);
    if (detail::should_stop(opts, n, n_select, sigma_sq)) break;
  }
  return result;
}

/// The k_pre rows with the largest inner product with q, best first, as a
/// new set that keeps ids and original row indices.
inline EmbeddingSet preselect_candidates(const EmbeddingSet& space, const QueryEmbedding& q,
                                         std::size_t k_pre) {
  check_dims(space.dim(), q.dim());
  if (k_pre < 1) throw InvalidParameter("k_pre must be at least 1");
  if (k_pre > space.rows()) throw NotEnoughCandidates(k_pre, space.rows());
  const Vector scores = space.data() * q.vector();
  std::vector<std::size_t> ranked(space.rows());
  for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i] = i;
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k_pre), ranked.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double sa = scores(static_cast<Eigen::Index>(a));
                      const double sb = scores(static_cast<Eigen::Index>(b));
                      return sa != sb ? sa > sb : a < b;
                    });
  ranked.resize(k_pre);
  return space.subset(ranked);
}

/// Dispatches on the method tag.
inline SelectionResult select(Method method, const EmbeddingSet& candidates,
                              const QueryEmbedding& q, std::size_t n_select,
                              const KernelConfig& cfg, const SelectOptions& opts = {}) {
  switch (method) {
    case Method::kSift: return sift_select(candidates, q, n_select, cfg, opts);
    case Method::kSiftFast: return sift_fast_select(candidates, q, n_select, cfg, opts);
    case Method::kNearestNeighbor: return nn_select(candidates, q, n_select, false, cfg, opts);
    case Method::kNearestNeighborFailure: return nn_select(candidates, q, n_select, true, cfg, opts);
    case Method::kUncertaintySampling:
      return uncertainty_sampling_select(candidates, q, n_select, cfg, opts);
  }
  throw InvalidParameter("unknown method");
}

}  // namespace sift

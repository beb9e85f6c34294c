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

// Kernel algebra over embeddings. The kernel is the raw inner product
// k(x, y) = <phi(x), phi(y)>; cosine similarity only arises when the inputs
// are normalized first.

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sift/errors.hpp"

namespace sift {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Rows with a norm below this are treated as zero.
inline constexpr double kZeroNormThreshold = 1e-12;
/// Round-off allowance for quantities that are non-negative in exact math.
inline constexpr double kNegativeTolerance = 1e-9;

/// An immutable, id-tagged n x d matrix of row embeddings (the data space).
///
/// `source_rows` records, for every row, its index in the collection this set
/// was cut from (identity when the set was loaded directly).
class EmbeddingSet {
 public:
  EmbeddingSet() = default;

  explicit EmbeddingSet(RowMatrix data, std::vector<std::string> ids = {},
                        std::vector<std::size_t> source_rows = {},
                        bool normalized = false)
      : data_(std::move(data)),
        ids_(std::move(ids)),
        source_rows_(std::move(source_rows)),
        normalized_(normalized) {
    for (Eigen::Index i = 0; i < data_.rows(); ++i) {
      for (Eigen::Index j = 0; j < data_.cols(); ++j) {
        if (!std::isfinite(data_(i, j))) {
          throw NonFiniteValue(static_cast<std::size_t>(i),
                               static_cast<std::size_t>(j));
        }
      }
    }
    if (!ids_.empty() && ids_.size() != rows()) {
      throw InvalidParameter("id table has " + std::to_string(ids_.size()) +
                             " entries for " + std::to_string(rows()) +
                             " rows");
    }
    if (!source_rows_.empty() && source_rows_.size() != rows()) {
      throw InvalidParameter("source row table does not match row count");
    }
    if (normalized_) {
      for (Eigen::Index i = 0; i < data_.rows(); ++i) {
        if (std::abs(data_.row(i).norm() - 1.0) > 1e-6) {
          throw InvalidParameter("row " + std::to_string(i) +
                                 " is flagged normalized but is not unit norm");
        }
      }
    }
  }

  std::size_t rows() const { return static_cast<std::size_t>(data_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(data_.cols()); }
  bool empty() const { return data_.rows() == 0; }
  bool normalized() const { return normalized_; }
  bool has_ids() const { return !ids_.empty(); }

  const RowMatrix& data() const { return data_; }
  auto row(std::size_t i) const { return data_.row(static_cast<Eigen::Index>(i)); }

  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<std::size_t>& source_rows() const { return source_rows_; }

  std::size_t source_row(std::size_t i) const {
    return source_rows_.empty() ? i : source_rows_[i];
  }

  /// The row's id, falling back to its source row index in decimal.
  std::string id(std::size_t i) const {
    return ids_.empty() ? std::to_string(source_row(i)) : ids_[i];
  }

  /// Rows in the given order (repeats allowed), keeping ids and provenance.
  EmbeddingSet subset(std::span<const std::size_t> indices) const {
    RowMatrix out(static_cast<Eigen::Index>(indices.size()), data_.cols());
    std::vector<std::string> ids;
    std::vector<std::size_t> sources;
    sources.reserve(indices.size());
    if (has_ids()) ids.reserve(indices.size());
    for (std::size_t k = 0; k < indices.size(); ++k) {
      const std::size_t i = indices[k];
      if (i >= rows()) {
        throw InvalidParameter("row index " + std::to_string(i) +
                               " out of range");
      }
      out.row(static_cast<Eigen::Index>(k)) = row(i);
      sources.push_back(source_row(i));
      if (has_ids()) ids.push_back(ids_[i]);
    }
    return EmbeddingSet(std::move(out), std::move(ids), std::move(sources),
                        normalized_);
  }

 private:
  RowMatrix data_;
  std::vector<std::string> ids_;
  std::vector<std::size_t> source_rows_;
  bool normalized_ = false;
};

/// The prompt embedding.
class QueryEmbedding {
 public:
  QueryEmbedding() = default;

  explicit QueryEmbedding(Vector v) : v_(std::move(v)) {
    for (Eigen::Index j = 0; j < v_.size(); ++j) {
      if (!std::isfinite(v_(j))) throw NonFiniteValue(0, static_cast<std::size_t>(j));
    }
  }

  QueryEmbedding(std::initializer_list<double> values)
      : QueryEmbedding(Vector::Map(values.begin(),
                                   static_cast<Eigen::Index>(values.size()))) {}

  std::size_t dim() const { return static_cast<std::size_t>(v_.size()); }
  const Vector& vector() const { return v_; }

 private:
  Vector v_;
};

struct KernelConfig {
  /// Regularizer added to the selected Gram matrix.
  double lambda_prime = 0.01;
  /// First jitter rung tried when a Cholesky factorization fails.
  double jitter = 1e-10;
  /// Whether selectors rescale candidates and query to unit length.
  bool normalize_inputs = true;

  void validate() const {
    if (!(lambda_prime > 0.0) || !std::isfinite(lambda_prime)) {
      throw InvalidParameter("lambda_prime must be positive and finite");
    }
    if (!(jitter >= 0.0) || !std::isfinite(jitter)) {
      throw InvalidParameter("jitter must be non-negative");
    }
  }
};

inline void check_dims(std::size_t expected, std::size_t actual) {
  if (expected != actual) throw DimensionMismatch(expected, actual);
}

/// Divides every row by its Euclidean norm. Throws ZeroNormRow on the first
/// row whose norm is below 1e-12.
inline EmbeddingSet normalize_rows(const EmbeddingSet& e) {
  RowMatrix out = e.data();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (norm < kZeroNormThreshold) throw ZeroNormRow(static_cast<std::size_t>(i));
    out.row(i) /= norm;
  }
  return EmbeddingSet(std::move(out), e.ids(), e.source_rows(), true);
}

inline QueryEmbedding normalize_query(const QueryEmbedding& q) {
  const double norm = q.vector().norm();
  if (norm < kZeroNormThreshold) throw ZeroNormRow(0);
  return QueryEmbedding(q.vector() / norm);
}

/// Clamps a quantity that is non-negative in exact arithmetic. Values down to
/// -1e-9 are treated as round-off; anything lower is reported.
inline double clamp_nonnegative(double value, const char* what) {
  if (!std::isfinite(value)) {
    throw NumericalFailure(std::string(what) + " is not finite");
  }
  if (value < -kNegativeTolerance) {
    throw NumericalFailure(std::string(what) + " is negative (" +
                           std::to_string(value) + ")");
  }
  return value < 0.0 ? 0.0 : value;
}

/// Cholesky factorization of a symmetric positive definite matrix. When the
/// plain factorization fails, jitter is added to the diagonal, escalating
/// from `jitter` through 1e-8 to 1e-6 before giving up.
inline Eigen::LLT<Eigen::MatrixXd> spd_factor(const Eigen::MatrixXd& a,
                                              double jitter = 1e-10) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) return llt;

  const std::array<double, 3> ladder = {jitter, 1e-8, 1e-6};
  double last = 0.0;
  for (double rung : ladder) {
    if (rung <= last) continue;
    last = rung;
    Eigen::MatrixXd shifted = a;
    shifted.diagonal().array() += rung;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) return llt;
  }
  throw NumericalFailure("Cholesky factorization failed after jitter 1e-6");
}

inline Vector spd_solve(const Eigen::MatrixXd& a, const Vector& b,
                        double jitter = 1e-10) {
  Vector x = spd_factor(a, jitter).solve(b);
  if (!x.allFinite()) throw NumericalFailure("SPD solve produced non-finite values");
  return x;
}

inline Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& a, double jitter = 1e-10) {
  Eigen::MatrixXd inv =
      spd_factor(a, jitter).solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
  if (!inv.allFinite()) throw NumericalFailure("SPD inverse produced non-finite values");
  return inv;
}

/// sigma_X^2(q) = k(q,q) - k_X(q)^T (K_X + lambda' I)^{-1} k_X(q).
///
/// `selected` holds one selected embedding per row; repeats are allowed.
inline double posterior_variance(const Eigen::Ref<const RowMatrix>& selected,
                                 const Eigen::Ref<const Vector>& q,
                                 const KernelConfig& cfg) {
  cfg.validate();
  const double prior = q.squaredNorm();
  if (selected.rows() == 0) return prior;
  check_dims(static_cast<std::size_t>(q.size()),
             static_cast<std::size_t>(selected.cols()));

  Eigen::MatrixXd gram = selected * selected.transpose();
  gram.diagonal().array() += cfg.lambda_prime;
  const Vector kq = selected * q;
  const Vector v = spd_solve(gram, kq, cfg.jitter);
  return clamp_nonnegative(prior - kq.dot(v), "posterior variance");
}

inline double posterior_variance(const Eigen::Ref<const RowMatrix>& selected,
                                 const QueryEmbedding& q, const KernelConfig& cfg) {
  return posterior_variance(selected, q.vector(), cfg);
}

/// The same variance in feature space: lambda' q^T (Phi^T Phi + lambda' I_d)^{-1} q.
inline double posterior_variance_feature_space(
    const Eigen::Ref<const RowMatrix>& selected, const Eigen::Ref<const Vector>& q,
    const KernelConfig& cfg) {
  cfg.validate();
  if (selected.rows() > 0) {
    check_dims(static_cast<std::size_t>(q.size()),
               static_cast<std::size_t>(selected.cols()));
  }
  const Eigen::Index d = q.size();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  if (selected.rows() > 0) cov = selected.transpose() * selected;
  cov.diagonal().array() += cfg.lambda_prime;
  const Vector v = spd_solve(cov, q, cfg.jitter);
  return clamp_nonnegative(cfg.lambda_prime * q.dot(v), "posterior variance");
}

inline double posterior_variance_feature_space(
    const Eigen::Ref<const RowMatrix>& selected, const QueryEmbedding& q,
    const KernelConfig& cfg) {
  return posterior_variance_feature_space(selected, q.vector(), cfg);
}

/// Conditions a conditional kernel matrix on one more observation of the
/// tracked point `pivot`:
///   k_n(x,y) = k_{n-1}(x,y) - k_{n-1}(x,p) k_{n-1}(p,y) / (k_{n-1}(p,p) + lambda').
inline void conditional_downdate_inplace(RowMatrix& k, std::size_t pivot,
                                         double lambda_prime) {
  const auto p = static_cast<Eigen::Index>(pivot);
  if (k.rows() != k.cols()) throw InvalidParameter("kernel matrix must be square");
  if (p >= k.rows()) throw InvalidParameter("pivot out of range");
  if (!(lambda_prime > 0.0)) throw InvalidParameter("lambda_prime must be positive");

  const Vector c = k.col(p);
  const double denom = c(p) + lambda_prime;
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    throw NumericalFailure("non-positive downdate denominator");
  }
  // Upper triangle first, then mirrored, so symmetry is exact.
  const Eigen::Index n = k.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (c(i) == 0.0) continue;
    const double ci = c(i) / denom;
    for (Eigen::Index j = i; j < n; ++j) k(i, j) -= ci * c(j);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = clamp_nonnegative(k(i, i), "conditional variance");
    for (Eigen::Index j = i + 1; j < n; ++j) k(j, i) = k(i, j);
  }
}

inline RowMatrix conditional_downdate(RowMatrix k, std::size_t pivot,
                                      double lambda_prime) {
  conditional_downdate_inplace(k, pivot, lambda_prime);
  return k;
}

/// Total variation distance 0.5 * sum |s_i - t_i| between two distributions.
inline double tv_distance(std::span<const double> s, std::span<const double> t) {
  check_dims(s.size(), t.size());
  auto check = [](std::span<const double> p, const char* name) {
    double sum = 0.0;
    for (double v : p) {
      if (!std::isfinite(v) || v < 0.0) {
        throw NotAProbabilityVector(std::string(name) + " has a negative entry");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw NotAProbabilityVector(std::string(name) + " does not sum to 1");
    }
  };
  check(s, "s");
  check(t, "t");
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) total += std::abs(s[i] - t[i]);
  return 0.5 * total;
}

}  // namespace sift

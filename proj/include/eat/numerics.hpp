/*
 * Copyright 2026 The EAT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Dense linear algebra and probability primitives.
//
// Matrices are Eigen row-major dense types templated on the scalar. The free
// functions here fix their floating point evaluation order so that identical
// inputs produce identical bytes on every run.

#ifndef EAT_NUMERICS_HPP_
#define EAT_NUMERICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "eat/error.hpp"

namespace eat {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

template <typename Derived>
std::string shape_string(const Eigen::DenseBase<Derived>& m) {
  std::ostringstream out;
  out << m.rows() << "x" << m.cols();
  return out.str();
}

// Throws DomainError if any entry is NaN or infinite.
template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& m, const std::string& what) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (!std::isfinite(m(i, j))) {
        std::ostringstream out;
        out << what << ": non-finite entry at (" << i << ", " << j << ")";
        throw DomainError(out.str());
      }
    }
  }
}

// Builds a matrix from row-major data, validating size and finiteness.
template <typename Scalar>
Matrix<Scalar> matrix_from_rows(Eigen::Index rows, Eigen::Index cols,
                                std::span<const Scalar> data) {
  if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size()) {
    std::ostringstream out;
    out << "matrix_from_rows: " << data.size() << " values for shape " << rows << "x" << cols;
    throw ShapeError(out.str());
  }
  Matrix<Scalar> m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  require_finite(m, "matrix_from_rows");
  return m;
}

// Matrix product with a fixed accumulation order: every output entry is
// accumulated left to right over the inner dimension, rows in order.
template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> matmul(const Eigen::MatrixBase<DerivedA>& a,
                                         const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  static_assert(std::is_same_v<Scalar, typename DerivedB::Scalar>,
                "matmul operands must share a scalar type");
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: cannot multiply " + shape_string(a) + " by " + shape_string(b));
  }
  const Eigen::Index n = a.rows();
  const Eigen::Index inner = a.cols();
  const Eigen::Index m = b.cols();
  Matrix<Scalar> c = Matrix<Scalar>::Zero(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < inner; ++k) {
      const Scalar aik = a(i, k);
      for (Eigen::Index j = 0; j < m; ++j) {
        c(i, j) += aik * b(k, j);
      }
    }
  }
  return c;
}

// A probability vector: non-negative entries summing to one.
template <typename Scalar>
class Distribution {
 public:
  static constexpr Scalar kSumTolerance = Scalar(1e-9);

  explicit Distribution(std::vector<Scalar> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw DomainError("Distribution: empty support");
    Scalar total = 0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      if (!std::isfinite(probs_[i]) || probs_[i] < 0) {
        std::ostringstream out;
        out << "Distribution: entry " << i << " = " << probs_[i] << " is not a probability";
        throw DomainError(out.str());
      }
      total += probs_[i];
    }
    if (std::abs(total - Scalar(1)) > kSumTolerance) {
      std::ostringstream out;
      out.precision(17);
      out << "Distribution: entries sum to " << total;
      throw DomainError(out.str());
    }
  }

  std::span<const Scalar> probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }
  Scalar operator[](std::size_t i) const { return probs_[i]; }

 private:
  std::vector<Scalar> probs_;
};

namespace detail {

// Masked softmax into `out`. Masked (false) positions are excluded from the
// max and the normalizer and receive exactly 0.
template <typename Scalar>
void masked_softmax(std::span<const Scalar> logits, const std::vector<bool>& mask,
                    std::span<Scalar> out) {
  if (logits.size() != mask.size() || out.size() != logits.size()) {
    throw ShapeError("softmax_row: logits, mask and output lengths differ");
  }
  Scalar max_logit = -std::numeric_limits<Scalar>::infinity();
  bool any_live = false;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    if (!mask[j]) continue;
    if (!std::isfinite(logits[j])) throw DomainError("softmax_row: non-finite unmasked logit");
    if (!any_live || logits[j] > max_logit) max_logit = logits[j];
    any_live = true;
  }
  if (!any_live) throw DomainError("softmax_row: every position is masked");
  Scalar total = 0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    if (mask[j]) {
      out[j] = std::exp(logits[j] - max_logit);
      total += out[j];
    } else {
      out[j] = Scalar(0);
    }
  }
  for (std::size_t j = 0; j < logits.size(); ++j) out[j] /= total;
}

}  // namespace detail

// Numerically stabilized softmax over the unmasked positions of `logits`.
template <typename Scalar>
Distribution<Scalar> softmax_row(std::span<const Scalar> logits, const std::vector<bool>& mask) {
  std::vector<Scalar> probs(logits.size());
  detail::masked_softmax(logits, mask, std::span<Scalar>(probs));
  return Distribution<Scalar>(std::move(probs));
}

template <typename Scalar>
Distribution<Scalar> softmax_row(std::span<const Scalar> logits) {
  return softmax_row(logits, std::vector<bool>(logits.size(), true));
}

template <typename Scalar>
Distribution<Scalar> softmax_row(const std::vector<Scalar>& logits, const std::vector<bool>& mask) {
  return softmax_row(std::span<const Scalar>(logits), mask);
}

template <typename Scalar>
Distribution<Scalar> softmax_row(const std::vector<Scalar>& logits) {
  return softmax_row(std::span<const Scalar>(logits));
}

// Shannon entropy in nats with 0 * log 0 taken as 0.
template <typename Scalar>
Scalar shannon_entropy(std::span<const Scalar> probs) {
  Scalar h = 0;
  for (const Scalar p : probs) {
    if (p > 0) h -= p * std::log(p);
  }
  return h;
}

template <typename Scalar>
Scalar shannon_entropy(const Distribution<Scalar>& d) {
  return shannon_entropy(d.probs());
}

}  // namespace eat

#endif  // EAT_NUMERICS_HPP_

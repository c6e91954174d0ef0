/*
 * Copyright 2026 The dpsynth Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Clipping and order-statistic kernels over sets of logit vectors.
//
// A set of logit vectors is passed column-wise: each column is one member of
// the set. All kernels clip every column independently before aggregating,
// so callers pass raw provider logits.

#ifndef DPSYNTH_AGGREGATION_H_
#define DPSYNTH_AGGREGATION_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpsynth/types.h"

namespace dpsynth {

template <typename Scalar>
struct MedianTriple {
  Vector<Scalar> left;
  Vector<Scalar> mid;
  Vector<Scalar> right;
};

namespace internal {

template <typename Scalar>
absl::Status CheckClipBound(Scalar c) {
  if (!(c > Scalar(0)) || !std::isfinite(static_cast<double>(c))) {
    return absl::InvalidArgumentError("clip bound must be positive and finite");
  }
  return absl::OkStatus();
}

template <typename Derived>
absl::Status CheckLogits(const Eigen::MatrixBase<Derived>& z) {
  if (z.size() == 0) {
    return absl::InvalidArgumentError("logit vector is empty");
  }
  if (!z.allFinite()) {
    return absl::InvalidArgumentError("logit vector has a non-finite entry");
  }
  return absl::OkStatus();
}

// Shift so the maximum lands on c, then floor at -c. Entries that were
// strictly below the maximum stay strictly below c even when the shift
// rounds them up, so the argmax set is preserved exactly.
template <typename Derived, typename Scalar = typename Derived::Scalar>
Vector<Scalar> ClipUnchecked(const Eigen::MatrixBase<Derived>& z, std::type_identity_t<Scalar> c) {
  const Scalar top = z.maxCoeff();
  const Scalar below_c = std::nextafter(c, -std::numeric_limits<Scalar>::infinity());
  Vector<Scalar> out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const Scalar zi = z(i);
    if (zi == top) {
      out(i) = c;
      continue;
    }
    Scalar v = (zi - top) + c;
    if (v >= c) v = below_c;
    out(i) = std::max(-c, v);
  }
  return out;
}

template <typename Derived, typename Scalar = typename Derived::Scalar>
Matrix<Scalar> ClipColumnsUnchecked(const Eigen::MatrixBase<Derived>& set,
                                    std::type_identity_t<Scalar> c) {
  Matrix<Scalar> out(set.rows(), set.cols());
  for (Eigen::Index j = 0; j < set.cols(); ++j) {
    out.col(j) = ClipUnchecked(set.col(j), c);
  }
  return out;
}

template <typename Derived, typename Scalar = typename Derived::Scalar>
absl::Status CheckSet(const Eigen::MatrixBase<Derived>& set, std::type_identity_t<Scalar> c) {
  if (absl::Status s = CheckClipBound(c); !s.ok()) return s;
  if (set.cols() == 0) {
    return absl::FailedPreconditionError("empty batch");
  }
  if (set.rows() == 0) {
    return absl::InvalidArgumentError("logit vectors are empty");
  }
  if (!set.allFinite()) {
    return absl::InvalidArgumentError("logit set has a non-finite entry");
  }
  return absl::OkStatus();
}

// Order statistics of one component over already-clipped values. `values` is
// scratch space and gets permuted.
template <typename Scalar>
void ComponentMedians(std::vector<Scalar>& values, Scalar c, Scalar& left,
                      Scalar& mid, Scalar& right) {
  const std::size_t m = values.size();
  if (m == 1) {
    // A single value has no neighbours in the multiset. Its neighbour sets
    // are {v, v'} with v' in [-c, c], whose medians span [(v-c)/2, (v+c)/2].
    const Scalar v = values[0];
    left = (v - c) / Scalar(2);
    mid = v;
    right = (v + c) / Scalar(2);
    return;
  }
  const auto begin = values.begin();
  if (m % 2 == 1) {
    const std::size_t k = m / 2;
    std::nth_element(begin, begin + k, values.end());
    mid = values[k];
    left = *std::max_element(begin, begin + k);
    right = *std::min_element(begin + k + 1, values.end());
  } else {
    const std::size_t k = m / 2 - 1;
    std::nth_element(begin, begin + k, values.end());
    left = values[k];
    right = *std::min_element(begin + k + 1, values.end());
    mid = (left + right) / Scalar(2);
  }
}

template <typename Derived, typename Scalar = typename Derived::Scalar>
MedianTriple<Scalar> MedianTripleOfClipped(
    const Eigen::MatrixBase<Derived>& clipped, std::type_identity_t<Scalar> c) {
  const Eigen::Index vocab = clipped.rows();
  MedianTriple<Scalar> triple{Vector<Scalar>(vocab), Vector<Scalar>(vocab),
                              Vector<Scalar>(vocab)};
  std::vector<Scalar> scratch(static_cast<std::size_t>(clipped.cols()));
  for (Eigen::Index x = 0; x < vocab; ++x) {
    for (Eigen::Index j = 0; j < clipped.cols(); ++j) {
      scratch[static_cast<std::size_t>(j)] = clipped(x, j);
    }
    ComponentMedians(scratch, c, triple.left(x), triple.mid(x),
                     triple.right(x));
  }
  return triple;
}

}  // namespace internal

// clip_c(z)_i = max(-c, z_i - max_j z_j + c).
template <typename Derived, typename Scalar = typename Derived::Scalar>
absl::StatusOr<Vector<Scalar>> Clip(const Eigen::MatrixBase<Derived>& z,
                                    std::type_identity_t<Scalar> c) {
  if (absl::Status s = internal::CheckClipBound(c); !s.ok()) return s;
  if (absl::Status s = internal::CheckLogits(z); !s.ok()) return s;
  return internal::ClipUnchecked(z, c);
}

// Mean of the clipped columns of `set`.
template <typename Derived, typename Scalar = typename Derived::Scalar>
absl::StatusOr<Vector<Scalar>> AggregateMean(
    const Eigen::MatrixBase<Derived>& set, std::type_identity_t<Scalar> c) {
  if (absl::Status s = internal::CheckSet(set, c); !s.ok()) return s;
  Vector<Scalar> sum = Vector<Scalar>::Zero(set.rows());
  for (Eigen::Index j = 0; j < set.cols(); ++j) {
    sum += internal::ClipUnchecked(set.col(j), c);
  }
  return Vector<Scalar>(sum / static_cast<Scalar>(set.cols()));
}

// Component-wise left-median, median and right-median of the clipped columns.
//
// For an odd count the three values are the sorted middle value and its two
// neighbours; for an even count they are the two middle values a <= b and
// their midpoint. Duplicates are kept. A single-member set reports the range
// its one-insertion neighbours can move the median to.
template <typename Derived, typename Scalar = typename Derived::Scalar>
absl::StatusOr<MedianTriple<Scalar>> ComputeMedianTriple(
    const Eigen::MatrixBase<Derived>& set, std::type_identity_t<Scalar> c) {
  if (absl::Status s = internal::CheckSet(set, c); !s.ok()) return s;
  return internal::MedianTripleOfClipped(
      internal::ClipColumnsUnchecked(set, c), c);
}

template <typename Derived, typename Scalar = typename Derived::Scalar>
absl::StatusOr<Vector<Scalar>> AggregateMedian(
    const Eigen::MatrixBase<Derived>& set, std::type_identity_t<Scalar> c) {
  absl::StatusOr<MedianTriple<Scalar>> triple = ComputeMedianTriple(set, c);
  if (!triple.ok()) return triple.status();
  return std::move(triple->mid);
}

}  // namespace dpsynth

#endif  // DPSYNTH_AGGREGATION_H_

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

#ifndef DPSYNTH_TYPES_H_
#define DPSYNTH_TYPES_H_

#include <cstdint>

#include <Eigen/Core>

namespace dpsynth {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// A dense vector of log-scores indexed by token id.
using LogitVector = Vector<double>;
// A set of logit vectors stored column-wise: rows are tokens, columns are
// the members of the set (one per seed in a batch).
using LogitSet = Matrix<double>;

using Embedding = Vector<double>;

using TokenId = std::int32_t;
using BatchId = std::int64_t;

enum class AggregationMode { kMean, kMedian };

}  // namespace dpsynth

#endif  // DPSYNTH_TYPES_H_

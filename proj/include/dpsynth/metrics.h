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

#ifndef DPSYNTH_METRICS_H_
#define DPSYNTH_METRICS_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"

namespace dpsynth {

struct VMeasure {
  double homogeneity = 1.0;
  double completeness = 1.0;
  double v_measure = 1.0;
};

// Homogeneity, completeness and their harmonic mean for a clustering
// `predicted` against a reference partition `reference` (entropies in nats;
// a zero-entropy reference counts as perfectly homogeneous and vice versa).
absl::StatusOr<VMeasure> ComputeVMeasure(std::span<const int> predicted,
                                         std::span<const int> reference);

// Dense integer codes for arbitrary labels, in first-seen order.
std::vector<int> EncodeLabels(std::span<const std::string> labels);

// Number of members of each cluster id in [0, k).
std::vector<std::size_t> ClusterSizes(std::span<const int> assignment, int k);

}  // namespace dpsynth

#endif  // DPSYNTH_METRICS_H_

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

#ifndef DPSYNTH_CLUSTERING_H_
#define DPSYNTH_CLUSTERING_H_

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "absl/status/statusor.h"
#include "dpsynth/types.h"

namespace dpsynth {

enum class CenterSource { kPublic, kExternalFile };

std::string_view CenterSourceName(CenterSource source);

// k centers in embedding space, stored column-wise (dim x k).
struct ClusterModel {
  Eigen::MatrixXd centers;
  CenterSource source = CenterSource::kPublic;
  // Column indices into the model these centers were selected from; empty
  // when the model was not produced by Rebalance().
  std::vector<int> parent_indices;
  // Privacy cost already spent selecting these centers.
  double clustering_epsilon = 0.0;

  int k() const { return static_cast<int>(centers.cols()); }
  int dim() const { return static_cast<int>(centers.rows()); }
};

struct KMeansOptions {
  int k = 1;
  int max_iters = 100;
  std::uint64_t rng_seed = 0;
  int jobs = 1;
};

struct KMeansResult {
  ClusterModel model;
  std::vector<int> labels;
  // Sum of squared distances to the nearest center, one entry per
  // assignment step; non-increasing.
  std::vector<double> objective_history;
  int iterations = 0;
  bool converged = false;
};

// Lloyd's algorithm from a k-means++ start. `points` is dim x n. Empty
// clusters keep their previous center. Deterministic given rng_seed and
// independent of `jobs`.
absl::StatusOr<KMeansResult> KMeans(const Eigen::Ref<const Eigen::MatrixXd>& points,
                                    const KMeansOptions& options);

// Index of the nearest center in Euclidean norm, lowest index on ties.
absl::StatusOr<int> Assign(const ClusterModel& model,
                           const Eigen::Ref<const Eigen::VectorXd>& point);

// Assign() over the columns of `points`.
absl::StatusOr<std::vector<int>> AssignAll(
    const ClusterModel& model, const Eigen::Ref<const Eigen::MatrixXd>& points,
    int jobs = 1);

struct RebalanceResult {
  ClusterModel model;
  std::vector<std::int64_t> true_counts;
  std::vector<double> noisy_counts;
  double epsilon_count = 0.0;
};

// Counts the seeds nearest each center, adds Laplace(1 / epsilon_count)
// noise to every count and keeps the k_prime centers with the highest noisy
// counts (lowest index on ties), in their original order. An infinite
// epsilon_count selects by true count. The returned model's
// clustering_epsilon is the input's plus epsilon_count.
absl::StatusOr<RebalanceResult> Rebalance(
    const ClusterModel& model, const Eigen::Ref<const Eigen::MatrixXd>& seeds,
    int k_prime, double epsilon_count, std::uint64_t rng_seed, int jobs = 1);

}  // namespace dpsynth

#endif  // DPSYNTH_CLUSTERING_H_

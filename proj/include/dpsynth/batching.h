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

#ifndef DPSYNTH_BATCHING_H_
#define DPSYNTH_BATCHING_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpsynth/types.h"

namespace dpsynth {

enum class BatchingMode {
  // Each seed draws a sub-batch r uniformly from [b] within its cluster.
  kRandomSubbatches,
  // Each cluster is shuffled and cut into batches of exactly batch_size;
  // a trailing remainder below min_batch_size is dropped.
  kFixedSize,
};

struct BatchingOptions {
  BatchingMode mode = BatchingMode::kFixedSize;
  int batch_size = 64;
  int num_subbatches = 1;
  int min_batch_size = 2;
  std::uint64_t rng_seed = 0;
};

struct Batch {
  BatchId batch_id = 0;
  int cluster_id = 0;
  std::optional<std::string> label;
  int sub_batch_index = 0;
  std::vector<std::size_t> seed_indices;
};

struct BatchSlot {
  int cluster_id = 0;
  int sub_batch_index = 0;
  BatchId batch_id = 0;
};

struct BatchPlan {
  std::vector<Batch> batches;
  // Per seed; empty for dropped seeds.
  std::vector<std::optional<BatchSlot>> assignment;
  std::vector<std::size_t> dropped_seeds;
  std::size_t empty_subbatches = 0;
};

// Seeds are grouped by (label, cluster) so a batch never mixes either.
// Groups are ordered by label then cluster id, and batch ids are dense in
// that order. Deterministic given rng_seed and the seed ids.
BatchPlan MakeBatches(std::span<const int> cluster_ids,
                      std::span<const std::optional<std::string>> labels,
                      std::span<const std::string> seed_ids,
                      const BatchingOptions& options);

}  // namespace dpsynth

#endif  // DPSYNTH_BATCHING_H_

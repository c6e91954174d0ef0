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

#include "dpsynth/batching.h"

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dpsynth {
namespace {

using ::testing::ElementsAre;

struct Seeds {
  std::vector<int> clusters;
  std::vector<std::optional<std::string>> labels;
  std::vector<std::string> ids;
};

Seeds MakeSeeds(int n, int num_clusters = 1, int num_labels = 0) {
  Seeds s;
  for (int i = 0; i < n; ++i) {
    s.clusters.push_back(i % num_clusters);
    if (num_labels > 0) {
      s.labels.push_back("label" + std::to_string((i / num_clusters) % num_labels));
    } else {
      s.labels.push_back(std::nullopt);
    }
    s.ids.push_back("seed-" + std::to_string(i));
  }
  return s;
}

BatchPlan Plan(const Seeds& s, const BatchingOptions& options) {
  return MakeBatches(s.clusters, s.labels, s.ids, options);
}

std::vector<std::size_t> Sizes(const BatchPlan& plan) {
  std::vector<std::size_t> out;
  for (const Batch& b : plan.batches) out.push_back(b.seed_indices.size());
  return out;
}

TEST(FixedSizeTest, ExactMultiple) {
  const BatchPlan plan = Plan(MakeSeeds(10), {.batch_size = 5});
  EXPECT_THAT(Sizes(plan), ElementsAre(5, 5));
  EXPECT_TRUE(plan.dropped_seeds.empty());
}

TEST(FixedSizeTest, SmallRemainderIsDropped) {
  const BatchPlan plan = Plan(MakeSeeds(11), {.batch_size = 5, .min_batch_size = 2});
  EXPECT_THAT(Sizes(plan), ElementsAre(5, 5));
  ASSERT_EQ(plan.dropped_seeds.size(), 1u);
  EXPECT_FALSE(plan.assignment[plan.dropped_seeds[0]].has_value());
}

TEST(FixedSizeTest, LargeRemainderIsKept) {
  const BatchPlan plan = Plan(MakeSeeds(13), {.batch_size = 5, .min_batch_size = 2});
  EXPECT_THAT(Sizes(plan), ElementsAre(5, 5, 3));
  EXPECT_TRUE(plan.dropped_seeds.empty());
}

TEST(RandomSubbatchTest, SizesAreBinomial) {
  const BatchPlan plan =
      Plan(MakeSeeds(3000), {.mode = BatchingMode::kRandomSubbatches, .num_subbatches = 3, .rng_seed = 42});
  ASSERT_EQ(plan.batches.size(), 3u);
  const double sigma = std::sqrt(3000.0 * (1.0 / 3.0) * (2.0 / 3.0));
  std::size_t total = 0;
  for (const Batch& b : plan.batches) {
    EXPECT_LE(std::abs(static_cast<double>(b.seed_indices.size()) - 1000.0), 5 * sigma);
    total += b.seed_indices.size();
  }
  EXPECT_EQ(total, 3000u);
  EXPECT_TRUE(plan.dropped_seeds.empty());
}

TEST(BatchPlanTest, IsPartitionWithoutMixing) {
  for (const BatchingMode mode : {BatchingMode::kFixedSize, BatchingMode::kRandomSubbatches}) {
    const Seeds s = MakeSeeds(503, 7, 3);
    const BatchPlan plan = Plan(s, {.mode = mode, .batch_size = 6, .num_subbatches = 4, .rng_seed = 9});
    std::vector<int> seen(503, 0);
    for (std::size_t b = 0; b < plan.batches.size(); ++b) {
      const Batch& batch = plan.batches[b];
      EXPECT_EQ(batch.batch_id, static_cast<BatchId>(b));
      for (std::size_t i : batch.seed_indices) {
        ++seen[i];
        EXPECT_EQ(s.clusters[i], batch.cluster_id);
        EXPECT_EQ(s.labels[i], batch.label);
        ASSERT_TRUE(plan.assignment[i].has_value());
        EXPECT_EQ(plan.assignment[i]->batch_id, batch.batch_id);
        EXPECT_EQ(plan.assignment[i]->cluster_id, batch.cluster_id);
      }
    }
    for (std::size_t i : plan.dropped_seeds) --seen[i];
    for (std::size_t i = 0; i < 503; ++i) {
      EXPECT_EQ(std::abs(seen[i]), 1) << "seed " << i;
    }
  }
}

TEST(BatchPlanTest, DeterministicAndSeedSensitive) {
  const Seeds s = MakeSeeds(200, 3);
  const BatchingOptions options{.batch_size = 7, .rng_seed = 5};
  const BatchPlan a = Plan(s, options);
  const BatchPlan b = Plan(s, options);
  ASSERT_EQ(a.batches.size(), b.batches.size());
  for (std::size_t i = 0; i < a.batches.size(); ++i) {
    EXPECT_EQ(a.batches[i].seed_indices, b.batches[i].seed_indices);
  }
  BatchingOptions other = options;
  other.rng_seed = 6;
  const BatchPlan c = Plan(s, other);
  bool differs = false;
  for (std::size_t i = 0; i < a.batches.size(); ++i) {
    differs |= a.batches[i].seed_indices != c.batches[i].seed_indices;
  }
  EXPECT_TRUE(differs);
}

TEST(BatchPlanTest, EmptyInput) {
  const BatchPlan plan = Plan(MakeSeeds(0), {});
  EXPECT_TRUE(plan.batches.empty());
  EXPECT_TRUE(plan.dropped_seeds.empty());
}

}  // namespace
}  // namespace dpsynth

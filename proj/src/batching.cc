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

#include <algorithm>
#include <map>
#include <utility>

#include "dpsynth/rng.h"

namespace dpsynth {
namespace {

using GroupKey = std::pair<std::optional<std::string>, int>;

std::string GroupTag(const GroupKey& key) {
  std::string tag = key.first ? "L:" + *key.first : "-";
  tag += "|C:" + std::to_string(key.second);
  return tag;
}

}  // namespace

BatchPlan MakeBatches(std::span<const int> cluster_ids,
                      std::span<const std::optional<std::string>> labels,
                      std::span<const std::string> seed_ids,
                      const BatchingOptions& options) {
  const std::size_t n = cluster_ids.size();
  std::map<GroupKey, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) {
    std::optional<std::string> label = i < labels.size() ? labels[i] : std::nullopt;
    groups[{std::move(label), cluster_ids[i]}].push_back(i);
  }

  BatchPlan plan;
  plan.assignment.resize(n);
  BatchId next_id = 0;
  auto emit = [&](const GroupKey& key, int sub, std::vector<std::size_t> members) {
    Batch batch;
    batch.batch_id = next_id++;
    batch.cluster_id = key.second;
    batch.label = key.first;
    batch.sub_batch_index = sub;
    batch.seed_indices = std::move(members);
    for (std::size_t i : batch.seed_indices) {
      plan.assignment[i] = BatchSlot{batch.cluster_id, sub, batch.batch_id};
    }
    plan.batches.push_back(std::move(batch));
  };

  for (auto& [key, members] : groups) {
    if (options.mode == BatchingMode::kRandomSubbatches) {
      const int b = std::max(options.num_subbatches, 1);
      std::vector<std::vector<std::size_t>> subs(static_cast<std::size_t>(b));
      for (std::size_t i : members) {
        const std::string& id = i < seed_ids.size() ? seed_ids[i] : std::to_string(i);
        CounterRng rng(options.rng_seed, "subbatch", id);
        subs[rng.UniformInt(static_cast<std::uint64_t>(b))].push_back(i);
      }
      for (int r = 0; r < b; ++r) {
        auto& sub = subs[static_cast<std::size_t>(r)];
        if (sub.empty()) {
          ++plan.empty_subbatches;
          continue;
        }
        emit(key, r, std::move(sub));
      }
      continue;
    }

    CounterRng rng(options.rng_seed, "shuffle", GroupTag(key));
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[rng.UniformInt(i)]);
    }
    const auto size = static_cast<std::size_t>(std::max(options.batch_size, 1));
    int sub = 0;
    for (std::size_t start = 0; start < members.size(); start += size) {
      const std::size_t end = std::min(members.size(), start + size);
      std::vector<std::size_t> chunk(members.begin() + static_cast<std::ptrdiff_t>(start),
                                     members.begin() + static_cast<std::ptrdiff_t>(end));
      if (chunk.size() < size &&
          chunk.size() < static_cast<std::size_t>(std::max(options.min_batch_size, 1))) {
        plan.dropped_seeds.insert(plan.dropped_seeds.end(), chunk.begin(), chunk.end());
        continue;
      }
      emit(key, sub++, std::move(chunk));
    }
  }
  std::sort(plan.dropped_seeds.begin(), plan.dropped_seeds.end());
  return plan;
}

}  // namespace dpsynth

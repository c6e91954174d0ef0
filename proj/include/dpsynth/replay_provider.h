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

#ifndef DPSYNTH_REPLAY_PROVIDER_H_
#define DPSYNTH_REPLAY_PROVIDER_H_

#include <istream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpsynth/lm_provider.h"

namespace dpsynth {

// Serves recorded logit vectors keyed by (seed id, generated prefix).
//
// Trace files are JSONL with one record per line:
//   {"seed_id": "...", "prefix": [ids...], "logits": [floats...]}
class ReplayProvider final : public LogitProvider {
 public:
  ReplayProvider() = default;

  static absl::StatusOr<ReplayProvider> FromJsonl(std::istream& in);
  static absl::StatusOr<ReplayProvider> LoadFile(const std::string& path);

  // All recorded vectors must share one length.
  absl::Status Record(std::string seed_id, std::vector<TokenId> prefix,
                      LogitVector logits);

  int vocab_size() const override { return vocab_size_; }
  std::size_t num_records() const { return table_.size(); }

  absl::StatusOr<LogitVector> Logits(
      const SeedRecord& seed, std::span<const TokenId> prefix) const override;

 private:
  using Key = std::pair<std::string, std::vector<TokenId>>;
  int vocab_size_ = 0;
  std::map<Key, LogitVector> table_;
};

}  // namespace dpsynth

#endif  // DPSYNTH_REPLAY_PROVIDER_H_

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

#ifndef DPSYNTH_LM_PROVIDER_H_
#define DPSYNTH_LM_PROVIDER_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpsynth/types.h"

namespace dpsynth {

// One sensitive example.
struct SeedRecord {
  std::string id;
  std::string text;
  std::vector<TokenId> tokens;
  std::optional<std::string> label;
  std::optional<Embedding> embedding;
};

// Next-token logits for a seed followed by a generated prefix. Implementations
// must be safe for concurrent const calls.
class LogitProvider {
 public:
  virtual ~LogitProvider() = default;

  virtual int vocab_size() const = 0;

  // Logits of the raw concatenation seed.tokens ++ prefix.
  virtual absl::StatusOr<LogitVector> Logits(
      const SeedRecord& seed, std::span<const TokenId> prefix) const = 0;
};

}  // namespace dpsynth

#endif  // DPSYNTH_LM_PROVIDER_H_

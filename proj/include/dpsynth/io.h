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

// File formats shared by the command-line pipeline.
//
//   seeds        JSONL {"id", "text", "label"?}
//   embeddings   JSONL {"id", "vec": [floats]}
//   cluster model JSON {"dim", "k", "centers": [[...], ...], ...}
//   corpus       plain text, one sequence per line
//   ledger       JSONL {"batch_id", "position", "token", "gamma"}

#ifndef DPSYNTH_IO_H_
#define DPSYNTH_IO_H_

#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpsynth/clustering.h"
#include "dpsynth/lm_provider.h"
#include "dpsynth/privacy.h"
#include "dpsynth/vocabulary.h"
#include "json.hpp"

namespace dpsynth {

// Reads seeds; tokens are left empty.
absl::StatusOr<std::vector<SeedRecord>> ReadSeedsJsonl(const std::string& path);

// Fills each seed's tokens by tokenizing its text with `vocab`.
absl::Status TokenizeSeeds(std::vector<SeedRecord>& seeds,
                           const Vocabulary& vocab, Tokenization mode);

struct NamedEmbedding {
  std::string id;
  Embedding vec;
};

absl::StatusOr<std::vector<NamedEmbedding>> ReadEmbeddingsJsonl(
    const std::string& path);

absl::StatusOr<std::vector<std::string>> ReadLines(const std::string& path);

// One token per line; line i is token id i.
absl::StatusOr<Vocabulary> ReadVocabularyFile(const std::string& path);

nlohmann::json ClusterModelToJson(const ClusterModel& model);
absl::StatusOr<ClusterModel> ClusterModelFromJson(const nlohmann::json& j);
absl::StatusOr<ClusterModel> LoadClusterModel(const std::string& path);

absl::StatusOr<std::vector<PerTokenCost>> ReadLedgerJsonl(const std::string& path);

absl::StatusOr<nlohmann::json> ReadJsonFile(const std::string& path);
absl::Status WriteTextFile(const std::string& path, const std::string& contents);
// Pretty-printed with a trailing newline.
absl::Status WriteJsonFile(const std::string& path, const nlohmann::json& j);
absl::Status WriteJsonl(const std::string& path,
                        const std::vector<nlohmann::json>& records);

}  // namespace dpsynth

#endif  // DPSYNTH_IO_H_

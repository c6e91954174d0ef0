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

#include "dpsynth/replay_provider.h"

#include <fstream>

#include "absl/strings/str_cat.h"
#include "json.hpp"

namespace dpsynth {

absl::StatusOr<ReplayProvider> ReplayProvider::FromJsonl(std::istream& in) {
  ReplayProvider provider;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      std::vector<double> values = j.at("logits").get<std::vector<double>>();
      LogitVector logits = Eigen::Map<const LogitVector>(
          values.data(), static_cast<Eigen::Index>(values.size()));
      absl::Status s = provider.Record(j.at("seed_id").get<std::string>(),
                                       j.at("prefix").get<std::vector<TokenId>>(),
                                       std::move(logits));
      if (!s.ok()) {
        return absl::DataLossError(absl::StrCat("trace line ", line_no, ": ", s.message()));
      }
    } catch (const nlohmann::json::exception& e) {
      return absl::DataLossError(absl::StrCat("trace line ", line_no, ": ", e.what()));
    }
  }
  return provider;
}

absl::StatusOr<ReplayProvider> ReplayProvider::LoadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open trace file ", path));
  return FromJsonl(in);
}

absl::Status ReplayProvider::Record(std::string seed_id,
                                    std::vector<TokenId> prefix,
                                    LogitVector logits) {
  if (logits.size() == 0) return absl::InvalidArgumentError("empty logit vector");
  if (vocab_size_ == 0) {
    vocab_size_ = static_cast<int>(logits.size());
  } else if (logits.size() != vocab_size_) {
    return absl::InvalidArgumentError(absl::StrCat("logit vector has length ", logits.size(), ", expected ", vocab_size_));
  }
  table_[Key(std::move(seed_id), std::move(prefix))] = std::move(logits);
  return absl::OkStatus();
}

absl::StatusOr<LogitVector> ReplayProvider::Logits(
    const SeedRecord& seed, std::span<const TokenId> prefix) const {
  auto it = table_.find(Key(seed.id, std::vector<TokenId>(prefix.begin(), prefix.end())));
  if (it == table_.end()) {
    return absl::NotFoundError(absl::StrCat("no recorded logits for seed '", seed.id, "' at prefix length ", prefix.size()));
  }
  return it->second;
}

}  // namespace dpsynth

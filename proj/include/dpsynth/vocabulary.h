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

#ifndef DPSYNTH_VOCABULARY_H_
#define DPSYNTH_VOCABULARY_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "absl/status/statusor.h"
#include "dpsynth/types.h"

namespace dpsynth {

enum class Tokenization { kWhitespace, kCharacter };

absl::StatusOr<Tokenization> ParseTokenization(std::string_view name);

// Splits on ASCII whitespace, or into single bytes (line breaks dropped).
std::vector<std::string> Tokenize(std::string_view text, Tokenization mode);

// Bijective map between token strings and dense ids. EOS is always id 0.
// BOS is not an id: it only pads n-gram contexts and cannot be added.
class Vocabulary {
 public:
  static constexpr TokenId kEos = 0;
  static constexpr std::string_view kEosToken = "</s>";
  static constexpr std::string_view kBosToken = "<s>";
  static constexpr std::string_view kUnkToken = "<unk>";

  explicit Vocabulary(bool with_unk = false);

  // Sorted distinct tokens of `corpus`, after the reserved entries.
  static Vocabulary FromCorpus(
      std::span<const std::vector<std::string>> corpus, bool with_unk);

  // Returns the id of `token`, adding it if new.
  absl::StatusOr<TokenId> Add(std::string_view token);

  std::optional<TokenId> Find(std::string_view token) const;
  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::optional<TokenId> unk() const { return unk_; }
  int size() const { return static_cast<int>(tokens_.size()); }
  std::span<const std::string> tokens() const { return tokens_; }

  // Out-of-vocabulary tokens map to <unk> when present, otherwise fail.
  absl::StatusOr<std::vector<TokenId>> Encode(
      std::span<const std::string> tokens) const;
  // Drops EOS; joins with spaces for whitespace tokenization.
  std::string Decode(std::span<const TokenId> ids, Tokenization mode) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  std::optional<TokenId> unk_;
};

}  // namespace dpsynth

#endif  // DPSYNTH_VOCABULARY_H_

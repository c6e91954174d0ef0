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

#include "dpsynth/vocabulary.h"

#include <algorithm>
#include <cctype>
#include <set>

#include "absl/strings/str_cat.h"

namespace dpsynth {

absl::StatusOr<Tokenization> ParseTokenization(std::string_view name) {
  if (name == "whitespace") return Tokenization::kWhitespace;
  if (name == "char") return Tokenization::kCharacter;
  return absl::InvalidArgumentError(absl::StrCat("unknown tokenization '", std::string(name), "'"));
}

std::vector<std::string> Tokenize(std::string_view text, Tokenization mode) {
  std::vector<std::string> out;
  if (mode == Tokenization::kCharacter) {
    for (char ch : text) {
      if (ch != '\n' && ch != '\r') out.emplace_back(1, ch);
    }
    return out;
  }
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

Vocabulary::Vocabulary(bool with_unk) {
  tokens_.emplace_back(kEosToken);
  index_.emplace(std::string(kEosToken), kEos);
  if (with_unk) {
    unk_ = static_cast<TokenId>(tokens_.size());
    tokens_.emplace_back(kUnkToken);
    index_.emplace(std::string(kUnkToken), *unk_);
  }
}

Vocabulary Vocabulary::FromCorpus(
    std::span<const std::vector<std::string>> corpus, bool with_unk) {
  Vocabulary vocab(with_unk);
  std::set<std::string> distinct;
  for (const auto& seq : corpus) distinct.insert(seq.begin(), seq.end());
  for (const std::string& token : distinct) {
    if (token == kBosToken || vocab.Find(token)) continue;
    (void)vocab.Add(token);
  }
  return vocab;
}

absl::StatusOr<TokenId> Vocabulary::Add(std::string_view token) {
  if (token == kBosToken) {
    return absl::InvalidArgumentError("BOS is reserved and has no token id");
  }
  if (std::optional<TokenId> id = Find(token)) return *id;
  const auto id = static_cast<TokenId>(tokens_.size());
  tokens_.emplace_back(token);
  index_.emplace(std::string(token), id);
  return id;
}

std::optional<TokenId> Vocabulary::Find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

absl::StatusOr<std::vector<TokenId>> Vocabulary::Encode(
    std::span<const std::string> tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const std::string& token : tokens) {
    if (std::optional<TokenId> id = Find(token)) {
      ids.push_back(*id);
    } else if (unk_) {
      ids.push_back(*unk_);
    } else {
      return absl::NotFoundError(absl::StrCat("out-of-vocabulary token '", token, "'"));
    }
  }
  return ids;
}

std::string Vocabulary::Decode(std::span<const TokenId> ids,
                               Tokenization mode) const {
  std::string out;
  for (TokenId id : ids) {
    if (id == kEos || id < 0 || id >= size()) continue;
    if (mode == Tokenization::kWhitespace && !out.empty()) out += ' ';
    out += tokens_[static_cast<std::size_t>(id)];
  }
  return out;
}

}  // namespace dpsynth

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

#include "dpsynth/ngram_model.h"

#include <cmath>

#include "absl/strings/str_cat.h"

namespace dpsynth {
namespace {

// Last `width` tokens of seed ++ prefix, left-padded with BOS markers.
std::vector<TokenId> ContextKey(std::span<const TokenId> seed,
                                std::span<const TokenId> prefix, int width) {
  std::vector<TokenId> key(static_cast<std::size_t>(width), NGramModel::kBosMarker);
  std::size_t filled = 0;
  for (auto it = prefix.rbegin(); it != prefix.rend() && filled < key.size(); ++it) {
    key[key.size() - 1 - filled++] = *it;
  }
  for (auto it = seed.rbegin(); it != seed.rend() && filled < key.size(); ++it) {
    key[key.size() - 1 - filled++] = *it;
  }
  return key;
}

absl::Status CheckIds(std::span<const TokenId> ids, int vocab_size) {
  for (TokenId id : ids) {
    if (id < 0 || id >= vocab_size) {
      return absl::OutOfRangeError(absl::StrCat("token id ", id, " outside vocabulary of size ", vocab_size));
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<NGramModel> NGramModel::Train(
    std::span<const std::vector<TokenId>> corpus, int vocab_size, int order,
    double smoothing) {
  if (order < 1) return absl::InvalidArgumentError("n-gram order must be >= 1");
  if (!(smoothing > 0.0) || !std::isfinite(smoothing)) {
    return absl::InvalidArgumentError("smoothing must be positive and finite");
  }
  if (vocab_size < 1) return absl::InvalidArgumentError("vocabulary is empty");
  if (corpus.empty()) return absl::InvalidArgumentError("training corpus is empty");

  NGramModel model(vocab_size, order, smoothing);
  const int width = order - 1;
  std::vector<TokenId> padded;
  for (const std::vector<TokenId>& seq : corpus) {
    if (absl::Status s = CheckIds(seq, vocab_size); !s.ok()) return s;
    padded.assign(static_cast<std::size_t>(width), kBosMarker);
    padded.insert(padded.end(), seq.begin(), seq.end());
    padded.push_back(Vocabulary::kEos);
    for (std::size_t i = static_cast<std::size_t>(width); i < padded.size(); ++i) {
      std::vector<TokenId> key(padded.begin() + static_cast<std::ptrdiff_t>(i) - width,
                               padded.begin() + static_cast<std::ptrdiff_t>(i));
      ContextCounts& entry = model.table_[std::move(key)];
      if (entry.counts.empty()) entry.counts.assign(static_cast<std::size_t>(vocab_size), 0);
      ++entry.counts[static_cast<std::size_t>(padded[i])];
      ++entry.total;
    }
  }
  return model;
}

LogitVector NGramModel::LogitsForKey(const std::vector<TokenId>& key) const {
  const double v = static_cast<double>(vocab_size_);
  auto it = table_.find(key);
  if (it == table_.end()) {
    return LogitVector::Constant(vocab_size_, -std::log(v));
  }
  const ContextCounts& entry = it->second;
  const double log_denominator =
      std::log(static_cast<double>(entry.total) + smoothing_ * v);
  LogitVector out(vocab_size_);
  for (int y = 0; y < vocab_size_; ++y) {
    out(y) = std::log(static_cast<double>(entry.counts[static_cast<std::size_t>(y)]) + smoothing_) -
             log_denominator;
  }
  return out;
}

absl::StatusOr<LogitVector> NGramModel::Logits(
    std::span<const TokenId> context) const {
  if (absl::Status s = CheckIds(context, vocab_size_); !s.ok()) return s;
  return LogitsForKey(ContextKey({}, context, order_ - 1));
}

absl::StatusOr<LogitVector> NGramModel::Logits(
    const SeedRecord& seed, std::span<const TokenId> prefix) const {
  if (absl::Status s = CheckIds(seed.tokens, vocab_size_); !s.ok()) return s;
  if (absl::Status s = CheckIds(prefix, vocab_size_); !s.ok()) return s;
  return LogitsForKey(ContextKey(seed.tokens, prefix, order_ - 1));
}

absl::StatusOr<Vector<double>> NGramModel::Probabilities(
    std::span<const TokenId> context) const {
  absl::StatusOr<LogitVector> logits = Logits(context);
  if (!logits.ok()) return logits.status();
  return Vector<double>(logits->array().exp());
}

}  // namespace dpsynth

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

#ifndef DPSYNTH_NGRAM_MODEL_H_
#define DPSYNTH_NGRAM_MODEL_H_

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "dpsynth/lm_provider.h"
#include "dpsynth/types.h"
#include "dpsynth/vocabulary.h"

namespace dpsynth {

// Add-lambda smoothed n-gram model over token ids [0, vocab_size).
//
// Each training sequence is padded with order-1 BOS markers on the left and
// an EOS on the right; every window of length `order` is counted. The
// conditional distribution for a context is
//   P(y | ctx) = (count(ctx, y) + lambda) / (count(ctx) + lambda * V).
// Immutable after training.
class NGramModel final : public LogitProvider {
 public:
  static constexpr TokenId kBosMarker = -1;

  static absl::StatusOr<NGramModel> Train(
      std::span<const std::vector<TokenId>> corpus, int vocab_size, int order,
      double smoothing);

  int order() const { return order_; }
  double smoothing() const { return smoothing_; }
  int vocab_size() const override { return vocab_size_; }

  // Log conditional probabilities given the last order-1 tokens of `context`.
  absl::StatusOr<LogitVector> Logits(std::span<const TokenId> context) const;
  absl::StatusOr<LogitVector> Logits(
      const SeedRecord& seed, std::span<const TokenId> prefix) const override;

  // Exact conditional probabilities for `context`.
  absl::StatusOr<Vector<double>> Probabilities(
      std::span<const TokenId> context) const;

 private:
  struct ContextCounts {
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;
  };

  NGramModel(int vocab_size, int order, double smoothing)
      : vocab_size_(vocab_size), order_(order), smoothing_(smoothing) {}

  LogitVector LogitsForKey(const std::vector<TokenId>& key) const;

  int vocab_size_;
  int order_;
  double smoothing_;
  std::map<std::vector<TokenId>, ContextCounts> table_;
};

}  // namespace dpsynth

#endif  // DPSYNTH_NGRAM_MODEL_H_

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

// Batched private token generation.
//
// For every batch, tokens are produced one at a time: each seed's logits for
// seed ++ generated-so-far are clipped and aggregated (mean or component-wise
// median), and the next token is drawn from softmax(aggregate / temperature).
// Every emitted token is charged to the privacy ledger as it is drawn.

#ifndef DPSYNTH_ENGINE_H_
#define DPSYNTH_ENGINE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpsynth/batching.h"
#include "dpsynth/lm_provider.h"
#include "dpsynth/privacy.h"
#include "dpsynth/rng.h"
#include "dpsynth/types.h"
#include "dpsynth/vocabulary.h"

namespace dpsynth {

inline constexpr double kDefaultTemperature = 1.5;
inline constexpr double kDefaultMeanClip = 9.0;
inline constexpr double kDefaultMedianClip = 6.0;

struct GenerationConfig {
  AggregationMode mode = AggregationMode::kMedian;
  double temperature = kDefaultTemperature;
  double clip = kDefaultMedianClip;
  int max_tokens = 32;
  std::uint64_t rng_seed = 0;
  bool stop_at_eos = true;
  TokenId eos = Vocabulary::kEos;

  static GenerationConfig Defaults(AggregationMode mode);
  absl::Status Validate() const;
};

struct SyntheticExample {
  BatchId batch_id = 0;
  int cluster_id = 0;
  std::optional<std::string> label;
  std::vector<TokenId> tokens;
  std::vector<double> per_token_gamma;
};

// Aggregated next-token logits for one step, with the cost of emitting each
// possible token from them.
struct StepDistribution {
  LogitVector aggregate;
  // Median mode only.
  std::optional<MedianTriple<double>> triple;
  // Mean mode only: constant per-token cost.
  double mean_token_epsilon = 0.0;

  double CostOf(TokenId token, double temperature) const;
};

// Builds the logit set for `seeds` at `prefix` and aggregates it.
absl::StatusOr<StepDistribution> NextTokenDistribution(
    std::span<const SeedRecord* const> seeds, std::span<const TokenId> prefix,
    const LogitProvider& provider, const GenerationConfig& config);

// Draws from softmax(logits / temperature) by Gumbel-max.
TokenId SampleToken(const LogitVector& logits, double temperature,
                    CounterRng& rng);

// Generates one synthetic example for a batch, using the RNG stream keyed by
// (config.rng_seed, batch_id).
absl::StatusOr<SyntheticExample> GenerateBatch(
    std::span<const SeedRecord* const> seeds, const LogitProvider& provider,
    const GenerationConfig& config, BatchId batch_id = 0);

// Per-token audit of a fixed output: the cost charged at each position and
// the log-probability the mechanism assigns to the token there.
struct TracedToken {
  TokenId token = 0;
  double gamma = 0.0;
  double log_probability = 0.0;
};

absl::StatusOr<std::vector<TracedToken>> TraceSequence(
    std::span<const SeedRecord* const> seeds, const LogitProvider& provider,
    const GenerationConfig& config, std::span<const TokenId> tokens);

struct GenerationResult {
  std::vector<SyntheticExample> examples;
  PrivacyLedger ledger;
  // Batches refused (empty, or a single seed in mean mode), by batch id.
  std::vector<BatchId> skipped_batches;
};

// Runs GenerateBatch over every batch of `plan` on up to `jobs` threads.
// Output and ledger are identical for any `jobs` value and any processing
// order. clustering_epsilon is copied into the ledger.
absl::StatusOr<GenerationResult> GenerateAll(
    std::span<const SeedRecord> dataset, const BatchPlan& plan,
    const LogitProvider& provider, const GenerationConfig& config,
    double clustering_epsilon = 0.0, int jobs = 1);

}  // namespace dpsynth

#endif  // DPSYNTH_ENGINE_H_

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

#include "dpsynth/engine.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"
#include "dpsynth/aggregation.h"
#include "parallel.h"

namespace dpsynth {

GenerationConfig GenerationConfig::Defaults(AggregationMode mode) {
  GenerationConfig config;
  config.mode = mode;
  config.clip = mode == AggregationMode::kMean ? kDefaultMeanClip : kDefaultMedianClip;
  return config;
}

absl::Status GenerationConfig::Validate() const {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    return absl::InvalidArgumentError("temperature must be positive and finite");
  }
  if (!(clip > 0.0) || !std::isfinite(clip)) {
    return absl::InvalidArgumentError("clip bound must be positive and finite");
  }
  if (max_tokens < 1) return absl::InvalidArgumentError("max_tokens must be >= 1");
  return absl::OkStatus();
}

double StepDistribution::CostOf(TokenId token, double temperature) const {
  if (triple) return TokenCostFromTriple(*triple, token, temperature).gamma;
  return mean_token_epsilon;
}

absl::StatusOr<StepDistribution> NextTokenDistribution(
    std::span<const SeedRecord* const> seeds, std::span<const TokenId> prefix,
    const LogitProvider& provider, const GenerationConfig& config) {
  if (seeds.empty()) return absl::FailedPreconditionError("empty batch");
  const int vocab = provider.vocab_size();
  LogitSet set(vocab, static_cast<Eigen::Index>(seeds.size()));
  for (std::size_t j = 0; j < seeds.size(); ++j) {
    absl::StatusOr<LogitVector> logits = provider.Logits(*seeds[j], prefix);
    if (!logits.ok()) return logits.status();
    if (logits->size() != vocab) {
      return absl::InternalError(absl::StrCat("provider returned ", logits->size(), " logits for a vocabulary of ", vocab));
    }
    set.col(static_cast<Eigen::Index>(j)) = *logits;
  }

  StepDistribution step;
  if (config.mode == AggregationMode::kMean) {
    absl::StatusOr<double> eps = MeanTokenEpsilon(static_cast<int>(seeds.size()), config.clip, config.temperature);
    if (!eps.ok()) return eps.status();
    absl::StatusOr<LogitVector> mean = AggregateMean(set, config.clip);
    if (!mean.ok()) return mean.status();
    step.aggregate = *std::move(mean);
    step.mean_token_epsilon = *eps;
    return step;
  }
  absl::StatusOr<MedianTriple<double>> triple = ComputeMedianTriple(set, config.clip);
  if (!triple.ok()) return triple.status();
  step.aggregate = triple->mid;
  step.triple = *std::move(triple);
  return step;
}

TokenId SampleToken(const LogitVector& logits, double temperature,
                    CounterRng& rng) {
  // argmax(z / tau + G) == argmax(z + tau * G); the second form cannot
  // overflow as tau -> 0.
  TokenId best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (Eigen::Index y = 0; y < logits.size(); ++y) {
    const double score = logits(y) + temperature * rng.Gumbel();
    if (score > best_score) {
      best_score = score;
      best = static_cast<TokenId>(y);
    }
  }
  return best;
}

absl::StatusOr<SyntheticExample> GenerateBatch(
    std::span<const SeedRecord* const> seeds, const LogitProvider& provider,
    const GenerationConfig& config, BatchId batch_id) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  SyntheticExample example;
  example.batch_id = batch_id;
  CounterRng rng(config.rng_seed, "generate", static_cast<std::uint64_t>(batch_id));
  for (int t = 0; t < config.max_tokens; ++t) {
    absl::StatusOr<StepDistribution> step =
        NextTokenDistribution(seeds, example.tokens, provider, config);
    if (!step.ok()) return step.status();
    const TokenId token = SampleToken(step->aggregate, config.temperature, rng);
    example.tokens.push_back(token);
    example.per_token_gamma.push_back(step->CostOf(token, config.temperature));
    if (config.stop_at_eos && token == config.eos) break;
  }
  return example;
}

absl::StatusOr<std::vector<TracedToken>> TraceSequence(
    std::span<const SeedRecord* const> seeds, const LogitProvider& provider,
    const GenerationConfig& config, std::span<const TokenId> tokens) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  std::vector<TracedToken> trace;
  trace.reserve(tokens.size());
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    absl::StatusOr<StepDistribution> step =
        NextTokenDistribution(seeds, tokens.first(t), provider, config);
    if (!step.ok()) return step.status();
    const TokenId token = tokens[t];
    if (token < 0 || token >= step->aggregate.size()) {
      return absl::OutOfRangeError(absl::StrCat("token id ", token, " outside vocabulary"));
    }
    const double inv_tau = 1.0 / config.temperature;
    const double log_z = internal::LogSumExp(step->aggregate, inv_tau);
    trace.push_back({token, step->CostOf(token, config.temperature),
                     step->aggregate(token) * inv_tau - log_z});
  }
  return trace;
}

absl::StatusOr<GenerationResult> GenerateAll(
    std::span<const SeedRecord> dataset, const BatchPlan& plan,
    const LogitProvider& provider, const GenerationConfig& config,
    double clustering_epsilon, int jobs) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  const std::size_t m = plan.batches.size();
  for (const Batch& batch : plan.batches) {
    for (std::size_t i : batch.seed_indices) {
      if (i >= dataset.size()) {
        return absl::OutOfRangeError(absl::StrCat("batch ", batch.batch_id, " references seed ", i, " of ", dataset.size()));
      }
    }
  }

  const std::size_t min_size = config.mode == AggregationMode::kMean ? 2 : 1;
  std::vector<std::optional<SyntheticExample>> slots(m);
  std::vector<absl::Status> errors(m);
  internal::ParallelFor(m, jobs, [&](std::size_t begin, std::size_t end) {
    std::vector<const SeedRecord*> seeds;
    for (std::size_t b = begin; b < end; ++b) {
      const Batch& batch = plan.batches[b];
      if (batch.seed_indices.size() < min_size) continue;
      seeds.clear();
      for (std::size_t i : batch.seed_indices) seeds.push_back(&dataset[i]);
      absl::StatusOr<SyntheticExample> example =
          GenerateBatch(seeds, provider, config, batch.batch_id);
      if (!example.ok()) {
        errors[b] = example.status();
        continue;
      }
      example->cluster_id = batch.cluster_id;
      example->label = batch.label;
      slots[b] = *std::move(example);
    }
  });

  GenerationResult result{{}, PrivacyLedger(config.mode, config.temperature, config.clip), {}};
  result.ledger.set_clustering_epsilon(clustering_epsilon);
  for (std::size_t b = 0; b < m; ++b) {
    if (!errors[b].ok()) return errors[b];
    if (!slots[b]) {
      result.skipped_batches.push_back(plan.batches[b].batch_id);
      continue;
    }
    result.examples.push_back(*std::move(slots[b]));
  }
  std::sort(result.examples.begin(), result.examples.end(),
            [](const SyntheticExample& a, const SyntheticExample& b) {
              return a.batch_id < b.batch_id;
            });
  std::sort(result.skipped_batches.begin(), result.skipped_batches.end());
  for (const SyntheticExample& example : result.examples) {
    for (std::size_t t = 0; t < example.tokens.size(); ++t) {
      result.ledger.Append({example.batch_id, static_cast<int>(t + 1),
                            example.tokens[t], example.per_token_gamma[t]});
    }
  }
  return result;
}

}  // namespace dpsynth

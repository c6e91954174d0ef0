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
#include <map>
#include <string>
#include <vector>

#include "dpsynth/batching.h"
#include "dpsynth/ngram_model.h"
#include "dpsynth/replay_provider.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "testing/oracles.h"

namespace dpsynth {
namespace {

using ::testing::Each;
using ::testing::ElementsAre;

SeedRecord Seed(std::string id, std::vector<TokenId> tokens = {}) {
  SeedRecord seed;
  seed.id = std::move(id);
  seed.tokens = std::move(tokens);
  return seed;
}

std::vector<const SeedRecord*> Pointers(const std::vector<SeedRecord>& seeds) {
  std::vector<const SeedRecord*> out;
  for (const SeedRecord& s : seeds) out.push_back(&s);
  return out;
}

LogitVector Vec(std::initializer_list<double> v) {
  LogitVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Two seeds over a two-token vocabulary, recorded for every prefix of
// length at most one.
ReplayProvider TwoSeedTrace() {
  ReplayProvider p;
  EXPECT_TRUE(p.Record("s1", {}, Vec({0.0, 1.0})).ok());
  EXPECT_TRUE(p.Record("s2", {}, Vec({0.5, -0.5})).ok());
  EXPECT_TRUE(p.Record("s1", {0}, Vec({2.0, -1.0})).ok());
  EXPECT_TRUE(p.Record("s2", {0}, Vec({0.0, 0.25})).ok());
  EXPECT_TRUE(p.Record("s1", {1}, Vec({-0.5, 0.5})).ok());
  EXPECT_TRUE(p.Record("s2", {1}, Vec({1.5, 1.0})).ok());
  return p;
}

NGramModel SmallModel() {
  const std::vector<std::vector<TokenId>> corpus = {
      {1, 2, 3, 1}, {2, 3, 4}, {1, 1, 2}, {4, 3, 2, 1}, {3, 3, 1, 2}};
  return *NGramModel::Train(corpus, 5, 2, 0.5);
}

GenerationConfig MedianConfig(int max_tokens, std::uint64_t seed) {
  GenerationConfig config = GenerationConfig::Defaults(AggregationMode::kMedian);
  config.max_tokens = max_tokens;
  config.rng_seed = seed;
  return config;
}

TEST(GenerationConfigTest, DefaultsAndValidation) {
  EXPECT_EQ(GenerationConfig::Defaults(AggregationMode::kMean).clip, 9.0);
  EXPECT_EQ(GenerationConfig::Defaults(AggregationMode::kMedian).clip, 6.0);
  EXPECT_EQ(GenerationConfig::Defaults(AggregationMode::kMedian).temperature, 1.5);
  GenerationConfig config;
  EXPECT_TRUE(config.Validate().ok());
  config.temperature = 0.0;
  EXPECT_FALSE(config.Validate().ok());
  config = GenerationConfig();
  config.clip = -1.0;
  EXPECT_FALSE(config.Validate().ok());
  config = GenerationConfig();
  config.max_tokens = 0;
  EXPECT_FALSE(config.Validate().ok());
}

// Frozen from an independent script: same counter RNG, Gumbel-max over the
// median-aggregated clipped logits (c = 3, tau = 1), costs in 50 digits.
TEST(GenerateBatchTest, MatchesScriptedTrace) {
  const ReplayProvider provider = TwoSeedTrace();
  const std::vector<SeedRecord> seeds = {Seed("s1"), Seed("s2")};
  const auto ptrs = Pointers(seeds);
  struct Expected {
    std::uint64_t rng_seed;
    std::vector<TokenId> tokens;
    double second_gamma;
  };
  const std::vector<Expected> cases = {
      {0, {0, 0}, 0.71773452895829738256},
      {1, {1, 0}, 0.86720776068110174721},
      {6, {0, 1}, 2.0927345289582973826},
      {8, {1, 1}, 0.61720776068110174721},
  };
  for (const Expected& want : cases) {
    GenerationConfig config = MedianConfig(2, want.rng_seed);
    config.clip = 3.0;
    config.temperature = 1.0;
    config.stop_at_eos = false;
    const SyntheticExample got = *GenerateBatch(ptrs, provider, config);
    EXPECT_EQ(got.tokens, want.tokens) << "rng_seed " << want.rng_seed;
    ASSERT_EQ(got.per_token_gamma.size(), 2u);
    EXPECT_NEAR(got.per_token_gamma[0], 1.0, 1e-15);
    EXPECT_NEAR(got.per_token_gamma[1], want.second_gamma, 1e-14);
  }
}

TEST(GenerateBatchTest, IdenticalSeedsCostNothing) {
  const NGramModel model = SmallModel();
  const std::vector<SeedRecord> seeds(5, Seed("same", {1, 2}));
  for (std::uint64_t r = 0; r < 20; ++r) {
    const SyntheticExample example = *GenerateBatch(Pointers(seeds), model, MedianConfig(12, r));
    EXPECT_THAT(example.per_token_gamma, Each(0.0));
    EXPECT_EQ(example.per_token_gamma.size(), example.tokens.size());
  }
}

TEST(GenerateBatchTest, IdenticalSeedsSampleLikeOneSeed) {
  const NGramModel model = SmallModel();
  const std::vector<SeedRecord> many(4, Seed("x", {3}));
  const std::vector<SeedRecord> one(1, Seed("x", {3}));
  for (std::uint64_t r = 0; r < 20; ++r) {
    EXPECT_EQ(GenerateBatch(Pointers(many), model, MedianConfig(10, r))->tokens,
              GenerateBatch(Pointers(one), model, MedianConfig(10, r))->tokens);
  }
}

TEST(GenerateBatchTest, TinyTemperatureIsGreedy) {
  const NGramModel model = SmallModel();
  const std::vector<SeedRecord> seeds = {Seed("a", {1}), Seed("b", {2}), Seed("c", {4})};
  GenerationConfig config = MedianConfig(8, 3);
  config.temperature = 1e-12;
  config.stop_at_eos = false;
  const SyntheticExample example = *GenerateBatch(Pointers(seeds), model, config);
  std::vector<TokenId> prefix;
  for (TokenId token : example.tokens) {
    const StepDistribution step = *NextTokenDistribution(Pointers(seeds), prefix, model, config);
    // Clipping often ties several tokens at the top; any of them is greedy.
    EXPECT_EQ(step.aggregate(token), step.aggregate.maxCoeff());
    prefix.push_back(token);
  }
}

TEST(GenerateBatchTest, StopsAtEosAndChargesIt) {
  ReplayProvider provider;
  ASSERT_TRUE(provider.Record("s", {}, Vec({50.0, 0.0})).ok());
  const std::vector<SeedRecord> seeds = {Seed("s"), Seed("s")};
  const SyntheticExample example = *GenerateBatch(Pointers(seeds), provider, MedianConfig(5, 0));
  EXPECT_THAT(example.tokens, ElementsAre(Vocabulary::kEos));
  EXPECT_EQ(example.per_token_gamma.size(), 1u);
}

TEST(GenerateBatchTest, SeedOrderDoesNotMatter) {
  const NGramModel model = SmallModel();
  std::vector<SeedRecord> seeds = {Seed("a", {1}), Seed("b", {2, 3}), Seed("c", {4}), Seed("d", {3})};
  const SyntheticExample a = *GenerateBatch(Pointers(seeds), model, MedianConfig(10, 5), 4);
  std::reverse(seeds.begin(), seeds.end());
  const SyntheticExample b = *GenerateBatch(Pointers(seeds), model, MedianConfig(10, 5), 4);
  EXPECT_EQ(a.tokens, b.tokens);
  EXPECT_EQ(a.per_token_gamma, b.per_token_gamma);
}

TEST(GenerateBatchTest, MeanModeCostsAndRefusals) {
  const NGramModel model = SmallModel();
  GenerationConfig config = GenerationConfig::Defaults(AggregationMode::kMean);
  config.max_tokens = 6;
  config.stop_at_eos = false;
  const std::vector<SeedRecord> seeds = {Seed("a", {1}), Seed("b", {2}), Seed("c", {3})};
  const SyntheticExample example = *GenerateBatch(Pointers(seeds), model, config);
  EXPECT_EQ(example.tokens.size(), 6u);
  EXPECT_THAT(example.per_token_gamma, Each(*MeanTokenEpsilon(3, 9.0, 1.5)));

  const std::vector<SeedRecord> single = {Seed("a", {1})};
  EXPECT_FALSE(GenerateBatch(Pointers(single), model, config).ok());
  EXPECT_FALSE(GenerateBatch({}, model, config).ok());
}

TEST(TraceSequenceTest, MatchesOracleProbabilities) {
  const ReplayProvider provider = TwoSeedTrace();
  const std::vector<SeedRecord> seeds = {Seed("s1"), Seed("s2")};
  GenerationConfig config = MedianConfig(2, 0);
  config.clip = 3.0;
  config.temperature = 0.7;
  config.stop_at_eos = false;
  const std::vector<TokenId> tokens = {1, 0};
  const std::vector<TracedToken> traced = *TraceSequence(Pointers(seeds), provider, config, tokens);
  ASSERT_EQ(traced.size(), 2u);
  // Step one: clipped columns (2, 3) and (3, 2), median (2.5, 2.5).
  EXPECT_NEAR(traced[0].log_probability, std::log(0.5), 1e-14);
  // Step two after token 1: clipped (2, 3) and (3, 2.5).
  const testing::RealVec mid = {2.5, 2.75};
  EXPECT_NEAR(traced[1].log_probability,
              std::log(static_cast<double>(testing::OracleSoftmaxProb(mid, 0, 0.7))), 1e-14);
  EXPECT_EQ(traced[1].token, 0);
}

BatchPlan PlanFor(const std::vector<SeedRecord>& dataset, int batch_size) {
  std::vector<int> clusters(dataset.size());
  std::vector<std::optional<std::string>> labels(dataset.size());
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    clusters[i] = static_cast<int>(i % 3);
    ids.push_back(dataset[i].id);
  }
  return MakeBatches(clusters, labels, ids, {.batch_size = batch_size, .rng_seed = 1});
}

std::vector<SeedRecord> Dataset(int n) {
  std::vector<SeedRecord> out;
  for (int i = 0; i < n; ++i) {
    out.push_back(Seed("seed" + std::to_string(i), {static_cast<TokenId>(1 + i % 4), static_cast<TokenId>(1 + (i / 4) % 4)}));
  }
  return out;
}

TEST(GenerateAllTest, BatchOrderAndJobsDoNotMatter) {
  const NGramModel model = SmallModel();
  const std::vector<SeedRecord> dataset = Dataset(60);
  const BatchPlan plan = PlanFor(dataset, 4);
  BatchPlan reversed = plan;
  std::reverse(reversed.batches.begin(), reversed.batches.end());
  const GenerationConfig config = MedianConfig(10, 99);
  const GenerationResult a = *GenerateAll(dataset, plan, model, config, 0.1, 1);
  const GenerationResult b = *GenerateAll(dataset, reversed, model, config, 0.1, 1);
  const GenerationResult c = *GenerateAll(dataset, plan, model, config, 0.1, 8);
  ASSERT_EQ(a.examples.size(), plan.batches.size());
  for (const GenerationResult* other : {&b, &c}) {
    ASSERT_EQ(a.examples.size(), other->examples.size());
    for (std::size_t i = 0; i < a.examples.size(); ++i) {
      EXPECT_EQ(a.examples[i].batch_id, other->examples[i].batch_id);
      EXPECT_EQ(a.examples[i].tokens, other->examples[i].tokens);
      EXPECT_EQ(a.examples[i].per_token_gamma, other->examples[i].per_token_gamma);
    }
    ASSERT_EQ(a.ledger.costs().size(), other->ledger.costs().size());
    for (std::size_t i = 0; i < a.ledger.costs().size(); ++i) {
      EXPECT_EQ(a.ledger.costs()[i], other->ledger.costs()[i]);
    }
  }
}

TEST(GenerateAllTest, LedgerMatchesOutputs) {
  const NGramModel model = SmallModel();
  const std::vector<SeedRecord> dataset = Dataset(45);
  const BatchPlan plan = PlanFor(dataset, 5);
  const GenerationResult result = *GenerateAll(dataset, plan, model, MedianConfig(9, 4), 0.1, 2);
  std::map<BatchId, double> sums;
  std::size_t tokens = 0;
  for (const SyntheticExample& example : result.examples) {
    ASSERT_EQ(example.tokens.size(), example.per_token_gamma.size());
    tokens += example.tokens.size();
    for (double g : example.per_token_gamma) {
      EXPECT_GE(g, 0.0);
      sums[example.batch_id] += g;
    }
  }
  EXPECT_EQ(result.ledger.costs().size(), tokens);
  double generation = 0.0;
  for (const auto& [_, sum] : sums) generation = std::max(generation, sum);
  const PrivacyReport report = LedgerReport(result.ledger);
  EXPECT_DOUBLE_EQ(report.generation_epsilon, generation);
  EXPECT_DOUBLE_EQ(report.total_epsilon, generation + 0.1);
}

TEST(GenerateAllTest, NoSeedsNoOutput) {
  const NGramModel model = SmallModel();
  const std::vector<SeedRecord> dataset;
  const GenerationResult result = *GenerateAll(dataset, PlanFor(dataset, 4), model, MedianConfig(5, 0));
  EXPECT_TRUE(result.examples.empty());
  EXPECT_EQ(LedgerReport(result.ledger).total_epsilon, 0.0);
}

TEST(GenerateAllTest, MeanModeSkipsSingletons) {
  const NGramModel model = SmallModel();
  const std::vector<SeedRecord> dataset = Dataset(3);
  std::vector<std::optional<std::string>> labels(3);
  const std::vector<int> clusters = {0, 1, 1};
  const std::vector<std::string> ids = {"seed0", "seed1", "seed2"};
  const BatchPlan plan = MakeBatches(clusters, labels, ids, {.batch_size = 4, .min_batch_size = 1});
  GenerationConfig config = GenerationConfig::Defaults(AggregationMode::kMean);
  config.max_tokens = 3;
  const GenerationResult result = *GenerateAll(dataset, plan, model, config);
  EXPECT_EQ(result.examples.size(), 1u);
  EXPECT_EQ(result.skipped_batches.size(), 1u);
}

TEST(SampleTokenTest, FrequenciesFollowSoftmax) {
  const LogitVector logits = Vec({1.0, 0.0, -0.5, 2.0});
  const testing::RealVec z = {1.0, 0.0, -0.5, 2.0};
  CounterRng rng(12345);
  constexpr int kDraws = 20000;
  std::vector<int> counts(4, 0);
  for (int i = 0; i < kDraws; ++i) ++counts[static_cast<std::size_t>(SampleToken(logits, 1.5, rng))];
  for (std::size_t y = 0; y < 4; ++y) {
    const double p = static_cast<double>(testing::OracleSoftmaxProb(z, y, 1.5));
    const double sigma = std::sqrt(kDraws * p * (1 - p));
    EXPECT_LE(std::abs(counts[y] - kDraws * p), 4 * sigma) << "token " << y;
  }
}

}  // namespace
}  // namespace dpsynth

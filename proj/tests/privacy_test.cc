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

#include "dpsynth/privacy.h"

#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "dpsynth/aggregation.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "json.hpp"

namespace dpsynth {
namespace {

using ::testing::ElementsAre;
using ::testing::HasSubstr;

MedianTriple<double> Triple(std::vector<double> left, std::vector<double> mid,
                            std::vector<double> right) {
  MedianTriple<double> t;
  t.left = Eigen::Map<const LogitVector>(left.data(), static_cast<Eigen::Index>(left.size()));
  t.mid = Eigen::Map<const LogitVector>(mid.data(), static_cast<Eigen::Index>(mid.size()));
  t.right = Eigen::Map<const LogitVector>(right.data(), static_cast<Eigen::Index>(right.size()));
  return t;
}

LogitSet RandomSet(std::mt19937_64& gen, int vocab, int k, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  LogitSet set(vocab, k);
  for (Eigen::Index i = 0; i < set.size(); ++i) set.data()[i] = normal(gen);
  return set;
}

TEST(TokenCostTest, WorkedTwoTokenExample) {
  // Columns a = {-1, 0, 1}, b = {0.5, 0.5, 0.5}; query a at tau = 1.
  const TokenCost cost = TokenCostFromTriple(Triple({-1, 0.5}, {0, 0.5}, {1, 0.5}), 0, 1.0);
  EXPECT_NEAR(cost.log_beta, 1.5, 1e-15);
  EXPECT_NEAR(-cost.log_alpha, 1.272663706197354271, 1e-14);
  EXPECT_NEAR(cost.gamma, 1.5, 1e-15);
  EXPECT_NEAR(cost.beta(), std::exp(1.5), 1e-13);
  EXPECT_LE(cost.alpha(), 1.0);
}

TEST(TokenCostTest, IdenticalVectorsCostNothing) {
  LogitSet set(4, 5);
  for (int j = 0; j < 5; ++j) set.col(j) << 0.3, -2.0, 1.1, 4.0;
  for (TokenId x = 0; x < 4; ++x) {
    const TokenCost cost = *AlphaBetaGamma(set, x, 3.0, 1.5);
    EXPECT_EQ(cost.gamma, 0.0);
    EXPECT_EQ(cost.alpha(), 1.0);
    EXPECT_EQ(cost.beta(), 1.0);
  }
}

TEST(TokenCostTest, LargeTemperatureVanishes) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 100; ++trial) {
    const LogitSet set = RandomSet(gen, 6, 2 + trial % 6, 3.0);
    for (TokenId x = 0; x < 6; ++x) {
      EXPECT_LT(AlphaBetaGamma(set, x, 2.0, 1e6)->gamma, 1e-5);
    }
  }
}

TEST(TokenCostTest, AlphaAtMostOneAtMostBeta) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 2000; ++trial) {
    const LogitSet set = RandomSet(gen, 1 + trial % 7, 1 + trial % 9, 4.0);
    const double tau = 0.1 + (trial % 13) * 0.3;
    const TokenId x = static_cast<TokenId>(trial % set.rows());
    const TokenCost cost = *AlphaBetaGamma(set, x, 5.0, tau);
    EXPECT_LE(cost.log_alpha, 1e-12);
    EXPECT_GE(cost.log_beta, -1e-12);
    EXPECT_GE(cost.gamma, 0.0);
    EXPECT_TRUE(std::isfinite(cost.gamma));
  }
}

TEST(TokenCostTest, WideningTheGapNeverLowersCost) {
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> step(0.0, 2.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int vocab = 2 + trial % 5;
    std::vector<double> mid(vocab), left(vocab), right(vocab);
    for (int y = 0; y < vocab; ++y) {
      mid[y] = u(gen);
      left[y] = mid[y] - step(gen);
      right[y] = mid[y] + step(gen);
    }
    const TokenId x = trial % vocab;
    const double base = TokenCostFromTriple(Triple(left, mid, right), x, 1.3).gamma;
    auto wider_right = right;
    wider_right[x] += step(gen);
    auto wider_left = left;
    wider_left[x] -= step(gen);
    EXPECT_GE(TokenCostFromTriple(Triple(left, mid, wider_right), x, 1.3).gamma, base - 1e-12);
    EXPECT_GE(TokenCostFromTriple(Triple(wider_left, mid, right), x, 1.3).gamma, base - 1e-12);
  }
}

TEST(TokenCostTest, StableForHugeLogits) {
  LogitSet set(3, 3);
  set << 1e4, -1e4, 0.0,
         -1e4, 1e4, 5e3,
         0.0, 0.0, -1e4;
  for (TokenId x = 0; x < 3; ++x) {
    const TokenCost cost = *AlphaBetaGamma(set, x, 2e4, 1.0);
    EXPECT_TRUE(std::isfinite(cost.log_alpha));
    EXPECT_TRUE(std::isfinite(cost.log_beta));
    EXPECT_TRUE(std::isfinite(cost.gamma));
  }
  // Scaling logits and temperature together leaves the cost unchanged.
  const TokenCost small = *AlphaBetaGamma(set / 1e4, 1, 2.0, 1.0);
  const TokenCost huge = *AlphaBetaGamma(set, 1, 2e4, 1e4);
  EXPECT_NEAR(small.gamma, huge.gamma, 1e-9);
}

TEST(TokenCostTest, Errors) {
  EXPECT_EQ(AlphaBetaGamma(LogitSet(3, 0), 0, 1.0, 1.0).status().code(),
            absl::StatusCode::kFailedPrecondition);
  LogitSet set = LogitSet::Zero(3, 2);
  EXPECT_EQ(AlphaBetaGamma(set, 3, 1.0, 1.0).status().code(), absl::StatusCode::kOutOfRange);
  EXPECT_EQ(AlphaBetaGamma(set, -1, 1.0, 1.0).status().code(), absl::StatusCode::kOutOfRange);
  EXPECT_FALSE(AlphaBetaGamma(set, 0, 1.0, 0.0).ok());
  EXPECT_FALSE(AlphaBetaGamma(set, 0, 0.0, 1.0).ok());
}

TEST(MeanTokenEpsilonTest, Formula) {
  EXPECT_DOUBLE_EQ(*MeanTokenEpsilon(2, 2.0, 1.0), 8.0);
  EXPECT_NEAR(*MeanTokenEpsilon(64, 9.0, 1.5), 0.380952380952380952, 1e-15);
  EXPECT_LT(*MeanTokenEpsilon(1000000, 9.0, 1.5), 1e-4);
  double previous = std::numeric_limits<double>::infinity();
  for (int k = 2; k < 200; ++k) {
    const double eps = *MeanTokenEpsilon(k, 9.0, 1.5);
    EXPECT_LT(eps, previous);
    previous = eps;
  }
}

TEST(MeanTokenEpsilonTest, RejectsSingleSeed) {
  const auto eps = MeanTokenEpsilon(1, 9.0, 1.5);
  EXPECT_EQ(eps.status().code(), absl::StatusCode::kInvalidArgument);
  EXPECT_THAT(eps.status().message(), HasSubstr("at least 2"));
  EXPECT_FALSE(MeanTokenEpsilon(0, 9.0, 1.5).ok());
}

TEST(ModeTest, RoundTrip) {
  EXPECT_EQ(*ParseMode("mean"), AggregationMode::kMean);
  EXPECT_EQ(*ParseMode("median"), AggregationMode::kMedian);
  EXPECT_EQ(ModeName(AggregationMode::kMedian), "median");
  EXPECT_FALSE(ParseMode("mode").ok());
}

TEST(LedgerReportTest, SingleBatchSum) {
  PrivacyLedger ledger(AggregationMode::kMedian, 1.5, 6.0);
  ledger.Append({0, 1, 4, 0.1});
  ledger.Append({0, 2, 2, 0.2});
  ledger.Append({0, 3, 0, 0.3});
  const PrivacyReport report = LedgerReport(ledger);
  ASSERT_EQ(report.per_batch.size(), 1u);
  EXPECT_NEAR(report.per_batch[0].epsilon, 0.6, 1e-15);
  EXPECT_NEAR(report.generation_epsilon, 0.6, 1e-15);
  EXPECT_NEAR(report.total_epsilon, 0.6, 1e-15);
  EXPECT_THAT(report.per_position_mean_gamma, ElementsAre(0.1, 0.2, 0.3));
}

TEST(LedgerReportTest, MaxPlusClustering) {
  PrivacyLedger ledger(AggregationMode::kMedian, 1.5, 6.0);
  ledger.set_clustering_epsilon(0.1);
  ledger.Append({7, 1, 1, 0.5});
  ledger.Append({3, 1, 1, 0.6});
  ledger.Append({7, 2, 1, 0.6});
  const PrivacyReport report = LedgerReport(ledger);
  ASSERT_EQ(report.per_batch.size(), 2u);
  EXPECT_EQ(report.per_batch[0].batch_id, 3);
  EXPECT_EQ(report.per_batch[1].batch_id, 7);
  EXPECT_NEAR(report.per_batch[1].epsilon, 1.1, 1e-15);
  EXPECT_NEAR(report.generation_epsilon, 1.1, 1e-15);
  EXPECT_NEAR(report.total_epsilon, 1.2, 1e-15);
  EXPECT_THAT(report.per_position_mean_gamma, ElementsAre(0.55, 0.6));
  EXPECT_EQ(report.per_batch_histogram.total(), 2);
}

TEST(LedgerReportTest, ZeroCostBatches) {
  PrivacyLedger ledger(AggregationMode::kMedian, 1.5, 6.0);
  ledger.set_clustering_epsilon(0.1);
  for (BatchId b = 0; b < 4; ++b) {
    for (int t = 1; t <= 5; ++t) ledger.Append({b, t, 3, 0.0});
  }
  const PrivacyReport report = LedgerReport(ledger);
  EXPECT_EQ(report.generation_epsilon, 0.0);
  EXPECT_EQ(report.total_epsilon, 0.1);
}

TEST(LedgerReportTest, EmptyLedger) {
  PrivacyLedger ledger(AggregationMode::kMean, 1.5, 9.0);
  ledger.set_clustering_epsilon(0.25);
  const PrivacyReport report = LedgerReport(ledger);
  EXPECT_TRUE(report.per_batch.empty());
  EXPECT_EQ(report.generation_epsilon, 0.0);
  EXPECT_EQ(report.total_epsilon, 0.25);
}

TEST(LedgerTest, MergeOrderDoesNotMatter) {
  std::mt19937_64 gen(19);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<PrivacyLedger> parts;
  for (int p = 0; p < 4; ++p) {
    PrivacyLedger part(AggregationMode::kMedian, 1.5, 6.0);
    for (int t = 1; t <= 6; ++t) part.Append({p * 10 + t % 3, t, t, u(gen)});
    parts.push_back(part);
  }
  PrivacyLedger forward(AggregationMode::kMedian, 1.5, 6.0);
  PrivacyLedger backward(AggregationMode::kMedian, 1.5, 6.0);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    forward.Merge(parts[i]);
    backward.Merge(parts[parts.size() - 1 - i]);
  }
  ASSERT_EQ(forward.costs().size(), backward.costs().size());
  for (std::size_t i = 0; i < forward.costs().size(); ++i) {
    EXPECT_EQ(forward.costs()[i], backward.costs()[i]);
  }
  EXPECT_EQ(nlohmann::json(ReportToJson(LedgerReport(forward))).dump(),
            nlohmann::json(ReportToJson(LedgerReport(backward))).dump());
}

TEST(LedgerTest, ReportIsRecomputableFromCosts) {
  std::mt19937_64 gen(41);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  PrivacyLedger ledger(AggregationMode::kMedian, 1.5, 6.0);
  ledger.set_clustering_epsilon(0.1);
  for (BatchId b = 0; b < 20; ++b) {
    for (int t = 1; t <= 1 + b % 7; ++t) ledger.Append({b, t, 2, u(gen)});
  }
  const nlohmann::json report = ReportToJson(LedgerReport(ledger));
  std::map<BatchId, double> sums;
  for (const PerTokenCost& cost : ledger.costs()) {
    const nlohmann::json round_trip = cost;
    sums[round_trip.get<PerTokenCost>().batch_id] += round_trip.get<PerTokenCost>().gamma;
  }
  double generation = 0.0;
  for (const auto& [b, sum] : sums) generation = std::max(generation, sum);
  EXPECT_EQ(report["generation_epsilon"].get<double>(), generation);
  EXPECT_EQ(report["total_epsilon"].get<double>(), generation + 0.1);
  EXPECT_EQ(report["per_batch"].size(), sums.size());
  EXPECT_EQ(report["mode"], "median");
}

}  // namespace
}  // namespace dpsynth

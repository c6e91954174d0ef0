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

#include <algorithm>

#include "absl/strings/str_cat.h"

namespace dpsynth {

absl::StatusOr<TokenCost> AlphaBetaGamma(const LogitSet& set, TokenId x,
                                         double c, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    return absl::InvalidArgumentError("temperature must be positive and finite");
  }
  if (x < 0 || x >= set.rows()) {
    return absl::OutOfRangeError(absl::StrCat("token id ", x, " outside vocabulary of size ", set.rows()));
  }
  absl::StatusOr<MedianTriple<double>> triple = ComputeMedianTriple(set, c);
  if (!triple.ok()) return triple.status();
  return TokenCostFromTriple(*triple, x, tau);
}

absl::StatusOr<double> MeanTokenEpsilon(int batch_size, double c, double tau) {
  if (batch_size < 2) {
    return absl::InvalidArgumentError(
        "mean aggregation needs at least 2 seeds per batch");
  }
  if (!(c > 0.0) || !std::isfinite(c)) {
    return absl::InvalidArgumentError("clip bound must be positive and finite");
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    return absl::InvalidArgumentError("temperature must be positive and finite");
  }
  return 4.0 * c / (tau * static_cast<double>(batch_size - 1));
}

std::string_view ModeName(AggregationMode mode) {
  return mode == AggregationMode::kMean ? "mean" : "median";
}

absl::StatusOr<AggregationMode> ParseMode(std::string_view name) {
  if (name == "mean") return AggregationMode::kMean;
  if (name == "median") return AggregationMode::kMedian;
  return absl::InvalidArgumentError(absl::StrCat("unknown aggregation mode '", std::string(name), "'"));
}

PrivacyLedger::PrivacyLedger(AggregationMode mode, double temperature,
                             double clip)
    : mode_(mode), temperature_(temperature), clip_(clip) {}

void PrivacyLedger::Append(const PerTokenCost& cost) {
  if (!costs_.empty()) {
    const PerTokenCost& last = costs_.back();
    if (cost.batch_id < last.batch_id ||
        (cost.batch_id == last.batch_id && cost.position < last.position)) {
      sorted_ = false;
    }
  }
  costs_.push_back(cost);
}

void PrivacyLedger::Merge(const PrivacyLedger& other) {
  for (const PerTokenCost& cost : other.costs()) Append(cost);
}

void PrivacyLedger::Canonicalize() const {
  if (sorted_) return;
  std::stable_sort(costs_.begin(), costs_.end(),
                   [](const PerTokenCost& a, const PerTokenCost& b) {
                     if (a.batch_id != b.batch_id) return a.batch_id < b.batch_id;
                     return a.position < b.position;
                   });
  sorted_ = true;
}

std::span<const PerTokenCost> PrivacyLedger::costs() const {
  Canonicalize();
  return costs_;
}

PrivacyReport LedgerReport(const PrivacyLedger& ledger, int histogram_bins) {
  PrivacyReport report;
  report.mode = ledger.mode();
  report.temperature = ledger.temperature();
  report.clip = ledger.clip();
  report.clustering_epsilon = ledger.clustering_epsilon();

  std::vector<double> position_sum;
  std::vector<std::size_t> position_count;
  for (const PerTokenCost& cost : ledger.costs()) {
    if (report.per_batch.empty() || report.per_batch.back().batch_id != cost.batch_id) {
      report.per_batch.push_back({cost.batch_id, 0.0});
    }
    report.per_batch.back().epsilon += cost.gamma;
    const auto slot = static_cast<std::size_t>(std::max(cost.position, 1) - 1);
    if (slot >= position_sum.size()) {
      position_sum.resize(slot + 1, 0.0);
      position_count.resize(slot + 1, 0);
    }
    position_sum[slot] += cost.gamma;
    ++position_count[slot];
  }

  std::vector<double> batch_eps;
  batch_eps.reserve(report.per_batch.size());
  for (const BatchEpsilon& b : report.per_batch) {
    report.generation_epsilon = std::max(report.generation_epsilon, b.epsilon);
    batch_eps.push_back(b.epsilon);
  }
  report.total_epsilon = report.generation_epsilon + report.clustering_epsilon;

  report.per_position_mean_gamma.resize(position_sum.size(), 0.0);
  for (std::size_t i = 0; i < position_sum.size(); ++i) {
    if (position_count[i] > 0) {
      report.per_position_mean_gamma[i] =
          position_sum[i] / static_cast<double>(position_count[i]);
    }
  }
  report.per_batch_histogram = MakeHistogram(batch_eps, histogram_bins);
  return report;
}

nlohmann::json ReportToJson(const PrivacyReport& report) {
  nlohmann::json per_batch = nlohmann::json::array();
  for (const BatchEpsilon& b : report.per_batch) {
    per_batch.push_back({{"batch_id", b.batch_id}, {"epsilon", b.epsilon}});
  }
  return nlohmann::json{
      {"mode", ModeName(report.mode)},
      {"temperature", report.temperature},
      {"clip", report.clip},
      {"clustering_epsilon", report.clustering_epsilon},
      {"per_batch", std::move(per_batch)},
      {"generation_epsilon", report.generation_epsilon},
      {"total_epsilon", report.total_epsilon},
      {"per_position_mean_gamma", report.per_position_mean_gamma},
      {"per_batch_epsilon_histogram", report.per_batch_histogram},
  };
}

void to_json(nlohmann::json& j, const PerTokenCost& cost) {
  j = nlohmann::json{{"batch_id", cost.batch_id},
                     {"position", cost.position},
                     {"token", cost.token},
                     {"gamma", cost.gamma}};
}

void from_json(const nlohmann::json& j, PerTokenCost& cost) {
  j.at("batch_id").get_to(cost.batch_id);
  j.at("position").get_to(cost.position);
  j.at("token").get_to(cost.token);
  j.at("gamma").get_to(cost.gamma);
}

}  // namespace dpsynth

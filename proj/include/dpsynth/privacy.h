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

// Per-token privacy costs and the ledger that composes them.

#ifndef DPSYNTH_PRIVACY_H_
#define DPSYNTH_PRIVACY_H_

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dpsynth/aggregation.h"
#include "dpsynth/histogram.h"
#include "dpsynth/types.h"
#include "json.hpp"

namespace dpsynth {

// Likelihood-ratio bounds for emitting one token from a median-aggregated
// batch, kept in log space. alpha <= 1 <= beta and gamma >= 0.
struct TokenCost {
  double log_alpha = 0.0;
  double log_beta = 0.0;
  double gamma = 0.0;

  double alpha() const { return std::exp(log_alpha); }
  double beta() const { return std::exp(log_beta); }
};

namespace internal {

template <typename Derived>
double LogSumExp(const Eigen::MatrixBase<Derived>& v, double inv_tau) {
  const double top = static_cast<double>(v.maxCoeff()) * inv_tau;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    sum += std::exp(static_cast<double>(v(i)) * inv_tau - top);
  }
  return top + std::log(sum);
}

}  // namespace internal

// Evaluates alpha, beta and gamma for token `x` from a precomputed
// left/mid/right triple. The triple is assumed to satisfy
// left <= mid <= right component-wise.
template <typename Scalar>
TokenCost TokenCostFromTriple(const MedianTriple<Scalar>& triple, TokenId x,
                              double tau) {
  const double inv_tau = 1.0 / tau;
  const double lse_mid = internal::LogSumExp(triple.mid, inv_tau);
  const double lse_left = internal::LogSumExp(triple.left, inv_tau);
  const double lse_right = internal::LogSumExp(triple.right, inv_tau);
  const double mid_x = static_cast<double>(triple.mid(x));
  TokenCost cost;
  cost.log_alpha = (mid_x - static_cast<double>(triple.right(x))) * inv_tau +
                   (lse_left - lse_mid);
  cost.log_beta = (mid_x - static_cast<double>(triple.left(x))) * inv_tau +
                  (lse_right - lse_mid);
  cost.gamma = std::max({0.0, -cost.log_alpha, cost.log_beta});
  return cost;
}

// Per-token cost of sampling `x` from the median aggregate of `set` (raw
// logits, one column per seed), clipped at `c`, at temperature `tau`.
absl::StatusOr<TokenCost> AlphaBetaGamma(const LogitSet& set, TokenId x,
                                         double c, double tau);

// Pure-epsilon cost of one token under mean aggregation of a batch of
// `batch_size` seeds: 2 * (2c / (k - 1)) / tau.
absl::StatusOr<double> MeanTokenEpsilon(int batch_size, double c, double tau);

struct PerTokenCost {
  BatchId batch_id = 0;
  int position = 0;  // 1-based
  TokenId token = 0;
  double gamma = 0.0;

  friend bool operator==(const PerTokenCost&, const PerTokenCost&) = default;
};

std::string_view ModeName(AggregationMode mode);
absl::StatusOr<AggregationMode> ParseMode(std::string_view name);

// Append-only record of realized per-token costs. Sub-ledgers built by
// independent workers are combined with Merge(); the canonical order is
// (batch_id, position) so the result does not depend on merge order.
class PrivacyLedger {
 public:
  PrivacyLedger(AggregationMode mode, double temperature, double clip);

  void Append(const PerTokenCost& cost);
  void Merge(const PrivacyLedger& other);

  void set_clustering_epsilon(double epsilon) { clustering_epsilon_ = epsilon; }
  double clustering_epsilon() const { return clustering_epsilon_; }
  AggregationMode mode() const { return mode_; }
  double temperature() const { return temperature_; }
  double clip() const { return clip_; }
  bool empty() const { return costs_.empty(); }

  // Costs in canonical order.
  std::span<const PerTokenCost> costs() const;

 private:
  void Canonicalize() const;

  AggregationMode mode_;
  double temperature_;
  double clip_;
  double clustering_epsilon_ = 0.0;
  mutable std::vector<PerTokenCost> costs_;
  mutable bool sorted_ = true;
};

struct BatchEpsilon {
  BatchId batch_id = 0;
  double epsilon = 0.0;
};

struct PrivacyReport {
  AggregationMode mode = AggregationMode::kMedian;
  double temperature = 0.0;
  double clip = 0.0;
  double clustering_epsilon = 0.0;
  std::vector<BatchEpsilon> per_batch;
  double generation_epsilon = 0.0;
  double total_epsilon = 0.0;
  // Mean gamma at each 1-based position, over the batches that reached it.
  std::vector<double> per_position_mean_gamma;
  Histogram per_batch_histogram;
};

// Per-batch sums, their maximum (the generation epsilon) and the basic
// composition with the clustering cost. An empty ledger reports zero
// generation cost.
PrivacyReport LedgerReport(const PrivacyLedger& ledger, int histogram_bins = 20);

nlohmann::json ReportToJson(const PrivacyReport& report);

void to_json(nlohmann::json& j, const PerTokenCost& cost);
void from_json(const nlohmann::json& j, PerTokenCost& cost);

}  // namespace dpsynth

#endif  // DPSYNTH_PRIVACY_H_

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

#include "dpsynth/clustering.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "dpsynth/rng.h"
#include "parallel.h"

namespace dpsynth {
namespace {

struct Nearest {
  int index = 0;
  double squared_distance = 0.0;
};

Nearest NearestCenter(const Eigen::MatrixXd& centers,
                      const Eigen::Ref<const Eigen::VectorXd>& point) {
  Nearest best{0, std::numeric_limits<double>::infinity()};
  for (Eigen::Index j = 0; j < centers.cols(); ++j) {
    const double d = (centers.col(j) - point).squaredNorm();
    if (d < best.squared_distance) best = {static_cast<int>(j), d};
  }
  return best;
}

std::vector<Nearest> NearestAll(const Eigen::MatrixXd& centers,
                                const Eigen::Ref<const Eigen::MatrixXd>& points,
                                int jobs) {
  std::vector<Nearest> out(static_cast<std::size_t>(points.cols()));
  internal::ParallelFor(out.size(), jobs, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      out[i] = NearestCenter(centers, points.col(static_cast<Eigen::Index>(i)));
    }
  });
  return out;
}

absl::Status CheckPoints(const Eigen::Ref<const Eigen::MatrixXd>& points) {
  if (!points.allFinite()) {
    return absl::InvalidArgumentError("embeddings contain non-finite values");
  }
  return absl::OkStatus();
}

// k-means++ seeding: first center uniform, then proportional to the squared
// distance to the nearest chosen center.
Eigen::MatrixXd PlusPlusInit(const Eigen::Ref<const Eigen::MatrixXd>& points,
                             int k, CounterRng& rng) {
  const Eigen::Index n = points.cols();
  Eigen::MatrixXd centers(points.rows(), k);
  std::vector<double> d2(static_cast<std::size_t>(n),
                         std::numeric_limits<double>::infinity());
  Eigen::Index chosen = static_cast<Eigen::Index>(rng.UniformInt(static_cast<std::uint64_t>(n)));
  for (int c = 0; c < k; ++c) {
    centers.col(c) = points.col(chosen);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[static_cast<std::size_t>(i)] =
          std::min(d2[static_cast<std::size_t>(i)], (points.col(i) - centers.col(c)).squaredNorm());
      total += d2[static_cast<std::size_t>(i)];
    }
    if (c + 1 == k) break;
    if (total <= 0.0) {
      // Every point coincides with a chosen center; fall back to uniform.
      chosen = static_cast<Eigen::Index>(rng.UniformInt(static_cast<std::uint64_t>(n)));
      continue;
    }
    const double target = rng.Uniform01() * total;
    double running = 0.0;
    chosen = n - 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      running += d2[static_cast<std::size_t>(i)];
      if (running > target && d2[static_cast<std::size_t>(i)] > 0.0) {
        chosen = i;
        break;
      }
    }
  }
  return centers;
}

}  // namespace

std::string_view CenterSourceName(CenterSource source) {
  return source == CenterSource::kPublic ? "public" : "external-file";
}

absl::StatusOr<KMeansResult> KMeans(const Eigen::Ref<const Eigen::MatrixXd>& points,
                                    const KMeansOptions& options) {
  if (options.k < 1) return absl::InvalidArgumentError("k must be >= 1");
  if (options.max_iters < 1) return absl::InvalidArgumentError("max_iters must be >= 1");
  if (options.k > points.cols()) {
    return absl::InvalidArgumentError(absl::StrCat("k = ", options.k, " exceeds the number of points (", points.cols(), ")"));
  }
  if (absl::Status s = CheckPoints(points); !s.ok()) return s;

  CounterRng rng(options.rng_seed, "kmeans++");
  KMeansResult result;
  result.model.centers = PlusPlusInit(points, options.k, rng);
  result.model.source = CenterSource::kPublic;

  const auto n = static_cast<std::size_t>(points.cols());
  std::vector<int> labels(n, -1);
  for (int iter = 0; iter < options.max_iters; ++iter) {
    const std::vector<Nearest> nearest = NearestAll(result.model.centers, points, options.jobs);
    bool changed = false;
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      changed |= labels[i] != nearest[i].index;
      labels[i] = nearest[i].index;
      objective += nearest[i].squared_distance;
    }
    result.objective_history.push_back(objective);
    result.iterations = iter + 1;
    if (!changed) {
      result.converged = true;
      break;
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(points.rows(), options.k);
    std::vector<std::int64_t> counts(static_cast<std::size_t>(options.k), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.col(labels[i]) += points.col(static_cast<Eigen::Index>(i));
      ++counts[static_cast<std::size_t>(labels[i])];
    }
    for (int c = 0; c < options.k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        result.model.centers.col(c) = sums.col(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      }
    }
  }
  result.labels = std::move(labels);
  return result;
}

absl::StatusOr<int> Assign(const ClusterModel& model,
                           const Eigen::Ref<const Eigen::VectorXd>& point) {
  if (model.k() < 1) return absl::FailedPreconditionError("cluster model has no centers");
  if (point.size() != model.dim()) {
    return absl::InvalidArgumentError(absl::StrCat("embedding dimension ", point.size(), " does not match model dimension ", model.dim()));
  }
  return NearestCenter(model.centers, point).index;
}

absl::StatusOr<std::vector<int>> AssignAll(
    const ClusterModel& model, const Eigen::Ref<const Eigen::MatrixXd>& points,
    int jobs) {
  if (model.k() < 1) return absl::FailedPreconditionError("cluster model has no centers");
  if (points.cols() > 0 && points.rows() != model.dim()) {
    return absl::InvalidArgumentError(absl::StrCat("embedding dimension ", points.rows(), " does not match model dimension ", model.dim()));
  }
  const std::vector<Nearest> nearest = NearestAll(model.centers, points, jobs);
  std::vector<int> out(nearest.size());
  std::transform(nearest.begin(), nearest.end(), out.begin(),
                 [](const Nearest& n) { return n.index; });
  return out;
}

absl::StatusOr<RebalanceResult> Rebalance(
    const ClusterModel& model, const Eigen::Ref<const Eigen::MatrixXd>& seeds,
    int k_prime, double epsilon_count, std::uint64_t rng_seed, int jobs) {
  if (k_prime < 1) return absl::InvalidArgumentError("k' must be >= 1");
  if (k_prime > model.k()) {
    return absl::InvalidArgumentError(absl::StrCat("k' = ", k_prime, " exceeds the number of centers (", model.k(), ")"));
  }
  if (!(epsilon_count > 0.0)) {
    return absl::InvalidArgumentError("epsilon_count must be positive");
  }
  absl::StatusOr<std::vector<int>> assigned = AssignAll(model, seeds, jobs);
  if (!assigned.ok()) return assigned.status();

  RebalanceResult result;
  result.epsilon_count = epsilon_count;
  result.true_counts.assign(static_cast<std::size_t>(model.k()), 0);
  for (int c : *assigned) ++result.true_counts[static_cast<std::size_t>(c)];

  CounterRng rng(rng_seed, "rebalance");
  const double scale = 1.0 / epsilon_count;
  result.noisy_counts.resize(result.true_counts.size());
  for (std::size_t c = 0; c < result.true_counts.size(); ++c) {
    const double noise = std::isinf(epsilon_count) ? 0.0 : rng.Laplace(scale);
    result.noisy_counts[c] = static_cast<double>(result.true_counts[c]) + noise;
  }

  std::vector<int> order(result.noisy_counts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return result.noisy_counts[static_cast<std::size_t>(a)] > result.noisy_counts[static_cast<std::size_t>(b)];
  });
  order.resize(static_cast<std::size_t>(k_prime));
  std::sort(order.begin(), order.end());

  result.model.source = model.source;
  result.model.clustering_epsilon = model.clustering_epsilon + epsilon_count;
  result.model.centers.resize(model.dim(), k_prime);
  for (int j = 0; j < k_prime; ++j) {
    result.model.centers.col(j) = model.centers.col(order[static_cast<std::size_t>(j)]);
  }
  result.model.parent_indices = std::move(order);
  return result;
}

}  // namespace dpsynth

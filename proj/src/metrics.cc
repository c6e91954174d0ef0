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

#include "dpsynth/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>
#include <utility>

namespace dpsynth {
namespace {

double Entropy(const std::map<int, std::size_t>& counts, double n) {
  double h = 0.0;
  for (const auto& [_, count] : counts) {
    const double p = static_cast<double>(count) / n;
    h -= p * std::log(p);
  }
  return h;
}

// H(A | B) from the joint counts of (a, b) pairs.
double ConditionalEntropy(const std::map<std::pair<int, int>, std::size_t>& joint,
                          const std::map<int, std::size_t>& b_counts, double n,
                          bool a_first) {
  double h = 0.0;
  for (const auto& [key, count] : joint) {
    const int b = a_first ? key.second : key.first;
    const double nab = static_cast<double>(count);
    h -= nab / n * std::log(nab / static_cast<double>(b_counts.at(b)));
  }
  return h;
}

}  // namespace

absl::StatusOr<VMeasure> ComputeVMeasure(std::span<const int> predicted,
                                         std::span<const int> reference) {
  if (predicted.size() != reference.size()) {
    return absl::InvalidArgumentError("labelings differ in length");
  }
  VMeasure out;
  if (predicted.empty()) return out;
  const auto n = static_cast<double>(predicted.size());

  std::map<int, std::size_t> classes, clusters;
  std::map<std::pair<int, int>, std::size_t> joint;  // (class, cluster)
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    ++classes[reference[i]];
    ++clusters[predicted[i]];
    ++joint[{reference[i], predicted[i]}];
  }
  const double h_class = Entropy(classes, n);
  const double h_cluster = Entropy(clusters, n);
  const double h_class_given_cluster = ConditionalEntropy(joint, clusters, n, true);
  const double h_cluster_given_class = ConditionalEntropy(joint, classes, n, false);

  out.homogeneity = h_class > 0.0 ? 1.0 - h_class_given_cluster / h_class : 1.0;
  out.completeness = h_cluster > 0.0 ? 1.0 - h_cluster_given_class / h_cluster : 1.0;
  const double sum = out.homogeneity + out.completeness;
  out.v_measure = sum > 0.0 ? 2.0 * out.homogeneity * out.completeness / sum : 0.0;
  return out;
}

std::vector<int> EncodeLabels(std::span<const std::string> labels) {
  std::unordered_map<std::string, int> codes;
  std::vector<int> out;
  out.reserve(labels.size());
  for (const std::string& label : labels) {
    auto [it, _] = codes.emplace(label, static_cast<int>(codes.size()));
    out.push_back(it->second);
  }
  return out;
}

std::vector<std::size_t> ClusterSizes(std::span<const int> assignment, int k) {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(std::max(k, 0)), 0);
  for (int c : assignment) {
    if (c >= 0 && c < k) ++sizes[static_cast<std::size_t>(c)];
  }
  return sizes;
}

}  // namespace dpsynth

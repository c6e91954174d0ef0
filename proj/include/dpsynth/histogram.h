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

#ifndef DPSYNTH_HISTOGRAM_H_
#define DPSYNTH_HISTOGRAM_H_

#include <cstddef>
#include <span>
#include <vector>

#include "json.hpp"

namespace dpsynth {

// Equal-width bins over [lo, hi]; the last bin is closed on the right.
struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> counts;

  double bin_width() const;
  std::size_t total() const;
};

// Bins `values` over [0, max(values)]. Empty input gives all-zero counts.
Histogram MakeHistogram(std::span<const double> values, int num_bins);

void to_json(nlohmann::json& j, const Histogram& h);

}  // namespace dpsynth

#endif  // DPSYNTH_HISTOGRAM_H_

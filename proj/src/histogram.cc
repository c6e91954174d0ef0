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

#include "dpsynth/histogram.h"

#include <algorithm>
#include <numeric>

namespace dpsynth {

double Histogram::bin_width() const {
  return counts.empty() ? 0.0 : (hi - lo) / static_cast<double>(counts.size());
}

std::size_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

Histogram MakeHistogram(std::span<const double> values, int num_bins) {
  Histogram h;
  h.counts.assign(static_cast<std::size_t>(std::max(num_bins, 1)), 0);
  if (values.empty()) return h;
  h.hi = *std::max_element(values.begin(), values.end());
  const double width = h.bin_width();
  for (double v : values) {
    std::size_t bin = 0;
    if (width > 0.0) {
      bin = static_cast<std::size_t>((v - h.lo) / width);
      bin = std::min(bin, h.counts.size() - 1);
    }
    ++h.counts[bin];
  }
  return h;
}

void to_json(nlohmann::json& j, const Histogram& h) {
  j = nlohmann::json{{"lo", h.lo}, {"hi", h.hi}, {"counts", h.counts}};
}

}  // namespace dpsynth

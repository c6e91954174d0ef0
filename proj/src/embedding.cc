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

#include "dpsynth/embedding.h"

#include <cmath>
#include <string>

#include "dpsynth/rng.h"

namespace dpsynth {

absl::StatusOr<Embedding> ToyEmbed(std::string_view text, int dim,
                                   std::uint64_t seed) {
  if (dim < 1) return absl::InvalidArgumentError("embedding dimension must be >= 1");
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    return absl::InvalidArgumentError("cannot embed empty text: no features");
  }
  std::string padded;
  padded.reserve(text.size() + 2);
  padded += ' ';
  padded += text;
  padded += ' ';

  Embedding out = Embedding::Zero(dim);
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    const std::uint64_t feature = Fnv1a64(std::string_view(padded).substr(i, 3), seed);
    for (int d = 0; d < dim; ++d) {
      const std::uint64_t bits = Mix64(feature ^ Mix64(static_cast<std::uint64_t>(d) + seed));
      out(d) += (bits & 1ULL) ? 1.0 : -1.0;
    }
  }
  const double norm = out.norm();
  if (norm == 0.0) {
    // Features cancelled exactly; fall back to the first axis.
    out(0) = 1.0;
    return out;
  }
  return Embedding(out / norm);
}

}  // namespace dpsynth

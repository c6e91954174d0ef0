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

#ifndef DPSYNTH_EMBEDDING_H_
#define DPSYNTH_EMBEDDING_H_

#include <cstdint>
#include <string_view>

#include "absl/status/statusor.h"
#include "dpsynth/types.h"

namespace dpsynth {

inline constexpr std::uint64_t kDefaultEmbedSeed = 0x5eed0fe3b3dd1e55ULL;

// Deterministic stand-in for a sentence encoder: character trigram counts
// (text padded with a space on both sides) hashed and projected onto `dim`
// axes with pseudo-random signs, then L2-normalized.
absl::StatusOr<Embedding> ToyEmbed(std::string_view text, int dim,
                                   std::uint64_t seed = kDefaultEmbedSeed);

}  // namespace dpsynth

#endif  // DPSYNTH_EMBEDDING_H_

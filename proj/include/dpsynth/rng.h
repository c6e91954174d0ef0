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

#ifndef DPSYNTH_RNG_H_
#define DPSYNTH_RNG_H_

#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

namespace dpsynth {

// 64-bit FNV-1a; stable across platforms and runs.
constexpr std::uint64_t Fnv1a64(std::string_view bytes,
                                std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t Mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent sub-seed for (purpose, id) from a root seed.
inline std::uint64_t DeriveSeed(std::uint64_t root, std::string_view purpose,
                                std::uint64_t id = 0) {
  std::uint64_t h = Fnv1a64(purpose, Mix64(root ^ 0x9e3779b97f4a7c15ULL));
  return Mix64(h ^ Mix64(id + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t DeriveSeed(std::uint64_t root, std::string_view purpose,
                                std::string_view id) {
  return DeriveSeed(root, purpose, Fnv1a64(id));
}

// Counter-based generator: the i-th output is a pure function of (key, i),
// so a stream can be reproduced from its key without shared state.
// Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) : key_(key) {}
  CounterRng(std::uint64_t root, std::string_view purpose, std::uint64_t id = 0)
      : key_(DeriveSeed(root, purpose, id)) {}
  CounterRng(std::uint64_t root, std::string_view purpose, std::string_view id)
      : key_(DeriveSeed(root, purpose, id)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    return Mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_);
  }

  // Uniform on the open interval (0, 1), 53 bits of resolution.
  double Uniform01() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer in [0, n) by rejection; n > 0.
  std::uint64_t UniformInt(std::uint64_t n) {
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t r;
    do {
      r = (*this)();
    } while (r >= limit);
    return r % n;
  }

  // Standard Gumbel variate.
  double Gumbel() { return -std::log(-std::log(Uniform01())); }

  // Laplace(0, scale) by inverse CDF.
  double Laplace(double scale) {
    const double u = Uniform01() - 0.5;
    const double magnitude = -scale * std::log1p(-2.0 * std::abs(u));
    return u < 0 ? -magnitude : magnitude;
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace dpsynth

#endif  // DPSYNTH_RNG_H_

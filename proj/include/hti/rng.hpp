// Copyright 2026 The hti Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Platform-independent pseudorandom numbers.
//
// The standard library's engines are portable but its distributions are not
// (std::uniform_int_distribution differs between libstdc++, libc++ and MSVC).
// Episodes, noise plans and bootstrap resamples must reproduce bit-for-bit on
// every platform, so everything random in this project goes through Rng:
//
//   - seeding: SplitMix64 expands one 64-bit seed into the 256-bit state
//   - engine:  xoshiro256** 1.0 (Blackman & Vigna)
//   - below(n): Lemire's multiply-shift with rejection, exactly uniform
//   - unit():  top 53 bits scaled by 2^-53, uniform on [0, 1)

#ifndef HTI_RNG_HPP_
#define HTI_RNG_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace hti {

/// One SplitMix64 step: advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Derives a child seed from a parent seed and a stream discriminator.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) noexcept;

/// FNV-1a 64 over the bytes of `text`; used to turn ids into seed streams.
std::uint64_t fnv1a64(std::string_view text) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next() noexcept;

  /// Uniform integer in [0, bound). `bound` must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept;

  double unit() noexcept;

  bool coin() noexcept { return (next() >> 63) != 0; }

  /// Fisher-Yates shuffle of the whole range.
  template <typename T>
  void shuffle(std::span<T> values) noexcept {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::array<std::uint64_t, 4> s_;
};

}  // namespace hti

#endif  // HTI_RNG_HPP_

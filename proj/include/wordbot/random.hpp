// Copyright 2026 The wordbot Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace wordbot {

using Seed = std::uint64_t;
using Rng = std::mt19937_64;

// SplitMix64 finalizer. Used to derive independent child seeds so that
// every random stream is a pure function of (run seed, tags...).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr Seed derive_seed(Seed base, std::initializer_list<std::uint64_t> tags) {
  Seed s = mix64(base);
  for (auto t : tags) s = mix64(s ^ mix64(t + 0x632be59bd9b4e019ULL));
  return s;
}

// FNV-1a, for turning names into seed tags.
constexpr std::uint64_t hash_name(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
  return h;
}

// Stream tags keep derived seeds of different purposes apart.
namespace stream {
inline constexpr std::uint64_t kHeldOut = 1;
inline constexpr std::uint64_t kPermutation = 2;
inline constexpr std::uint64_t kAfpo = 3;
inline constexpr std::uint64_t kMutation = 4;
inline constexpr std::uint64_t kNewborn = 5;
inline constexpr std::uint64_t kTruncation = 6;
inline constexpr std::uint64_t kBootstrap = 7;
inline constexpr std::uint64_t kSynthesis = 8;
}  // namespace stream

inline Rng make_rng(Seed seed) { return Rng(seed); }

}  // namespace wordbot

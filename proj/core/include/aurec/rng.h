// Copyright 2026 The aurec Authors
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

#ifndef AUREC_RNG_H_
#define AUREC_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <string_view>

namespace aurec {

// Derives an independent stream seed from a base seed and a path of
// integers (e.g. {epoch, user}). Uses SplitMix64 finalization.
std::uint64_t DeriveSeed(std::uint64_t seed,
                         std::initializer_list<std::uint64_t> path);

// Uniform double in [0, 1) built from the top 53 bits of one draw, so the
// value does not depend on the standard library's distribution code.
inline double UniformUnit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// 64-bit FNV-1a.
std::uint64_t Fnv1a64(std::string_view bytes,
                      std::uint64_t hash = 0xcbf29ce484222325ULL);

// Lower-case, zero-padded 16 digit hex.
std::string HashToHex(std::uint64_t hash);

}  // namespace aurec

#endif  // AUREC_RNG_H_

// Copyright 2026 The hwnas Authors.
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

#ifndef HWNAS_RNG_HPP_
#define HWNAS_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace hwnas {

using Rng = std::mt19937_64;

// Derives an independent seed for a named sub-stream ("split", "init",
// "search", ...) so that every component can be reproduced on its own from
// the single user-facing seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

// Same as above with an extra integer salt (trial index, arch index).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream,
                          std::uint64_t salt);

inline Rng make_rng(std::uint64_t seed, std::string_view stream) {
  return Rng(derive_seed(seed, stream));
}

}  // namespace hwnas

#endif  // HWNAS_RNG_HPP_

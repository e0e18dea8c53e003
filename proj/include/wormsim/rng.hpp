/*
Copyright 2026 The wormsim Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace wormsim {

/// Random engine used by every stochastic kernel.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based seed derivation.
///
/// A child seed is a pure function of its parent seed and an ordered list of
/// integer keys (indices, tags, bit patterns). Seeds therefore form a tree:
/// master -> graph -> cell -> run, and any node of the tree can be
/// reconstructed without replaying its siblings.
constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                    std::initializer_list<std::uint64_t> keys) noexcept {
    std::uint64_t h = mix64(parent ^ 0x6a09e667f3bcc909ULL);
    for (std::uint64_t k : keys) {
        h = mix64(h ^ mix64(k + 0x3c6ef372fe94f82bULL));
    }
    return h;
}

/// Domain tags keeping sibling streams apart.
namespace seed_tag {
inline constexpr std::uint64_t graph = 0x67726170ULL;      // "grap"
inline constexpr std::uint64_t cell = 0x63656c6cULL;       // "cell"
inline constexpr std::uint64_t run = 0x72756e00ULL;        // "run"
inline constexpr std::uint64_t seed_nodes = 0x73656564ULL; // "seed"
}  // namespace seed_tag

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

}  // namespace wormsim

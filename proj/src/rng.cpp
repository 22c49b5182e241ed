// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#include "codol/rng.hpp"

namespace codol {

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
    // splitmix64 finalizer over the combined value
    std::uint64_t z = seed ^ fnv1a(label);
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace codol

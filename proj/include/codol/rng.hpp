// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "codol/types.hpp"

namespace codol {

// Boost distributions are used instead of <random> ones so seeded draws are
// identical across standard library implementations.
using Engine = boost::random::mt19937_64;

// Derives an independent stream from a base seed and a label.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

inline Mat gaussian_matrix(Engine& rng, Index rows, Index cols, double stddev) {
    boost::random::normal_distribution<double> dist(0.0, stddev);
    Mat m(rows, cols);
    for (Index c = 0; c < cols; ++c) {
        for (Index r = 0; r < rows; ++r) {
            m(r, c) = dist(rng);
        }
    }
    return m;
}

inline Vec gaussian_vector(Engine& rng, Index n, double stddev) {
    return gaussian_matrix(rng, n, 1, stddev);
}

// Fisher-Yates with a portable index distribution.
template <typename T>
void shuffle(std::vector<T>& items, Engine& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(items[i - 1], items[pick(rng)]);
    }
}

// 64-bit FNV-1a; stable across platforms, used for token-row hashing.
constexpr std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char ch : text) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace codol

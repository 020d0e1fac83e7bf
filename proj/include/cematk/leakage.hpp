/*
 * Copyright 2026 The cematk Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

// Hamming weight / distance and the linear leakage model E = a*HW(D) + b.

#ifndef CEMATK_LEAKAGE_HPP
#define CEMATK_LEAKAGE_HPP

#include "cematk/present.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cematk {

/// Gain `a` and baseline `b` of the linear model. Stochastic noise is not
/// part of this model; it lives in the simulator.
struct LeakParams {
    double a = 1.0;
    double b = 0.0;
};

/// Round-1 S-box output byte D at state position byte_index (0 = MSB).
struct Intermediate {
    std::uint8_t value = 0;
    unsigned byte_index = 0;
};

namespace detail {
inline void check_width(std::uint64_t v, unsigned width) {
    if (width > 64)
        throw std::out_of_range("bit width " + std::to_string(width) + " exceeds 64");
    if (width < 64 && (v >> width) != 0)
        throw std::out_of_range("value does not fit in " + std::to_string(width) + " bits");
}
} // namespace detail

inline unsigned hamming_weight(std::uint64_t v, unsigned width = 64) {
    detail::check_width(v, width);
    return static_cast<unsigned>(std::popcount(v));
}

inline unsigned hamming_distance(std::uint64_t x, std::uint64_t y, unsigned width = 64) {
    detail::check_width(x, width);
    detail::check_width(y, width);
    return static_cast<unsigned>(std::popcount(x ^ y));
}

inline double leak_energy(const Intermediate &d, const LeakParams &params) {
    return params.a * static_cast<double>(std::popcount(d.value)) + params.b;
}

/// S(hi) || S(lo) of p_byte XOR k_byte: one byte of the first sBoxLayer output.
constexpr std::uint8_t round1_intermediate_byte(std::uint8_t p_byte, std::uint8_t k_byte) {
    const unsigned x = p_byte ^ k_byte;
    return static_cast<std::uint8_t>(present::kSbox[x >> 4] << 4 | present::kSbox[x & 0xF]);
}

/// HW(S(x)) for a nibble x.
inline constexpr std::array<std::uint8_t, 16> kNibbleLeak = [] {
    std::array<std::uint8_t, 16> t{};
    for (unsigned x = 0; x < 16; x++)
        t[x] = static_cast<std::uint8_t>(std::popcount(static_cast<unsigned>(present::kSbox[x])));
    return t;
}();

/// HW(round1_intermediate_byte(v, 0)) for every byte v.
inline constexpr std::array<std::uint8_t, 256> kByteLeak = [] {
    std::array<std::uint8_t, 256> t{};
    for (unsigned v = 0; v < 256; v++)
        t[v] = static_cast<std::uint8_t>(kNibbleLeak[v >> 4] + kNibbleLeak[v & 0xF]);
    return t;
}();

} // namespace cematk

#endif // CEMATK_LEAKAGE_HPP

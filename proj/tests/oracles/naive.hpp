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

// Test-only reference computations. Nothing here calls into the library's
// correlation or ranking code.

#ifndef CEMATK_TESTS_NAIVE_HPP
#define CEMATK_TESTS_NAIVE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

inline constexpr std::array<unsigned, 16> kTableSbox = {0xC, 0x5, 0x6, 0xB, 0x9, 0x0, 0xA, 0xD,
                                                         0x3, 0xE, 0xF, 0x8, 0x4, 0x7, 0x1, 0x2};

inline unsigned popcount8(unsigned v) {
    unsigned c = 0;
    for (unsigned i = 0; i < 8; i++)
        c += (v >> i) & 1;
    return c;
}

/// HW of the S-box output byte for input byte x, composed bit by bit.
inline unsigned hw_sbox_byte(unsigned x) {
    return popcount8(kTableSbox[(x >> 4) & 0xF] << 4 | kTableSbox[x & 0xF]);
}

/// Textbook two-pass Pearson; returns 0 for a zero-variance input.
inline double pearson(const std::vector<double> &x, const std::vector<double> &y) {
    const std::size_t n = x.size();
    long double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; i++) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    long double cxy = 0, cxx = 0, cyy = 0;
    for (std::size_t i = 0; i < n; i++) {
        cxy += (x[i] - mx) * (y[i] - my);
        cxx += (x[i] - mx) * (x[i] - mx);
        cyy += (y[i] - my) * (y[i] - my);
    }
    if (cxx == 0 || cyy == 0)
        return 0.0;
    return static_cast<double>(cxy / std::sqrt(cxx * cyy));
}

/// rho[k][s] for the round-1 HW model by brute force.
/// traces[t][s], pt_bytes[t] is the plaintext byte at the attacked position.
inline std::vector<std::vector<double>> surface(const std::vector<std::vector<float>> &traces,
                                                const std::vector<unsigned> &pt_bytes) {
    const std::size_t nt = traces.size(), ns = traces[0].size();
    std::vector<std::vector<double>> rho(256, std::vector<double>(ns));
    for (unsigned k = 0; k < 256; k++) {
        std::vector<double> h(nt);
        for (std::size_t t = 0; t < nt; t++)
            h[t] = hw_sbox_byte(pt_bytes[t] ^ k);
        for (std::size_t s = 0; s < ns; s++) {
            std::vector<double> col(nt);
            for (std::size_t t = 0; t < nt; t++)
                col[t] = traces[t][s];
            rho[k][s] = pearson(h, col);
        }
    }
    return rho;
}

/// Key bytes ordered by max |rho| (descending), ties by key value.
inline std::vector<unsigned> ranking(const std::vector<std::vector<double>> &rho) {
    std::vector<std::pair<double, unsigned>> scored;
    for (unsigned k = 0; k < rho.size(); k++) {
        double best = 0;
        for (double v : rho[k])
            best = std::max(best, std::abs(v));
        scored.push_back({best, k});
    }
    std::sort(scored.begin(), scored.end(), [](auto a, auto b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::vector<unsigned> out;
    for (auto &p : scored)
        out.push_back(p.second);
    return out;
}

} // namespace oracle

#endif

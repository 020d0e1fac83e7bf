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

// Synthetic EM trace generation.
//
// Each trace is the mean of `repetitions` independent acquisitions. One
// acquisition is: baseline b on every sample, plus i.i.d. Gaussian noise, plus
// for every state byte j a pulse of height a*HW(round-1 S-box output byte j)
// over leak_width samples starting at leak_indices[j]. With a carrier the
// pulse is multiplied by sin(2*pi*f*i/fs), i being the absolute sample index.
// The whole leak pattern is shifted by a uniform integer jitter in
// [-jitter_max, +jitter_max] drawn per acquisition. Ambient tones, when
// configured, are added to encryption and idle traces alike.
//
// Every (seed, trace_index, repetition) triple owns an independent
// xoshiro256** stream, so output does not depend on generation order.

#ifndef CEMATK_SIM_HPP
#define CEMATK_SIM_HPP

#include "cematk/leakage.hpp"
#include "cematk/present.hpp"
#include "cematk/rng.hpp"
#include "cematk/trace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cematk {

struct AmbientTone {
    double freq = 0.0;
    double amplitude = 0.0;
};

struct SimConfig {
    std::size_t n_samples = 5000;
    double sample_rate = 250e6;
    LeakParams leak_params{};
    double noise_std = 0.0;
    std::array<std::size_t, 8> leak_indices{500, 1000, 1500, 2000, 2500, 3000, 3500, 4000};
    std::size_t leak_width = 20;
    std::optional<double> carrier_freq;
    std::size_t jitter_max = 0;
    std::size_t repetitions = 1;
    KeyRegister key{};
    std::uint64_t seed = 0;
    std::vector<AmbientTone> ambient;

    /// Throws std::invalid_argument describing the first violated constraint.
    void validate() const {
        auto fail = [](const std::string &msg) { throw std::invalid_argument("SimConfig: " + msg); };
        if (n_samples < 2)
            fail("n_samples must be >= 2");
        if (!(sample_rate > 0.0) || !std::isfinite(sample_rate))
            fail("sample_rate must be positive");
        if (!std::isfinite(leak_params.a) || !std::isfinite(leak_params.b))
            fail("gain and baseline must be finite");
        if (!(noise_std >= 0.0) || !std::isfinite(noise_std))
            fail("noise_std must be finite and >= 0");
        if (leak_width < 1)
            fail("leak_width must be >= 1");
        if (repetitions < 1)
            fail("repetitions must be >= 1");
        const auto [lo, hi] = std::minmax_element(leak_indices.begin(), leak_indices.end());
        if (*hi >= n_samples)
            fail("leak index " + std::to_string(*hi) + " outside trace of " +
                 std::to_string(n_samples) + " samples");
        if (jitter_max + *hi + leak_width > n_samples)
            fail("jitter_max + max(leak_indices) + leak_width exceeds n_samples");
        if (*lo < jitter_max)
            fail("min(leak_indices) must be >= jitter_max");
        if (carrier_freq && !(*carrier_freq > 0.0 && *carrier_freq < sample_rate / 2))
            fail("carrier_freq must be in (0, sample_rate/2)");
        for (const auto &tone : ambient)
            if (!(tone.freq >= 0.0 && tone.freq < sample_rate / 2) || !std::isfinite(tone.amplitude))
                fail("ambient tone outside [0, sample_rate/2)");
    }

    /// True when two leak pulses (with jitter margin) can touch.
    bool overlapping_leaks() const {
        auto idx = leak_indices;
        std::sort(idx.begin(), idx.end());
        for (std::size_t j = 1; j < idx.size(); j++)
            if (idx[j] - idx[j - 1] < leak_width + 2 * jitter_max)
                return true;
        return false;
    }

    /// Sample window that contains byte j's leak for any jitter draw.
    SampleWindow leak_window(unsigned byte_index) const {
        const std::size_t at = leak_indices.at(byte_index);
        return {at - std::min(at, jitter_max), std::min(n_samples, at + leak_width + jitter_max)};
    }
};

namespace detail {

inline void add_ambient(std::vector<double> &acc, const SimConfig &cfg) {
    for (const auto &tone : cfg.ambient)
        for (std::size_t i = 0; i < acc.size(); i++)
            acc[i] += tone.amplitude *
                      std::sin(2.0 * std::numbers::pi * tone.freq * static_cast<double>(i) / cfg.sample_rate);
}

// One averaged trace. `leak_heights` empty means idle (no leak, no carrier).
inline std::vector<float> synthesize(const SimConfig &cfg, std::uint64_t trace_index,
                                     const std::array<double, 8> *leak_heights) {
    const std::size_t n = cfg.n_samples;
    std::vector<double> acc(n, 0.0);
    std::vector<double> one(n);

    std::vector<double> carrier;
    if (leak_heights && cfg.carrier_freq) {
        carrier.resize(n);
        for (std::size_t i = 0; i < n; i++)
            carrier[i] = std::sin(2.0 * std::numbers::pi * *cfg.carrier_freq * static_cast<double>(i) /
                                  cfg.sample_rate);
    }

    for (std::size_t rep = 0; rep < cfg.repetitions; rep++) {
        Xoshiro256ss rng(derive_seed(cfg.seed, trace_index, rep));
        long shift = 0;
        if (cfg.jitter_max > 0)
            shift = static_cast<long>(rng.below(2 * cfg.jitter_max + 1)) - static_cast<long>(cfg.jitter_max);

        std::fill(one.begin(), one.end(), cfg.leak_params.b);
        if (cfg.noise_std > 0.0)
            for (auto &v : one)
                v += cfg.noise_std * rng.gaussian();

        if (leak_heights) {
            for (unsigned j = 0; j < 8; j++) {
                const double h = (*leak_heights)[j];
                const long start = static_cast<long>(cfg.leak_indices[j]) + shift;
                for (std::size_t w = 0; w < cfg.leak_width; w++) {
                    const auto i = static_cast<std::size_t>(start + static_cast<long>(w));
                    one[i] += carrier.empty() ? h : h * carrier[i];
                }
            }
        }
        for (std::size_t i = 0; i < n; i++)
            acc[i] += one[i];
    }

    add_ambient(acc, cfg);
    const double inv = 1.0 / static_cast<double>(cfg.repetitions);
    std::vector<float> out(n);
    for (std::size_t i = 0; i < n; i++)
        out[i] = static_cast<float>(cfg.repetitions == 1 ? acc[i] : acc[i] * inv);
    return out;
}

} // namespace detail

/// 256 states; every byte of state i equals i.
inline std::vector<State64> default_sweep() {
    std::vector<State64> out(256);
    for (unsigned i = 0; i < 256; i++)
        out[i] = 0x0101010101010101ull * i;
    return out;
}

inline std::vector<State64> random_plaintexts(std::size_t n, std::uint64_t seed) {
    Xoshiro256ss rng(derive_seed(seed, 0x706C61696E74ull));
    std::vector<State64> out(n);
    for (auto &p : out)
        p = rng();
    return out;
}

/// Leak heights a*HW(S-box output byte j) for one plaintext.
inline std::array<double, 8> leak_heights(State64 p, const SimConfig &cfg) {
    const State64 k1 = cfg.key.leftmost64();
    std::array<double, 8> h{};
    for (unsigned j = 0; j < 8; j++) {
        const Intermediate d{round1_intermediate_byte(state_byte(p, j), state_byte(k1, j)), j};
        h[j] = leak_energy(d, {cfg.leak_params.a, 0.0});
    }
    return h;
}

inline Trace simulate_trace(State64 p, const SimConfig &cfg, std::uint64_t trace_index) {
    cfg.validate();
    const auto h = leak_heights(p, cfg);
    return Trace{detail::synthesize(cfg, trace_index, &h), state_to_bytes(p), cfg.sample_rate};
}

inline TraceSet simulate_set(const std::vector<State64> &plaintexts, const SimConfig &cfg) {
    if (plaintexts.empty())
        throw std::invalid_argument("simulate_set: empty plaintext list");
    cfg.validate();
    TraceSet ts(plaintexts.size(), cfg.n_samples, cfg.sample_rate);
    for (std::size_t t = 0; t < plaintexts.size(); t++) {
        const auto h = leak_heights(plaintexts[t], cfg);
        ts.set_row(t, detail::synthesize(cfg, t, &h));
        ts.plaintexts()[t] = state_to_bytes(plaintexts[t]);
    }
    ts.provenance().seed = cfg.seed;
    ts.provenance().note = "simulated encryption";
    return ts;
}

inline TraceSet simulate_idle_set(std::size_t n_traces, const SimConfig &cfg) {
    if (n_traces == 0)
        throw std::invalid_argument("simulate_idle_set: n_traces must be >= 1");
    cfg.validate();
    TraceSet ts(n_traces, cfg.n_samples, cfg.sample_rate);
    for (std::size_t t = 0; t < n_traces; t++)
        ts.set_row(t, detail::synthesize(cfg, t, nullptr));
    ts.provenance().idle = true;
    ts.provenance().seed = cfg.seed;
    ts.provenance().note = "simulated idle";
    return ts;
}

} // namespace cematk

#endif // CEMATK_SIM_HPP

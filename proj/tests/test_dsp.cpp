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

#include "cematk/dsp.hpp"
#include "cematk/sim.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace cematk;

namespace {

constexpr double kFs = 250e6;

std::vector<double> tone(std::size_t n, double f, double amp, double phase = 0.0) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; i++)
        x[i] = amp * std::sin(2 * std::numbers::pi * f * double(i) / kFs + phase);
    return x;
}

TraceSet single_row(const std::vector<double> &x) {
    TraceSet ts(1, x.size(), kFs);
    auto r = ts.row(0);
    std::transform(x.begin(), x.end(), r.begin(), [](double v) { return float(v); });
    return ts;
}

double db(double ratio) { return 20 * std::log10(ratio); }

} // namespace

TEST(FftMagnitude, BinCentredToneAmplitude) {
    const std::size_t n = 1000;
    const double df = kFs / double(n);
    const auto x = tone(n, 120 * df, 3.0, 0.4);
    const Spectrum s = fft_magnitude(std::span<const double>(x), kFs);
    EXPECT_EQ(s.n_bins, n / 2 + 1);
    EXPECT_DOUBLE_EQ(s.freq_resolution, df);
    EXPECT_NEAR(s.magnitudes[120], 3.0, 1e-9);
    for (std::size_t k = 0; k < s.n_bins; k++) {
        if (k != 120) {
            EXPECT_LT(s.magnitudes[k], 3.0 * 1e-3) << k; // at least 60 dB down
        }
    }
    EXPECT_EQ(s.bin_of(120 * df), 120u);
}

TEST(FftMagnitude, ConstantAndZero) {
    const std::vector<double> c(64, 2.5);
    const Spectrum s = fft_magnitude(std::span<const double>(c), kFs);
    EXPECT_NEAR(s.magnitudes[0], 2.5, 1e-12);
    for (std::size_t k = 1; k < s.n_bins; k++)
        EXPECT_NEAR(s.magnitudes[k], 0.0, 1e-12);
    const std::vector<double> z(65, 0.0);
    for (double m : fft_magnitude(std::span<const double>(z), kFs).magnitudes)
        EXPECT_EQ(m, 0.0);
    EXPECT_THROW(fft_magnitude(std::span<const double>(z.data(), 1), kFs), std::invalid_argument);
}

TEST(FftMagnitude, HannWindowKeepsToneAmplitude) {
    const std::size_t n = 1024;
    const auto x = tone(n, 100 * kFs / double(n), 1.5);
    const Spectrum s = fft_magnitude(std::span<const double>(x), kFs, Window::hann);
    EXPECT_NEAR(s.magnitudes[100], 1.5, 1e-9);
}

TEST(FftMagnitude, ParsevalIdentity) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (std::size_t n : {1000u, 1001u, 4096u}) {
        std::vector<double> x(n);
        double e = 0;
        for (auto &v : x) {
            v = g(rng) + 0.3;
            e += v * v;
        }
        const Spectrum s = fft_magnitude(std::span<const double>(x), kFs);
        EXPECT_NEAR(spectrum_energy(s) / e, 1.0, 1e-6) << n;
    }
}

TEST(Bandpass, PassesInBandRejectsOutOfBand) {
    const std::size_t n = 2000;
    const double df = kFs / double(n);
    auto x = tone(n, 360 * df, 1.0); // 45 MHz
    const auto y = tone(n, 80 * df, 2.0);
    const auto z = tone(n, 800 * df, 2.0);
    for (std::size_t i = 0; i < n; i++)
        x[i] += y[i] + z[i] + 0.7;
    const TraceSet out = bandpass(single_row(x), 40e6, 50e6);
    const Spectrum s = fft_magnitude(out.trace(0));
    EXPECT_NEAR(s.magnitudes[360], 1.0, 0.01);
    EXPECT_LT(db(s.magnitudes[80] / 2.0), -60);
    EXPECT_LT(db(s.magnitudes[800] / 2.0), -60);
    EXPECT_LT(std::abs(s.magnitudes[0]), 1e-6);
}

TEST(Bandpass, FullBandIsIdentity) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    TraceSet ts(3, 777, kFs);
    for (auto &v : ts.samples())
        v = float(g(rng));
    const TraceSet out = bandpass(ts, 0.0, kFs / 2);
    for (std::size_t i = 0; i < ts.samples().size(); i++)
        EXPECT_NEAR(out.samples()[i], ts.samples()[i], 1e-5);
    EXPECT_EQ(out.plaintexts(), ts.plaintexts());
}

TEST(Bandpass, IdempotentAndLinear) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g;
    TraceSet a(2, 512, kFs), b(2, 512, kFs), sum(2, 512, kFs);
    for (std::size_t i = 0; i < a.samples().size(); i++) {
        a.samples()[i] = float(g(rng));
        b.samples()[i] = float(g(rng));
        sum.samples()[i] = a.samples()[i] + 2.0f * b.samples()[i];
    }
    const TraceSet fa = bandpass(a, 10e6, 60e6);
    const TraceSet ffa = bandpass(fa, 10e6, 60e6);
    for (std::size_t i = 0; i < fa.samples().size(); i++)
        EXPECT_NEAR(ffa.samples()[i], fa.samples()[i], 1e-5);

    const TraceSet fb = bandpass(b, 10e6, 60e6);
    const TraceSet fs = bandpass(sum, 10e6, 60e6);
    for (std::size_t i = 0; i < fs.samples().size(); i++)
        EXPECT_NEAR(fs.samples()[i], fa.samples()[i] + 2.0f * fb.samples()[i], 1e-5);
}

TEST(Bandpass, TransitionGain) {
    EXPECT_EQ(bandpass_gain(45e6, 40e6, 50e6, 0), 1.0);
    EXPECT_EQ(bandpass_gain(39e6, 40e6, 50e6, 0), 0.0);
    EXPECT_NEAR(bandpass_gain(39e6, 40e6, 50e6, 2e6), 0.5, 1e-12);
    EXPECT_NEAR(bandpass_gain(52e6, 40e6, 50e6, 2e6), 0.0, 1e-12);
}

TEST(Bandpass, RejectsBadBands) {
    TraceSet ts(1, 100, kFs);
    EXPECT_THROW(bandpass(ts, 50e6, 40e6), std::invalid_argument);
    EXPECT_THROW(bandpass(ts, -1.0, 40e6), std::invalid_argument);
    EXPECT_THROW(bandpass(ts, 1e6, 126e6), std::invalid_argument);
    EXPECT_THROW(bandpass(ts, 1e6, 10e6, -1.0), std::invalid_argument);
}

TEST(Align, RecoversKnownLags) {
    const std::size_t n = 600;
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    std::vector<float> base(n);
    for (auto &v : base)
        v = float(g(rng));
    const std::vector<long> shifts{0, 3, -7, 12, -12, 1};
    TraceSet ts(shifts.size(), n, kFs);
    for (std::size_t t = 0; t < shifts.size(); t++) {
        auto r = ts.row(t);
        for (std::size_t i = 0; i < n; i++)
            r[i] = base[std::size_t((long(i) - shifts[t] + long(n)) % long(n))];
    }
    std::vector<long> lags;
    const TraceSet out = align(ts, 0, 15, &lags);
    for (std::size_t t = 0; t < shifts.size(); t++) {
        EXPECT_EQ(lags[t], shifts[t]);
        EXPECT_TRUE(std::equal(out.row(t).begin(), out.row(t).end(), base.begin())) << t;
    }
}

TEST(Align, AlignedInputUnchangedAndMultisetPreserved) {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> g;
    TraceSet ts(4, 300, kFs);
    for (std::size_t i = 0; i < 300; i++) {
        const float v = float(g(rng));
        for (std::size_t t = 0; t < 4; t++)
            ts.row(t)[i] = v * float(t + 1);
    }
    EXPECT_EQ(align(ts, 2, 20).samples(), ts.samples());

    TraceSet noisy(5, 300, kFs);
    for (auto &v : noisy.samples())
        v = float(g(rng));
    const TraceSet out = align(noisy, 0, 25);
    for (std::size_t t = 0; t < 5; t++) {
        std::vector<float> a(noisy.row(t).begin(), noisy.row(t).end());
        std::vector<float> b(out.row(t).begin(), out.row(t).end());
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        EXPECT_EQ(a, b);
    }
}

TEST(Align, UndoesSimulatedJitter) {
    SimConfig c;
    c.n_samples = 1000;
    c.leak_indices = {100, 200, 300, 400, 500, 600, 700, 800};
    c.leak_width = 5;
    c.jitter_max = 10;
    c.seed = 77;
    const TraceSet ts = simulate_set(std::vector<State64>(30, 0x0123456789ABCDEFull), c);
    std::vector<long> lags;
    const TraceSet out = align(ts, 0, 2 * c.jitter_max, &lags);
    EXPECT_TRUE(std::any_of(lags.begin(), lags.end(), [](long l) { return l != 0; }));
    for (std::size_t t = 0; t < out.n_traces(); t++)
        EXPECT_TRUE(std::equal(out.row(t).begin(), out.row(t).end(), out.row(0).begin())) << t;
}

TEST(Align, Errors) {
    TraceSet ts(2, 10, kFs);
    EXPECT_THROW(align(ts, 2, 1), std::out_of_range);
    EXPECT_THROW(align(ts, 0, 5), std::invalid_argument);
}

TEST(Average, OppositeTracesCancel) {
    TraceSet ts(2, 50, kFs);
    for (std::size_t i = 0; i < 50; i++) {
        ts.row(0)[i] = float(i) * 0.25f;
        ts.row(1)[i] = -float(i) * 0.25f;
    }
    for (float v : average(ts).samples)
        EXPECT_EQ(v, 0.0f);
}

TEST(Average, ReducesNoiseBySqrtN) {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g;
    const std::size_t n = 2000;
    const auto clean = tone(n, 10e6, 1.0);
    TraceSet ts(100, n, kFs);
    for (std::size_t t = 0; t < 100; t++)
        for (std::size_t i = 0; i < n; i++)
            ts.row(t)[i] = float(clean[i] + g(rng));
    const auto avg = average_samples(ts);
    double e = 0;
    for (std::size_t i = 0; i < n; i++)
        e += (avg[i] - clean[i]) * (avg[i] - clean[i]);
    const double residual_std = std::sqrt(e / double(n));
    EXPECT_NEAR(residual_std, 0.1, 0.01);
}

TEST(SpectralDiff, FindsCarrierWithinOneBin) {
    SimConfig c;
    c.carrier_freq = 45.08e6;
    c.noise_std = 0.5;
    c.seed = 4;
    const TraceSet enc = simulate_set(random_plaintexts(64, 2), c);
    const TraceSet idle = simulate_idle_set(64, c);
    const SpectralDiffReport r = spectral_diff(enc, idle);
    EXPECT_TRUE(std::any_of(r.new_components.begin(), r.new_components.end(), [&](const SpectralComponent &k) {
        return std::abs(k.freq - 45.08e6) <= r.freq_resolution;
    }));
    EXPECT_GT(r.enc_rms, r.idle_rms);
}

TEST(SpectralDiff, IdenticalSetsReportNothing) {
    SimConfig c;
    c.noise_std = 1.0;
    c.ambient = {{12.5e6, 0.8}, {80e6, 0.3}};
    const TraceSet idle = simulate_idle_set(16, c);
    const SpectralDiffReport r = spectral_diff(idle, idle);
    EXPECT_TRUE(r.new_components.empty());
    EXPECT_TRUE(r.amplified_components.empty());
}

TEST(SpectralDiff, ReportsAmplifiedTone) {
    const std::size_t n = 1000;
    const double f = 200 * kFs / double(n);
    const TraceSet idle = single_row(tone(n, f, 1.0));
    const TraceSet enc = single_row(tone(n, f, 2.0));
    const SpectralDiffReport r = spectral_diff(enc, idle);
    EXPECT_TRUE(r.new_components.empty());
    ASSERT_EQ(r.amplified_components.size(), 1u);
    EXPECT_DOUBLE_EQ(r.amplified_components[0].freq, f);
    EXPECT_NEAR(r.amplified_components[0].ratio, 2.0, 1e-6);
}

TEST(SpectralDiff, Errors) {
    TraceSet a(1, 100, kFs), b(1, 101, kFs);
    EXPECT_THROW(spectral_diff(a, b), std::invalid_argument);
    EXPECT_THROW(spectral_diff(a, a, 0.5), std::invalid_argument);
    EXPECT_THROW(spectral_diff(a, a, 10, 1.0), std::invalid_argument);
}

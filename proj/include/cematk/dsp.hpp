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

// Signal conditioning for trace sets: magnitude spectra, zero-phase
// frequency-domain bandpass, cross-correlation alignment, averaging, and the
// spectral comparison used for simple EM analysis.
//
// Spectrum scaling is single-sided amplitude: a sinusoid of amplitude A at a
// bin-centred frequency shows magnitude A, a constant c shows c in bin 0.
// With m_k the magnitudes and N samples, Parseval reads
//   sum x^2 = N*m_0^2 + (N/2)*sum_{0<k<N/2} m_k^2 + N*m_{N/2}^2  (N even).

#ifndef CEMATK_DSP_HPP
#define CEMATK_DSP_HPP

#include "cematk/trace.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cematk {

enum class Window { rectangular, hann };

struct Spectrum {
    std::vector<double> magnitudes;
    double freq_resolution = 0.0;
    std::size_t n_bins = 0;
    std::size_t n_samples = 0;

    double frequency(std::size_t bin) const { return static_cast<double>(bin) * freq_resolution; }

    std::size_t bin_of(double freq) const {
        return static_cast<std::size_t>(std::lround(freq / freq_resolution));
    }
};

namespace detail {

inline std::mutex &fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

// Real-to-complex / complex-to-real transforms of one length.
class RealFft {
  public:
    explicit RealFft(std::size_t n) : n_(n) {
        if (n < 2)
            throw std::invalid_argument("FFT length must be >= 2");
        real_ = fftw_alloc_real(n);
        spec_ = fftw_alloc_complex(n / 2 + 1);
        if (!real_ || !spec_)
            throw std::bad_alloc();
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_, spec_, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec_, real_, FFTW_ESTIMATE);
    }

    RealFft(const RealFft &) = delete;
    RealFft &operator=(const RealFft &) = delete;

    ~RealFft() {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
        fftw_free(real_);
        fftw_free(spec_);
    }

    std::size_t size() const { return n_; }
    std::size_t bins() const { return n_ / 2 + 1; }

    std::span<double> real() { return {real_, n_}; }
    std::complex<double> *spectrum() { return reinterpret_cast<std::complex<double> *>(spec_); }

    void forward() { fftw_execute(forward_); }
    /// Unnormalized: output is n times the inverse transform.
    void backward() { fftw_execute(backward_); }

  private:
    std::size_t n_;
    double *real_ = nullptr;
    fftw_complex *spec_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

template <typename T>
Spectrum magnitude_spectrum(std::span<const T> x, double sample_rate, Window window) {
    const std::size_t n = x.size();
    if (n < 2)
        throw std::invalid_argument("fft_magnitude: need at least 2 samples");
    RealFft fft(n);
    auto in = fft.real();
    double coherent_gain = 1.0;
    if (window == Window::hann) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; i++) {
            const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                                  static_cast<double>(n));
            in[i] = static_cast<double>(x[i]) * w;
            sum += w;
        }
        coherent_gain = sum / static_cast<double>(n);
    } else {
        for (std::size_t i = 0; i < n; i++)
            in[i] = static_cast<double>(x[i]);
    }
    fft.forward();

    Spectrum s;
    s.n_samples = n;
    s.n_bins = fft.bins();
    s.freq_resolution = sample_rate / static_cast<double>(n);
    s.magnitudes.resize(s.n_bins);
    const auto *X = fft.spectrum();
    const double scale = 1.0 / (static_cast<double>(n) * coherent_gain);
    for (std::size_t k = 0; k < s.n_bins; k++) {
        const bool edge = k == 0 || (n % 2 == 0 && k == n / 2);
        s.magnitudes[k] = std::abs(X[k]) * scale * (edge ? 1.0 : 2.0);
    }
    return s;
}

} // namespace detail

/// Magnitude spectrum, bins 0..N/2. Rectangular window unless requested.
inline Spectrum fft_magnitude(const Trace &t, Window window = Window::rectangular) {
    return detail::magnitude_spectrum(std::span<const float>(t.samples), t.sample_rate, window);
}

inline Spectrum fft_magnitude(std::span<const double> x, double sample_rate,
                              Window window = Window::rectangular) {
    return detail::magnitude_spectrum(x, sample_rate, window);
}

/// Time-domain energy implied by a rectangular-window spectrum (Parseval).
inline double spectrum_energy(const Spectrum &s) {
    const double n = static_cast<double>(s.n_samples);
    double e = 0.0;
    for (std::size_t k = 0; k < s.n_bins; k++) {
        const double m2 = s.magnitudes[k] * s.magnitudes[k];
        const bool edge = k == 0 || (s.n_samples % 2 == 0 && k == s.n_samples / 2);
        e += edge ? n * m2 : 0.5 * n * m2;
    }
    return e;
}

/// Gain of the bandpass at frequency f: 1 inside [lo, hi], raised-cosine
/// taper over `transition` Hz on each side, 0 beyond.
inline double bandpass_gain(double f, double lo, double hi, double transition) {
    if (f >= lo && f <= hi)
        return 1.0;
    const double d = f < lo ? lo - f : f - hi;
    if (transition <= 0.0 || d >= transition)
        return 0.0;
    return 0.5 * (1.0 + std::cos(std::numbers::pi * d / transition));
}

/// Zero-phase bandpass: FFT, per-bin gain, inverse FFT. Trace count and
/// length are unchanged; the input is not modified.
inline TraceSet bandpass(const TraceSet &ts, double f_lo, double f_hi, double transition = 0.0) {
    const double nyquist = ts.sample_rate() / 2;
    if (!(f_lo >= 0.0 && f_lo < f_hi && f_hi <= nyquist))
        throw std::invalid_argument("bandpass: need 0 <= lo < hi <= sample_rate/2, got [" +
                                    std::to_string(f_lo) + ", " + std::to_string(f_hi) + "]");
    if (!(transition >= 0.0))
        throw std::invalid_argument("bandpass: transition width must be >= 0");

    const std::size_t n = ts.n_samples();
    detail::RealFft fft(n);
    std::vector<double> gain(fft.bins());
    const double df = ts.sample_rate() / static_cast<double>(n);
    for (std::size_t k = 0; k < gain.size(); k++)
        gain[k] = bandpass_gain(static_cast<double>(k) * df, f_lo, f_hi, transition) / static_cast<double>(n);

    TraceSet out = ts.like();
    auto buf = fft.real();
    for (std::size_t t = 0; t < ts.n_traces(); t++) {
        const auto row = ts.row(t);
        std::copy(row.begin(), row.end(), buf.begin());
        fft.forward();
        auto *X = fft.spectrum();
        for (std::size_t k = 0; k < gain.size(); k++)
            X[k] *= gain[k];
        fft.backward();
        auto dst = out.row(t);
        for (std::size_t i = 0; i < n; i++)
            dst[i] = static_cast<float>(buf[i]);
    }
    return out;
}

/// Circular lag in [-max_shift, max_shift] maximizing the mean-removed
/// cross-correlation sum_i x[i + lag] * ref[i]. Ties go to the smallest |lag|,
/// then to the negative lag.
inline long best_lag(std::span<const float> x, std::span<const float> ref, std::size_t max_shift) {
    const std::size_t n = x.size();
    double mx = 0.0, mr = 0.0;
    for (std::size_t i = 0; i < n; i++) {
        mx += x[i];
        mr += ref[i];
    }
    mx /= static_cast<double>(n);
    mr /= static_cast<double>(n);
    std::vector<double> xc(n), rc(n);
    for (std::size_t i = 0; i < n; i++) {
        xc[i] = x[i] - mx;
        rc[i] = ref[i] - mr;
    }
    const long m = static_cast<long>(max_shift);
    const long ln = static_cast<long>(n);
    long best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    // Candidate order 0, -1, +1, -2, +2, ... with strict improvement gives
    // the documented tie-break.
    for (long c = 0; c <= 2 * m; c++) {
        const long lag = c == 0 ? 0 : (c % 2 == 1 ? -(c + 1) / 2 : c / 2);
        const auto off = static_cast<std::size_t>(((lag % ln) + ln) % ln);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; i++) {
            std::size_t j = i + off;
            if (j >= n)
                j -= n;
            acc += xc[j] * rc[i];
        }
        if (acc > best_value) {
            best_value = acc;
            best = lag;
        }
    }
    return best;
}

/// Circularly shifts each trace so that it best matches trace `reference`.
/// Circular shifts suit stationary simulated records; real captures with
/// edge transients should be windowed first.
inline TraceSet align(const TraceSet &ts, std::size_t reference, std::size_t max_shift,
                      std::vector<long> *lags = nullptr) {
    if (reference >= ts.n_traces())
        throw std::out_of_range("align: reference index " + std::to_string(reference) +
                                " out of range");
    const std::size_t n = ts.n_samples();
    if (2 * max_shift >= n)
        throw std::invalid_argument("align: max_shift must be < n_samples/2");
    TraceSet out = ts.like();
    if (lags)
        lags->assign(ts.n_traces(), 0);
    const auto ref = ts.row(reference);
    for (std::size_t t = 0; t < ts.n_traces(); t++) {
        const auto x = ts.row(t);
        const long lag = best_lag(x, ref, max_shift);
        if (lags)
            (*lags)[t] = lag;
        const std::size_t off = static_cast<std::size_t>((lag % static_cast<long>(n) + static_cast<long>(n)) %
                                                         static_cast<long>(n));
        auto dst = out.row(t);
        for (std::size_t i = 0; i < n; i++) {
            std::size_t j = i + off;
            if (j >= n)
                j -= n;
            dst[i] = x[j];
        }
    }
    return out;
}

/// Per-sample arithmetic mean, accumulated in double.
inline std::vector<double> average_samples(const TraceSet &ts) {
    std::vector<double> acc(ts.n_samples(), 0.0);
    for (std::size_t t = 0; t < ts.n_traces(); t++) {
        const auto row = ts.row(t);
        for (std::size_t i = 0; i < acc.size(); i++)
            acc[i] += row[i];
    }
    for (auto &v : acc)
        v /= static_cast<double>(ts.n_traces());
    return acc;
}

inline Trace average(const TraceSet &ts) {
    const auto acc = average_samples(ts);
    Trace out;
    out.sample_rate = ts.sample_rate();
    out.samples.assign(acc.begin(), acc.end());
    return out;
}

struct SpectralComponent {
    double freq = 0.0;
    double enc_magnitude = 0.0;
    double idle_magnitude = 0.0;
    /// enc / idle; infinite when the idle bin is exactly zero.
    double ratio = 0.0;
};

struct SpectralDiffReport {
    std::vector<SpectralComponent> new_components;
    std::vector<SpectralComponent> amplified_components;
    double new_ratio = 0.0;
    double threshold_used = 0.0; ///< amplification ratio threshold
    double noise_floor = 0.0;
    double freq_resolution = 0.0;
    double sample_rate = 0.0;
    // Time-domain level comparison of the two averaged traces.
    double enc_mean = 0.0;
    double idle_mean = 0.0;
    double enc_rms = 0.0;
    double idle_rms = 0.0;
    Spectrum enc_spectrum;
    Spectrum idle_spectrum;
};

/// Compares the magnitude spectra of the averaged encryption and idle sets.
///
/// The noise floor is the median idle magnitude, but never below float
/// resolution of the largest magnitude. A bin is present in idle
/// when its idle magnitude reaches new_ratio * floor. Local maxima of the
/// encryption spectrum are reported as new when absent from idle and above
/// new_ratio * floor, and as amplified when present in idle with
/// enc/idle >= amp_ratio. DC and the Nyquist bin are excluded.
inline SpectralDiffReport spectral_diff(const TraceSet &enc, const TraceSet &idle,
                                        double new_ratio = 10.0, double amp_ratio = 1.5) {
    if (enc.n_samples() != idle.n_samples() || enc.sample_rate() != idle.sample_rate())
        throw std::invalid_argument("spectral_diff: sets differ in n_samples or sample_rate");
    if (!(new_ratio >= 1.0) || !(amp_ratio > 1.0))
        throw std::invalid_argument("spectral_diff: need new_ratio >= 1 and amp_ratio > 1");

    const auto enc_avg = average_samples(enc);
    const auto idle_avg = average_samples(idle);

    SpectralDiffReport r;
    r.new_ratio = new_ratio;
    r.threshold_used = amp_ratio;
    r.sample_rate = enc.sample_rate();
    r.enc_spectrum = fft_magnitude(enc_avg, enc.sample_rate());
    r.idle_spectrum = fft_magnitude(idle_avg, idle.sample_rate());
    r.freq_resolution = r.enc_spectrum.freq_resolution;

    auto level = [](const std::vector<double> &x, double &mean, double &rms) {
        double s = 0.0, s2 = 0.0;
        for (double v : x) {
            s += v;
            s2 += v * v;
        }
        mean = s / static_cast<double>(x.size());
        rms = std::sqrt(s2 / static_cast<double>(x.size()));
    };
    level(enc_avg, r.enc_mean, r.enc_rms);
    level(idle_avg, r.idle_mean, r.idle_rms);

    const auto &E = r.enc_spectrum.magnitudes;
    const auto &I = r.idle_spectrum.magnitudes;
    const std::size_t n = enc.n_samples();
    const std::size_t last = n % 2 == 0 ? E.size() - 1 : E.size(); // exclude Nyquist

    std::vector<double> sorted(I.begin() + 1, I.begin() + static_cast<long>(last));
    double floor = 0.0;
    if (!sorted.empty()) {
        auto mid = sorted.begin() + static_cast<long>(sorted.size() / 2);
        std::nth_element(sorted.begin(), mid, sorted.end());
        floor = *mid;
    }
    const double peak = std::max(*std::max_element(E.begin(), E.end()), *std::max_element(I.begin(), I.end()));
    // Samples are stored as float; nothing below float resolution of the peak is signal.
    floor = std::max(floor, static_cast<double>(std::numeric_limits<float>::epsilon()) * peak);
    floor = std::max(floor, std::numeric_limits<double>::min());
    r.noise_floor = floor;
    const double present_level = new_ratio * floor;

    for (std::size_t k = 1; k < last; k++) {
        const bool local_max = E[k] >= E[k - 1] && (k + 1 >= E.size() || E[k] >= E[k + 1]);
        if (!local_max)
            continue;
        SpectralComponent c{r.enc_spectrum.frequency(k), E[k], I[k],
                            I[k] > 0.0 ? E[k] / I[k] : std::numeric_limits<double>::infinity()};
        if (I[k] < present_level) {
            if (E[k] >= present_level)
                r.new_components.push_back(c);
        } else if (c.ratio >= amp_ratio) {
            r.amplified_components.push_back(c);
        }
    }
    auto by_magnitude = [](const SpectralComponent &a, const SpectralComponent &b) {
        return a.enc_magnitude != b.enc_magnitude ? a.enc_magnitude > b.enc_magnitude : a.freq < b.freq;
    };
    std::sort(r.new_components.begin(), r.new_components.end(), by_magnitude);
    std::sort(r.amplified_components.begin(), r.amplified_components.end(), by_magnitude);
    return r;
}

} // namespace cematk

#endif // CEMATK_DSP_HPP

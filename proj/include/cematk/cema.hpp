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

// Correlation electromagnetic analysis of the first PRESENT round.
//
// For a target state byte j and each of the 256 key-byte hypotheses k, the
// predicted leakage of trace t is HW(S(hi) || S(lo)) of plaintext_t[j] XOR k.
// Pearson's coefficient between that prediction and every sample column gives
// a 256 x n_samples correlation surface; the score of k is max |rho| over the
// samples, since leakage shows up as troughs as well as peaks.

#ifndef CEMATK_CEMA_HPP
#define CEMATK_CEMA_HPP

#include "cematk/dsp.hpp"
#include "cematk/leakage.hpp"
#include "cematk/present.hpp"
#include "cematk/trace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace cematk {

inline constexpr std::size_t kKeyCandidates = 256;

struct HypothesisMatrix {
    unsigned byte_index = 0;
    std::size_t n_traces = 0;
    /// Row-major kKeyCandidates x n_traces, entries in [0, 8].
    std::vector<std::uint8_t> hw;

    std::uint8_t at(std::size_t key, std::size_t trace) const { return hw[key * n_traces + trace]; }
};

inline HypothesisMatrix build_hypotheses(std::span<const Plaintext> plaintexts, unsigned byte_index) {
    if (byte_index >= 8)
        throw std::out_of_range("byte_index must be < 8");
    HypothesisMatrix h;
    h.byte_index = byte_index;
    h.n_traces = plaintexts.size();
    h.hw.resize(kKeyCandidates * h.n_traces);
    for (std::size_t k = 0; k < kKeyCandidates; k++)
        for (std::size_t t = 0; t < h.n_traces; t++)
            h.hw[k * h.n_traces + t] = kByteLeak[plaintexts[t][byte_index] ^ k];
    return h;
}

struct PearsonResult {
    double rho = 0.0;
    /// Set when either input has zero variance; rho is then 0.
    bool degenerate = false;
};

/// Two-pass sample Pearson coefficient.
inline PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("pearson: need two sequences of equal length >= 2");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); i++) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0)
        return {0.0, true};
    return {std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0), false};
}

struct CorrelationSurface {
    unsigned byte_index = 0;
    std::size_t n_samples = 0;
    /// Absolute index of column 0 in the source traces.
    std::size_t sample_offset = 0;
    /// Row-major kKeyCandidates x n_samples.
    std::vector<double> rho;
    /// 1 where rho was forced to 0 because a variance vanished.
    std::vector<std::uint8_t> degenerate;

    double at(std::size_t key, std::size_t s) const { return rho[key * n_samples + s]; }
    bool is_degenerate(std::size_t key, std::size_t s) const { return degenerate[key * n_samples + s] != 0; }
};

namespace detail {

inline SampleWindow resolve_window(const std::optional<SampleWindow> &w, std::size_t n_samples) {
    if (!w)
        return {0, n_samples};
    if (w->lo >= w->hi || w->hi > n_samples)
        throw std::invalid_argument("sample window [" + std::to_string(w->lo) + ", " + std::to_string(w->hi) +
                                    ") is empty or exceeds " + std::to_string(n_samples) + " samples");
    return *w;
}

// Pearson from shifted one-pass sums. Variances below a few ulps of the raw
// second moment are treated as zero.
inline PearsonResult rho_from_sums(double n, double sh, double shh, double sx, double sxx, double shx) {
    const double varh = shh - sh * sh / n;
    const double varx = sxx - sx * sx / n;
    if (varh <= 64 * std::numeric_limits<double>::epsilon() * shh ||
        varx <= 64 * std::numeric_limits<double>::epsilon() * sxx)
        return {0.0, true};
    const double cov = shx - sh * sx / n;
    return {std::clamp(cov / std::sqrt(varh * varx), -1.0, 1.0), false};
}

// Neumaier-compensated running sums stored as parallel arrays.
struct CompensatedArray {
    std::vector<double> sum, comp;

    explicit CompensatedArray(std::size_t n = 0) : sum(n, 0.0), comp(n, 0.0) {}

    void add(std::size_t i, double v) {
        const double s = sum[i];
        const double t = s + v;
        comp[i] += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
        sum[i] = t;
    }

    double value(std::size_t i) const { return sum[i] + comp[i]; }
};

} // namespace detail

/// Correlates every hypothesis row with every sample column in `window`.
/// One pass over the traces; sample columns are shifted by the first trace's
/// values before accumulation to avoid cancellation.
inline CorrelationSurface correlate(const TraceSet &ts, const HypothesisMatrix &h,
                                    const std::optional<SampleWindow> &window = std::nullopt) {
    if (h.n_traces != ts.n_traces())
        throw std::invalid_argument("correlate: hypothesis matrix has " + std::to_string(h.n_traces) +
                                    " columns but trace set has " + std::to_string(ts.n_traces()) + " traces");
    if (ts.n_traces() < 2)
        throw std::invalid_argument("correlate: need at least 2 traces");
    const SampleWindow w = detail::resolve_window(window, ts.n_samples());
    const std::size_t ns = w.size();
    const std::size_t nt = ts.n_traces();

    std::vector<double> shift(ns), sx(ns, 0.0), sxx(ns, 0.0), shx(kKeyCandidates * ns, 0.0), xs(ns);
    std::array<double, kKeyCandidates> sh{}, shh{};
    for (std::size_t s = 0; s < ns; s++)
        shift[s] = ts.at(0, w.lo + s);

    for (std::size_t t = 0; t < nt; t++) {
        const auto row = ts.row(t);
        for (std::size_t s = 0; s < ns; s++) {
            xs[s] = static_cast<double>(row[w.lo + s]) - shift[s];
            sx[s] += xs[s];
            sxx[s] += xs[s] * xs[s];
        }
        for (std::size_t k = 0; k < kKeyCandidates; k++) {
            const double hv = h.at(k, t);
            sh[k] += hv;
            shh[k] += hv * hv;
            if (hv == 0.0)
                continue;
            double *dst = shx.data() + k * ns;
            for (std::size_t s = 0; s < ns; s++)
                dst[s] += hv * xs[s];
        }
    }

    CorrelationSurface out;
    out.byte_index = h.byte_index;
    out.n_samples = ns;
    out.sample_offset = w.lo;
    out.rho.assign(kKeyCandidates * ns, 0.0);
    out.degenerate.assign(kKeyCandidates * ns, 0);
    const double n = static_cast<double>(nt);
    for (std::size_t k = 0; k < kKeyCandidates; k++)
        for (std::size_t s = 0; s < ns; s++) {
            const auto r = detail::rho_from_sums(n, sh[k], shh[k], sx[s], sxx[s], shx[k * ns + s]);
            out.rho[k * ns + s] = r.rho;
            out.degenerate[k * ns + s] = r.degenerate;
        }
    return out;
}

/// Streaming correlation for the round-1 HW model of one byte position.
///
/// Because HW(S(hi)||S(lo)) = HW(S(hi)) + HW(S(lo)), the cross sums for all
/// 256 hypotheses follow from per-nibble-value sums of the traces, so only
/// 32 compensated accumulators per sample are needed. Traces may be added in
/// any number of chunks.
class RoundOneAccumulator {
  public:
    RoundOneAccumulator(unsigned byte_index, SampleWindow window)
        : byte_index_(byte_index), window_(window), shift_(window.size()), sx_(window.size()),
          sxx_(window.size()), hi_(16 * window.size()), lo_(16 * window.size()) {
        if (byte_index >= 8)
            throw std::out_of_range("byte_index must be < 8");
        if (window.size() == 0)
            throw std::invalid_argument("empty sample window");
    }

    unsigned byte_index() const { return byte_index_; }
    std::size_t n_traces() const { return n_; }

    void add(const Plaintext &pt, std::span<const float> samples) {
        if (samples.size() < window_.hi)
            throw std::invalid_argument("trace shorter than accumulator window");
        const std::size_t ns = window_.size();
        const float *x = samples.data() + window_.lo;
        if (n_ == 0)
            for (std::size_t s = 0; s < ns; s++)
                shift_[s] = x[s];
        const std::uint8_t v = pt[byte_index_];
        counts_[v]++;
        const std::size_t hi_base = (v >> 4) * ns, lo_base = (v & 0xF) * ns;
        for (std::size_t s = 0; s < ns; s++) {
            const double d = static_cast<double>(x[s]) - shift_[s];
            sx_.add(s, d);
            sxx_.add(s, d * d);
            hi_.add(hi_base + s, d);
            lo_.add(lo_base + s, d);
        }
        n_++;
    }

    void add(const TraceSet &ts) {
        for (std::size_t t = 0; t < ts.n_traces(); t++)
            add(ts.plaintexts()[t], ts.row(t));
    }

    CorrelationSurface finalize() const {
        if (n_ < 2)
            throw std::invalid_argument("correlation needs at least 2 traces");
        const std::size_t ns = window_.size();
        std::array<double, kKeyCandidates> sh{}, shh{};
        for (std::size_t k = 0; k < kKeyCandidates; k++)
            for (std::size_t v = 0; v < 256; v++) {
                if (!counts_[v])
                    continue;
                const double hv = kByteLeak[v ^ k];
                sh[k] += static_cast<double>(counts_[v]) * hv;
                shh[k] += static_cast<double>(counts_[v]) * hv * hv;
            }

        CorrelationSurface out;
        out.byte_index = byte_index_;
        out.n_samples = ns;
        out.sample_offset = window_.lo;
        out.rho.assign(kKeyCandidates * ns, 0.0);
        out.degenerate.assign(kKeyCandidates * ns, 0);
        const double n = static_cast<double>(n_);
        std::array<double, 16> a_hi{}, a_lo{}, h_hi{}, h_lo{};
        for (std::size_t s = 0; s < ns; s++) {
            for (std::size_t v = 0; v < 16; v++) {
                a_hi[v] = hi_.value(v * ns + s);
                a_lo[v] = lo_.value(v * ns + s);
            }
            for (std::size_t k = 0; k < 16; k++) {
                double th = 0.0, tl = 0.0;
                for (std::size_t v = 0; v < 16; v++) {
                    th += kNibbleLeak[v ^ k] * a_hi[v];
                    tl += kNibbleLeak[v ^ k] * a_lo[v];
                }
                h_hi[k] = th;
                h_lo[k] = tl;
            }
            const double sx = sx_.value(s), sxx = sxx_.value(s);
            for (std::size_t k = 0; k < kKeyCandidates; k++) {
                const auto r = detail::rho_from_sums(n, sh[k], shh[k], sx, sxx, h_hi[k >> 4] + h_lo[k & 0xF]);
                out.rho[k * ns + s] = r.rho;
                out.degenerate[k * ns + s] = r.degenerate;
            }
        }
        return out;
    }

  private:
    unsigned byte_index_;
    SampleWindow window_;
    std::size_t n_ = 0;
    std::array<std::size_t, 256> counts_{};
    std::vector<double> shift_;
    detail::CompensatedArray sx_, sxx_, hi_, lo_;
};

/// Same surface as correlate(ts, build_hypotheses(...)) via the streaming
/// round-1 accumulator.
inline CorrelationSurface correlate_round1(const TraceSet &ts, unsigned byte_index,
                                           const std::optional<SampleWindow> &window = std::nullopt) {
    RoundOneAccumulator acc(byte_index, detail::resolve_window(window, ts.n_samples()));
    acc.add(ts);
    return acc.finalize();
}

struct RankEntry {
    std::uint8_t key_byte = 0;
    double score = 0.0;     ///< max |rho| over samples
    std::size_t sample = 0; ///< absolute sample index of the peak
    int sign = 0;           ///< sign of rho at the peak
};

struct KeyRanking {
    unsigned byte_index = 0;
    /// Descending score; ties by ascending key byte.
    std::array<RankEntry, kKeyCandidates> entries{};

    /// 0-based rank of `key_byte`.
    std::size_t rank_of(std::uint8_t key_byte) const {
        for (std::size_t i = 0; i < entries.size(); i++)
            if (entries[i].key_byte == key_byte)
                return i;
        return entries.size();
    }
};

inline KeyRanking rank_keys(const CorrelationSurface &surface) {
    KeyRanking r;
    r.byte_index = surface.byte_index;
    for (std::size_t k = 0; k < kKeyCandidates; k++) {
        RankEntry e;
        e.key_byte = static_cast<std::uint8_t>(k);
        e.sample = surface.sample_offset;
        for (std::size_t s = 0; s < surface.n_samples; s++) {
            const double v = surface.at(k, s);
            if (std::abs(v) > e.score) {
                e.score = std::abs(v);
                e.sample = surface.sample_offset + s;
                e.sign = v > 0 ? 1 : -1;
            }
        }
        r.entries[k] = e;
    }
    std::stable_sort(r.entries.begin(), r.entries.end(),
                     [](const RankEntry &a, const RankEntry &b) { return a.score > b.score; });
    return r;
}

struct FrequencyBand {
    double lo = 0.0;
    double hi = 0.0;
    double transition = 0.0;
};

struct AttackOptions {
    std::optional<FrequencyBand> band;
    /// Applied to every byte without its own window.
    std::optional<SampleWindow> window;
    /// Per-byte windows, e.g. from a trigger marking each S-box lookup.
    std::array<std::optional<SampleWindow>, 8> byte_windows{};
    std::vector<unsigned> bytes{0, 1, 2, 3, 4, 5, 6, 7};
    bool keep_surfaces = false;
    unsigned threads = 1;
};

struct AttackDiagnostics {
    std::size_t traces_used = 0;
    std::array<SampleWindow, 8> windows{};
    std::optional<FrequencyBand> band;
};

struct AttackResult {
    std::array<std::optional<KeyRanking>, 8> rankings;
    /// Rank-1 bytes assembled at their state positions; unattacked bytes are 0.
    State64 k1 = 0;
    std::uint8_t attacked_mask = 0;
    std::optional<KeyRegister> full_key;
    AttackDiagnostics diagnostics;
    std::vector<CorrelationSurface> surfaces;
};

inline AttackResult attack_round_key(const TraceSet &input, const AttackOptions &options = {}) {
    if (input.n_traces() < 2)
        throw std::invalid_argument("attack needs at least 2 traces");
    for (unsigned b : options.bytes)
        if (b >= 8)
            throw std::out_of_range("byte position " + std::to_string(b) + " out of range 0..7");

    std::optional<TraceSet> filtered;
    if (options.band)
        filtered = bandpass(input, options.band->lo, options.band->hi, options.band->transition);
    const TraceSet &ts = filtered ? *filtered : input;

    AttackResult result;
    result.diagnostics.traces_used = ts.n_traces();
    result.diagnostics.band = options.band;

    std::vector<RoundOneAccumulator> accs;
    for (unsigned b : options.bytes) {
        const auto &bw = options.byte_windows[b] ? options.byte_windows[b] : options.window;
        const SampleWindow w = detail::resolve_window(bw, ts.n_samples());
        result.diagnostics.windows[b] = w;
        accs.emplace_back(b, w);
    }

    std::vector<CorrelationSurface> surfaces(accs.size());
    auto work = [&](std::size_t first, std::size_t step) {
        for (std::size_t i = first; i < accs.size(); i += step) {
            accs[i].add(ts);
            surfaces[i] = accs[i].finalize();
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(options.threads, 1, std::max<std::size_t>(1, accs.size()));
    if (threads == 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < threads; i++)
            pool.emplace_back(work, i, threads);
    }

    for (std::size_t i = 0; i < accs.size(); i++) {
        const unsigned b = accs[i].byte_index();
        auto ranking = rank_keys(surfaces[i]);
        result.k1 |= State64{ranking.entries[0].key_byte} << (56 - 8 * b);
        result.attacked_mask |= static_cast<std::uint8_t>(1u << b);
        result.rankings[b] = ranking;
        if (options.keep_surfaces)
            result.surfaces.push_back(std::move(surfaces[i]));
    }
    return result;
}

struct FullKeySearch {
    enum class Status { found, not_found, ambiguous };

    Status status = Status::not_found;
    std::vector<KeyRegister> matches;
    std::size_t candidates = 0;

    std::optional<KeyRegister> key() const {
        if (status == Status::found)
            return matches.front();
        return std::nullopt;
    }
};

/// Completes an 80-bit key from its first round key K1 (the top 64 register
/// bits) by testing all 2^16 values of the remaining bits on a known pair.
inline FullKeySearch recover_full_key(State64 k1, State64 plaintext, State64 ciphertext) {
    FullKeySearch out;
    const KeyRegister::Word top = static_cast<KeyRegister::Word>(k1) << 16;
    for (std::uint32_t low = 0; low < (1u << 16); low++) {
        const KeyRegister key(80, top | low);
        out.candidates++;
        if (present::encrypt_block(plaintext, key) == ciphertext)
            out.matches.push_back(key);
    }
    if (out.matches.size() == 1)
        out.status = FullKeySearch::Status::found;
    else if (out.matches.size() > 1)
        out.status = FullKeySearch::Status::ambiguous;
    return out;
}

} // namespace cematk

#endif // CEMATK_CEMA_HPP

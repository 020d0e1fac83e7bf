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

#ifndef CEMATK_TRACE_HPP
#define CEMATK_TRACE_HPP

#include "cematk/present.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cematk {

using Plaintext = std::array<std::uint8_t, 8>;

/// Half-open sample range [lo, hi).
struct SampleWindow {
    std::size_t lo = 0;
    std::size_t hi = 0;

    std::size_t size() const { return hi > lo ? hi - lo : 0; }
    friend bool operator==(const SampleWindow &, const SampleWindow &) = default;
};

struct Trace {
    std::vector<float> samples;
    Plaintext plaintext{};
    double sample_rate = 0.0;
};

struct Provenance {
    bool idle = false;
    std::uint64_t seed = 0;
    /// Only set for white-box evaluation runs.
    std::optional<KeyRegister> key;
    std::string note;
};

/// n_traces x n_samples waveforms, row-major, with one plaintext per row.
class TraceSet {
  public:
    TraceSet() = default;

    TraceSet(std::size_t n_traces, std::size_t n_samples, double sample_rate)
        : n_traces_(n_traces), n_samples_(n_samples), sample_rate_(sample_rate),
          samples_(n_traces * n_samples, 0.0f), plaintexts_(n_traces) {
        if (n_traces == 0 || n_samples == 0)
            throw std::invalid_argument("trace set must have at least one trace and one sample");
    }

    static TraceSet from_traces(const std::vector<Trace> &traces) {
        if (traces.empty())
            throw std::invalid_argument("empty trace list");
        TraceSet ts(traces.size(), traces[0].samples.size(), traces[0].sample_rate);
        for (std::size_t t = 0; t < traces.size(); t++) {
            if (traces[t].samples.size() != ts.n_samples_)
                throw std::invalid_argument("traces have different lengths");
            ts.set_row(t, traces[t].samples);
            ts.plaintexts_[t] = traces[t].plaintext;
        }
        return ts;
    }

    std::size_t n_traces() const { return n_traces_; }
    std::size_t n_samples() const { return n_samples_; }
    double sample_rate() const { return sample_rate_; }

    std::span<const float> row(std::size_t t) const {
        return {samples_.data() + t * n_samples_, n_samples_};
    }
    std::span<float> row(std::size_t t) {
        return {samples_.data() + t * n_samples_, n_samples_};
    }

    void set_row(std::size_t t, std::span<const float> values) {
        if (values.size() != n_samples_)
            throw std::invalid_argument("row length mismatch");
        std::copy(values.begin(), values.end(), row(t).begin());
    }

    Trace trace(std::size_t t) const {
        return Trace{{row(t).begin(), row(t).end()}, plaintexts_[t], sample_rate_};
    }

    float at(std::size_t t, std::size_t s) const { return samples_[t * n_samples_ + s]; }

    const std::vector<float> &samples() const { return samples_; }
    std::vector<float> &samples() { return samples_; }

    const std::vector<Plaintext> &plaintexts() const { return plaintexts_; }
    std::vector<Plaintext> &plaintexts() { return plaintexts_; }

    const Provenance &provenance() const { return provenance_; }
    Provenance &provenance() { return provenance_; }

    bool all_finite() const {
        for (float v : samples_)
            if (!std::isfinite(v))
                return false;
        return true;
    }

    /// Same plaintexts, provenance and geometry; samples zeroed.
    TraceSet like() const {
        TraceSet out(n_traces_, n_samples_, sample_rate_);
        out.plaintexts_ = plaintexts_;
        out.provenance_ = provenance_;
        return out;
    }

  private:
    std::size_t n_traces_ = 0;
    std::size_t n_samples_ = 0;
    double sample_rate_ = 0.0;
    std::vector<float> samples_;
    std::vector<Plaintext> plaintexts_;
    Provenance provenance_;
};

} // namespace cematk

#endif // CEMATK_TRACE_HPP

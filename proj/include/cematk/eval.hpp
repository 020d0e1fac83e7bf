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

// Repeated-experiment evaluation of the round-1 attack: success rate versus
// trace count, guessing entropy, and leakage-probability tables.

#ifndef CEMATK_EVAL_HPP
#define CEMATK_EVAL_HPP

#include "cematk/cema.hpp"
#include "cematk/sim.hpp"

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cematk {

/// 0-based rank of the true key byte at each state position.
using TrialRanks = std::array<std::uint16_t, 8>;

enum class PlaintextMode { random, sweep };

struct EvalOptions {
    PlaintextMode plaintexts = PlaintextMode::random;
    /// Attack each byte only inside its simulated leak window (white-box
    /// stand-in for a trigger); otherwise the whole trace is searched.
    bool localize = true;
    std::optional<FrequencyBand> band;
};

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
    bool exact = false; ///< Clopper-Pearson rather than normal approximation
};

/// 95% interval for a binomial proportion. Uses the normal approximation
/// when both n*p and n*(1-p) reach 5, Clopper-Pearson otherwise.
inline Interval proportion_interval(std::size_t successes, std::size_t n, double confidence = 0.95) {
    if (n == 0)
        throw std::invalid_argument("proportion_interval: n must be > 0");
    const double p = static_cast<double>(successes) / static_cast<double>(n);
    const double alpha = 1.0 - confidence;
    const double dn = static_cast<double>(n);
    if (dn * p >= 5.0 && dn * (1.0 - p) >= 5.0) {
        const double z = boost::math::quantile(boost::math::normal(), 1.0 - alpha / 2);
        const double h = z * std::sqrt(p * (1.0 - p) / dn);
        return {std::max(0.0, p - h), std::min(1.0, p + h), false};
    }
    Interval iv{0.0, 1.0, true};
    if (successes > 0)
        iv.lo = boost::math::quantile(
            boost::math::beta_distribution<>(static_cast<double>(successes), static_cast<double>(n - successes + 1)),
            alpha / 2);
    if (successes < n)
        iv.hi = boost::math::quantile(
            boost::math::beta_distribution<>(static_cast<double>(successes + 1), static_cast<double>(n - successes)),
            1.0 - alpha / 2);
    return iv;
}

struct CurvePoint {
    std::size_t trace_count = 0;
    /// Fraction of (trial, byte) attacks with the true byte at rank 1.
    double success_rate = 0.0;
    Interval ci;
    double ci_half_width = 0.0;
    double mean_rank = 0.0;
    std::array<double, 8> byte_success{};
    std::array<double, 8> byte_mean_rank{};
};

struct SuccessCurve {
    std::vector<std::size_t> trace_counts;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    std::vector<CurvePoint> points;
    /// ranks[count index][trial]
    std::vector<std::vector<TrialRanks>> ranks;
};

inline TrialRanks true_key_ranks(const AttackResult &r, State64 true_k1) {
    TrialRanks out{};
    for (unsigned b = 0; b < 8; b++) {
        if (!r.rankings[b])
            throw std::invalid_argument("attack result lacks byte " + std::to_string(b));
        out[b] = static_cast<std::uint16_t>(r.rankings[b]->rank_of(state_byte(true_k1, b)));
    }
    return out;
}

/// Mean 0-based rank of the true byte per position.
inline std::array<double, 8> guessing_entropy(std::span<const TrialRanks> trials) {
    if (trials.empty())
        throw std::invalid_argument("guessing_entropy: no trials");
    std::array<double, 8> ge{};
    for (const auto &t : trials)
        for (unsigned b = 0; b < 8; b++)
            ge[b] += t[b];
    for (auto &g : ge)
        g /= static_cast<double>(trials.size());
    return ge;
}

inline std::array<double, 8> guessing_entropy(std::span<const AttackResult> trials, State64 true_k1) {
    std::vector<TrialRanks> ranks;
    for (const auto &r : trials)
        ranks.push_back(true_key_ranks(r, true_k1));
    return guessing_entropy(ranks);
}

inline CurvePoint summarize(std::size_t trace_count, std::span<const TrialRanks> trials) {
    CurvePoint p;
    p.trace_count = trace_count;
    std::size_t hits = 0;
    for (const auto &t : trials)
        for (unsigned b = 0; b < 8; b++) {
            const bool hit = t[b] == 0;
            hits += hit;
            p.byte_success[b] += hit;
        }
    const double nt = static_cast<double>(trials.size());
    for (auto &s : p.byte_success)
        s /= nt;
    p.byte_mean_rank = guessing_entropy(trials);
    p.mean_rank = std::accumulate(p.byte_mean_rank.begin(), p.byte_mean_rank.end(), 0.0) / 8.0;
    const std::size_t n = trials.size() * 8;
    p.success_rate = static_cast<double>(hits) / static_cast<double>(n);
    p.ci = proportion_interval(hits, n);
    p.ci_half_width = (p.ci.hi - p.ci.lo) / 2;
    return p;
}

/// One simulated experiment: fresh plaintexts and noise from `trial_seed`,
/// full round-1 attack, ranks of the true K1 bytes.
inline TrialRanks run_trial(const SimConfig &cfg, std::size_t trace_count, std::uint64_t trial_seed,
                            const EvalOptions &options = {}) {
    SimConfig c = cfg;
    c.seed = trial_seed;
    std::vector<State64> pts;
    if (options.plaintexts == PlaintextMode::sweep) {
        if (trace_count > 256)
            throw std::invalid_argument("sweep mode supports at most 256 traces");
        pts = default_sweep();
        pts.resize(trace_count);
    } else {
        pts = random_plaintexts(trace_count, trial_seed);
    }
    const TraceSet ts = simulate_set(pts, c);
    AttackOptions ao;
    ao.band = options.band;
    if (options.localize)
        for (unsigned b = 0; b < 8; b++)
            ao.byte_windows[b] = c.leak_window(b);
    return true_key_ranks(attack_round_key(ts, ao), c.key.leftmost64());
}

inline SuccessCurve run_trials(const SimConfig &cfg, const std::vector<std::size_t> &trace_counts,
                               std::size_t trials, std::uint64_t seed, const EvalOptions &options = {}) {
    if (trials < 1)
        throw std::invalid_argument("run_trials: trials must be >= 1");
    if (trace_counts.empty())
        throw std::invalid_argument("run_trials: no trace counts");
    for (std::size_t i = 0; i < trace_counts.size(); i++) {
        if (trace_counts[i] < 2)
            throw std::invalid_argument("run_trials: trace counts must be >= 2");
        if (i > 0 && trace_counts[i] <= trace_counts[i - 1])
            throw std::invalid_argument("run_trials: trace counts must be strictly ascending");
    }
    cfg.validate();

    SuccessCurve curve;
    curve.trace_counts = trace_counts;
    curve.trials = trials;
    curve.seed = seed;
    for (std::size_t ci = 0; ci < trace_counts.size(); ci++) {
        std::vector<TrialRanks> ranks(trials);
        for (std::size_t t = 0; t < trials; t++)
            ranks[t] = run_trial(cfg, trace_counts[ci], derive_seed(seed, ci + 1, t + 1), options);
        curve.points.push_back(summarize(trace_counts[ci], ranks));
        curve.ranks.push_back(std::move(ranks));
    }
    return curve;
}

struct LeakageReport {
    std::size_t top_r = 1;
    std::size_t n_trials = 0;
    State64 true_k1 = 0;
    /// P(true byte within top_r) per state position.
    std::array<double, 8> marginal{};
    /// at_a_time[c]: fraction of trials with exactly c bytes within top_r.
    std::array<double, 9> at_a_time{};
    std::vector<TrialRanks> ranks;

    /// Fraction of trials where every byte in `mask` is within top_r.
    double joint(std::uint8_t mask) const {
        std::size_t hits = 0;
        for (const auto &t : ranks) {
            bool all = true;
            for (unsigned b = 0; b < 8; b++)
                if ((mask >> b & 1) && t[b] >= top_r)
                    all = false;
            hits += all;
        }
        return ranks.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(ranks.size());
    }
};

inline LeakageReport leakage_probability_report(std::span<const TrialRanks> trials, State64 true_k1,
                                                std::size_t top_r) {
    if (top_r < 1)
        throw std::invalid_argument("top_r must be >= 1");
    LeakageReport rep;
    rep.top_r = top_r;
    rep.n_trials = trials.size();
    rep.true_k1 = true_k1;
    rep.ranks.assign(trials.begin(), trials.end());
    if (trials.empty())
        return rep;
    for (const auto &t : trials) {
        unsigned count = 0;
        for (unsigned b = 0; b < 8; b++)
            if (t[b] < top_r) {
                rep.marginal[b] += 1.0;
                count++;
            }
        rep.at_a_time[count] += 1.0;
    }
    const double n = static_cast<double>(trials.size());
    for (auto &m : rep.marginal)
        m /= n;
    for (auto &a : rep.at_a_time)
        a /= n;
    return rep;
}

inline LeakageReport leakage_probability_report(std::span<const AttackResult> trials, State64 true_k1,
                                                std::size_t top_r) {
    std::vector<TrialRanks> ranks;
    for (const auto &r : trials)
        ranks.push_back(true_key_ranks(r, true_k1));
    return leakage_probability_report(ranks, true_k1, top_r);
}

namespace detail {
inline std::string percent(double p) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << 100.0 * p << "%";
    return os.str();
}

inline const char *count_word(unsigned c) {
    static const char *words[] = {"Zero", "One", "Two", "Three", "Four", "Five", "Six", "Seven", "Eight"};
    return words[c];
}
} // namespace detail

/// Aligned text table: marginal probabilities per byte position, then the
/// "bytes at a time" distribution from eight down to one.
inline std::string render_report_text(const LeakageReport &rep) {
    std::ostringstream os;
    const int w = 10;
    os << "Probability of Leakage (top-" << rep.top_r << ", " << rep.n_trials << " trials)\n";
    os << std::left << std::setw(12) << "Position";
    for (unsigned b = 0; b < 8; b++)
        os << std::right << std::setw(w) << b;
    os << "\n" << std::left << std::setw(12) << "Key Byte";
    for (unsigned b = 0; b < 8; b++) {
        const std::uint8_t kb = state_byte(rep.true_k1, b);
        os << std::right << std::setw(w) << to_hex(&kb, 1);
    }
    os << "\n" << std::left << std::setw(12) << "P(leak)";
    for (unsigned b = 0; b < 8; b++)
        os << std::right << std::setw(w) << detail::percent(rep.marginal[b]);
    os << "\nProbability of Leakage at a Time\n";
    for (unsigned c = 8; c >= 1; c--)
        os << "  " << std::left << std::setw(12) << (std::string(detail::count_word(c)) + (c == 1 ? " byte" : " bytes"))
           << std::right << std::setw(w) << detail::percent(rep.at_a_time[c]) << "\n";
    os << "  " << std::left << std::setw(12) << "None" << std::right << std::setw(w)
       << detail::percent(rep.at_a_time[0]) << "\n";
    return os.str();
}

/// CSV with columns section,label,key_byte,probability.
inline std::string render_report_csv(const LeakageReport &rep) {
    std::ostringstream os;
    os << "section,label,key_byte,probability\n";
    os << std::setprecision(17);
    for (unsigned b = 0; b < 8; b++) {
        const std::uint8_t kb = state_byte(rep.true_k1, b);
        os << "marginal," << b << "," << to_hex(&kb, 1) << "," << rep.marginal[b] << "\n";
    }
    for (unsigned c = 0; c <= 8; c++)
        os << "at_a_time," << c << ",," << rep.at_a_time[c] << "\n";
    return os.str();
}

/// |rho| exceeded with probability 1 - q by one null correlation of n
/// traces (Fisher z approximation).
inline double null_correlation_quantile(std::size_t n_traces, double q) {
    if (n_traces < 4)
        throw std::invalid_argument("null_correlation_quantile: need at least 4 traces");
    const double z = boost::math::quantile(boost::math::normal(), 0.5 + q / 2);
    return std::tanh(z / std::sqrt(static_cast<double>(n_traces) - 3.0));
}

/// Bonferroni upper bound on the q-quantile of max |rho| over n_cells null
/// correlations of n traces each.
inline double null_max_correlation_bound(std::size_t n_traces, std::size_t n_cells, double q) {
    const double per_cell = 1.0 - (1.0 - q) / static_cast<double>(n_cells);
    return null_correlation_quantile(n_traces, per_cell);
}

} // namespace cematk

#endif // CEMATK_EVAL_HPP

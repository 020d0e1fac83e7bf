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

// Command-line front end. Exit codes: 0 success, 1 usage error, 2 data error
// (unreadable or invalid files, inconsistent inputs).

#ifndef CEMATK_CLI_HPP
#define CEMATK_CLI_HPP

#include "cematk/cema.hpp"
#include "cematk/dsp.hpp"
#include "cematk/eval.hpp"
#include "cematk/io.hpp"
#include "cematk/present.hpp"
#include "cematk/sim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace cematk::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

using cematk::detail::split;

inline State64 arg_state(const std::string &name, const std::string &hex) {
    try {
        return parse_state_hex(hex);
    } catch (const std::exception &e) {
        throw UsageError(name + ": " + e.what());
    }
}

inline KeyRegister arg_key(const std::string &name, const std::string &hex) {
    try {
        return KeyRegister::from_hex(hex);
    } catch (const std::exception &e) {
        throw UsageError(name + ": " + e.what());
    }
}

inline std::size_t arg_uint(const std::string &name, const std::string &v) {
    try {
        std::size_t used = 0;
        if (v.empty() || v[0] == '-')
            throw std::invalid_argument(v);
        const auto u = std::stoull(v, &used);
        if (used != v.size())
            throw std::invalid_argument(v);
        return u;
    } catch (const std::exception &) {
        throw UsageError(name + ": '" + v + "' is not a non-negative integer");
    }
}

inline double arg_double(const std::string &name, const std::string &v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size())
            throw std::invalid_argument(v);
        return d;
    } catch (const std::exception &) {
        throw UsageError(name + ": '" + v + "' is not a number");
    }
}

inline SampleWindow arg_window(const std::string &name, const std::string &v) {
    const auto parts = split(v, ':');
    if (parts.size() != 2)
        throw UsageError(name + ": expected lo:hi, got '" + v + "'");
    return {arg_uint(name, parts[0]), arg_uint(name, parts[1])};
}

inline FrequencyBand arg_band(const std::string &name, const std::string &v) {
    const auto parts = split(v, ':');
    if (parts.size() != 2 && parts.size() != 3)
        throw UsageError(name + ": expected lo:hi[:transition] in Hz, got '" + v + "'");
    FrequencyBand b{arg_double(name, parts[0]), arg_double(name, parts[1]), 0.0};
    if (parts.size() == 3)
        b.transition = arg_double(name, parts[2]);
    return b;
}

/// "0-7", "3", "0,2,5" or combinations such as "0-2,6".
inline std::vector<unsigned> arg_bytes(const std::string &v) {
    std::vector<unsigned> out;
    for (const auto &item : split(v, ',')) {
        const auto range = split(item, '-');
        if (range.size() == 1) {
            out.push_back(static_cast<unsigned>(arg_uint("--bytes", range[0])));
        } else if (range.size() == 2) {
            const auto lo = arg_uint("--bytes", range[0]), hi = arg_uint("--bytes", range[1]);
            if (lo > hi)
                throw UsageError("--bytes: empty range '" + item + "'");
            for (auto b = lo; b <= hi; b++)
                out.push_back(static_cast<unsigned>(b));
        } else {
            throw UsageError("--bytes: cannot parse '" + item + "'");
        }
    }
    for (unsigned b : out)
        if (b >= 8)
            throw UsageError("--bytes: position " + std::to_string(b) + " out of range 0..7");
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline std::optional<std::uint64_t> env_seed() {
    const char *s = std::getenv("CEMATK_SEED");
    if (!s || !*s)
        return std::nullopt;
    return arg_uint("CEMATK_SEED", s);
}

// --seed, then the config file's seed, then CEMATK_SEED, then 0.
inline std::uint64_t pick_seed(const std::optional<std::uint64_t> &flag, const KeyValueConfig &kv) {
    if (flag)
        return *flag;
    if (kv.has("seed"))
        return cematk::detail::parse_uint(kv.origin(), "seed", kv.get("seed"));
    if (auto e = env_seed())
        return *e;
    return 0;
}

inline std::vector<std::string> with_keys(std::vector<std::string> extra) {
    auto keys = sim_config_keys();
    keys.insert(keys.end(), extra.begin(), extra.end());
    return keys;
}

inline void write_text(const std::string &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text))
        throw TraceFileError(TraceFileError::Kind::io, path, "cannot write output");
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline std::string byte_hex(std::uint8_t b) { return to_hex(&b, 1); }

// ---- subcommands -------------------------------------------------------

struct EncryptArgs {
    std::string pt, key;
    std::optional<unsigned> rounds;
    bool decrypt = false;
};

inline int run_encrypt(const EncryptArgs &a, std::ostream &out) {
    const State64 p = arg_state("--pt", a.pt);
    const KeyRegister k = arg_key("--key", a.key);
    if (a.decrypt) {
        if (a.rounds)
            throw UsageError("--rounds cannot be combined with --decrypt");
        out << to_hex(present::decrypt_block(p, k)) << "\n";
        return kExitOk;
    }
    if (!a.rounds) {
        out << to_hex(present::encrypt_block(p, k)) << "\n";
        return kExitOk;
    }
    if (*a.rounds < 1 || *a.rounds > 31)
        throw UsageError("--rounds must be in 1..31");
    const auto r = present::encrypt_rounds(p, k, *a.rounds, present::Capture::all);
    for (const auto &ri : r.rounds)
        out << "round " << std::setw(2) << std::setfill('0') << ri.round << std::setfill(' ')
            << " add_round_key " << to_hex(ri.add_round_key) << " sbox " << to_hex(ri.sbox_output) << " p_layer "
            << to_hex(ri.p_layer_output) << "\n";
    out << "state " << to_hex(r.state) << "\n";
    return kExitOk;
}

inline int run_keysched(const std::string &key, std::ostream &out) {
    const auto rk = present::key_schedule(arg_key("--key", key));
    for (std::size_t i = 0; i < rk.size(); i++)
        out << "K" << std::setw(2) << std::setfill('0') << i + 1 << std::setfill(' ') << " " << to_hex(rk[i]) << "\n";
    return kExitOk;
}

/// `plaintexts` config key: "sweep" (default) or "random:N".
inline std::vector<State64> plaintexts_from(const KeyValueConfig &kv, std::uint64_t seed) {
    if (!kv.has("plaintexts") || kv.get("plaintexts") == "sweep")
        return default_sweep();
    const auto parts = split(kv.get("plaintexts"), ':');
    if (parts.size() == 2 && parts[0] == "random") {
        const auto n = cematk::detail::parse_uint(kv.origin(), "plaintexts", parts[1]);
        if (n == 0)
            throw ConfigError(kv.origin() + ": plaintexts: need at least one trace");
        return random_plaintexts(n, seed);
    }
    throw ConfigError(kv.origin() + ": plaintexts must be 'sweep' or 'random:N'");
}

struct SimArgs {
    std::string config, out;
    bool idle = false;
    bool embed_key = false;
    std::optional<std::uint64_t> seed;
};

inline int run_sim(const SimArgs &a, std::ostream &out) {
    const auto kv = KeyValueConfig::load(a.config);
    kv.require_known(with_keys({"plaintexts", "idle_traces"}));
    SimConfig cfg = sim_config_from(kv);
    cfg.seed = pick_seed(a.seed, kv);
    const auto pts = plaintexts_from(kv, cfg.seed);
    TraceSet ts;
    if (a.idle) {
        std::size_t n = pts.size();
        if (kv.has("idle_traces"))
            n = cematk::detail::parse_uint(kv.origin(), "idle_traces", kv.get("idle_traces"));
        ts = simulate_idle_set(n, cfg);
    } else {
        ts = simulate_set(pts, cfg);
    }
    ts.provenance().key = cfg.key;
    write_traceset(ts, a.out, a.embed_key && !a.idle);
    out << "wrote " << ts.n_traces() << " x " << ts.n_samples() << (a.idle ? " idle" : "") << " traces to " << a.out
        << "\n";
    return kExitOk;
}

struct FilterArgs {
    std::string in, out;
    double lo = 0, hi = 0, transition = 0;
};

inline int run_filter(const FilterArgs &a, std::ostream &out) {
    const TraceSet ts = read_traceset(a.in);
    if (!(a.lo >= 0 && a.lo < a.hi && a.hi <= ts.sample_rate() / 2) || a.transition < 0)
        throw UsageError("--lo/--hi must satisfy 0 <= lo < hi <= sample_rate/2 (" + fmt(ts.sample_rate() / 2) +
                         " Hz)");
    TraceSet f = bandpass(ts, a.lo, a.hi, a.transition);
    write_traceset(f, a.out, f.provenance().key.has_value());
    out << "filtered " << f.n_traces() << " traces to [" << a.lo << ", " << a.hi << "] Hz -> " << a.out << "\n";
    return kExitOk;
}

struct SemaArgs {
    std::string enc, idle, out, spectrum_csv;
    double new_ratio = 10.0, amp_ratio = 1.5;
};

inline nlohmann::ordered_json components_json(const std::vector<SpectralComponent> &cs) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto &c : cs)
        arr.push_back({{"freq_hz", c.freq},
                       {"enc_magnitude", c.enc_magnitude},
                       {"idle_magnitude", c.idle_magnitude},
                       {"ratio", std::isfinite(c.ratio) ? nlohmann::ordered_json(c.ratio) : nlohmann::ordered_json()}});
    return arr;
}

inline int run_sema(const SemaArgs &a, std::ostream &out) {
    const TraceSet enc = read_traceset(a.enc);
    const TraceSet idle = read_traceset(a.idle);
    if (!(a.new_ratio >= 1.0) || !(a.amp_ratio > 1.0))
        throw UsageError("--new-ratio must be >= 1 and --amp-ratio > 1");
    const auto r = spectral_diff(enc, idle, a.new_ratio, a.amp_ratio);
    nlohmann::ordered_json j;
    j["sample_rate"] = r.sample_rate;
    j["freq_resolution"] = r.freq_resolution;
    j["noise_floor"] = r.noise_floor;
    j["new_ratio"] = r.new_ratio;
    j["amp_ratio"] = r.threshold_used;
    j["new_components"] = components_json(r.new_components);
    j["amplified_components"] = components_json(r.amplified_components);
    j["levels"] = {{"enc_mean", r.enc_mean}, {"idle_mean", r.idle_mean}, {"enc_rms", r.enc_rms}, {"idle_rms", r.idle_rms}};
    write_text(a.out, j.dump(2) + "\n");
    if (!a.spectrum_csv.empty()) {
        std::ostringstream os;
        os << "freq_hz,enc_magnitude,idle_magnitude\n";
        for (std::size_t k = 0; k < r.enc_spectrum.n_bins; k++)
            os << fmt(r.enc_spectrum.frequency(k)) << "," << fmt(r.enc_spectrum.magnitudes[k]) << ","
               << fmt(r.idle_spectrum.magnitudes[k]) << "\n";
        write_text(a.spectrum_csv, os.str());
    }
    out << r.new_components.size() << " new, " << r.amplified_components.size() << " amplified components -> "
        << a.out << "\n";
    return kExitOk;
}

struct AttackArgs {
    std::string traces, out, band, window, byte_windows, bytes = "0-7", known_pair, dump_surface;
    unsigned threads = 1;
};

inline int run_attack(const AttackArgs &a, std::ostream &out) {
    AttackOptions opt;
    if (!a.band.empty())
        opt.band = arg_band("--band", a.band);
    if (!a.window.empty())
        opt.window = arg_window("--window", a.window);
    if (!a.byte_windows.empty()) {
        const auto parts = split(a.byte_windows, ',');
        if (parts.size() != 8)
            throw UsageError("--byte-windows needs 8 comma-separated lo:hi windows");
        for (unsigned b = 0; b < 8; b++)
            opt.byte_windows[b] = arg_window("--byte-windows", parts[b]);
    }
    opt.bytes = arg_bytes(a.bytes);
    opt.keep_surfaces = !a.dump_surface.empty();
    opt.threads = std::max(1u, a.threads);
    std::optional<std::pair<State64, State64>> pair;
    if (!a.known_pair.empty()) {
        const auto parts = split(a.known_pair, ':');
        if (parts.size() != 2)
            throw UsageError("--known-pair: expected plaintext:ciphertext in hex");
        pair = {arg_state("--known-pair", parts[0]), arg_state("--known-pair", parts[1])};
    }

    const TraceSet ts = read_traceset(a.traces);
    if (opt.band && !(opt.band->lo >= 0 && opt.band->lo < opt.band->hi && opt.band->hi <= ts.sample_rate() / 2))
        throw UsageError("--band outside [0, sample_rate/2]");
    AttackResult r = attack_round_key(ts, opt);

    nlohmann::ordered_json j;
    j["traces"] = ts.n_traces();
    j["samples"] = ts.n_samples();
    j["sample_rate"] = ts.sample_rate();
    if (opt.band)
        j["band"] = {opt.band->lo, opt.band->hi, opt.band->transition};
    else
        j["band"] = nullptr;
    const bool complete = r.attacked_mask == 0xFF;
    j["k1"] = complete ? nlohmann::ordered_json(to_hex(r.k1)) : nlohmann::ordered_json();
    auto bytes = nlohmann::ordered_json::array();
    for (unsigned b = 0; b < 8; b++) {
        if (!r.rankings[b])
            continue;
        const auto &rk = *r.rankings[b];
        auto ranking = nlohmann::ordered_json::array();
        for (const auto &e : rk.entries)
            ranking.push_back({{"key", byte_hex(e.key_byte)}, {"score", e.score}, {"sample", e.sample}, {"sign", e.sign}});
        const auto &w = r.diagnostics.windows[b];
        bytes.push_back({{"position", b},
                         {"window", {w.lo, w.hi}},
                         {"recovered", byte_hex(rk.entries[0].key_byte)},
                         {"ranking", ranking}});
    }
    j["bytes"] = bytes;

    std::string status = "skipped";
    j["full_key"] = nullptr;
    if (pair) {
        if (!complete) {
            status = "incomplete_k1";
        } else {
            const auto search = recover_full_key(r.k1, pair->first, pair->second);
            status = search.status == FullKeySearch::Status::found       ? "found"
                     : search.status == FullKeySearch::Status::ambiguous ? "ambiguous"
                                                                         : "not_found";
            if (auto key = search.key()) {
                r.full_key = key;
                j["full_key"] = to_hex(*key);
            }
        }
    }
    j["full_key_status"] = status;
    if (ts.provenance().key) {
        const State64 true_k1 = ts.provenance().key->leftmost64();
        j["true_key"] = to_hex(*ts.provenance().key);
        auto ranks = nlohmann::ordered_json::array();
        for (unsigned b = 0; b < 8; b++)
            ranks.push_back(r.rankings[b] ? nlohmann::ordered_json(r.rankings[b]->rank_of(state_byte(true_k1, b)))
                                          : nlohmann::ordered_json());
        j["true_ranks"] = ranks;
    }
    write_text(a.out, j.dump(2) + "\n");

    if (!a.dump_surface.empty())
        for (const auto &s : r.surfaces) {
            std::ostringstream os;
            os << "key";
            for (std::size_t i = 0; i < s.n_samples; i++)
                os << "," << s.sample_offset + i;
            os << "\n";
            for (std::size_t k = 0; k < kKeyCandidates; k++) {
                os << byte_hex(static_cast<std::uint8_t>(k));
                for (std::size_t i = 0; i < s.n_samples; i++)
                    os << "," << fmt(s.at(k, i));
                os << "\n";
            }
            write_text(a.dump_surface + "_byte" + std::to_string(s.byte_index) + ".csv", os.str());
        }

    out << "K1 bytes:";
    for (unsigned b = 0; b < 8; b++)
        out << " " << (r.rankings[b] ? byte_hex(r.rankings[b]->entries[0].key_byte) : std::string("--"));
    out << "\n";
    if (r.full_key)
        out << "full key " << to_hex(*r.full_key) << "\n";
    return kExitOk;
}

struct EvalArgs {
    std::string config, out, trace_counts = "32,64,128,256", ranks_out, plaintexts = "random", band;
    std::size_t trials = 100;
    std::optional<std::uint64_t> seed;
    bool no_localize = false;
};

inline std::string curve_csv(const SuccessCurve &c) {
    std::ostringstream os;
    os << "trace_count,trials,success_rate,ci_low,ci_high,ci_exact,mean_rank";
    for (unsigned b = 0; b < 8; b++)
        os << ",success_b" << b;
    for (unsigned b = 0; b < 8; b++)
        os << ",mean_rank_b" << b;
    os << "\n";
    for (const auto &p : c.points) {
        os << p.trace_count << "," << c.trials << "," << fmt(p.success_rate) << "," << fmt(p.ci.lo) << ","
           << fmt(p.ci.hi) << "," << (p.ci.exact ? 1 : 0) << "," << fmt(p.mean_rank);
        for (double s : p.byte_success)
            os << "," << fmt(s);
        for (double r : p.byte_mean_rank)
            os << "," << fmt(r);
        os << "\n";
    }
    return os.str();
}

inline nlohmann::ordered_json ranks_json(const SuccessCurve &c, State64 true_k1) {
    nlohmann::ordered_json j;
    j["seed"] = c.seed;
    j["trials"] = c.trials;
    j["true_k1"] = to_hex(true_k1);
    auto counts = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < c.points.size(); i++) {
        auto rows = nlohmann::ordered_json::array();
        for (const auto &t : c.ranks[i])
            rows.push_back(t);
        counts.push_back({{"trace_count", c.trace_counts[i]}, {"ranks", rows}});
    }
    j["counts"] = counts;
    return j;
}

inline EvalOptions eval_options(const std::string &plaintexts, bool no_localize, const std::string &band) {
    EvalOptions o;
    if (plaintexts == "sweep")
        o.plaintexts = PlaintextMode::sweep;
    else if (plaintexts != "random")
        throw UsageError("--plaintexts must be 'random' or 'sweep'");
    o.localize = !no_localize;
    if (!band.empty())
        o.band = arg_band("--band", band);
    return o;
}

inline int run_eval(const EvalArgs &a, std::ostream &out) {
    std::vector<std::size_t> counts;
    for (const auto &c : split(a.trace_counts, ','))
        counts.push_back(arg_uint("--trace-counts", c));
    if (a.trials < 1)
        throw UsageError("--trials must be >= 1");
    const auto opts = eval_options(a.plaintexts, a.no_localize, a.band);
    const auto kv = KeyValueConfig::load(a.config);
    kv.require_known(with_keys({"plaintexts", "idle_traces"}));
    SimConfig cfg = sim_config_from(kv);
    const std::uint64_t seed = pick_seed(a.seed, kv);
    for (std::size_t i = 0; i < counts.size(); i++)
        if (counts[i] < 2 || (i > 0 && counts[i] <= counts[i - 1]))
            throw UsageError("--trace-counts must be strictly ascending and >= 2");

    const auto curve = run_trials(cfg, counts, a.trials, seed, opts);
    write_text(a.out, curve_csv(curve));
    if (!a.ranks_out.empty())
        write_text(a.ranks_out, ranks_json(curve, cfg.key.leftmost64()).dump(1) + "\n");
    for (const auto &p : curve.points)
        out << std::setw(6) << p.trace_count << " traces: success " << std::fixed << std::setprecision(4)
            << p.success_rate << " [" << p.ci.lo << ", " << p.ci.hi << "] mean rank " << p.mean_rank << "\n"
            << std::defaultfloat;
    return kExitOk;
}

struct ReportArgs {
    std::string ranks, config, out, csv, plaintexts = "random", band;
    std::optional<std::size_t> count;
    std::size_t traces = 256, trials = 15, top_r = 5;
    std::optional<std::uint64_t> seed;
    bool no_localize = false;
};

inline int run_report(const ReportArgs &a, std::ostream &out) {
    if (a.top_r < 1)
        throw UsageError("--top-r must be >= 1");
    std::vector<TrialRanks> ranks;
    State64 true_k1 = 0;
    if (!a.ranks.empty()) {
        if (!a.config.empty())
            throw UsageError("give either --ranks or --config, not both");
        std::ifstream in(a.ranks);
        if (!in)
            throw TraceFileError(TraceFileError::Kind::io, a.ranks, "cannot open ranks file");
        nlohmann::json j;
        try {
            in >> j;
            true_k1 = parse_state_hex(j.at("true_k1").get<std::string>());
            const auto &counts = j.at("counts");
            if (counts.empty())
                throw std::runtime_error("no trace counts");
            const nlohmann::json *chosen = &counts.back();
            if (a.count) {
                chosen = nullptr;
                for (const auto &c : counts)
                    if (c.at("trace_count").get<std::size_t>() == *a.count)
                        chosen = &c;
                if (!chosen)
                    throw std::runtime_error("trace count " + std::to_string(*a.count) + " not present");
            }
            for (const auto &row : chosen->at("ranks"))
                ranks.push_back(row.get<TrialRanks>());
        } catch (const UsageError &) {
            throw;
        } catch (const std::exception &e) {
            throw ConfigError(a.ranks + ": " + e.what());
        }
    } else if (!a.config.empty()) {
        const auto kv = KeyValueConfig::load(a.config);
        kv.require_known(with_keys({"plaintexts", "idle_traces"}));
        SimConfig cfg = sim_config_from(kv);
        const auto curve = run_trials(cfg, {a.traces}, a.trials, pick_seed(a.seed, kv),
                                      eval_options(a.plaintexts, a.no_localize, a.band));
        ranks = curve.ranks.front();
        true_k1 = cfg.key.leftmost64();
    } else {
        throw UsageError("report needs --ranks or --config");
    }
    const auto rep = leakage_probability_report(ranks, true_k1, a.top_r);
    const std::string text = render_report_text(rep);
    if (a.out.empty())
        out << text;
    else
        write_text(a.out, text);
    if (!a.csv.empty())
        write_text(a.csv, render_report_csv(rep));
    return kExitOk;
}

} // namespace detail

/// Parses argv and runs one subcommand.
inline int dispatch(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    using namespace detail;
    CLI::App app{"cematk: PRESENT cipher, EM trace simulation and correlation EM analysis"};
    app.name("cematk");
    app.require_subcommand(0, 1);

    EncryptArgs enc;
    auto *c_enc = app.add_subcommand("encrypt", "Encrypt (or decrypt) one block with PRESENT");
    c_enc->add_option("--pt", enc.pt, "Input block, 16 hex digits")->required();
    c_enc->add_option("--key", enc.key, "Key, 20 (80-bit) or 32 (128-bit) hex digits")->required();
    c_enc->add_option("--rounds", enc.rounds, "Run only N rounds and print per-round intermediates");
    c_enc->add_flag("--decrypt", enc.decrypt, "Decrypt instead of encrypt");

    std::string ks_key;
    auto *c_ks = app.add_subcommand("keysched", "Print the 32 round keys");
    c_ks->add_option("--key", ks_key, "Key, 20 or 32 hex digits")->required();

    SimArgs sim;
    auto *c_sim = app.add_subcommand("sim", "Simulate an encryption (or idle) trace set");
    c_sim->add_option("--config", sim.config, "Simulation config file")->required();
    c_sim->add_option("--out", sim.out, "Output .cemt file")->required();
    c_sim->add_flag("--idle", sim.idle, "Simulate non-encryption traces");
    c_sim->add_flag("--embed-key", sim.embed_key, "Store the key in the file header (evaluation only)");
    c_sim->add_option("--seed", sim.seed, "Override the seed");

    FilterArgs flt;
    auto *c_flt = app.add_subcommand("filter", "Zero-phase bandpass filter a trace set");
    c_flt->add_option("--in", flt.in, "Input .cemt file")->required();
    c_flt->add_option("--out", flt.out, "Output .cemt file")->required();
    c_flt->add_option("--lo", flt.lo, "Lower band edge, Hz")->required();
    c_flt->add_option("--hi", flt.hi, "Upper band edge, Hz")->required();
    c_flt->add_option("--transition", flt.transition, "Raised-cosine transition width, Hz");

    SemaArgs sema;
    auto *c_sema = app.add_subcommand("sema", "Compare encryption and idle spectra");
    c_sema->add_option("--enc", sema.enc, "Encryption trace set")->required();
    c_sema->add_option("--idle", sema.idle, "Idle trace set")->required();
    c_sema->add_option("--out", sema.out, "Report JSON")->required();
    c_sema->add_option("--new-ratio", sema.new_ratio, "Multiple of the noise floor for a component");
    c_sema->add_option("--amp-ratio", sema.amp_ratio, "Minimum enc/idle ratio for an amplified component");
    c_sema->add_option("--spectrum-csv", sema.spectrum_csv, "Also write both spectra as CSV");

    AttackArgs atk;
    auto *c_atk = app.add_subcommand("attack", "Recover round key K1 by correlation analysis");
    c_atk->add_option("--traces", atk.traces, "Input .cemt file")->required();
    c_atk->add_option("--out", atk.out, "Result JSON")->required();
    c_atk->add_option("--band", atk.band, "Bandpass lo:hi[:transition] in Hz before the attack");
    c_atk->add_option("--window", atk.window, "Sample window lo:hi for all bytes");
    c_atk->add_option("--byte-windows", atk.byte_windows, "Eight lo:hi windows, one per byte position");
    c_atk->add_option("--bytes", atk.bytes, "Byte positions to attack, e.g. 0-7 or 0,3");
    c_atk->add_option("--known-pair", atk.known_pair, "pt:ct pair to complete the 80-bit key");
    c_atk->add_option("--dump-surface", atk.dump_surface, "Write correlation surfaces to PREFIX_byteN.csv");
    c_atk->add_option("--threads", atk.threads, "Worker threads across byte positions");

    EvalArgs ev;
    auto *c_ev = app.add_subcommand("eval", "Success rate versus trace count over simulated trials");
    c_ev->add_option("--config", ev.config, "Simulation config file")->required();
    c_ev->add_option("--out", ev.out, "Curve CSV")->required();
    c_ev->add_option("--trace-counts", ev.trace_counts, "Comma-separated ascending trace counts");
    c_ev->add_option("--trials", ev.trials, "Trials per trace count");
    c_ev->add_option("--seed", ev.seed, "Master seed");
    c_ev->add_option("--ranks-out", ev.ranks_out, "Write per-trial true-byte ranks (JSON)");
    c_ev->add_option("--plaintexts", ev.plaintexts, "random or sweep");
    c_ev->add_option("--band", ev.band, "Bandpass lo:hi[:transition] before each attack");
    c_ev->add_flag("--no-localize", ev.no_localize, "Search whole traces instead of per-byte leak windows");

    ReportArgs rep;
    auto *c_rep = app.add_subcommand("report", "Leakage probability table");
    c_rep->add_option("--ranks", rep.ranks, "Ranks JSON written by eval --ranks-out");
    c_rep->add_option("--count", rep.count, "Trace count to report from the ranks file (default: last)");
    c_rep->add_option("--config", rep.config, "Run fresh trials from this simulation config");
    c_rep->add_option("--traces", rep.traces, "Traces per trial when running fresh trials");
    c_rep->add_option("--trials", rep.trials, "Trials when running fresh trials");
    c_rep->add_option("--seed", rep.seed, "Master seed when running fresh trials");
    c_rep->add_option("--plaintexts", rep.plaintexts, "random or sweep");
    c_rep->add_option("--band", rep.band, "Bandpass lo:hi[:transition] before each attack");
    c_rep->add_flag("--no-localize", rep.no_localize, "Search whole traces");
    c_rep->add_option("--top-r", rep.top_r, "A byte leaks when ranked within the top R");
    c_rep->add_option("--out", rep.out, "Text table (default: stdout)");
    c_rep->add_option("--csv", rep.csv, "Also write the table as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }
    if (app.get_subcommands().empty()) {
        err << app.help();
        return kExitUsage;
    }

    try {
        if (c_enc->parsed())
            return run_encrypt(enc, out);
        if (c_ks->parsed())
            return run_keysched(ks_key, out);
        if (c_sim->parsed())
            return run_sim(sim, out);
        if (c_flt->parsed())
            return run_filter(flt, out);
        if (c_sema->parsed())
            return run_sema(sema, out);
        if (c_atk->parsed())
            return run_attack(atk, out);
        if (c_ev->parsed())
            return run_eval(ev, out);
        if (c_rep->parsed())
            return run_report(rep, out);
    } catch (const UsageError &e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}

} // namespace cematk::cli

#endif // CEMATK_CLI_HPP

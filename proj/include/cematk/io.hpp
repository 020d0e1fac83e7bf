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

// Binary trace files and flat key/value configuration files.
//
// Trace file (.cemt), little-endian throughout:
//
//   offset  size  field
//        0     4  magic "CEMT"
//        4     4  version (u32) = 1
//        8     4  n_traces (u32)
//       12     4  n_samples (u32)
//       16     8  sample_rate (f64, Hz)
//       24     4  flags (u32): bit 0 idle set, bit 1 key embedded
//       28     8  seed (u64)
//       36    28  reserved; zero unless bit 1 is set, then byte 36 holds the
//                 key length in bytes (10 or 16) and bytes 37.. the key,
//                 most significant byte first
//       64  8*n   plaintexts, 8 bytes per trace, most significant byte first
//        .  4*n*m samples, f32, row-major
//
// File size is exactly 64 + 8*n_traces + 4*n_traces*n_samples bytes.

#ifndef CEMATK_IO_HPP
#define CEMATK_IO_HPP

#include "cematk/sim.hpp"
#include "cematk/trace.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace cematk {

inline constexpr std::uint32_t kTraceFileVersion = 1;
inline constexpr std::size_t kTraceHeaderSize = 64;
inline constexpr std::uint32_t kFlagIdle = 1u << 0;
inline constexpr std::uint32_t kFlagKeyEmbedded = 1u << 1;

class TraceFileError : public std::runtime_error {
  public:
    enum class Kind { io, truncated, bad_magic, bad_version, bad_header, length_mismatch };

    TraceFileError(Kind kind, const std::string &path, const std::string &what)
        : std::runtime_error(path + ": " + what), kind_(kind) {}

    Kind kind() const { return kind_; }

  private:
    Kind kind_;
};

inline std::uint64_t trace_file_size(std::uint64_t n_traces, std::uint64_t n_samples) {
    return kTraceHeaderSize + 8 * n_traces + 4 * n_traces * n_samples;
}

namespace detail {

template <typename T> void put_le(std::vector<std::uint8_t> &buf, std::size_t at, T value) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    const U u = std::bit_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); i++)
        buf[at + i] = static_cast<std::uint8_t>(u >> (8 * i));
}

template <typename T> T get_le(const std::uint8_t *p) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); i++)
        u |= static_cast<U>(p[i]) << (8 * i);
    return std::bit_cast<T>(u);
}

} // namespace detail

inline void write_traceset(const TraceSet &ts, const std::filesystem::path &path, bool embed_key = false) {
    const std::string p = path.string();
    if (ts.n_traces() == 0 || ts.n_samples() == 0)
        throw TraceFileError(TraceFileError::Kind::bad_header, p, "refusing to write an empty trace set");
    if (ts.n_traces() > UINT32_MAX || ts.n_samples() > UINT32_MAX)
        throw TraceFileError(TraceFileError::Kind::bad_header, p, "trace set too large for format");

    std::vector<std::uint8_t> buf(trace_file_size(ts.n_traces(), ts.n_samples()), 0);
    std::memcpy(buf.data(), "CEMT", 4);
    detail::put_le<std::uint32_t>(buf, 4, kTraceFileVersion);
    detail::put_le<std::uint32_t>(buf, 8, static_cast<std::uint32_t>(ts.n_traces()));
    detail::put_le<std::uint32_t>(buf, 12, static_cast<std::uint32_t>(ts.n_samples()));
    detail::put_le<double>(buf, 16, ts.sample_rate());
    std::uint32_t flags = ts.provenance().idle ? kFlagIdle : 0;
    if (embed_key && ts.provenance().key) {
        flags |= kFlagKeyEmbedded;
        const auto kb = ts.provenance().key->bytes();
        buf[36] = static_cast<std::uint8_t>(kb.size());
        std::copy(kb.begin(), kb.end(), buf.begin() + 37);
    }
    detail::put_le<std::uint32_t>(buf, 24, flags);
    detail::put_le<std::uint64_t>(buf, 28, ts.provenance().seed);

    std::size_t at = kTraceHeaderSize;
    for (const auto &pt : ts.plaintexts()) {
        std::copy(pt.begin(), pt.end(), buf.begin() + static_cast<long>(at));
        at += 8;
    }
    for (float v : ts.samples()) {
        detail::put_le<float>(buf, at, v);
        at += 4;
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw TraceFileError(TraceFileError::Kind::io, p, "cannot open for writing");
    out.write(reinterpret_cast<const char *>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out)
        throw TraceFileError(TraceFileError::Kind::io, p, "write failed");
}

inline TraceSet read_traceset(const std::filesystem::path &path) {
    using Kind = TraceFileError::Kind;
    const std::string p = path.string();
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw TraceFileError(Kind::io, p, "cannot open for reading");
    std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad())
        throw TraceFileError(Kind::io, p, "read failed");

    if (buf.size() < 4 || std::memcmp(buf.data(), "CEMT", 4) != 0)
        throw TraceFileError(Kind::bad_magic, p, "not a CEMT trace file (bad magic)");
    if (buf.size() < kTraceHeaderSize)
        throw TraceFileError(Kind::truncated, p, "truncated header (" + std::to_string(buf.size()) + " bytes)");
    const auto version = detail::get_le<std::uint32_t>(buf.data() + 4);
    if (version != kTraceFileVersion)
        throw TraceFileError(Kind::bad_version, p, "unsupported version " + std::to_string(version));
    const auto n_traces = detail::get_le<std::uint32_t>(buf.data() + 8);
    const auto n_samples = detail::get_le<std::uint32_t>(buf.data() + 12);
    const auto sample_rate = detail::get_le<double>(buf.data() + 16);
    const auto flags = detail::get_le<std::uint32_t>(buf.data() + 24);
    const auto seed = detail::get_le<std::uint64_t>(buf.data() + 28);
    if (n_traces == 0 || n_samples == 0)
        throw TraceFileError(Kind::bad_header, p, "header declares zero traces or samples");
    if (!(sample_rate > 0.0))
        throw TraceFileError(Kind::bad_header, p, "header declares non-positive sample rate");
    const std::uint64_t expected = trace_file_size(n_traces, n_samples);
    if (buf.size() != expected)
        throw TraceFileError(Kind::length_mismatch, p,
                             "file is " + std::to_string(buf.size()) + " bytes but header implies " +
                                 std::to_string(expected) + " (truncated or corrupt)");

    TraceSet ts(n_traces, n_samples, sample_rate);
    ts.provenance().idle = flags & kFlagIdle;
    ts.provenance().seed = seed;
    if (flags & kFlagKeyEmbedded) {
        const std::size_t len = buf[36];
        if (len != 10 && len != 16)
            throw TraceFileError(Kind::bad_header, p, "embedded key has invalid length");
        ts.provenance().key = KeyRegister::from_bytes({buf.begin() + 37, buf.begin() + 37 + static_cast<long>(len)});
    }
    std::size_t at = kTraceHeaderSize;
    for (auto &pt : ts.plaintexts()) {
        std::copy(buf.begin() + static_cast<long>(at), buf.begin() + static_cast<long>(at + 8), pt.begin());
        at += 8;
    }
    for (auto &v : ts.samples()) {
        v = detail::get_le<float>(buf.data() + at);
        at += 4;
    }
    return ts;
}

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Flat `key = value` text; `#` starts a comment; blank lines are ignored.
class KeyValueConfig {
  public:
    static KeyValueConfig parse(std::istream &in, const std::string &origin = "<config>") {
        KeyValueConfig cfg;
        cfg.origin_ = origin;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            lineno++;
            if (auto hash = line.find('#'); hash != std::string::npos)
                line.erase(hash);
            const auto trim = [](std::string s) {
                const auto b = s.find_first_not_of(" \t\r");
                const auto e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            line = trim(line);
            if (line.empty())
                continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            if (cfg.values_.count(key))
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    static KeyValueConfig load(const std::filesystem::path &path) {
        std::ifstream in(path);
        if (!in)
            throw ConfigError(path.string() + ": cannot open config file");
        return parse(in, path.string());
    }

    const std::string &origin() const { return origin_; }
    bool has(const std::string &key) const { return values_.count(key) != 0; }
    const std::map<std::string, std::string> &values() const { return values_; }

    const std::string &get(const std::string &key) const {
        auto it = values_.find(key);
        if (it == values_.end())
            throw ConfigError(origin_ + ": missing required key '" + key + "'");
        return it->second;
    }

    /// Throws on any key outside `allowed`.
    void require_known(const std::vector<std::string> &allowed) const {
        for (const auto &[k, v] : values_)
            if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
                throw ConfigError(origin_ + ": unknown key '" + k + "'");
    }

  private:
    std::string origin_;
    std::map<std::string, std::string> values_;
};

/// Keys accepted by sim_config_from().
inline const std::vector<std::string> &sim_config_keys() {
    static const std::vector<std::string> keys = {
        "n_samples", "sample_rate", "gain",      "baseline",    "noise_std", "leak_indices", "leak_width",
        "carrier_freq", "jitter_max", "repetitions", "key",       "seed",        "ambient"};
    return keys;
}

namespace detail {

inline double parse_double(const std::string &origin, const std::string &key, const std::string &v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size())
            throw std::invalid_argument(v);
        return d;
    } catch (const std::exception &) {
        throw ConfigError(origin + ": key '" + key + "': '" + v + "' is not a number");
    }
}

inline std::uint64_t parse_uint(const std::string &origin, const std::string &key, const std::string &v) {
    try {
        std::size_t used = 0;
        if (v.empty() || v[0] == '-')
            throw std::invalid_argument(v);
        const auto u = std::stoull(v, &used, 0);
        if (used != v.size())
            throw std::invalid_argument(v);
        return u;
    } catch (const std::exception &) {
        throw ConfigError(origin + ": key '" + key + "': '" + v + "' is not a non-negative integer");
    }
}

inline std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        out.push_back(b == std::string::npos ? std::string() : item.substr(b, e - b + 1));
    }
    return out;
}

} // namespace detail

/// Builds a SimConfig from `kv`, starting from defaults. Keys not in
/// sim_config_keys() are ignored here; callers reject unknown keys with
/// require_known() against their full key list.
///
///   n_samples, sample_rate (Hz), gain (a), baseline (b), noise_std,
///   leak_indices (8 comma-separated indices), leak_width, carrier_freq
///   (Hz or "none"), jitter_max, repetitions, key (hex, 20 or 32 digits),
///   seed, ambient (comma-separated freq:amplitude pairs)
inline SimConfig sim_config_from(const KeyValueConfig &kv) {
    const std::string &o = kv.origin();
    SimConfig c;
    for (const auto &[k, v] : kv.values()) {
        if (k == "n_samples")
            c.n_samples = detail::parse_uint(o, k, v);
        else if (k == "sample_rate")
            c.sample_rate = detail::parse_double(o, k, v);
        else if (k == "gain")
            c.leak_params.a = detail::parse_double(o, k, v);
        else if (k == "baseline")
            c.leak_params.b = detail::parse_double(o, k, v);
        else if (k == "noise_std")
            c.noise_std = detail::parse_double(o, k, v);
        else if (k == "leak_indices") {
            const auto parts = detail::split(v, ',');
            if (parts.size() != 8)
                throw ConfigError(o + ": leak_indices needs 8 values, got " + std::to_string(parts.size()));
            for (std::size_t j = 0; j < 8; j++)
                c.leak_indices[j] = detail::parse_uint(o, k, parts[j]);
        } else if (k == "leak_width")
            c.leak_width = detail::parse_uint(o, k, v);
        else if (k == "carrier_freq") {
            if (v == "none" || v.empty())
                c.carrier_freq.reset();
            else
                c.carrier_freq = detail::parse_double(o, k, v);
        } else if (k == "jitter_max")
            c.jitter_max = detail::parse_uint(o, k, v);
        else if (k == "repetitions")
            c.repetitions = detail::parse_uint(o, k, v);
        else if (k == "key") {
            try {
                c.key = KeyRegister::from_hex(v);
            } catch (const std::exception &e) {
                throw ConfigError(o + ": key: " + e.what());
            }
        } else if (k == "seed")
            c.seed = detail::parse_uint(o, k, v);
        else if (k == "ambient") {
            c.ambient.clear();
            for (const auto &pair : detail::split(v, ',')) {
                const auto fa = detail::split(pair, ':');
                if (fa.size() != 2)
                    throw ConfigError(o + ": ambient entries must be freq:amplitude");
                c.ambient.push_back({detail::parse_double(o, k, fa[0]), detail::parse_double(o, k, fa[1])});
            }
        }
    }
    try {
        c.validate();
    } catch (const std::invalid_argument &e) {
        throw ConfigError(o + ": " + e.what());
    }
    return c;
}

} // namespace cematk

#endif // CEMATK_IO_HPP

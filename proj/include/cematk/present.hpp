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

// PRESENT-80 / PRESENT-128 block cipher.
//
// Bit numbering: bit 63 of a State64 is the leftmost (most significant) bit
// of the cipher state, and byte 0 is the most significant byte. Hex strings
// are written most significant byte first. The same convention applies to
// the key register (bit width-1 is leftmost).

#ifndef CEMATK_PRESENT_HPP
#define CEMATK_PRESENT_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cematk {

using State64 = std::uint64_t;

/// Byte `index` of a state, index 0 being the most significant byte.
constexpr std::uint8_t state_byte(State64 s, unsigned index) {
    return static_cast<std::uint8_t>(s >> (56 - 8 * index));
}

constexpr State64 state_from_bytes(const std::array<std::uint8_t, 8> &bytes) {
    State64 s = 0;
    for (auto b : bytes)
        s = (s << 8) | b;
    return s;
}

constexpr std::array<std::uint8_t, 8> state_to_bytes(State64 s) {
    std::array<std::uint8_t, 8> out{};
    for (unsigned i = 0; i < 8; i++)
        out[i] = state_byte(s, i);
    return out;
}

/// 80- or 128-bit key register.
class KeyRegister {
  public:
    using Word = unsigned __int128;

    KeyRegister() = default;

    KeyRegister(unsigned width, Word bits) : width_(width), bits_(bits) {
        if (width != 80 && width != 128)
            throw std::invalid_argument("key width must be 80 or 128, got " +
                                        std::to_string(width));
        if (width == 80 && (bits >> 80) != 0)
            throw std::invalid_argument("key value does not fit in 80 bits");
    }

    /// Builds a key from its bytes, most significant first (10 or 16 bytes).
    static KeyRegister from_bytes(const std::vector<std::uint8_t> &bytes) {
        if (bytes.size() != 10 && bytes.size() != 16)
            throw std::invalid_argument("key must be 10 or 16 bytes, got " +
                                        std::to_string(bytes.size()));
        Word w = 0;
        for (auto b : bytes)
            w = (w << 8) | b;
        return KeyRegister(static_cast<unsigned>(bytes.size() * 8), w);
    }

    /// Parses an upper- or lower-case hex string of 20 or 32 digits.
    static KeyRegister from_hex(std::string_view hex);

    unsigned width() const { return width_; }
    Word bits() const { return bits_; }

    std::vector<std::uint8_t> bytes() const {
        std::vector<std::uint8_t> out(width_ / 8);
        for (std::size_t i = 0; i < out.size(); i++)
            out[i] = static_cast<std::uint8_t>(bits_ >> (width_ - 8 * (i + 1)));
        return out;
    }

    /// Leftmost 64 bits of the register, i.e. the first round key.
    State64 leftmost64() const {
        return static_cast<State64>(bits_ >> (width_ - 64));
    }

    friend bool operator==(const KeyRegister &, const KeyRegister &) = default;

  private:
    unsigned width_ = 80;
    Word bits_ = 0;
};

using RoundKeySchedule = std::array<State64, 32>;

namespace present {

inline constexpr std::array<std::uint8_t, 16> kSbox = {
    0xC, 0x5, 0x6, 0xB, 0x9, 0x0, 0xA, 0xD,
    0x3, 0xE, 0xF, 0x8, 0x4, 0x7, 0x1, 0x2};

inline constexpr std::array<std::uint8_t, 16> kSboxInv = [] {
    std::array<std::uint8_t, 16> inv{};
    for (std::uint8_t x = 0; x < 16; x++)
        inv[kSbox[x]] = x;
    return inv;
}();

/// Destination of state bit i under pLayer: 16*i mod 63, and 63 -> 63.
constexpr unsigned p_position(unsigned i) {
    return i == 63 ? 63 : (16 * i) % 63;
}

inline constexpr std::array<std::uint8_t, 64> kPermutation = [] {
    std::array<std::uint8_t, 64> p{};
    for (unsigned i = 0; i < 64; i++)
        p[i] = static_cast<std::uint8_t>(p_position(i));
    return p;
}();

namespace detail {

// Byte-sliced lookup tables: table[k][v] is the permuted image of byte value v
// placed at byte k (k = 0 least significant).
using ByteTables = std::array<std::array<State64, 256>, 8>;

constexpr ByteTables make_tables(bool inverse) {
    ByteTables t{};
    for (unsigned k = 0; k < 8; k++)
        for (unsigned v = 0; v < 256; v++) {
            State64 out = 0;
            for (unsigned b = 0; b < 8; b++) {
                if (!((v >> b) & 1))
                    continue;
                const unsigned src = 8 * k + b;
                unsigned dst = src;
                if (!inverse) {
                    dst = p_position(src);
                } else {
                    for (unsigned j = 0; j < 64; j++)
                        if (p_position(j) == src)
                            dst = j;
                }
                out |= State64{1} << dst;
            }
            t[k][v] = out;
        }
    return t;
}

inline const ByteTables &p_tables() {
    static const ByteTables t = make_tables(false);
    return t;
}

inline const ByteTables &p_inv_tables() {
    static const ByteTables t = make_tables(true);
    return t;
}

inline State64 permute(State64 s, const ByteTables &t) {
    State64 out = 0;
    for (unsigned k = 0; k < 8; k++)
        out |= t[k][(s >> (8 * k)) & 0xFF];
    return out;
}

inline std::uint8_t checked_nibble(unsigned x, const char *what) {
    if (x > 15)
        throw std::out_of_range(std::string(what) + ": input " +
                                std::to_string(x) + " is not a 4-bit value");
    return static_cast<std::uint8_t>(x);
}

} // namespace detail

inline std::uint8_t sbox(unsigned x) {
    return kSbox[detail::checked_nibble(x, "sbox")];
}

inline std::uint8_t sbox_inv(unsigned y) {
    return kSboxInv[detail::checked_nibble(y, "sbox_inv")];
}

inline State64 sbox_layer(State64 s) {
    State64 out = 0;
    for (unsigned i = 0; i < 16; i++)
        out |= State64{kSbox[(s >> (4 * i)) & 0xF]} << (4 * i);
    return out;
}

inline State64 sbox_inv_layer(State64 s) {
    State64 out = 0;
    for (unsigned i = 0; i < 16; i++)
        out |= State64{kSboxInv[(s >> (4 * i)) & 0xF]} << (4 * i);
    return out;
}

inline State64 p_layer(State64 s) { return detail::permute(s, detail::p_tables()); }

inline State64 p_inv_layer(State64 s) {
    return detail::permute(s, detail::p_inv_tables());
}

constexpr State64 add_round_key(State64 s, State64 k) { return s ^ k; }

/// Round keys K1..K32. K1 is the leftmost 64 bits of the initial register;
/// each update rotates the register left by 61, passes the top nibble (two
/// nibbles for 128-bit keys) through the S-box and XORs the round counter.
inline RoundKeySchedule key_schedule(const KeyRegister &key) {
    using Word = KeyRegister::Word;
    const unsigned width = key.width();
    if (width != 80 && width != 128)
        throw std::invalid_argument("unsupported key width");
    const Word mask = width == 128 ? ~Word{0} : ((Word{1} << 80) - 1);

    RoundKeySchedule rk{};
    Word reg = key.bits();
    for (unsigned r = 1; r <= 32; r++) {
        rk[r - 1] = static_cast<State64>(reg >> (width - 64));
        if (r == 32)
            break;
        reg = ((reg << 61) | (reg >> (width - 61))) & mask;
        if (width == 80) {
            const Word top = kSbox[static_cast<unsigned>(reg >> 76) & 0xF];
            reg = (reg & ~(Word{0xF} << 76)) | (top << 76);
            reg ^= Word{r} << 15;
        } else {
            const Word hi = kSbox[static_cast<unsigned>(reg >> 124) & 0xF];
            const Word lo = kSbox[static_cast<unsigned>(reg >> 120) & 0xF];
            reg = (reg & ~(Word{0xFF} << 120)) | (hi << 124) | (lo << 120);
            reg ^= Word{r} << 62;
        }
    }
    return rk;
}

inline State64 encrypt_with_schedule(State64 p, const RoundKeySchedule &rk) {
    State64 s = p;
    for (unsigned r = 0; r < 31; r++)
        s = p_layer(sbox_layer(s ^ rk[r]));
    return s ^ rk[31];
}

inline State64 decrypt_with_schedule(State64 c, const RoundKeySchedule &rk) {
    State64 s = c ^ rk[31];
    for (int r = 30; r >= 0; r--)
        s = sbox_inv_layer(p_inv_layer(s)) ^ rk[r];
    return s;
}

inline State64 encrypt_block(State64 p, const KeyRegister &key) {
    return encrypt_with_schedule(p, key_schedule(key));
}

inline State64 decrypt_block(State64 c, const KeyRegister &key) {
    return decrypt_with_schedule(c, key_schedule(key));
}

enum class Capture { none, add_round_key, sbox_output, all };

/// Intermediates of one round. Fields not selected by the capture mode are 0.
struct RoundIntermediates {
    unsigned round = 0;
    State64 add_round_key = 0; ///< state XOR K_round, the S-box input
    State64 sbox_output = 0;
    State64 p_layer_output = 0;
};

struct RoundReducedOutput {
    /// State after n_rounds full rounds; the final K32 addition is not
    /// applied, so encrypt_block(p) == rounds(31).state ^ K32.
    State64 state = 0;
    std::vector<RoundIntermediates> rounds;
};

inline RoundReducedOutput encrypt_rounds(State64 p, const KeyRegister &key,
                                         unsigned n_rounds,
                                         Capture capture = Capture::all) {
    if (n_rounds < 1 || n_rounds > 31)
        throw std::out_of_range("n_rounds must be in 1..31, got " +
                                std::to_string(n_rounds));
    const auto rk = key_schedule(key);
    RoundReducedOutput out;
    State64 s = p;
    for (unsigned r = 0; r < n_rounds; r++) {
        const State64 ark = s ^ rk[r];
        const State64 sb = sbox_layer(ark);
        s = p_layer(sb);
        if (capture != Capture::none) {
            RoundIntermediates ri;
            ri.round = r + 1;
            if (capture == Capture::add_round_key || capture == Capture::all)
                ri.add_round_key = ark;
            if (capture == Capture::sbox_output || capture == Capture::all)
                ri.sbox_output = sb;
            if (capture == Capture::all)
                ri.p_layer_output = s;
            out.rounds.push_back(ri);
        }
    }
    out.state = s;
    return out;
}

} // namespace present

// Hex helpers. Output is upper case, most significant byte first.

inline std::vector<std::uint8_t> parse_hex(std::string_view hex) {
    std::string digits;
    for (char c : hex)
        if (c != ' ' && c != '_' && c != ':')
            digits.push_back(c);
    if (digits.size() >= 2 && digits[0] == '0' && (digits[1] == 'x' || digits[1] == 'X'))
        digits.erase(0, 2);
    if (digits.empty() || digits.size() % 2 != 0)
        throw std::invalid_argument("hex string must have an even, non-zero number of digits: '" +
                                    std::string(hex) + "'");
    auto nibble = [&](char c) -> std::uint8_t {
        if (c >= '0' && c <= '9')
            return static_cast<std::uint8_t>(c - '0');
        if (c >= 'a' && c <= 'f')
            return static_cast<std::uint8_t>(c - 'a' + 10);
        if (c >= 'A' && c <= 'F')
            return static_cast<std::uint8_t>(c - 'A' + 10);
        throw std::invalid_argument("invalid hex digit in '" + std::string(hex) + "'");
    };
    std::vector<std::uint8_t> out(digits.size() / 2);
    for (std::size_t i = 0; i < out.size(); i++)
        out[i] = static_cast<std::uint8_t>(nibble(digits[2 * i]) << 4 | nibble(digits[2 * i + 1]));
    return out;
}

inline State64 parse_state_hex(std::string_view hex) {
    const auto bytes = parse_hex(hex);
    if (bytes.size() != 8)
        throw std::invalid_argument("block must be 16 hex digits: '" + std::string(hex) + "'");
    std::array<std::uint8_t, 8> a{};
    std::copy(bytes.begin(), bytes.end(), a.begin());
    return state_from_bytes(a);
}

inline std::string to_hex(const std::uint8_t *data, std::size_t n) {
    static constexpr char digits[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(2 * n);
    for (std::size_t i = 0; i < n; i++) {
        out.push_back(digits[data[i] >> 4]);
        out.push_back(digits[data[i] & 0xF]);
    }
    return out;
}

inline std::string to_hex(State64 s) {
    const auto b = state_to_bytes(s);
    return to_hex(b.data(), b.size());
}

inline std::string to_hex(const KeyRegister &k) {
    const auto b = k.bytes();
    return to_hex(b.data(), b.size());
}

inline KeyRegister KeyRegister::from_hex(std::string_view hex) {
    return from_bytes(parse_hex(hex));
}

} // namespace cematk

#endif // CEMATK_PRESENT_HPP

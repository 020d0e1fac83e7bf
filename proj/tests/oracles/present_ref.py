#!/usr/bin/env python3
# Copyright 2026 The cematk Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
# SPDX-License-Identifier: Apache-2.0
# Bit-level PRESENT reference used to freeze expected values for the C++ tests.
# Deliberately written from bit lists, not from word tricks, so that it shares
# no code path with the library.

SBOX = [0xC, 0x5, 0x6, 0xB, 0x9, 0x0, 0xA, 0xD, 0x3, 0xE, 0xF, 0x8, 0x4, 0x7, 0x1, 0x2]


def to_bits(value, width):
    # bits[i] is bit i (0 = least significant)
    return [(value >> i) & 1 for i in range(width)]


def from_bits(bits):
    return sum(b << i for i, b in enumerate(bits))


def sbox_layer(state):
    out = 0
    for i in range(16):
        out |= SBOX[(state >> (4 * i)) & 0xF] << (4 * i)
    return out


def p_layer(state):
    bits = to_bits(state, 64)
    out = [0] * 64
    for i in range(64):
        dest = 63 if i == 63 else (16 * i) % 63
        out[dest] = bits[i]
    return from_bits(out)


def round_keys(key, width):
    keys = []
    reg = key
    mask = (1 << width) - 1
    for r in range(1, 33):
        keys.append(reg >> (width - 64))
        reg = ((reg << 61) | (reg >> (width - 61))) & mask
        if width == 80:
            top = SBOX[reg >> 76]
            reg = (reg & ~(0xF << 76)) | (top << 76)
            reg ^= r << 15
        else:
            top = SBOX[reg >> 124]
            nxt = SBOX[(reg >> 120) & 0xF]
            reg = (reg & ~(0xFF << 120)) | (top << 124) | (nxt << 120)
            reg ^= r << 62
    return keys


def encrypt(pt, key, width=80):
    ks = round_keys(key, width)
    s = pt
    for r in range(31):
        s ^= ks[r]
        s = sbox_layer(s)
        s = p_layer(s)
    return s ^ ks[31]


VECTORS_80 = [
    (0x0000000000000000, 0x00000000000000000000, 0x5579C1387B228445),
    (0x0000000000000000, 0xFFFFFFFFFFFFFFFFFFFF, 0xE72C46C0F5945049),
    (0xFFFFFFFFFFFFFFFF, 0x00000000000000000000, 0xA112FFC72F68417B),
    (0xFFFFFFFFFFFFFFFF, 0xFFFFFFFFFFFFFFFFFFFF, 0x3333DCD3213210D2),
]

if __name__ == "__main__":
    for pt, key, ct in VECTORS_80:
        got = encrypt(pt, key)
        assert got == ct, hex(got)
    print("published PRESENT-80 vectors: ok")
    print("zero key schedule (80):")
    for i, k in enumerate(round_keys(0, 80)):
        print(f"  K{i+1:02d} = {k:016X}")
    print("ones key schedule (80) K2..K4:", [f"{k:016X}" for k in round_keys((1 << 80) - 1, 80)[1:4]])
    print("p_layer single bits:", [f"{p_layer(1 << i):016X}" for i in (0, 1, 2, 15, 16, 62, 63)])
    for pt, key in [(0, 0), ((1 << 64) - 1, 0), (0, (1 << 128) - 1), ((1 << 64) - 1, (1 << 128) - 1)]:
        print(f"PRESENT-128 {pt:016X} {key:032X} -> {encrypt(pt, key, 128):016X}")
    k = 0xACDEFB21F9234375C0E6
    print("example key 80:", f"K1={round_keys(k,80)[0]:016X}",
          f"E(0)={encrypt(0, k):016X}", f"E(0123456789ABCDEF)={encrypt(0x0123456789ABCDEF, k):016X}")
    # HW(S(.)) nibble ambiguity: deltas d != 0 with HW(S(x^d)) == HW(S(x)) for all x
    hw = lambda v: bin(v).count("1")
    print("nibble HW ambiguity deltas:",
          [d for d in range(1, 16) if all(hw(SBOX[x ^ d]) == hw(SBOX[x]) for x in range(16))])

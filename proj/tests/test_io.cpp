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

#include "cematk/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

using namespace cematk;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
  protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("cematk_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    fs::path path(const std::string &name) const { return dir_ / name; }

    fs::path dir_;
};

TraceSet sample_set(std::size_t nt, std::size_t ns) {
    std::mt19937_64 rng(nt * 31 + ns);
    std::normal_distribution<float> g;
    TraceSet ts(nt, ns, 250e6);
    for (auto &v : ts.samples())
        v = g(rng);
    for (auto &p : ts.plaintexts())
        for (auto &b : p)
            b = std::uint8_t(rng());
    ts.provenance().seed = 0xDEADBEEFCAFEull;
    return ts;
}

std::vector<char> slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spill(const fs::path &p, const std::vector<char> &bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), std::streamsize(bytes.size()));
}

TraceFileError::Kind error_kind(const fs::path &p) {
    try {
        read_traceset(p);
    } catch (const TraceFileError &e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error for " << p;
    return TraceFileError::Kind::io;
}

} // namespace

using TraceFile = TempDir;
using Config = TempDir;

TEST_F(TraceFile, RoundTripIsBitExact) {
    TraceSet ts = sample_set(17, 93);
    ts.samples()[5] = std::numeric_limits<float>::denorm_min();
    ts.samples()[6] = -0.0f;
    ts.provenance().idle = true;
    write_traceset(ts, path("a.cemt"));
    EXPECT_EQ(fs::file_size(path("a.cemt")), 64u + 8 * 17 + 4 * 17 * 93);
    const TraceSet back = read_traceset(path("a.cemt"));
    EXPECT_EQ(back.n_traces(), 17u);
    EXPECT_EQ(back.n_samples(), 93u);
    EXPECT_EQ(back.sample_rate(), 250e6);
    EXPECT_EQ(back.plaintexts(), ts.plaintexts());
    EXPECT_EQ(std::memcmp(back.samples().data(), ts.samples().data(), ts.samples().size() * 4), 0);
    EXPECT_TRUE(back.provenance().idle);
    EXPECT_EQ(back.provenance().seed, 0xDEADBEEFCAFEull);
    EXPECT_FALSE(back.provenance().key);

    // Writing what was read reproduces the file byte for byte.
    write_traceset(back, path("b.cemt"));
    EXPECT_EQ(slurp(path("a.cemt")), slurp(path("b.cemt")));
}

TEST_F(TraceFile, HeaderLayout) {
    const TraceSet ts = sample_set(2, 3);
    write_traceset(ts, path("h.cemt"));
    const auto b = slurp(path("h.cemt"));
    EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "CEMT");
    EXPECT_EQ(b[4], 1);
    EXPECT_EQ(b[8], 2);
    EXPECT_EQ(b[12], 3);
    for (std::size_t i = 36; i < 64; i++)
        EXPECT_EQ(b[i], 0) << i;
    EXPECT_EQ(std::uint8_t(b[64]), ts.plaintexts()[0][0]);
    EXPECT_EQ(trace_file_size(256, 5000), 64u + 2048 + 5120000);
}

TEST_F(TraceFile, EmbeddedKey) {
    TraceSet ts = sample_set(3, 4);
    ts.provenance().key = KeyRegister::from_hex("ACDEFB21F9234375C0E6");
    write_traceset(ts, path("nokey.cemt"));
    EXPECT_FALSE(read_traceset(path("nokey.cemt")).provenance().key);
    write_traceset(ts, path("key.cemt"), true);
    EXPECT_EQ(*read_traceset(path("key.cemt")).provenance().key, *ts.provenance().key);
    ts.provenance().key = KeyRegister(128, 1);
    write_traceset(ts, path("key128.cemt"), true);
    EXPECT_EQ(read_traceset(path("key128.cemt")).provenance().key->width(), 128u);
}

TEST_F(TraceFile, CorruptFilesAreRejected) {
    using Kind = TraceFileError::Kind;
    write_traceset(sample_set(4, 10), path("ok.cemt"));
    const auto good = slurp(path("ok.cemt"));

    auto bytes = good;
    bytes.pop_back();
    spill(path("short.cemt"), bytes);
    EXPECT_EQ(error_kind(path("short.cemt")), Kind::length_mismatch);

    bytes = good;
    bytes.push_back(0);
    spill(path("long.cemt"), bytes);
    EXPECT_EQ(error_kind(path("long.cemt")), Kind::length_mismatch);

    spill(path("header.cemt"), std::vector<char>(good.begin(), good.begin() + 40));
    EXPECT_EQ(error_kind(path("header.cemt")), Kind::truncated);

    bytes = good;
    bytes[0] = 'X';
    spill(path("magic.cemt"), bytes);
    EXPECT_EQ(error_kind(path("magic.cemt")), Kind::bad_magic);

    bytes = good;
    bytes[4] = 2;
    spill(path("version.cemt"), bytes);
    EXPECT_EQ(error_kind(path("version.cemt")), Kind::bad_version);

    bytes = good;
    bytes[8] = 0;
    spill(path("zero.cemt"), bytes);
    EXPECT_EQ(error_kind(path("zero.cemt")), Kind::bad_header);

    EXPECT_EQ(error_kind(path("missing.cemt")), Kind::io);
    try {
        read_traceset(path("short.cemt"));
    } catch (const TraceFileError &e) {
        EXPECT_NE(std::string(e.what()).find("short.cemt"), std::string::npos);
    }
}

TEST_F(Config, ParseAndBuildSimConfig) {
    std::istringstream in(R"(# example
n_samples = 2000
sample_rate=1e8
gain = 0.5   # comment
baseline = -1
noise_std = 0.25
leak_indices = 100, 300, 500, 700, 900, 1100, 1300, 1500
leak_width = 12
carrier_freq = 20e6
jitter_max = 3
repetitions = 4
key = 00112233445566778899
seed = 0x10
ambient = 5e6:0.1, 7.5e6:0.2
)");
    const auto kv = KeyValueConfig::parse(in, "mem");
    EXPECT_NO_THROW(kv.require_known(sim_config_keys()));
    const SimConfig c = sim_config_from(kv);
    EXPECT_EQ(c.n_samples, 2000u);
    EXPECT_EQ(c.sample_rate, 1e8);
    EXPECT_EQ(c.leak_params.a, 0.5);
    EXPECT_EQ(c.leak_params.b, -1.0);
    EXPECT_EQ(c.noise_std, 0.25);
    EXPECT_EQ(c.leak_indices[7], 1500u);
    EXPECT_EQ(c.leak_width, 12u);
    EXPECT_EQ(*c.carrier_freq, 20e6);
    EXPECT_EQ(c.jitter_max, 3u);
    EXPECT_EQ(c.repetitions, 4u);
    EXPECT_EQ(c.key, KeyRegister::from_hex("00112233445566778899"));
    EXPECT_EQ(c.seed, 16u);
    ASSERT_EQ(c.ambient.size(), 2u);
    EXPECT_EQ(c.ambient[1].amplitude, 0.2);
}

TEST_F(Config, Errors) {
    auto parse = [](const std::string &text) {
        std::istringstream in(text);
        return KeyValueConfig::parse(in, "mem");
    };
    EXPECT_THROW(parse("a = 1\na = 2\n"), ConfigError);
    EXPECT_THROW(parse("no equals sign\n"), ConfigError);
    EXPECT_THROW(parse(" = 3\n"), ConfigError);
    EXPECT_THROW(parse("bogus = 1\n").require_known(sim_config_keys()), ConfigError);
    EXPECT_THROW(sim_config_from(parse("n_samples = many\n")), ConfigError);
    EXPECT_THROW(sim_config_from(parse("n_samples = -5\n")), ConfigError);
    EXPECT_THROW(sim_config_from(parse("leak_indices = 1,2,3\n")), ConfigError);
    EXPECT_THROW(sim_config_from(parse("key = XYZ\n")), ConfigError);
    EXPECT_THROW(sim_config_from(parse("ambient = 5e6\n")), ConfigError);
    // Validation failures surface as ConfigError naming the origin.
    try {
        sim_config_from(parse("n_samples = 100\n"));
        ADD_FAILURE();
    } catch (const ConfigError &e) {
        EXPECT_NE(std::string(e.what()).find("mem"), std::string::npos);
    }
    try {
        KeyValueConfig::load(path("absent.cfg"));
        ADD_FAILURE();
    } catch (const ConfigError &e) {
        EXPECT_NE(std::string(e.what()).find("absent.cfg"), std::string::npos);
    }
    EXPECT_FALSE(sim_config_from(parse("carrier_freq = none\n")).carrier_freq);
}

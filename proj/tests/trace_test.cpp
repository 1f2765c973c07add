// Copyright (C) 2026 rkv-sim contributors
// SPDX-License-Identifier: Apache-2.0

#include "rkv/trace.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "rkv/redundancy.hpp"

using rkv::DecodeTrace;
using rkv::Matrix;
using rkv::ModelGeometry;
using rkv::SynthConfig;

namespace {

SynthConfig base_config() {
    SynthConfig cfg;
    cfg.seed = 1234;
    cfg.steps = 64;
    cfg.geometry = ModelGeometry{2, 2, 2, 16, 2};
    cfg.n_clusters = 3;
    cfg.cluster_repeat_prob = 0.5f;
    cfg.cluster_noise_sigma = 0.01f;
    return cfg;
}

std::string serialized(const DecodeTrace& trace) {
    std::ostringstream os(std::ios::binary);
    rkv::save(trace, os);
    return os.str();
}

Matrix keys_of_head(const DecodeTrace& trace, std::size_t layer, std::size_t head) {
    Matrix keys(0, trace.geometry.head_dim);
    for (std::size_t t = 0; t < trace.steps.size(); ++t)
        keys.append_row(trace.key_row(t, layer, head));
    return keys;
}

TEST(Generate, SameSeedSameBytes) {
    const SynthConfig cfg = base_config();
    EXPECT_EQ(serialized(rkv::generate(cfg)), serialized(rkv::generate(cfg)));
}

TEST(Generate, DifferentSeedsDiffer) {
    SynthConfig a = base_config(), b = base_config();
    b.seed = 4321;
    EXPECT_NE(rkv::trace_digest(rkv::generate(a)), rkv::trace_digest(rkv::generate(b)));
}

TEST(Generate, NoRepeatsKeepsSimilarityLow) {
    SynthConfig cfg = base_config();
    cfg.cluster_repeat_prob = 0.0f;
    cfg.cluster_noise_sigma = 0.0f;
    cfg.steps = 48;
    cfg.geometry.head_dim = 64;  // enough dimensions for mutually orthogonal keys
    const DecodeTrace trace = rkv::generate(cfg);
    const Matrix s = rkv::similarity_matrix(keys_of_head(trace, 0, 0), 1e-8f);
    for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t j = 0; j < s.cols(); ++j)
            EXPECT_LT(std::abs(s.at(i, j)), 0.5f) << "pair " << i << "," << j;
}

TEST(Generate, AlwaysRepeatSingleClusterIsAllDuplicates) {
    SynthConfig cfg = base_config();
    cfg.cluster_repeat_prob = 1.0f;
    cfg.cluster_noise_sigma = 0.0f;
    cfg.n_clusters = 1;
    cfg.steps = 16;
    const DecodeTrace trace = rkv::generate(cfg);
    const Matrix s = rkv::similarity_matrix(keys_of_head(trace, 1, 1), 1e-8f);
    for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t j = 0; j < s.cols(); ++j) {
            if (i != j) {
                EXPECT_NEAR(s.at(i, j), 1.0, 1e-5);
            }
        }
}

TEST(Generate, IntraClusterSimilarityTracksNoise) {
    SynthConfig cfg = base_config();
    cfg.cluster_repeat_prob = 0.9f;
    cfg.cluster_noise_sigma = 0.01f;
    cfg.steps = 96;
    const DecodeTrace trace = rkv::generate(cfg);
    const auto labels = rkv::parse_int_list(trace.metadata.at("cluster_ids"));
    const Matrix s = rkv::similarity_matrix(keys_of_head(trace, 0, 1), 1e-8f);
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < cfg.steps; ++i)
        for (std::size_t j = i + 1; j < cfg.steps; ++j)
            if (labels[i] >= 0 && labels[i] == labels[j]) {
                total += s.at(j, i);
                ++pairs;
            }
    ASSERT_GT(pairs, 0u);
    EXPECT_GE(total / pairs, 1.0 - 3.0 * cfg.cluster_noise_sigma);
}

TEST(Generate, SpikePositionsAreLabeled) {
    SynthConfig cfg = base_config();
    cfg.attention_spike_positions = {10, 40};
    const DecodeTrace trace = rkv::generate(cfg);
    const auto spikes = rkv::parse_int_list(trace.metadata.at("spike_positions"));
    ASSERT_EQ(spikes.size(), 2u);
    EXPECT_EQ(spikes[0], 10);
    EXPECT_EQ(spikes[1], 40);
    // Spike tokens carry their own ids and are not cluster members.
    const auto labels = rkv::parse_int_list(trace.metadata.at("cluster_ids"));
    EXPECT_EQ(labels[10], -1);
    EXPECT_EQ(labels[40], -1);
}

TEST(Generate, InvalidConfigRejected) {
    SynthConfig cfg = base_config();
    cfg.cluster_repeat_prob = 1.5f;
    EXPECT_THROW(rkv::generate(cfg), std::invalid_argument);
    cfg = base_config();
    cfg.attention_spike_positions = {9999};
    EXPECT_THROW(rkv::generate(cfg), std::invalid_argument);
}

TEST(SaveLoad, RoundTripIsBitExact) {
    const DecodeTrace trace = rkv::generate(base_config());
    const std::string bytes = serialized(trace);
    std::istringstream is(bytes);
    const DecodeTrace loaded = rkv::load(is);
    EXPECT_EQ(trace, loaded);
    EXPECT_EQ(serialized(loaded), bytes);
}

TEST(SaveLoad, FileRoundTrip) {
    const auto path = std::filesystem::temp_directory_path() / "rkv_trace_test.rkvt";
    const DecodeTrace trace = rkv::generate(base_config());
    rkv::save(trace, path.string());
    const DecodeTrace loaded = rkv::load(path.string());
    EXPECT_EQ(trace, loaded);
    std::filesystem::remove(path);
}

TEST(SaveLoad, CorruptedMagicNamesTheCheck) {
    std::string bytes = serialized(rkv::generate(base_config()));
    bytes[0] = 'X';
    std::istringstream is(bytes);
    try {
        rkv::load(is);
        FAIL() << "expected TraceError";
    } catch (const rkv::TraceError& e) {
        EXPECT_NE(std::string(e.what()).find("magic"), std::string::npos);
    }
}

TEST(SaveLoad, UnsupportedVersionRejected) {
    std::string bytes = serialized(rkv::generate(base_config()));
    bytes[8] = 9;  // version field follows the 8-byte magic
    std::istringstream is(bytes);
    EXPECT_THROW(rkv::load(is), rkv::TraceError);
}

TEST(SaveLoad, TruncatedPayloadReported) {
    const std::string bytes = serialized(rkv::generate(base_config()));
    std::istringstream is(bytes.substr(0, bytes.size() - 17));
    try {
        rkv::load(is);
        FAIL() << "expected TraceError";
    } catch (const rkv::TraceError& e) {
        EXPECT_NE(std::string(e.what()).find("truncated"), std::string::npos);
    }
}

TEST(SaveLoad, HeaderStepCountBeyondPayloadIsTruncationError) {
    // Rebuild the file with a header that claims one extra step.
    const DecodeTrace trace = rkv::generate(base_config());
    const std::string bytes = serialized(trace);
    const std::size_t header_len = static_cast<unsigned char>(bytes[12]) |
                                   (static_cast<unsigned char>(bytes[13]) << 8) |
                                   (static_cast<unsigned char>(bytes[14]) << 16) |
                                   (static_cast<unsigned char>(bytes[15]) << 24);
    std::string header = bytes.substr(16, header_len);
    const std::string needle = "\"steps\":64";
    const auto at = header.find(needle);
    ASSERT_NE(at, std::string::npos);
    header.replace(at, needle.size(), "\"steps\":65");
    const std::string patched = bytes.substr(0, 16) + header + bytes.substr(16 + header_len);
    std::istringstream is(patched);
    try {
        rkv::load(is);
        FAIL() << "expected TraceError";
    } catch (const rkv::TraceError& e) {
        EXPECT_NE(std::string(e.what()).find("truncated"), std::string::npos);
    }
}

TEST(SaveLoad, BytesPerValueSurvivesRoundTrip) {
    SynthConfig cfg = base_config();
    cfg.geometry.bytes_per_value = 4;
    const DecodeTrace trace = rkv::generate(cfg);
    std::istringstream is(serialized(trace));
    EXPECT_EQ(rkv::load(is).geometry.bytes_per_value, 4u);
}

}  // namespace

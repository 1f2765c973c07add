// Copyright (C) 2026 rkv-sim contributors
// SPDX-License-Identifier: Apache-2.0

#include "rkv/simulator.hpp"

#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "rkv/efficiency.hpp"

using rkv::CacheConfig;
using rkv::DecodeTrace;
using rkv::ModelGeometry;
using rkv::PolicyKind;
using rkv::SimulationReport;
using rkv::SynthConfig;

namespace {

DecodeTrace make_trace(std::size_t steps, std::uint64_t seed = 99,
                       ModelGeometry geom = ModelGeometry{2, 2, 2, 16, 2}) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.steps = steps;
    cfg.geometry = geom;
    cfg.n_clusters = 4;
    cfg.cluster_repeat_prob = 0.6f;
    for (std::size_t p = 32; p < steps; p += 64) cfg.attention_spike_positions.push_back(p);
    return rkv::generate(cfg);
}

CacheConfig run_config() {
    CacheConfig cfg;
    cfg.budget = 512;
    cfg.buffer = 128;
    cfg.obs_window = 8;
    return cfg;
}

TEST(Run, ScheduleMatchesHandSimulation) {
    const DecodeTrace trace = make_trace(300);
    const SimulationReport report = rkv::run(trace, PolicyKind::RKV, run_config());

    ASSERT_EQ(report.per_event.size(), 2u);
    EXPECT_EQ(report.per_event[0].step, 127u);  // fires as step index 127 (the 128th step) lands
    EXPECT_EQ(report.per_event[1].step, 255u);

    // First event: 120 candidates, all kept, plus the observation window.
    EXPECT_EQ(report.per_event[0].layers[0].selected_positions.size(), 120u);
    EXPECT_EQ(report.per_step[128].retained_len[0], 128u);  // min(120, 504) + 8

    // Second event: 248 candidates, all kept.
    EXPECT_EQ(report.per_step[256].retained_len[0], 256u);
}

TEST(Run, FullKVNeverCompresses) {
    const DecodeTrace trace = make_trace(300);
    const SimulationReport report = rkv::run(trace, PolicyKind::FullKV, run_config());
    EXPECT_TRUE(report.per_event.empty());
    EXPECT_EQ(report.per_step.back().retained_len[0], 300u);
    EXPECT_EQ(report.peak_cache_tokens, 300u);
    // Retained set grows monotonically.
    for (std::size_t t = 1; t < report.per_step.size(); ++t)
        EXPECT_GE(report.per_step[t].retained_len[0], report.per_step[t - 1].retained_len[0]);
}

TEST(Run, DeterministicAcrossRepeats) {
    const DecodeTrace trace = make_trace(300);
    const SimulationReport a = rkv::run(trace, PolicyKind::RKV, run_config());
    const SimulationReport b = rkv::run(trace, PolicyKind::RKV, run_config());
    EXPECT_TRUE(a.same_results(b));
}

TEST(Run, CacheBoundsHoldForEveryCompressingPolicy) {
    const DecodeTrace trace = make_trace(700, 7, ModelGeometry{2, 2, 1, 16, 2});
    CacheConfig cfg = run_config();
    cfg.budget = 256;
    cfg.buffer = 64;
    for (PolicyKind policy : {PolicyKind::RKV, PolicyKind::SnapKVDecode, PolicyKind::AttentionOnly,
                              PolicyKind::RedundancyOnly}) {
        const SimulationReport report = rkv::run(trace, policy, cfg);
        for (const auto& row : report.per_step) {
            for (std::size_t len : row.retained_len) EXPECT_LE(len, cfg.budget_total());
            EXPECT_LE(row.buffer_len, cfg.buffer);
        }
        EXPECT_LE(report.peak_cache_tokens, cfg.budget_total() + cfg.buffer);
    }
}

TEST(Run, RetainedPositionsStrictlyIncreaseAndEndWithObservation) {
    const DecodeTrace trace = make_trace(640);
    CacheConfig cfg = run_config();
    cfg.budget = 128;
    cfg.buffer = 64;
    const SimulationReport report = rkv::run(trace, PolicyKind::RKV, cfg);
    ASSERT_FALSE(report.per_event.empty());
    for (const auto& event : report.per_event) {
        const std::int64_t event_pos = static_cast<std::int64_t>(event.step);
        for (const auto& layer : event.layers) {
            // selected_positions cover candidates only; the observation tail
            // holds the last alpha generated positions.
            for (std::size_t i = 1; i < layer.selected_positions.size(); ++i)
                EXPECT_LT(layer.selected_positions[i - 1], layer.selected_positions[i]);
            if (!layer.selected_positions.empty()) {
                EXPECT_LE(layer.selected_positions.back(),
                          event_pos - static_cast<std::int64_t>(cfg.obs_window));
            }
        }
    }
    // Final retained set ends with the last alpha positions of the last event.
    const auto& final_positions = report.final_retained_positions[0];
    const std::int64_t last_event_step =
        static_cast<std::int64_t>(report.per_event.back().step);
    for (std::size_t i = 0; i < cfg.obs_window; ++i)
        EXPECT_EQ(final_positions[final_positions.size() - cfg.obs_window + i],
                  last_event_step - static_cast<std::int64_t>(cfg.obs_window) + 1 +
                      static_cast<std::int64_t>(i));
}

TEST(Run, PeakBytesMatchesMemoryModel) {
    const DecodeTrace trace = make_trace(640);
    CacheConfig cfg = run_config();
    cfg.budget = 128;
    cfg.buffer = 64;
    const SimulationReport report = rkv::run(trace, PolicyKind::RKV, cfg);
    EXPECT_EQ(report.peak_cache_tokens, cfg.budget_total() + cfg.buffer);
    EXPECT_EQ(report.peak_cache_bytes,
              rkv::kv_memory(1, cfg.budget_total() + cfg.buffer, trace.geometry));
}

TEST(Run, PerHeadSelectionKeepsPerHeadBudget) {
    const DecodeTrace trace = make_trace(384);
    CacheConfig cfg = run_config();
    cfg.budget = 96;
    cfg.buffer = 64;
    cfg.per_head_selection = true;
    const SimulationReport report = rkv::run(trace, PolicyKind::RKV, cfg);
    for (const auto& row : report.per_step)
        for (std::size_t len : row.retained_len) EXPECT_LE(len, cfg.budget_total());
    // The union across heads may exceed one head's budget but never the
    // candidate pool.
    ASSERT_FALSE(report.per_event.empty());
    const auto& last = report.per_event.back().layers[0];
    EXPECT_GE(last.selected_positions.size(), cfg.select_k());
}

TEST(Run, MismatchedTraceRejected) {
    DecodeTrace trace = make_trace(64);
    trace.steps[10].keys.pop_back();
    EXPECT_THROW(rkv::run(trace, PolicyKind::RKV, run_config()), rkv::TraceError);
}

TEST(NgramStats, AllDistinctTokensAverageOne) {
    DecodeTrace trace = make_trace(32);
    for (std::size_t t = 0; t < trace.steps.size(); ++t)
        trace.steps[t].token_id = static_cast<std::int32_t>(t);
    const auto stats = rkv::ngram_redundancy_stats(trace, 2);
    EXPECT_DOUBLE_EQ(stats.at(1), 1.0);
    EXPECT_DOUBLE_EQ(stats.at(2), 1.0);
}

TEST(NgramStats, HandCountedSequence) {
    DecodeTrace trace = make_trace(4);
    const std::int32_t ids[4] = {7, 9, 7, 9};  // "a b a b"
    for (std::size_t t = 0; t < 4; ++t) trace.steps[t].token_id = ids[t];
    const auto stats = rkv::ngram_redundancy_stats(trace, 3);
    EXPECT_DOUBLE_EQ(stats.at(1), 2.0);        // a:2, b:2 over 2 distinct
    EXPECT_DOUBLE_EQ(stats.at(2), 1.5);        // ab:2, ba:1 over 2 distinct
    EXPECT_DOUBLE_EQ(stats.at(3), 1.0);        // aba, bab
}

TEST(NgramStats, OmitsOrdersBeyondTraceLength) {
    const DecodeTrace trace = make_trace(3);
    const auto stats = rkv::ngram_redundancy_stats(trace, 8);
    EXPECT_TRUE(stats.count(3));
    EXPECT_FALSE(stats.count(4));
}

TEST(NgramStats, RepetitionRaisesAverages) {
    SynthConfig high = SynthConfig{};
    high.seed = 5;
    high.steps = 200;
    high.geometry = ModelGeometry{1, 1, 1, 8, 2};
    high.n_clusters = 2;
    high.cluster_repeat_prob = 0.9f;
    SynthConfig low = high;
    low.cluster_repeat_prob = 0.05f;
    const auto hs = rkv::ngram_redundancy_stats(rkv::generate(high), 2);
    const auto ls = rkv::ngram_redundancy_stats(rkv::generate(low), 2);
    EXPECT_GT(hs.at(1), ls.at(1));
    EXPECT_GT(hs.at(2), ls.at(2));
}

}  // namespace

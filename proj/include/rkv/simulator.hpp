// Copyright (C) 2026 rkv-sim contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <future>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rkv/cache.hpp"
#include "rkv/config.hpp"
#include "rkv/policy.hpp"
#include "rkv/trace.hpp"

namespace rkv {

/// Cache occupancy after ingesting one step, sampled before any compression
/// that step triggers; the peak therefore shows up in the row that carries
/// the compression_event flag.
struct StepRecord {
    std::size_t step = 0;
    std::vector<std::size_t> retained_len;  ///< per layer
    std::size_t buffer_len = 0;
    bool compression_event = false;

    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

/// One layer's outcome at a compression event. head_selection_counts[i] is
/// the number of KV heads whose own top-k contains candidate i (the shared
/// selection is by head-aggregated score, so this is the per-head vote count
/// used for heatmap output).
struct LayerEventRecord {
    std::vector<std::int64_t> selected_positions;
    std::vector<std::int64_t> candidate_positions;
    std::vector<std::uint32_t> head_selection_counts;

    friend bool operator==(const LayerEventRecord&, const LayerEventRecord&) = default;
};

struct EventRecord {
    std::size_t event_index = 0;
    std::size_t step = 0;
    std::vector<LayerEventRecord> layers;

    friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

struct SimulationReport {
    PolicyKind policy = PolicyKind::RKV;
    CacheConfig config;
    ModelGeometry geometry;
    std::string trace_digest;
    std::vector<StepRecord> per_step;
    std::vector<EventRecord> per_event;
    std::vector<std::vector<std::int64_t>> final_retained_positions;  ///< per layer
    std::vector<std::int64_t> final_buffer_positions;
    std::size_t peak_cache_tokens = 0;
    std::size_t peak_cache_bytes = 0;
    double wall_time_ms = 0.0;

    /// Everything the run produced except the wall clock.
    bool same_results(const SimulationReport& other) const {
        return policy == other.policy && config == other.config && geometry == other.geometry &&
               trace_digest == other.trace_digest && per_step == other.per_step &&
               per_event == other.per_event &&
               final_retained_positions == other.final_retained_positions &&
               final_buffer_positions == other.final_buffer_positions &&
               peak_cache_tokens == other.peak_cache_tokens &&
               peak_cache_bytes == other.peak_cache_bytes;
    }

    /// Retained plus still-buffered positions per layer, i.e. what the cache
    /// holds when the trace ends.
    std::vector<std::vector<std::int64_t>> final_cache_positions() const {
        std::vector<std::vector<std::int64_t>> out = final_retained_positions;
        for (auto& layer : out)
            layer.insert(layer.end(), final_buffer_positions.begin(),
                         final_buffer_positions.end());
        return out;
    }
};

namespace detail {

inline std::size_t cache_bytes(const KVCacheState& state) {
    const ModelGeometry& g = state.geometry();
    const std::size_t tokens = state.retained_len() + state.buffer_len();
    return 2 * tokens * g.n_layers * g.n_kv_heads * g.head_dim * g.bytes_per_value;
}

inline std::vector<HeadScoreInputs> to_score_inputs(const std::vector<HeadCandidates>& layer) {
    std::vector<HeadScoreInputs> inputs;
    inputs.reserve(layer.size());
    for (const HeadCandidates& h : layer)
        inputs.push_back({h.queries, h.candidate_keys, h.observation_keys});
    return inputs;
}

}  // namespace detail

/// Replays a trace step by step under the given policy: each step's K/V rows
/// land in the buffer and its query rows in the rolling observation window;
/// when the buffer fills, every layer is compressed in the same event. FullKV
/// never compresses. Deterministic given (trace, policy, cfg) up to
/// wall_time_ms.
inline SimulationReport run(const DecodeTrace& trace, PolicyKind policy, const CacheConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    cfg.validate();
    trace.validate();
    if (trace.steps.empty()) throw std::invalid_argument("run: trace has no steps");

    const ModelGeometry& geom = trace.geometry;
    KVCacheState state(geom, cfg);

    SimulationReport report;
    report.policy = policy;
    report.config = cfg;
    report.geometry = geom;
    report.trace_digest = trace_digest(trace);
    report.per_step.reserve(trace.steps.size());

    for (std::size_t t = 0; t < trace.steps.size(); ++t) {
        const TraceStep& s = trace.steps[t];
        if (policy == PolicyKind::FullKV) {
            state.append_step_retained(s.queries, s.keys, s.values);
        } else {
            state.append_step(s.queries, s.keys, s.values);
        }

        StepRecord row;
        row.step = t;
        row.retained_len.assign(geom.n_layers, state.retained_len());
        row.buffer_len = state.buffer_len();
        row.compression_event = policy != PolicyKind::FullKV && state.buffer_len() == cfg.buffer;
        report.per_step.push_back(row);

        report.peak_cache_tokens =
            std::max(report.peak_cache_tokens, state.retained_len() + state.buffer_len());
        report.peak_cache_bytes = std::max(report.peak_cache_bytes, detail::cache_bytes(state));

        if (!row.compression_event) continue;

        const CandidateView view = candidate_view(state, cfg);
        EventRecord event;
        event.event_index = report.per_event.size();
        event.step = t;
        event.layers.resize(geom.n_layers);
        std::vector<std::vector<std::size_t>> shared(geom.n_layers);
        std::vector<std::vector<std::vector<std::size_t>>> per_head(geom.n_layers);

        // Layers are scored independently; fan out and join in layer order so
        // the result stays deterministic.
        std::vector<std::future<Selection>> pending;
        if (geom.n_layers > 1) {
            pending.reserve(geom.n_layers);
            for (std::size_t l = 0; l < geom.n_layers; ++l)
                pending.push_back(std::async(std::launch::async, [&, l] {
                    return select(policy, detail::to_score_inputs(view.layers[l]), cfg, view.n);
                }));
        }
        for (std::size_t l = 0; l < geom.n_layers; ++l) {
            Selection sel = geom.n_layers > 1
                                ? pending[l].get()
                                : select(policy, detail::to_score_inputs(view.layers[l]), cfg,
                                         view.n);

            LayerEventRecord& rec = event.layers[l];
            rec.candidate_positions = view.layers[l][0].candidate_positions;
            rec.head_selection_counts.assign(view.n, 0);
            for (const auto& head_set : sel.per_head)
                for (std::size_t idx : head_set) ++rec.head_selection_counts[idx];
            for (std::size_t idx : sel.selected)
                rec.selected_positions.push_back(rec.candidate_positions[idx]);

            per_head[l] = std::move(sel.per_head);
            shared[l] = std::move(sel.selected);
        }
        if (cfg.per_head_selection) {
            apply_selection_per_head(state, per_head, cfg);
        } else {
            apply_selection(state, shared, cfg);
        }
        report.per_event.push_back(std::move(event));
    }

    report.final_retained_positions.resize(geom.n_layers);
    for (std::size_t l = 0; l < geom.n_layers; ++l) {
        if (cfg.per_head_selection && policy != PolicyKind::FullKV) {
            std::vector<std::int64_t> merged;
            for (std::size_t h = 0; h < geom.n_kv_heads; ++h) {
                const auto& pos = state.slice(l, h).retained_positions;
                merged.insert(merged.end(), pos.begin(), pos.end());
            }
            std::sort(merged.begin(), merged.end());
            merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
            report.final_retained_positions[l] = std::move(merged);
        } else {
            report.final_retained_positions[l] = state.slice(l, 0).retained_positions;
        }
    }
    report.final_buffer_positions = state.buffer_positions();

    report.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

/// For each n in 1..max_n: the mean occurrence count over distinct n-grams of
/// the trace's token ids. Values above 1 signal repetition; n longer than the
/// trace is omitted.
inline std::map<std::size_t, double> ngram_redundancy_stats(const DecodeTrace& trace,
                                                            std::size_t max_n) {
    std::map<std::size_t, double> out;
    const std::size_t len = trace.steps.size();
    for (std::size_t n = 1; n <= max_n && n <= len; ++n) {
        std::map<std::vector<std::int32_t>, std::size_t> counts;
        std::vector<std::int32_t> gram(n);
        for (std::size_t i = 0; i + n <= len; ++i) {
            for (std::size_t j = 0; j < n; ++j) gram[j] = trace.steps[i + j].token_id;
            ++counts[gram];
        }
        std::size_t total = 0;
        for (const auto& [g, c] : counts) total += c;
        out[n] = static_cast<double>(total) / static_cast<double>(counts.size());
    }
    return out;
}

}  // namespace rkv

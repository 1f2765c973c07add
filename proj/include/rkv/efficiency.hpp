// Copyright (C) 2026 rkv-sim contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>

#include "rkv/config.hpp"

namespace rkv {

/// Bytes needed to cache `tokens` tokens of K and V for every layer and KV
/// head (the factor 2 covers keys plus values).
inline std::uint64_t kv_memory(std::uint64_t batch, std::uint64_t tokens,
                               const ModelGeometry& geom) {
    return 2ULL * batch * tokens * geom.n_layers * geom.n_kv_heads * geom.head_dim *
           geom.bytes_per_value;
}

/// Bytes for the rolling query cache of the last `obs_window` steps; queries
/// exist per query head, not per KV head.
inline std::uint64_t query_window_memory(std::uint64_t batch, std::uint64_t obs_window,
                                         const ModelGeometry& geom) {
    return batch * obs_window * geom.n_layers * geom.n_query_heads() * geom.head_dim *
           geom.bytes_per_value;
}

/// Fraction of FullKV cache memory saved by holding `budget` tokens instead
/// of the whole generation.
inline double saving_fraction(std::uint64_t gen_len, std::uint64_t budget) {
    if (gen_len == 0) throw std::invalid_argument("saving_fraction: gen_len must be > 0");
    if (budget > gen_len)
        throw std::invalid_argument("saving_fraction: budget exceeds generation length");
    return 1.0 - static_cast<double>(budget) / static_cast<double>(gen_len);
}

/// Cache budget as a fraction of the average generation length.
inline double budget_ratio(std::uint64_t budget, double avg_gen_len) {
    if (!(avg_gen_len > 0.0)) throw std::invalid_argument("budget_ratio: avg_gen_len must be > 0");
    return static_cast<double>(budget) / avg_gen_len;
}

/// Unit-cost operation counts per generation segment and totaled over
/// gen_len/buffer segments. Scoring overhead per segment is
/// alpha*budget + budget^2; attention over the compressed cache costs
/// (budget+buffer)*buffer per segment, while uncompressed attention costs
/// (current length)*buffer and grows with every segment.
struct ComputeCosts {
    std::uint64_t segments = 0;
    std::uint64_t overhead_per_segment = 0;
    std::uint64_t overhead_total = 0;
    std::uint64_t attention_compressed_per_segment = 0;
    std::uint64_t attention_compressed_total = 0;
    std::uint64_t attention_full_total = 0;
    std::uint64_t break_even_gen_len = 0;  ///< shortest generation where compression wins
};

inline ComputeCosts compute_costs(const CacheConfig& cfg, std::uint64_t gen_len) {
    cfg.validate();
    if (gen_len == 0) throw std::invalid_argument("compute_costs: gen_len must be > 0");
    ComputeCosts c;
    const std::uint64_t buffer = cfg.buffer;
    c.segments = (gen_len + buffer - 1) / buffer;
    c.overhead_per_segment =
        static_cast<std::uint64_t>(cfg.obs_window) * cfg.budget +
        static_cast<std::uint64_t>(cfg.budget) * cfg.budget;
    c.overhead_total = c.overhead_per_segment * c.segments;
    c.attention_compressed_per_segment = (static_cast<std::uint64_t>(cfg.budget) + buffer) * buffer;
    c.attention_compressed_total = c.attention_compressed_per_segment * c.segments;
    // Segment s of FullKV attends over roughly s*buffer cached tokens.
    c.attention_full_total = buffer * buffer * (c.segments * (c.segments + 1) / 2);

    // Compressed cost per segment is constant while the full cost grows
    // linearly with the segment index, so a crossover always exists. The
    // smallest S with buffer^2 * S(S+1)/2 > S * per_segment_compressed is the
    // smallest S with buffer^2 * (S+1) > 2 * per_segment_compressed.
    const std::uint64_t per_segment_compressed =
        c.attention_compressed_per_segment + c.overhead_per_segment;
    std::uint64_t s = 1;
    while (buffer * buffer * (s + 1) <= 2 * per_segment_compressed) ++s;
    c.break_even_gen_len = s * buffer;
    return c;
}

/// Memory accounting for one decode configuration, in bytes.
struct MemoryBreakdown {
    std::uint64_t m_weights = 0;
    std::uint64_t m_budget = 0;
    std::uint64_t m_buffer = 0;
    std::uint64_t m_query_window = 0;
    std::uint64_t m_full = 0;
    std::uint64_t m_total = 0;
    std::int64_t m_saving = 0;  ///< m_full - m_budget - m_buffer - m_query_window
    double saving_fraction = 0.0;  ///< token-count saving, 1 - budget/gen_len
};

inline MemoryBreakdown memory_breakdown(std::uint64_t batch, const CacheConfig& cfg,
                                        const ModelGeometry& geom, std::uint64_t gen_len,
                                        std::uint64_t weights_bytes) {
    MemoryBreakdown m;
    m.m_weights = weights_bytes;
    m.m_budget = kv_memory(batch, cfg.budget_total(), geom);
    m.m_buffer = kv_memory(batch, cfg.buffer, geom);
    m.m_query_window = query_window_memory(batch, cfg.obs_window, geom);
    m.m_full = kv_memory(batch, gen_len, geom);
    m.m_total = m.m_weights + m.m_budget + m.m_buffer + m.m_query_window;
    m.m_saving = static_cast<std::int64_t>(m.m_full) - static_cast<std::int64_t>(m.m_budget) -
                 static_cast<std::int64_t>(m.m_buffer) - static_cast<std::int64_t>(m.m_query_window);
    m.saving_fraction = saving_fraction(gen_len, std::min<std::uint64_t>(cfg.budget, gen_len));
    return m;
}

/// Rough batch-size headroom: how many requests' caches fit in the memory
/// left after weights. An estimate only; it ignores activations and
/// allocator overhead.
inline std::uint64_t max_batch_estimate(std::uint64_t total_memory_bytes,
                                        std::uint64_t weights_bytes,
                                        std::uint64_t per_request_cache_bytes) {
    if (per_request_cache_bytes == 0)
        throw std::invalid_argument("max_batch_estimate: per-request cache size is zero");
    if (total_memory_bytes <= weights_bytes) return 0;
    return (total_memory_bytes - weights_bytes) / per_request_cache_bytes;
}

}  // namespace rkv

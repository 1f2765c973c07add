// Copyright (C) 2026 rkv-sim contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace rkv {

enum class PolicyKind {
    RKV,             ///< joint importance/redundancy eviction
    SnapKVDecode,    ///< attention-only eviction at the same compression cadence
    FullKV,          ///< no eviction, cache grows with the sequence
    AttentionOnly,   ///< RKV with lambda forced to 1
    RedundancyOnly,  ///< RKV with lambda forced to 0
};

/// How per-group attention scores are folded into one score per KV head.
enum class GqaPool { Max, Mean };

inline const char* to_string(PolicyKind p) {
    switch (p) {
        case PolicyKind::RKV: return "rkv";
        case PolicyKind::SnapKVDecode: return "snapkv";
        case PolicyKind::FullKV: return "fullkv";
        case PolicyKind::AttentionOnly: return "attention-only";
        case PolicyKind::RedundancyOnly: return "redundancy-only";
    }
    return "unknown";
}

inline PolicyKind policy_from_string(const std::string& s) {
    if (s == "rkv") return PolicyKind::RKV;
    if (s == "snapkv") return PolicyKind::SnapKVDecode;
    if (s == "fullkv") return PolicyKind::FullKV;
    if (s == "attention-only") return PolicyKind::AttentionOnly;
    if (s == "redundancy-only") return PolicyKind::RedundancyOnly;
    throw std::invalid_argument("unknown policy '" + s +
                                "' (expected rkv|snapkv|fullkv|attention-only|redundancy-only)");
}

/// Model shape as seen by the cache: per-layer, per-KV-head matrices of
/// head_dim-wide rows. group_size query heads share one KV head; 1 means
/// plain multi-head attention.
struct ModelGeometry {
    std::size_t n_layers = 1;
    std::size_t n_kv_heads = 1;
    std::size_t group_size = 1;
    std::size_t head_dim = 8;
    std::size_t bytes_per_value = 2;  ///< 2 = half precision, 4 = single

    std::size_t n_query_heads() const { return n_kv_heads * group_size; }

    void validate() const {
        if (n_layers == 0) throw std::invalid_argument("geometry: n_layers must be >= 1");
        if (n_kv_heads == 0) throw std::invalid_argument("geometry: n_kv_heads must be >= 1");
        if (group_size == 0) throw std::invalid_argument("geometry: group_size must be >= 1");
        if (head_dim == 0) throw std::invalid_argument("geometry: head_dim must be >= 1");
        if (bytes_per_value == 0) throw std::invalid_argument("geometry: bytes_per_value must be >= 1");
    }

    friend bool operator==(const ModelGeometry&, const ModelGeometry&) = default;
};

/// All eviction hyperparameters. Defaults follow the reference configuration
/// (buffer 128, observation window 8, lambda 0.1).
struct CacheConfig {
    std::size_t budget = 512;        ///< retained tokens per layer after compression
    std::size_t buffer = 128;        ///< fresh tokens accumulated between compressions
    std::size_t obs_window = 8;      ///< alpha: most recent tokens used as queries, always kept
    float lambda = 0.1f;             ///< importance/redundancy trade-off in [0,1]
    float sim_threshold = 0.9f;      ///< T: cosine similarity above which tokens count as similar
    std::size_t recency_keep = 8;    ///< beta: most recent similar tokens exempt from redundancy
    std::size_t pool_half_window = 4;  ///< W: attention scores are max-pooled over 2W tokens
    float eps = 1e-8f;               ///< key-normalization stabilizer
    bool budget_includes_obs = true;  ///< whether the alpha kept tokens count against budget
    GqaPool gqa_pool = GqaPool::Max;
    bool snapkv_calibrated = true;   ///< slice attention before softmax in the SnapKV scorer
    bool per_head_selection = false;  ///< each head keeps its own token set instead of a shared one

    /// Retained-cache capacity: budget itself, or budget plus the observation
    /// window when the window is kept on top of the budget.
    std::size_t budget_total() const { return budget_includes_obs ? budget : budget + obs_window; }

    /// Number of candidates kept at each compression (on top of the
    /// observation window).
    std::size_t select_k() const { return budget_includes_obs ? budget - obs_window : budget; }

    void validate() const {
        if (budget <= obs_window)
            throw std::invalid_argument("config: budget must exceed obs_window");
        if (buffer <= obs_window)
            throw std::invalid_argument("config: buffer must exceed obs_window");
        if (!(lambda >= 0.0f && lambda <= 1.0f))
            throw std::invalid_argument("config: lambda must be in [0,1]");
        if (!(sim_threshold > 0.0f && sim_threshold < 1.0f))
            throw std::invalid_argument("config: sim_threshold must be in (0,1)");
        if (pool_half_window == 0)
            throw std::invalid_argument("config: pool_half_window must be >= 1");
        if (!(eps > 0.0f)) throw std::invalid_argument("config: eps must be > 0");
    }

    friend bool operator==(const CacheConfig&, const CacheConfig&) = default;
};

}  // namespace rkv

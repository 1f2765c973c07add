// Copyright (C) 2026 rkv-sim contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "rkv/config.hpp"
#include "rkv/importance.hpp"
#include "rkv/matrix.hpp"
#include "rkv/redundancy.hpp"

namespace rkv {

/// Per-head score vectors over the candidate tokens of one layer, plus the
/// head-aggregated vector actually used for shared selection. Policies that
/// never compute redundancy leave that member empty.
struct ScoreBundle {
    std::vector<std::vector<float>> importance;
    std::vector<std::vector<float>> redundancy;
    std::vector<std::vector<float>> joint;
    std::vector<float> aggregated;
};

/// Everything one KV head contributes to a compression decision.
struct HeadScoreInputs {
    std::vector<Matrix> queries;  ///< one alpha×d matrix per query head in the group
    Matrix candidate_keys;        ///< n×d
    Matrix observation_keys;      ///< alpha×d, used by the uncalibrated SnapKV variant
};

/// Z = lambda·I − (1−lambda)·R, elementwise.
inline std::vector<float> joint_scores(std::span<const float> importance,
                                       std::span<const float> redundancy, float lambda) {
    if (importance.size() != redundancy.size())
        throw std::invalid_argument("joint_scores: score vectors differ in length");
    if (!(lambda >= 0.0f && lambda <= 1.0f))
        throw std::invalid_argument("joint_scores: lambda must be in [0,1]");
    std::vector<float> z(importance.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        z[i] = lambda * importance[i] - (1.0f - lambda) * redundancy[i];
    return z;
}

/// Elementwise mean across heads.
inline std::vector<float> aggregate_heads(const std::vector<std::vector<float>>& per_head) {
    if (per_head.empty()) throw std::invalid_argument("aggregate_heads: no heads");
    const std::size_t n = per_head[0].size();
    std::vector<float> out(n, 0.0f);
    for (const auto& h : per_head) {
        if (h.size() != n) throw std::invalid_argument("aggregate_heads: length mismatch");
        for (std::size_t i = 0; i < n; ++i) out[i] += h[i];
    }
    const float inv = 1.0f / static_cast<float>(per_head.size());
    for (float& v : out) v *= inv;
    return out;
}

/// The attention-only and redundancy-only policies are the lambda endpoints
/// of the joint score.
inline float effective_lambda(PolicyKind policy, const CacheConfig& cfg) {
    switch (policy) {
        case PolicyKind::AttentionOnly: return 1.0f;
        case PolicyKind::RedundancyOnly: return 0.0f;
        default: return cfg.lambda;
    }
}

namespace detail {
inline Matrix concat_rows(const Matrix& a, const Matrix& b) {
    Matrix out = a;
    for (std::size_t i = 0; i < b.rows(); ++i) out.append_row(b.row(i));
    return out;
}
}  // namespace detail

/// Scores every candidate under the given policy. FullKV scores nothing and
/// returns an empty bundle.
inline ScoreBundle score_candidates(PolicyKind policy, std::span<const HeadScoreInputs> heads,
                                    const CacheConfig& cfg) {
    ScoreBundle bundle;
    if (policy == PolicyKind::FullKV || heads.empty()) return bundle;

    const float lambda = effective_lambda(policy, cfg);
    for (const HeadScoreInputs& head : heads) {
        std::vector<float> imp;
        if (policy == PolicyKind::SnapKVDecode && !cfg.snapkv_calibrated) {
            const Matrix keys_full =
                detail::concat_rows(head.candidate_keys, head.observation_keys);
            imp = snapkv_uncalibrated_scores(head.queries, keys_full, head.candidate_keys.rows(),
                                             cfg.pool_half_window, cfg.gqa_pool);
        } else {
            const Matrix attn = attention_gqa(head.queries, head.candidate_keys, cfg.gqa_pool);
            imp = importance_scores(attn, cfg.pool_half_window);
        }

        if (policy == PolicyKind::SnapKVDecode) {
            bundle.joint.push_back(imp);
            bundle.importance.push_back(std::move(imp));
            continue;
        }

        const Matrix sim = apply_recency_retention(
            similarity_matrix(head.candidate_keys, cfg.eps), cfg.sim_threshold, cfg.recency_keep);
        std::vector<float> red = redundancy_scores(sim);
        bundle.joint.push_back(joint_scores(imp, red, lambda));
        bundle.importance.push_back(std::move(imp));
        bundle.redundancy.push_back(std::move(red));
    }
    bundle.aggregated = aggregate_heads(bundle.joint);
    return bundle;
}

/// Result of one layer's selection: the layer-level retained candidate set
/// (ascending), the per-head top-k sets used for head-count reporting and for
/// per-head selection mode, and the scores behind them.
struct Selection {
    std::vector<std::size_t> selected;
    std::vector<std::vector<std::size_t>> per_head;
    ScoreBundle scores;
};

/// Chooses which of the n candidates survive a compression event. FullKV
/// keeps everything, as does any policy when the candidate count is within
/// budget. Otherwise the top select_k() candidates by aggregated joint score
/// are kept; per-head top-k sets are always reported, and in per-head mode
/// each head keeps its own set (the layer-level set is their union).
inline Selection select(PolicyKind policy, std::span<const HeadScoreInputs> heads,
                        const CacheConfig& cfg, std::size_t n) {
    if (n == 0) throw std::invalid_argument("select: no candidates");
    for (const auto& h : heads)
        if (h.candidate_keys.rows() != n)
            throw std::invalid_argument("select: candidate count mismatch across heads");

    Selection result;
    auto keep_all = [&] {
        result.selected.resize(n);
        for (std::size_t i = 0; i < n; ++i) result.selected[i] = i;
        result.per_head.assign(heads.size(), result.selected);
    };

    if (policy == PolicyKind::FullKV) {
        keep_all();
        return result;
    }

    result.scores = score_candidates(policy, heads, cfg);
    const std::size_t k = cfg.select_k();
    if (k >= n) {
        // Not enough candidates to prune beyond budget.
        keep_all();
        return result;
    }

    for (const auto& joint : result.scores.joint)
        result.per_head.push_back(top_k_indices(joint, k));

    if (cfg.per_head_selection) {
        std::vector<std::size_t> merged;
        for (const auto& set : result.per_head) merged.insert(merged.end(), set.begin(), set.end());
        std::sort(merged.begin(), merged.end());
        merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
        result.selected = std::move(merged);
    } else {
        result.selected = top_k_indices(result.scores.aggregated, k);
    }
    return result;
}

}  // namespace rkv

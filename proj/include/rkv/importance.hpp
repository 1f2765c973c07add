// Copyright (C) 2026 rkv-sim contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "rkv/config.hpp"
#include "rkv/matrix.hpp"

namespace rkv {

namespace detail {

/// Q·Kᵀ/√d for one query head.
inline Matrix scaled_scores(const Matrix& queries, const Matrix& keys) {
    Matrix s = matmul_transposed(queries, keys);
    const float inv_sqrt_d = 1.0f / std::sqrt(static_cast<float>(queries.cols()));
    for (float& v : s.mutable_data()) v *= inv_sqrt_d;
    return s;
}

/// Raw (pre-softmax) scores for a group of query heads sharing one KV head,
/// folded elementwise across the group.
inline Matrix group_raw_scores(std::span<const Matrix> q_group, const Matrix& keys, GqaPool pool) {
    if (q_group.empty()) throw std::invalid_argument("attention: query group is empty");
    Matrix raw = scaled_scores(q_group[0], keys);
    for (std::size_t g = 1; g < q_group.size(); ++g) {
        if (q_group[g].rows() != raw.rows())
            throw std::invalid_argument("attention: query matrices in a group differ in shape");
        Matrix s = scaled_scores(q_group[g], keys);
        if (pool == GqaPool::Max) {
            for (std::size_t i = 0; i < raw.data().size(); ++i)
                raw.mutable_data()[i] = std::max(raw.data()[i], s.data()[i]);
        } else {
            for (std::size_t i = 0; i < raw.data().size(); ++i)
                raw.mutable_data()[i] += s.data()[i];
        }
    }
    if (pool == GqaPool::Mean && q_group.size() > 1) {
        const float inv = 1.0f / static_cast<float>(q_group.size());
        for (float& v : raw.mutable_data()) v *= inv;
    }
    return raw;
}

}  // namespace detail

/// Grouped-query attention weights: per-group raw scores are pooled
/// elementwise across the group, then softmax-normalized along the key
/// dimension. Returns an alpha×n matrix whose rows sum to 1.
inline Matrix attention_gqa(std::span<const Matrix> q_group, const Matrix& keys,
                            GqaPool pool = GqaPool::Max) {
    return softmax_rows(detail::group_raw_scores(q_group, keys, pool));
}

/// Multi-head attention weights; identical to attention_gqa with a
/// single-element group.
inline Matrix attention_mha(const Matrix& q_obs, const Matrix& keys) {
    return attention_gqa({&q_obs, 1}, keys);
}

/// Stabilizes each attention row with a sliding-window max (half-width w)
/// and averages over the observation rows; one importance score per key.
inline std::vector<float> importance_scores(const Matrix& attn, std::size_t w) {
    if (w == 0) throw std::invalid_argument("importance_scores: pool window must be >= 1");
    const std::size_t n = attn.cols();
    std::vector<float> out(n, 0.0f);
    if (attn.rows() == 0) return out;
    for (std::size_t j = 0; j < attn.rows(); ++j) {
        const std::vector<float> pooled = maxpool_window(attn.row(j), w);
        for (std::size_t i = 0; i < n; ++i) out[i] += pooled[i];
    }
    const float inv = 1.0f / static_cast<float>(attn.rows());
    for (float& v : out) v *= inv;
    return out;
}

/// Attention of the observation-window queries over [prefix keys,
/// observation keys], reduced to the prefix columns.
///
/// calibrated=true slices the raw scores to the prefix columns before the
/// softmax, so every returned row sums to 1 over the prefix. calibrated=false
/// reproduces the historical behavior: causally masked softmax over all
/// columns first, then the slice, which lets observation tokens absorb part
/// of each row's mass.
inline Matrix snapkv_observation_attention(std::span<const Matrix> q_group,
                                           const Matrix& keys_full, std::size_t n_prefix,
                                           bool calibrated, GqaPool pool = GqaPool::Max) {
    if (q_group.empty()) throw std::invalid_argument("snapkv attention: query group is empty");
    const std::size_t alpha = q_group[0].rows();
    if (keys_full.rows() < n_prefix)
        throw std::invalid_argument("snapkv attention: n_prefix exceeds key count");
    if (keys_full.rows() != n_prefix + alpha)
        throw std::invalid_argument(
            "snapkv attention: keys_full must hold prefix plus one key per observation row");

    Matrix raw = detail::group_raw_scores(q_group, keys_full, pool);
    if (calibrated) {
        Matrix sliced(alpha, n_prefix);
        for (std::size_t j = 0; j < alpha; ++j)
            for (std::size_t i = 0; i < n_prefix; ++i) sliced.at(j, i) = raw.at(j, i);
        return softmax_rows(sliced);
    }

    // Observation row j sits at absolute position n_prefix + j and may not
    // attend to later observation tokens.
    for (std::size_t j = 0; j < alpha; ++j)
        for (std::size_t i = n_prefix + j + 1; i < raw.cols(); ++i)
            raw.at(j, i) = -std::numeric_limits<float>::infinity();
    // Stabilized softmax over the unmasked entries of each row.
    Matrix full(alpha, raw.cols());
    for (std::size_t j = 0; j < alpha; ++j) {
        float mx = -std::numeric_limits<float>::infinity();
        for (std::size_t i = 0; i <= n_prefix + j; ++i) mx = std::max(mx, raw.at(j, i));
        float sum = 0.0f;
        for (std::size_t i = 0; i <= n_prefix + j; ++i) {
            full.at(j, i) = std::exp(raw.at(j, i) - mx);
            sum += full.at(j, i);
        }
        for (std::size_t i = 0; i <= n_prefix + j; ++i) full.at(j, i) /= sum;
    }
    Matrix sliced(alpha, n_prefix);
    for (std::size_t j = 0; j < alpha; ++j)
        for (std::size_t i = 0; i < n_prefix; ++i) sliced.at(j, i) = full.at(j, i);
    return sliced;
}

/// Prefix-token scores from the calibrated observation attention (window
/// pooling then mean over observation rows, as in importance_scores).
inline std::vector<float> snapkv_calibrated_scores(std::span<const Matrix> q_group,
                                                   const Matrix& keys_full, std::size_t n_prefix,
                                                   std::size_t w, GqaPool pool = GqaPool::Max) {
    return importance_scores(snapkv_observation_attention(q_group, keys_full, n_prefix,
                                                          /*calibrated=*/true, pool),
                             w);
}

/// Same reduction over the uncalibrated (mask-then-slice) variant, kept for
/// comparison runs.
inline std::vector<float> snapkv_uncalibrated_scores(std::span<const Matrix> q_group,
                                                     const Matrix& keys_full, std::size_t n_prefix,
                                                     std::size_t w, GqaPool pool = GqaPool::Max) {
    return importance_scores(snapkv_observation_attention(q_group, keys_full, n_prefix,
                                                          /*calibrated=*/false, pool),
                             w);
}

}  // namespace rkv

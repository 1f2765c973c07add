// Copyright (C) 2026 rkv-sim contributors
// SPDX-License-Identifier: Apache-2.0
//
// Straight-line reference implementations used only by tests. They share no
// code with the library kernels they check: plain loops, double precision,
// written directly from the scoring definitions.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;  // [row][col]

inline Mat matmul_transposed(const Mat& a, const Mat& b) {
    Mat out(a.size(), Vec(b.size(), 0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            for (std::size_t k = 0; k < a[i].size(); ++k) out[i][j] += a[i][k] * b[j][k];
    return out;
}

inline Vec softmax(const Vec& v) {
    double mx = v[0];
    for (double x : v) mx = std::max(mx, x);
    Vec out(v.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - mx);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return out;
}

/// Sliding-window max: the window is the 2w-long block [i-w, i+w-1], shifted
/// inward at the edges so it stays inside the vector (whole vector if it is
/// shorter than 2w).
inline Vec window_max(const Vec& v, std::size_t w) {
    const std::size_t n = v.size();
    const std::size_t win = std::min(2 * w, n);
    Vec out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t lo = i >= w ? i - w : 0;
        if (lo + win > n) lo = n - win;
        double mx = v[lo];
        for (std::size_t j = lo; j < lo + win; ++j) mx = std::max(mx, v[j]);
        out[i] = mx;
    }
    return out;
}

/// Indices of the k largest values; ties prefer the lower index; ascending
/// output. Full-sort formulation.
inline std::vector<std::size_t> top_k(const Vec& scores, std::size_t k) {
    std::vector<std::size_t> idx(scores.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    idx.resize(std::min(k, idx.size()));
    std::sort(idx.begin(), idx.end());
    return idx;
}

struct PipelineResult {
    std::vector<Vec> importance;  // per head
    std::vector<Vec> redundancy;  // per head
    std::vector<Vec> joint;       // per head
    Vec aggregated;
    std::vector<std::size_t> selected;
};

/// The whole scoring pipeline, head by head, written out longhand:
/// scaled attention (grouped max), softmax over keys, window-max smoothing,
/// mean over observation rows; normalized-key cosine similarity with zero
/// diagonal, per-column recency zeroing, column means, softmax; then the
/// lambda blend, mean over heads, and top-k selection.
inline PipelineResult pipeline(const std::vector<std::vector<Mat>>& queries_per_head,
                               const std::vector<Mat>& keys_per_head, double lambda,
                               double threshold, std::size_t beta, std::size_t w, double eps,
                               std::size_t k, bool gqa_max = true) {
    PipelineResult result;
    const std::size_t n_heads = keys_per_head.size();
    for (std::size_t h = 0; h < n_heads; ++h) {
        const Mat& keys = keys_per_head[h];
        const std::size_t n = keys.size();
        const std::size_t d = keys[0].size();
        const std::vector<Mat>& group = queries_per_head[h];
        const std::size_t alpha = group[0].size();

        // Eq. 1-3: per-group scaled raw scores folded with max (or mean),
        // then row softmax.
        Mat raw(alpha, Vec(n, 0.0));
        for (std::size_t g = 0; g < group.size(); ++g) {
            for (std::size_t j = 0; j < alpha; ++j) {
                for (std::size_t i = 0; i < n; ++i) {
                    double dot = 0.0;
                    for (std::size_t x = 0; x < d; ++x) dot += group[g][j][x] * keys[i][x];
                    const double s = dot / std::sqrt(static_cast<double>(d));
                    if (gqa_max) {
                        raw[j][i] = g == 0 ? s : std::max(raw[j][i], s);
                    } else {
                        raw[j][i] += s / static_cast<double>(group.size());
                    }
                }
            }
        }
        Vec imp(n, 0.0);
        for (std::size_t j = 0; j < alpha; ++j) {
            const Vec smoothed = window_max(softmax(raw[j]), w);
            for (std::size_t i = 0; i < n; ++i) imp[i] += smoothed[i] / alpha;
        }

        // Eq. 5: cosine similarity of normalized keys, zero diagonal.
        Mat sim(n, Vec(n, 0.0));
        Mat norm(n, Vec(d, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            double sq = 0.0;
            for (double x : keys[i]) sq += x * x;
            const double inv = 1.0 / (std::sqrt(sq) + eps);
            for (std::size_t x = 0; x < d; ++x) norm[i][x] = keys[i][x] * inv;
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                double dot = 0.0;
                for (std::size_t x = 0; x < d; ++x) dot += norm[i][x] * norm[j][x];
                sim[i][j] = dot;
            }

        // Recency retention: per column, zero the up-to-beta largest rows
        // above threshold.
        for (std::size_t col = 0; col < n; ++col) {
            std::size_t zeroed = 0;
            for (std::size_t row = n; row-- > 0 && zeroed < beta;)
                if (sim[row][col] > threshold) {
                    sim[row][col] = 0.0;
                    ++zeroed;
                }
        }

        // Eq. 6: column means, softmax.
        Vec colmean(n, 0.0);
        for (std::size_t col = 0; col < n; ++col) {
            for (std::size_t row = 0; row < n; ++row) colmean[col] += sim[row][col];
            colmean[col] /= static_cast<double>(n);
        }
        Vec red = softmax(colmean);

        // Eq. 7.
        Vec z(n);
        for (std::size_t i = 0; i < n; ++i) z[i] = lambda * imp[i] - (1.0 - lambda) * red[i];

        result.importance.push_back(std::move(imp));
        result.redundancy.push_back(std::move(red));
        result.joint.push_back(std::move(z));
    }

    const std::size_t n = result.joint[0].size();
    result.aggregated.assign(n, 0.0);
    for (const Vec& z : result.joint)
        for (std::size_t i = 0; i < n; ++i) result.aggregated[i] += z[i] / n_heads;
    result.selected = k >= n ? top_k(result.aggregated, n) : top_k(result.aggregated, k);
    return result;
}

}  // namespace oracle

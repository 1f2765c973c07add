// Copyright (C) 2026 rkv-sim contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "rkv/matrix.hpp"

namespace rkv {

/// Cosine-similarity matrix of the key rows with a zeroed diagonal, so no
/// token is redundant with itself. Symmetric up to float rounding.
inline Matrix similarity_matrix(const Matrix& keys, float eps) {
    if (keys.rows() == 0) throw std::invalid_argument("similarity_matrix: no keys");
    const Matrix normalized = l2_normalize_rows(keys, eps);
    Matrix s = matmul_transposed(normalized, normalized);
    for (std::size_t i = 0; i < s.rows(); ++i) s.at(i, i) = 0.0f;
    return s;
}

/// For each column i, the rows j with s[j][i] > threshold mark tokens similar
/// to token i; the up-to-beta largest such j (the most recently generated
/// similar tokens) get their entries zeroed so they escape the redundancy
/// penalty. Only the directional entries s[j][i] change, which may leave the
/// matrix asymmetric.
inline Matrix apply_recency_retention(Matrix s, float threshold, std::size_t beta) {
    if (!(threshold > 0.0f && threshold < 1.0f))
        throw std::invalid_argument("apply_recency_retention: threshold must be in (0,1)");
    const std::size_t n = s.rows();
    if (beta == 0 || n == 0) return s;
    // Sweep rows bottom-up so each column meets its largest row indices
    // first; row-major access keeps the pass cache-friendly.
    std::vector<std::size_t> zeroed(n, 0);
    std::size_t exhausted = 0;
    for (std::size_t jr = n; jr > 0 && exhausted < n; --jr) {
        auto row = s.row(jr - 1);
        for (std::size_t i = 0; i < n; ++i) {
            if (zeroed[i] < beta && row[i] > threshold) {
                row[i] = 0.0f;
                if (++zeroed[i] == beta) ++exhausted;
            }
        }
    }
    return s;
}

/// Column means of the (possibly retention-modified) similarity matrix,
/// softmax-normalized into a redundancy distribution over tokens.
inline std::vector<float> redundancy_scores(const Matrix& s) {
    const std::size_t n = s.rows();
    if (n == 0) throw std::invalid_argument("redundancy_scores: empty matrix");
    if (s.cols() != n) throw std::invalid_argument("redundancy_scores: matrix must be square");
    // Column sums accumulated row by row: same per-column addition order as a
    // direct column walk, without the strided access.
    Matrix means(1, n);
    auto acc = means.row(0);
    for (std::size_t j = 0; j < n; ++j) {
        auto row = s.row(j);
        for (std::size_t i = 0; i < n; ++i) acc[i] += row[i];
    }
    for (std::size_t i = 0; i < n; ++i) acc[i] /= static_cast<float>(n);
    const Matrix sm = softmax_rows(means);
    return {sm.data().begin(), sm.data().end()};
}

}  // namespace rkv

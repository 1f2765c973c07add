// Copyright (C) 2026 rkv-sim contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rkv {

/// Dense row-major float32 matrix. All kernels below are pure functions on
/// immutable inputs and may be called concurrently.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0f) {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<float> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) {
            throw std::invalid_argument("Matrix: data length " + std::to_string(data_.size()) +
                                        " does not equal rows*cols " +
                                        std::to_string(rows_ * cols_));
        }
    }

    static Matrix from_rows(std::initializer_list<std::initializer_list<float>> rows) {
        Matrix m;
        for (const auto& r : rows) {
            if (m.rows_ == 0) {
                m.cols_ = r.size();
            } else if (r.size() != m.cols_) {
                throw std::invalid_argument("Matrix::from_rows: ragged rows");
            }
            m.data_.insert(m.data_.end(), r.begin(), r.end());
            ++m.rows_;
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    float& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    float at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<float> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const float> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    const std::vector<float>& data() const { return data_; }
    std::vector<float>& mutable_data() { return data_; }

    /// Appends one row; the matrix must be empty or have matching width.
    void append_row(std::span<const float> values) {
        if (rows_ == 0 && cols_ == 0) {
            cols_ = values.size();
        } else if (values.size() != cols_) {
            throw std::invalid_argument("Matrix::append_row: width mismatch");
        }
        data_.insert(data_.end(), values.begin(), values.end());
        ++rows_;
    }

    void drop_first_row() {
        if (rows_ == 0) throw std::logic_error("Matrix::drop_first_row: matrix has no rows");
        data_.erase(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(cols_));
        --rows_;
    }

    void clear_rows() {
        data_.clear();
        rows_ = 0;
    }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<float> data_;
};

namespace detail {
inline void require_finite(const Matrix& m, const char* what) {
    if (!m.all_finite()) {
        throw std::invalid_argument(std::string(what) + ": input contains NaN or Inf");
    }
}
}  // namespace detail

/// out[i][j] = dot(a.row(i), b.row(j)); a is m×d, b is n×d, result m×n.
inline Matrix matmul_transposed(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw std::invalid_argument("matmul_transposed: inner dimensions differ (" +
                                    std::to_string(a.cols()) + " vs " + std::to_string(b.cols()) +
                                    ")");
    }
    detail::require_finite(a, "matmul_transposed");
    detail::require_finite(b, "matmul_transposed");
    const std::size_t m = a.rows(), n = b.rows(), d = a.cols();
    Matrix out(m, n);
    for (std::size_t i = 0; i < m; ++i) {
        const float* arow = a.data().data() + i * d;
        float* orow = out.mutable_data().data() + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const float* brow = b.data().data() + j * d;
            // Eight independent partial sums so the loop vectorizes without
            // reassociation flags; the combine order is fixed, so results are
            // reproducible run to run.
            float acc[8] = {};
            std::size_t k = 0;
            for (; k + 8 <= d; k += 8)
                for (std::size_t u = 0; u < 8; ++u) acc[u] += arow[k + u] * brow[k + u];
            for (std::size_t u = 1; u < 8; ++u) acc[0] += acc[u];
            for (; k < d; ++k) acc[0] += arow[k] * brow[k];
            orow[j] = acc[0];
        }
    }
    return out;
}

/// Row-wise softmax, stabilized by subtracting the row maximum.
inline Matrix softmax_rows(const Matrix& m) {
    detail::require_finite(m, "softmax_rows");
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto in = m.row(i);
        auto o = out.row(i);
        if (in.empty()) continue;
        float mx = in[0];
        for (float v : in) mx = std::max(mx, v);
        float sum = 0.0f;
        for (std::size_t j = 0; j < in.size(); ++j) {
            o[j] = std::exp(in[j] - mx);
            sum += o[j];
        }
        for (std::size_t j = 0; j < in.size(); ++j) o[j] /= sum;
    }
    return out;
}

/// Each row is scaled by 1/(‖row‖₂ + eps); zero rows stay zero.
inline Matrix l2_normalize_rows(const Matrix& m, float eps) {
    if (!(eps > 0.0f)) throw std::invalid_argument("l2_normalize_rows: eps must be > 0");
    detail::require_finite(m, "l2_normalize_rows");
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto in = m.row(i);
        auto o = out.row(i);
        float sq = 0.0f;
        for (float v : in) sq += v * v;
        const float inv = 1.0f / (std::sqrt(sq) + eps);
        for (std::size_t j = 0; j < in.size(); ++j) o[j] = in[j] * inv;
    }
    return out;
}

/// Sliding-window maximum over a window of 2w consecutive entries containing
/// index i (nominally [i-w, i+w-1]). At the boundaries the window shifts
/// inward so it never leaves the vector and never fabricates values; when the
/// vector is shorter than 2w the window is the whole vector.
inline std::vector<float> maxpool_window(std::span<const float> v, std::size_t w) {
    if (w == 0) throw std::invalid_argument("maxpool_window: window half-size must be >= 1");
    const std::size_t n = v.size();
    std::vector<float> out(n);
    if (n == 0) return out;
    const std::size_t win = std::min(2 * w, n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t start = i >= w ? i - w : 0;
        start = std::min(start, n - win);
        float mx = v[start];
        for (std::size_t j = start + 1; j < start + win; ++j) mx = std::max(mx, v[j]);
        out[i] = mx;
    }
    return out;
}

/// Indices of the k largest scores, ties resolved toward the lower index,
/// returned in ascending order. k larger than the input size returns all
/// indices.
inline std::vector<std::size_t> top_k_indices(std::span<const float> scores, std::size_t k) {
    const std::size_t n = scores.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    const std::size_t take = std::min(k, n);
    auto better = [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    };
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(),
                      better);
    idx.resize(take);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace rkv

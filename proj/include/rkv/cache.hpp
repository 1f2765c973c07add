// Copyright (C) 2026 rkv-sim contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rkv/config.hpp"
#include "rkv/matrix.hpp"

namespace rkv {

/// Cache content of one (layer, kv_head) pair. retained_* hold the
/// compressed history, buffer_* the tokens generated since the last
/// compression, and query_window the most recent obs_window query states of
/// each query head in the group (oldest row first).
struct HeadSlice {
    Matrix retained_keys;
    Matrix retained_values;
    std::vector<std::int64_t> retained_positions;
    Matrix buffer_keys;
    Matrix buffer_values;
    std::vector<Matrix> query_window;
};

/// Mutable KV-cache state for one decode stream: one HeadSlice per
/// (layer, kv_head), plus shared position bookkeeping. Single-writer; the
/// compression ops below are the only mutations beyond appends.
class KVCacheState {
public:
    KVCacheState(const ModelGeometry& geom, const CacheConfig& cfg)
        : geom_(geom), obs_window_(cfg.obs_window) {
        geom_.validate();
        cfg.validate();
        slices_.resize(geom_.n_layers * geom_.n_kv_heads);
        for (auto& s : slices_) s.query_window.resize(geom_.group_size);
    }

    const ModelGeometry& geometry() const { return geom_; }

    HeadSlice& slice(std::size_t layer, std::size_t head) {
        return slices_[layer * geom_.n_kv_heads + head];
    }
    const HeadSlice& slice(std::size_t layer, std::size_t head) const {
        return slices_[layer * geom_.n_kv_heads + head];
    }

    std::size_t retained_len() const { return slices_[0].retained_keys.rows(); }
    std::size_t buffer_len() const { return buffer_positions_.size(); }
    std::size_t total_seen() const { return total_seen_; }
    std::size_t evicted_total() const { return evicted_; }
    const std::vector<std::int64_t>& buffer_positions() const { return buffer_positions_; }

    /// Ingests one decode step: keys/values go to every slice's buffer, query
    /// rows into the rolling observation windows. Layouts are
    /// (layer, head, group)-major rows of head_dim floats.
    void append_step(std::span<const float> queries, std::span<const float> keys,
                     std::span<const float> values) {
        const std::size_t d = geom_.head_dim;
        const std::size_t lh = geom_.n_layers * geom_.n_kv_heads;
        if (queries.size() != lh * geom_.group_size * d || keys.size() != lh * d ||
            values.size() != lh * d) {
            throw std::invalid_argument("append_step: row blocks do not match geometry");
        }
        for (std::size_t s = 0; s < lh; ++s) {
            slices_[s].buffer_keys.append_row(keys.subspan(s * d, d));
            slices_[s].buffer_values.append_row(values.subspan(s * d, d));
            for (std::size_t g = 0; g < geom_.group_size; ++g) {
                Matrix& win = slices_[s].query_window[g];
                win.append_row(queries.subspan((s * geom_.group_size + g) * d, d));
                if (win.rows() > obs_window_) win.drop_first_row();
            }
        }
        buffer_positions_.push_back(static_cast<std::int64_t>(total_seen_));
        ++total_seen_;
    }

    /// FullKV path: the step lands directly in the retained set and the
    /// buffer stays empty.
    void append_step_retained(std::span<const float> queries, std::span<const float> keys,
                              std::span<const float> values) {
        append_step(queries, keys, values);
        const std::size_t lh = geom_.n_layers * geom_.n_kv_heads;
        for (std::size_t s = 0; s < lh; ++s) {
            slices_[s].retained_keys.append_row(slices_[s].buffer_keys.row(0));
            slices_[s].retained_values.append_row(slices_[s].buffer_values.row(0));
            slices_[s].retained_positions.push_back(buffer_positions_[0]);
            slices_[s].buffer_keys.clear_rows();
            slices_[s].buffer_values.clear_rows();
        }
        buffer_positions_.clear();
    }

    /// Replaces one slice's retained set, as when restoring a snapshot or
    /// constructing a state directly in tests. Re-derives the eviction count
    /// so the bookkeeping invariant keeps holding.
    void install_retained(std::size_t layer, std::size_t head, Matrix keys, Matrix values,
                          std::vector<std::int64_t> positions) {
        if (keys.rows() != values.rows() || keys.rows() != positions.size())
            throw std::invalid_argument("install_retained: row counts differ");
        HeadSlice& s = slice(layer, head);
        s.retained_keys = std::move(keys);
        s.retained_values = std::move(values);
        s.retained_positions = std::move(positions);
        for (std::int64_t p : s.retained_positions)
            total_seen_ = std::max(total_seen_, static_cast<std::size_t>(p) + 1);
        evicted_ = total_seen_ - retained_len() - buffer_len();
    }

    void clear_buffers() {
        for (auto& s : slices_) {
            s.buffer_keys.clear_rows();
            s.buffer_values.clear_rows();
        }
        buffer_positions_.clear();
    }

    void add_evicted(std::size_t count) { evicted_ += count; }

private:
    ModelGeometry geom_;
    std::size_t obs_window_;
    std::vector<HeadSlice> slices_;
    std::vector<std::int64_t> buffer_positions_;
    std::size_t total_seen_ = 0;
    std::size_t evicted_ = 0;
};

/// One (layer, head)'s share of a compression decision: candidate and
/// observation K/V in generation order plus the query window.
struct HeadCandidates {
    std::vector<Matrix> queries;
    Matrix candidate_keys;
    Matrix candidate_values;
    Matrix observation_keys;
    Matrix observation_values;
    std::vector<std::int64_t> candidate_positions;
    std::vector<std::int64_t> observation_positions;
};

struct CandidateView {
    std::vector<std::vector<HeadCandidates>> layers;  ///< [layer][kv_head]
    std::size_t n = 0;                                ///< candidates per head
};

/// Splits the cache into candidates (retained history plus all but the last
/// obs_window buffer tokens) and the observation tail. Only valid at a
/// compression event, i.e. when the buffer has just filled.
inline CandidateView candidate_view(const KVCacheState& state, const CacheConfig& cfg) {
    if (state.buffer_len() != cfg.buffer)
        throw std::logic_error("candidate_view: buffer not full, no compression event pending");
    const ModelGeometry& geom = state.geometry();
    const std::size_t alpha = cfg.obs_window;
    const std::size_t buf = state.buffer_len();
    const std::size_t n_cand_buf = buf - alpha;

    CandidateView view;
    view.n = state.retained_len() + n_cand_buf;
    view.layers.resize(geom.n_layers);
    for (std::size_t l = 0; l < geom.n_layers; ++l) {
        view.layers[l].resize(geom.n_kv_heads);
        for (std::size_t h = 0; h < geom.n_kv_heads; ++h) {
            const HeadSlice& s = state.slice(l, h);
            HeadCandidates& out = view.layers[l][h];
            for (const Matrix& win : s.query_window) {
                if (win.rows() != alpha)
                    throw std::logic_error("candidate_view: query window not yet filled");
                out.queries.push_back(win);
            }
            out.candidate_keys = s.retained_keys;
            out.candidate_values = s.retained_values;
            out.candidate_positions = s.retained_positions;
            for (std::size_t i = 0; i < n_cand_buf; ++i) {
                out.candidate_keys.append_row(s.buffer_keys.row(i));
                out.candidate_values.append_row(s.buffer_values.row(i));
                out.candidate_positions.push_back(state.buffer_positions()[i]);
            }
            out.observation_keys = Matrix(0, 0);
            out.observation_values = Matrix(0, 0);
            for (std::size_t i = n_cand_buf; i < buf; ++i) {
                out.observation_keys.append_row(s.buffer_keys.row(i));
                out.observation_values.append_row(s.buffer_values.row(i));
                out.observation_positions.push_back(state.buffer_positions()[i]);
            }
        }
    }
    return view;
}

namespace detail {

inline void validate_selection(const std::vector<std::size_t>& selected, std::size_t n,
                               std::size_t capacity) {
    if (selected.size() > capacity)
        throw std::logic_error("apply_selection: selected " + std::to_string(selected.size()) +
                               " tokens but capacity is " + std::to_string(capacity));
    for (std::size_t i = 0; i < selected.size(); ++i) {
        if (selected[i] >= n)
            throw std::invalid_argument("apply_selection: index out of range");
        if (i > 0 && selected[i] <= selected[i - 1])
            throw std::invalid_argument("apply_selection: indices must be strictly ascending");
    }
}

inline void gather_into_slice(HeadSlice& s, const HeadCandidates& cand,
                              const std::vector<std::size_t>& selected) {
    const std::size_t d = cand.candidate_keys.cols() ? cand.candidate_keys.cols()
                                                     : cand.observation_keys.cols();
    Matrix keys(0, d), values(0, d);
    std::vector<std::int64_t> positions;
    positions.reserve(selected.size() + cand.observation_positions.size());
    for (std::size_t idx : selected) {
        keys.append_row(cand.candidate_keys.row(idx));
        values.append_row(cand.candidate_values.row(idx));
        positions.push_back(cand.candidate_positions[idx]);
    }
    for (std::size_t i = 0; i < cand.observation_keys.rows(); ++i) {
        keys.append_row(cand.observation_keys.row(i));
        values.append_row(cand.observation_values.row(i));
        positions.push_back(cand.observation_positions[i]);
    }
    s.retained_keys = std::move(keys);
    s.retained_values = std::move(values);
    s.retained_positions = std::move(positions);
}

}  // namespace detail

/// Commits one compression event: per layer, the selected candidates (in
/// generation order) plus the observation tail become the new retained set;
/// the buffer empties and evicted storage is released. `selected_per_layer`
/// holds one ascending index set per layer, applied to every head of that
/// layer.
inline void apply_selection(KVCacheState& state,
                            std::span<const std::vector<std::size_t>> selected_per_layer,
                            const CacheConfig& cfg) {
    const ModelGeometry& geom = state.geometry();
    if (selected_per_layer.size() != geom.n_layers)
        throw std::invalid_argument("apply_selection: need one selection per layer");
    const CandidateView view = candidate_view(state, cfg);
    for (std::size_t l = 0; l < geom.n_layers; ++l)
        detail::validate_selection(selected_per_layer[l], view.n, cfg.select_k());
    for (std::size_t l = 0; l < geom.n_layers; ++l)
        for (std::size_t h = 0; h < geom.n_kv_heads; ++h)
            detail::gather_into_slice(state.slice(l, h), view.layers[l][h],
                                      selected_per_layer[l]);
    state.add_evicted(view.n - selected_per_layer[0].size());
    state.clear_buffers();
}

/// Per-head variant: selected[layer][head] gives each head its own set.
inline void apply_selection_per_head(
    KVCacheState& state,
    std::span<const std::vector<std::vector<std::size_t>>> selected_per_layer,
    const CacheConfig& cfg) {
    const ModelGeometry& geom = state.geometry();
    if (selected_per_layer.size() != geom.n_layers)
        throw std::invalid_argument("apply_selection: need one selection per layer");
    const CandidateView view = candidate_view(state, cfg);
    for (std::size_t l = 0; l < geom.n_layers; ++l) {
        if (selected_per_layer[l].size() != geom.n_kv_heads)
            throw std::invalid_argument("apply_selection: need one selection per head");
        for (const auto& sel : selected_per_layer[l])
            detail::validate_selection(sel, view.n, cfg.select_k());
    }
    for (std::size_t l = 0; l < geom.n_layers; ++l)
        for (std::size_t h = 0; h < geom.n_kv_heads; ++h)
            detail::gather_into_slice(state.slice(l, h), view.layers[l][h],
                                      selected_per_layer[l][h]);
    state.add_evicted(view.n - selected_per_layer[0][0].size());
    state.clear_buffers();
}

}  // namespace rkv

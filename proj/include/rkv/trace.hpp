// Copyright (C) 2026 rkv-sim contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rkv/config.hpp"
#include "rkv/matrix.hpp"
#include "rkv/rng.hpp"

namespace rkv {

inline constexpr char kTraceMagic[8] = {'R', 'K', 'V', 'T', 'R', 'A', 'C', 'E'};
inline constexpr std::uint32_t kTraceFormatVersion = 1;

class TraceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One decode step: the new token's query rows (one per query head), and its
/// key/value rows (one per KV head), all (layer, head, group)-major.
/// token_text is a convenience for recorded traces and is not serialized.
struct TraceStep {
    std::int32_t token_id = 0;
    std::optional<std::string> token_text;
    std::vector<float> queries;  ///< n_layers * n_kv_heads * group_size * head_dim
    std::vector<float> keys;     ///< n_layers * n_kv_heads * head_dim
    std::vector<float> values;   ///< n_layers * n_kv_heads * head_dim

    friend bool operator==(const TraceStep& a, const TraceStep& b) {
        return a.token_id == b.token_id && a.queries == b.queries && a.keys == b.keys &&
               a.values == b.values;
    }
};

/// A recorded or synthetic stream of per-step Q/K/V states.
struct DecodeTrace {
    ModelGeometry geometry;
    std::vector<TraceStep> steps;
    std::map<std::string, std::string> metadata;

    std::span<const float> query_row(std::size_t step, std::size_t layer, std::size_t head,
                                     std::size_t group) const {
        const std::size_t d = geometry.head_dim;
        const std::size_t off =
            ((layer * geometry.n_kv_heads + head) * geometry.group_size + group) * d;
        return {steps[step].queries.data() + off, d};
    }
    std::span<const float> key_row(std::size_t step, std::size_t layer, std::size_t head) const {
        const std::size_t d = geometry.head_dim;
        return {steps[step].keys.data() + (layer * geometry.n_kv_heads + head) * d, d};
    }
    std::span<const float> value_row(std::size_t step, std::size_t layer, std::size_t head) const {
        const std::size_t d = geometry.head_dim;
        return {steps[step].values.data() + (layer * geometry.n_kv_heads + head) * d, d};
    }

    void validate() const {
        geometry.validate();
        const std::size_t lh = geometry.n_layers * geometry.n_kv_heads;
        const std::size_t d = geometry.head_dim;
        for (std::size_t i = 0; i < steps.size(); ++i) {
            const TraceStep& s = steps[i];
            if (s.queries.size() != lh * geometry.group_size * d || s.keys.size() != lh * d ||
                s.values.size() != lh * d)
                throw TraceError("trace step " + std::to_string(i) +
                                 " does not match the trace geometry");
            auto finite = [](const std::vector<float>& v) {
                for (float x : v)
                    if (!std::isfinite(x)) return false;
                return true;
            };
            if (!finite(s.queries) || !finite(s.keys) || !finite(s.values))
                throw TraceError("trace step " + std::to_string(i) + " contains NaN or Inf");
        }
    }

    friend bool operator==(const DecodeTrace& a, const DecodeTrace& b) {
        return a.geometry == b.geometry && a.steps == b.steps && a.metadata == b.metadata;
    }
};

// ---------------------------------------------------------------------------
// Serialization (see FORMAT.md for the byte-level layout and a worked example)
// ---------------------------------------------------------------------------

namespace detail {

inline void write_u32le(std::ostream& os, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                       static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    os.write(b, 4);
}

inline void write_i32le(std::ostream& os, std::int32_t v) {
    write_u32le(os, static_cast<std::uint32_t>(v));
}

inline void write_f32le(std::ostream& os, float v) {
    write_u32le(os, std::bit_cast<std::uint32_t>(v));
}

inline bool read_u32le(std::istream& is, std::uint32_t& v) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) return false;
    v = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
        (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    return true;
}

inline bool read_f32le(std::istream& is, float& v) {
    std::uint32_t u;
    if (!read_u32le(is, u)) return false;
    v = std::bit_cast<float>(u);
    return true;
}

}  // namespace detail

inline void save(const DecodeTrace& trace, std::ostream& os) {
    trace.validate();
    nlohmann::json header;
    header["n_layers"] = trace.geometry.n_layers;
    header["n_kv_heads"] = trace.geometry.n_kv_heads;
    header["group_size"] = trace.geometry.group_size;
    header["head_dim"] = trace.geometry.head_dim;
    header["steps"] = trace.steps.size();
    nlohmann::json meta = nlohmann::json::object();
    for (const auto& [k, v] : trace.metadata) meta[k] = v;
    meta["bytes_per_value"] = std::to_string(trace.geometry.bytes_per_value);
    header["metadata"] = meta;
    const std::string header_str = header.dump();

    os.write(kTraceMagic, sizeof(kTraceMagic));
    detail::write_u32le(os, kTraceFormatVersion);
    detail::write_u32le(os, static_cast<std::uint32_t>(header_str.size()));
    os.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    for (const TraceStep& s : trace.steps) {
        detail::write_i32le(os, s.token_id);
        for (float v : s.queries) detail::write_f32le(os, v);
        for (float v : s.keys) detail::write_f32le(os, v);
        for (float v : s.values) detail::write_f32le(os, v);
    }
    if (!os) throw TraceError("trace write failed");
}

inline void save(const DecodeTrace& trace, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw TraceError("cannot open trace file for writing: " + path);
    save(trace, os);
}

inline DecodeTrace load(std::istream& is) {
    char magic[8];
    if (!is.read(magic, 8) || !std::equal(magic, magic + 8, kTraceMagic))
        throw TraceError("magic check failed: not an RKVTRACE file");
    std::uint32_t version = 0, header_len = 0;
    if (!detail::read_u32le(is, version)) throw TraceError("truncated file: missing version");
    if (version != kTraceFormatVersion)
        throw TraceError("unsupported trace format version " + std::to_string(version) +
                         " (expected " + std::to_string(kTraceFormatVersion) + ")");
    if (!detail::read_u32le(is, header_len))
        throw TraceError("truncated file: missing header length");
    std::string header_str(header_len, '\0');
    if (!is.read(header_str.data(), header_len))
        throw TraceError("truncated file: header shorter than declared");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_str);
    } catch (const nlohmann::json::exception& e) {
        throw TraceError(std::string("malformed trace header JSON: ") + e.what());
    }

    DecodeTrace trace;
    try {
        trace.geometry.n_layers = header.at("n_layers").get<std::size_t>();
        trace.geometry.n_kv_heads = header.at("n_kv_heads").get<std::size_t>();
        trace.geometry.group_size = header.at("group_size").get<std::size_t>();
        trace.geometry.head_dim = header.at("head_dim").get<std::size_t>();
        for (const auto& [k, v] : header.at("metadata").items())
            trace.metadata[k] = v.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw TraceError(std::string("trace header missing required field: ") + e.what());
    }
    if (auto it = trace.metadata.find("bytes_per_value"); it != trace.metadata.end()) {
        trace.geometry.bytes_per_value = static_cast<std::size_t>(std::stoull(it->second));
        trace.metadata.erase(it);
    }
    try {
        trace.geometry.validate();
    } catch (const std::invalid_argument& e) {
        throw TraceError(std::string("inconsistent trace geometry: ") + e.what());
    }

    const std::size_t n_steps = header.at("steps").get<std::size_t>();
    const std::size_t lh = trace.geometry.n_layers * trace.geometry.n_kv_heads;
    const std::size_t d = trace.geometry.head_dim;
    trace.steps.resize(n_steps);
    for (std::size_t i = 0; i < n_steps; ++i) {
        TraceStep& s = trace.steps[i];
        std::uint32_t tok;
        if (!detail::read_u32le(is, tok))
            throw TraceError("truncated payload: header declares " + std::to_string(n_steps) +
                             " steps but step " + std::to_string(i) + " is incomplete");
        s.token_id = static_cast<std::int32_t>(tok);
        s.queries.resize(lh * trace.geometry.group_size * d);
        s.keys.resize(lh * d);
        s.values.resize(lh * d);
        for (auto* block : {&s.queries, &s.keys, &s.values})
            for (float& v : *block)
                if (!detail::read_f32le(is, v))
                    throw TraceError("truncated payload: header declares " +
                                     std::to_string(n_steps) + " steps but step " +
                                     std::to_string(i) + " is incomplete");
    }
    trace.validate();
    return trace;
}

inline DecodeTrace load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw TraceError("cannot open trace file: " + path);
    return load(is);
}

/// Content digest of the serialized trace (FNV-1a over the exact file bytes).
inline std::string trace_digest(const DecodeTrace& trace) {
    std::ostringstream os(std::ios::binary);
    save(trace, os);
    const std::string bytes = os.str();
    Fnv1a64 h;
    h.update(bytes.data(), bytes.size());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h.value()));
    return buf;
}

// ---------------------------------------------------------------------------
// Synthetic generation
// ---------------------------------------------------------------------------

/// Controls for the synthetic decode stream. Cluster draws reuse one of
/// n_clusters base key directions (plus noise), producing near-duplicate
/// keys; other steps emit fresh quasi-orthogonal keys. Steps listed in
/// attention_spike_positions get dedicated key directions that every query
/// points at, making them the planted-important tokens.
struct SynthConfig {
    std::uint64_t seed = 0;
    std::size_t steps = 256;
    ModelGeometry geometry;
    std::size_t n_clusters = 4;
    float cluster_repeat_prob = 0.5f;
    float cluster_noise_sigma = 0.01f;
    std::vector<std::size_t> attention_spike_positions;

    void validate() const {
        geometry.validate();
        if (steps == 0) throw std::invalid_argument("synth: steps must be >= 1");
        if (n_clusters == 0) throw std::invalid_argument("synth: n_clusters must be >= 1");
        if (!(cluster_repeat_prob >= 0.0f && cluster_repeat_prob <= 1.0f))
            throw std::invalid_argument("synth: cluster_repeat_prob must be in [0,1]");
        if (!(cluster_noise_sigma >= 0.0f))
            throw std::invalid_argument("synth: cluster_noise_sigma must be >= 0");
        for (std::size_t p : attention_spike_positions)
            if (p >= steps)
                throw std::invalid_argument("synth: spike position beyond trace length");
    }
};

namespace detail {

inline std::vector<float> gaussian_vec(Xoshiro256& rng, std::size_t d) {
    std::vector<float> v(d);
    for (float& x : v) x = rng.next_gaussian_f();
    return v;
}

inline void normalize(std::vector<float>& v) {
    double sq = 0.0;
    for (float x : v) sq += static_cast<double>(x) * x;
    const float inv = sq > 0.0 ? static_cast<float>(1.0 / std::sqrt(sq)) : 0.0f;
    for (float& x : v) x *= inv;
}

/// Draws a unit vector orthogonal to `basis` (Gram-Schmidt); once the space
/// is exhausted it falls back to a plain random unit vector.
inline std::vector<float> orthonormal_dir(Xoshiro256& rng, const std::vector<std::vector<float>>& basis,
                                          std::size_t d) {
    std::vector<float> v = gaussian_vec(rng, d);
    normalize(v);
    if (basis.size() >= d) return v;
    std::vector<float> r = v;
    for (const auto& b : basis) {
        double dot = 0.0;
        for (std::size_t i = 0; i < d; ++i) dot += static_cast<double>(r[i]) * b[i];
        for (std::size_t i = 0; i < d; ++i) r[i] -= static_cast<float>(dot) * b[i];
    }
    double sq = 0.0;
    for (float x : r) sq += static_cast<double>(x) * x;
    if (sq < 1e-12) return v;
    normalize(r);
    return r;
}

}  // namespace detail

/// Deterministic synthetic trace; the same config always produces the same
/// bytes. Ground-truth labels land in the metadata: "cluster_ids" holds one
/// entry per step (the cluster index for duplicate draws, -1 otherwise) and
/// "spike_positions" lists the planted-important steps.
inline DecodeTrace generate(const SynthConfig& cfg) {
    cfg.validate();
    const std::size_t d = cfg.geometry.head_dim;
    const std::size_t n_layers = cfg.geometry.n_layers;
    const std::size_t n_heads = cfg.geometry.n_kv_heads;
    const std::size_t g_size = cfg.geometry.group_size;
    Xoshiro256 rng(cfg.seed);

    std::vector<std::vector<float>> dirs;  // clusters first, then spikes
    for (std::size_t c = 0; c < cfg.n_clusters; ++c)
        dirs.push_back(detail::orthonormal_dir(rng, dirs, d));
    for (std::size_t s = 0; s < cfg.attention_spike_positions.size(); ++s)
        dirs.push_back(detail::orthonormal_dir(rng, dirs, d));

    // Every query carries this direction, so all planted spikes receive high
    // attention from whatever observation window is active. The gain puts the
    // spike logits around 8 after the 1/sqrt(d) attention scaling.
    std::vector<float> query_bias(d, 0.0f);
    for (std::size_t s = 0; s < cfg.attention_spike_positions.size(); ++s) {
        const auto& sd = dirs[cfg.n_clusters + s];
        for (std::size_t i = 0; i < d; ++i) query_bias[i] += sd[i];
    }
    const float query_gain = 8.0f * std::sqrt(static_cast<float>(d));
    constexpr float kQueryNoiseSigma = 0.25f;

    std::vector<bool> is_spike(cfg.steps, false);
    std::vector<std::size_t> spike_ordinal(cfg.steps, 0);
    for (std::size_t s = 0; s < cfg.attention_spike_positions.size(); ++s) {
        is_spike[cfg.attention_spike_positions[s]] = true;
        spike_ordinal[cfg.attention_spike_positions[s]] = s;
    }

    DecodeTrace trace;
    trace.geometry = cfg.geometry;
    trace.steps.resize(cfg.steps);
    std::string cluster_ids;

    // Basis for keeping fresh directions orthogonal to the planted ones and
    // to each other while dimensions last; after that they are plain random
    // unit vectors.
    std::vector<std::vector<float>> used_dirs = dirs;

    for (std::size_t t = 0; t < cfg.steps; ++t) {
        int cluster = -1;
        std::vector<float> role_dir;
        std::int32_t token_id;
        if (is_spike[t]) {
            role_dir = dirs[cfg.n_clusters + spike_ordinal[t]];
            token_id = static_cast<std::int32_t>(10000 + spike_ordinal[t]);
        } else if (rng.next_double() < cfg.cluster_repeat_prob) {
            cluster = static_cast<int>(rng.next_below(cfg.n_clusters));
            role_dir = dirs[static_cast<std::size_t>(cluster)];
            token_id = static_cast<std::int32_t>(100 + cluster);
        } else {
            // Fresh direction so only planted tokens look important or
            // redundant.
            role_dir = detail::orthonormal_dir(rng, used_dirs, d);
            if (used_dirs.size() < d) used_dirs.push_back(role_dir);
            token_id = static_cast<std::int32_t>(100000 + t);
        }
        const float key_sigma = cluster >= 0 ? cfg.cluster_noise_sigma : 0.0f;

        TraceStep& step = trace.steps[t];
        step.token_id = token_id;
        step.queries.reserve(n_layers * n_heads * g_size * d);
        step.keys.reserve(n_layers * n_heads * d);
        step.values.reserve(n_layers * n_heads * d);
        for (std::size_t lh = 0; lh < n_layers * n_heads; ++lh) {
            for (std::size_t i = 0; i < d; ++i)
                step.keys.push_back(role_dir[i] + key_sigma * rng.next_gaussian_f());
            for (std::size_t i = 0; i < d; ++i) step.values.push_back(rng.next_gaussian_f());
            for (std::size_t g = 0; g < g_size; ++g)
                for (std::size_t i = 0; i < d; ++i)
                    step.queries.push_back(query_gain * query_bias[i] +
                                           kQueryNoiseSigma * rng.next_gaussian_f());
        }
        if (t) cluster_ids += ',';
        cluster_ids += std::to_string(cluster);
    }

    trace.metadata["generator"] = "synthetic-v1";
    trace.metadata["seed"] = std::to_string(cfg.seed);
    trace.metadata["n_clusters"] = std::to_string(cfg.n_clusters);
    trace.metadata["cluster_repeat_prob"] = std::to_string(cfg.cluster_repeat_prob);
    trace.metadata["cluster_noise_sigma"] = std::to_string(cfg.cluster_noise_sigma);
    trace.metadata["cluster_ids"] = cluster_ids;
    std::string spikes;
    for (std::size_t i = 0; i < cfg.attention_spike_positions.size(); ++i) {
        if (i) spikes += ',';
        spikes += std::to_string(cfg.attention_spike_positions[i]);
    }
    trace.metadata["spike_positions"] = spikes;
    return trace;
}

/// Parses a comma-separated integer list from trace metadata (ground-truth
/// labels written by generate()).
inline std::vector<long> parse_int_list(const std::string& csv) {
    std::vector<long> out;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        std::size_t comma = csv.find(',', pos);
        if (comma == std::string::npos) comma = csv.size();
        out.push_back(std::stol(csv.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

}  // namespace rkv

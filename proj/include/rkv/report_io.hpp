// Copyright (C) 2026 rkv-sim contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "rkv/config.hpp"
#include "rkv/simulator.hpp"

namespace rkv {

/// Bumped whenever any report field changes shape or meaning; mirrored in
/// schema/report.schema.json.
inline constexpr int kReportSchemaVersion = 1;

inline nlohmann::json to_json(const CacheConfig& cfg) {
    return {
        {"budget", cfg.budget},
        {"buffer", cfg.buffer},
        {"obs_window", cfg.obs_window},
        {"lambda", cfg.lambda},
        {"sim_threshold", cfg.sim_threshold},
        {"recency_keep", cfg.recency_keep},
        {"pool_half_window", cfg.pool_half_window},
        {"eps", cfg.eps},
        {"budget_includes_obs", cfg.budget_includes_obs},
        {"gqa_pool", cfg.gqa_pool == GqaPool::Max ? "max" : "mean"},
        {"snapkv_calibrated", cfg.snapkv_calibrated},
        {"per_head_selection", cfg.per_head_selection},
    };
}

inline CacheConfig config_from_json(const nlohmann::json& j) {
    CacheConfig cfg;
    cfg.budget = j.at("budget").get<std::size_t>();
    cfg.buffer = j.at("buffer").get<std::size_t>();
    cfg.obs_window = j.at("obs_window").get<std::size_t>();
    cfg.lambda = j.at("lambda").get<float>();
    cfg.sim_threshold = j.at("sim_threshold").get<float>();
    cfg.recency_keep = j.at("recency_keep").get<std::size_t>();
    cfg.pool_half_window = j.at("pool_half_window").get<std::size_t>();
    cfg.eps = j.at("eps").get<float>();
    cfg.budget_includes_obs = j.at("budget_includes_obs").get<bool>();
    cfg.gqa_pool = j.at("gqa_pool").get<std::string>() == "mean" ? GqaPool::Mean : GqaPool::Max;
    cfg.snapkv_calibrated = j.at("snapkv_calibrated").get<bool>();
    cfg.per_head_selection = j.at("per_head_selection").get<bool>();
    return cfg;
}

inline nlohmann::json to_json(const ModelGeometry& g) {
    return {
        {"n_layers", g.n_layers},         {"n_kv_heads", g.n_kv_heads},
        {"group_size", g.group_size},     {"head_dim", g.head_dim},
        {"bytes_per_value", g.bytes_per_value},
    };
}

inline ModelGeometry geometry_from_json(const nlohmann::json& j) {
    ModelGeometry g;
    g.n_layers = j.at("n_layers").get<std::size_t>();
    g.n_kv_heads = j.at("n_kv_heads").get<std::size_t>();
    g.group_size = j.at("group_size").get<std::size_t>();
    g.head_dim = j.at("head_dim").get<std::size_t>();
    g.bytes_per_value = j.at("bytes_per_value").get<std::size_t>();
    return g;
}

inline nlohmann::json to_json(const SimulationReport& r) {
    nlohmann::json j;
    j["schema_version"] = kReportSchemaVersion;
    j["policy"] = to_string(r.policy);
    j["config"] = to_json(r.config);
    j["geometry"] = to_json(r.geometry);
    j["trace_digest"] = r.trace_digest;
    j["per_step"] = nlohmann::json::array();
    for (const StepRecord& s : r.per_step)
        j["per_step"].push_back({{"step", s.step},
                                 {"retained_len", s.retained_len},
                                 {"buffer_len", s.buffer_len},
                                 {"compression_event", s.compression_event}});
    j["per_event"] = nlohmann::json::array();
    for (const EventRecord& e : r.per_event) {
        nlohmann::json layers = nlohmann::json::array();
        for (const LayerEventRecord& l : e.layers)
            layers.push_back({{"selected_positions", l.selected_positions},
                              {"candidate_positions", l.candidate_positions},
                              {"head_selection_counts", l.head_selection_counts}});
        j["per_event"].push_back(
            {{"event", e.event_index}, {"step", e.step}, {"layers", layers}});
    }
    j["final_retained_positions"] = r.final_retained_positions;
    j["final_buffer_positions"] = r.final_buffer_positions;
    j["peak_cache_tokens"] = r.peak_cache_tokens;
    j["peak_cache_bytes"] = r.peak_cache_bytes;
    j["wall_time_ms"] = r.wall_time_ms;
    return j;
}

inline SimulationReport report_from_json(const nlohmann::json& j) {
    if (j.at("schema_version").get<int>() != kReportSchemaVersion)
        throw std::runtime_error("report schema version mismatch");
    SimulationReport r;
    r.policy = policy_from_string(j.at("policy").get<std::string>());
    r.config = config_from_json(j.at("config"));
    r.geometry = geometry_from_json(j.at("geometry"));
    r.trace_digest = j.at("trace_digest").get<std::string>();
    for (const auto& s : j.at("per_step")) {
        StepRecord rec;
        rec.step = s.at("step").get<std::size_t>();
        rec.retained_len = s.at("retained_len").get<std::vector<std::size_t>>();
        rec.buffer_len = s.at("buffer_len").get<std::size_t>();
        rec.compression_event = s.at("compression_event").get<bool>();
        r.per_step.push_back(std::move(rec));
    }
    for (const auto& e : j.at("per_event")) {
        EventRecord rec;
        rec.event_index = e.at("event").get<std::size_t>();
        rec.step = e.at("step").get<std::size_t>();
        for (const auto& l : e.at("layers")) {
            LayerEventRecord lr;
            lr.selected_positions = l.at("selected_positions").get<std::vector<std::int64_t>>();
            lr.candidate_positions = l.at("candidate_positions").get<std::vector<std::int64_t>>();
            lr.head_selection_counts =
                l.at("head_selection_counts").get<std::vector<std::uint32_t>>();
            rec.layers.push_back(std::move(lr));
        }
        r.per_event.push_back(std::move(rec));
    }
    r.final_retained_positions =
        j.at("final_retained_positions").get<std::vector<std::vector<std::int64_t>>>();
    r.final_buffer_positions = j.at("final_buffer_positions").get<std::vector<std::int64_t>>();
    r.peak_cache_tokens = j.at("peak_cache_tokens").get<std::size_t>();
    r.peak_cache_bytes = j.at("peak_cache_bytes").get<std::size_t>();
    r.wall_time_ms = j.at("wall_time_ms").get<double>();
    return r;
}

inline void save_report(const SimulationReport& r, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open report file for writing: " + path);
    os << to_json(r).dump(2) << '\n';
}

inline SimulationReport load_report(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open report file: " + path);
    nlohmann::json j;
    is >> j;
    return report_from_json(j);
}

/// Structural check of a JSON document against the subset of JSON Schema
/// used by schema/report.schema.json: type, required, properties, items and
/// const. Throws with a path-qualified message on the first violation.
inline void validate_against_schema(const nlohmann::json& doc, const nlohmann::json& schema,
                                    const std::string& path = "$") {
    if (schema.contains("const") && doc != schema.at("const"))
        throw std::runtime_error(path + ": value does not match schema const");
    if (schema.contains("type")) {
        const std::string type = schema.at("type").get<std::string>();
        const bool ok = (type == "object" && doc.is_object()) ||
                        (type == "array" && doc.is_array()) ||
                        (type == "string" && doc.is_string()) ||
                        (type == "boolean" && doc.is_boolean()) ||
                        (type == "integer" && doc.is_number_integer()) ||
                        (type == "number" && doc.is_number());
        if (!ok) throw std::runtime_error(path + ": expected JSON type '" + type + "'");
    }
    if (schema.contains("required"))
        for (const auto& key : schema.at("required"))
            if (!doc.contains(key.get<std::string>()))
                throw std::runtime_error(path + ": missing required key '" +
                                         key.get<std::string>() + "'");
    if (schema.contains("properties") && doc.is_object())
        for (const auto& [key, sub] : schema.at("properties").items())
            if (doc.contains(key)) validate_against_schema(doc.at(key), sub, path + "." + key);
    if (schema.contains("items") && doc.is_array())
        for (std::size_t i = 0; i < doc.size(); ++i)
            validate_against_schema(doc[i], schema.at("items"),
                                    path + "[" + std::to_string(i) + "]");
}

}  // namespace rkv

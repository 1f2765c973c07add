// Copyright (C) 2026 rkv-sim contributors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: synthetic trace generation, simulation runs,
// lambda sweeps, cross-policy comparison, and the analytical memory model.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rkv/efficiency.hpp"
#include "rkv/matrix.hpp"
#include "rkv/report_io.hpp"
#include "rkv/simulator.hpp"
#include "rkv/trace.hpp"

namespace {

using nlohmann::json;

/// Percentages displayed to two decimals round half up, matching the usual
/// table convention (printf alone would turn 90.625 into 90.62).
double display_pct(double fraction) { return std::round(10000.0 * fraction) / 100.0; }

/// Relative output paths are resolved against RKV_OUT_DIR when it is set.
std::string resolve_output(const std::string& path) {
    const char* dir = std::getenv("RKV_OUT_DIR");
    if (dir == nullptr || *dir == '\0' || std::filesystem::path(path).is_absolute()) return path;
    return (std::filesystem::path(dir) / path).string();
}

struct ConfigFlags {
    rkv::CacheConfig cfg;
    std::string gqa_pool = "max";

    void add_to(CLI::App* cmd) {
        cmd->add_option("--budget", cfg.budget, "retained tokens per layer (B_budget)")
            ->capture_default_str();
        cmd->add_option("--buffer", cfg.buffer, "tokens accumulated between compressions (B_buffer)")
            ->capture_default_str();
        cmd->add_option("--alpha", cfg.obs_window, "observation window size")
            ->capture_default_str();
        cmd->add_option("--lambda", cfg.lambda, "importance/redundancy trade-off")
            ->check(CLI::Range(0.0, 1.0))
            ->capture_default_str();
        cmd->add_option("--sim-threshold", cfg.sim_threshold, "cosine similarity threshold (T)")
            ->capture_default_str();
        cmd->add_option("--beta", cfg.recency_keep, "recent similar tokens exempt from redundancy")
            ->capture_default_str();
        cmd->add_option("--pool-window", cfg.pool_half_window,
                        "attention max-pool half window (W)")
            ->capture_default_str();
        cmd->add_option("--eps", cfg.eps, "key normalization epsilon")->capture_default_str();
        cmd->add_option("--budget-includes-obs", cfg.budget_includes_obs,
                        "observation tokens count against the budget")
            ->capture_default_str();
        cmd->add_option("--gqa-pool", gqa_pool, "group score pooling")
            ->check(CLI::IsMember({"max", "mean"}))
            ->capture_default_str();
        cmd->add_option("--snapkv-calibrated", cfg.snapkv_calibrated,
                        "slice attention before softmax in the SnapKV scorer")
            ->capture_default_str();
        cmd->add_option("--per-head-selection", cfg.per_head_selection,
                        "each head keeps its own token set")
            ->capture_default_str();
    }

    rkv::CacheConfig finish() {
        cfg.gqa_pool = gqa_pool == "mean" ? rkv::GqaPool::Mean : rkv::GqaPool::Max;
        cfg.validate();
        return cfg;
    }
};

double mean_pairwise_cosine(const rkv::DecodeTrace& trace) {
    // Mean off-diagonal cosine of head (0,0) keys without forming the n^2
    // matrix: mean = (|sum of unit keys|^2 - sum of squared norms) / (n(n-1)).
    const std::size_t n = trace.steps.size();
    if (n < 2) return 0.0;
    const std::size_t d = trace.geometry.head_dim;
    std::vector<double> acc(d, 0.0);
    double sumsq = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const auto row = trace.key_row(t, 0, 0);
        double sq = 0.0;
        for (float v : row) sq += static_cast<double>(v) * v;
        const double inv = 1.0 / (std::sqrt(sq) + 1e-8);
        double unit_sq = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double u = row[i] * inv;
            acc[i] += u;
            unit_sq += u * u;
        }
        sumsq += unit_sq;
    }
    double total_sq = 0.0;
    for (double v : acc) total_sq += v * v;
    return (total_sq - sumsq) / (static_cast<double>(n) * (n - 1));
}

// ---------------------------------------------------------------------------
// Planted-label bookkeeping for sweeps
// ---------------------------------------------------------------------------

struct PlantedLabels {
    std::set<std::int64_t> spikes;
    std::map<long, std::vector<std::int64_t>> cluster_members;  // in generation order
};

PlantedLabels planted_labels(const rkv::DecodeTrace& trace) {
    const auto spike_it = trace.metadata.find("spike_positions");
    const auto cluster_it = trace.metadata.find("cluster_ids");
    if (cluster_it == trace.metadata.end())
        throw std::runtime_error(
            "trace has no planted ground-truth labels (generate it with the synth command)");
    PlantedLabels labels;
    if (spike_it != trace.metadata.end() && !spike_it->second.empty())
        for (long p : rkv::parse_int_list(spike_it->second)) labels.spikes.insert(p);
    const auto ids = rkv::parse_int_list(cluster_it->second);
    for (std::size_t t = 0; t < ids.size(); ++t)
        if (ids[t] >= 0) labels.cluster_members[ids[t]].push_back(static_cast<std::int64_t>(t));
    return labels;
}

struct SweepRow {
    double lambda = 0.0;
    double spike_retention = 0.0;
    double old_duplicate_eviction = 0.0;
    double overlap_attention_only = 0.0;
};

SweepRow planted_metrics(const rkv::SimulationReport& report,
                         const rkv::SimulationReport& attention_only,
                         const PlantedLabels& labels, std::size_t beta) {
    SweepRow row;
    row.lambda = report.config.lambda;

    std::set<std::int64_t> old_duplicates;
    for (const auto& [cluster, members] : labels.cluster_members) {
        const std::size_t keep = std::min(beta, members.size());
        for (std::size_t i = 0; i + keep < members.size(); ++i)
            old_duplicates.insert(members[i]);
    }

    const auto mine = report.final_cache_positions();
    const auto ref = attention_only.final_cache_positions();
    double spike_sum = 0.0, evict_sum = 0.0, overlap_sum = 0.0;
    for (std::size_t l = 0; l < mine.size(); ++l) {
        const std::set<std::int64_t> cache(mine[l].begin(), mine[l].end());
        if (!labels.spikes.empty()) {
            std::size_t kept = 0;
            for (std::int64_t s : labels.spikes) kept += cache.count(s);
            spike_sum += static_cast<double>(kept) / labels.spikes.size();
        }
        if (!old_duplicates.empty()) {
            std::size_t evicted = 0;
            for (std::int64_t p : old_duplicates) evicted += cache.count(p) == 0;
            evict_sum += static_cast<double>(evicted) / old_duplicates.size();
        }
        const std::set<std::int64_t> ref_cache(ref[l].begin(), ref[l].end());
        std::size_t inter = 0;
        for (std::int64_t p : ref_cache) inter += cache.count(p);
        overlap_sum += ref_cache.empty() ? 1.0 : static_cast<double>(inter) / ref_cache.size();
    }
    const double layers = static_cast<double>(mine.size());
    row.spike_retention = spike_sum / layers;
    row.old_duplicate_eviction = evict_sum / layers;
    row.overlap_attention_only = overlap_sum / layers;
    return row;
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

int cmd_synth(const rkv::SynthConfig& synth, std::size_t spike_every, const std::string& out) {
    rkv::SynthConfig cfg = synth;
    if (spike_every > 0)
        for (std::size_t p = spike_every / 2; p < cfg.steps; p += spike_every)
            cfg.attention_spike_positions.push_back(p);
    const rkv::DecodeTrace trace = rkv::generate(cfg);
    const std::string path = resolve_output(out);
    rkv::save(trace, path);

    std::cout << "wrote " << path << " (" << trace.steps.size() << " steps, digest "
              << rkv::trace_digest(trace) << ")\n";
    std::cout << "mean pairwise key cosine (layer 0, head 0): " << mean_pairwise_cosine(trace)
              << "\n";
    for (const auto& [n, freq] : rkv::ngram_redundancy_stats(trace, 3))
        std::cout << "avg " << n << "-gram frequency: " << freq << "\n";
    return 0;
}

int cmd_run(const std::string& trace_path, const std::string& policy_name, rkv::CacheConfig cfg,
            const std::string& out) {
    const rkv::DecodeTrace trace = rkv::load(trace_path);
    const rkv::PolicyKind policy = rkv::policy_from_string(policy_name);
    const rkv::SimulationReport report = rkv::run(trace, policy, cfg);
    const std::string path = resolve_output(out);
    rkv::save_report(report, path);
    std::cout << "wrote " << path << ": policy=" << rkv::to_string(policy)
              << " events=" << report.per_event.size()
              << " peak_tokens=" << report.peak_cache_tokens
              << " peak_bytes=" << report.peak_cache_bytes << "\n";
    return 0;
}

int cmd_sweep(const std::string& trace_path, std::vector<double> lambdas, rkv::CacheConfig cfg,
              const std::string& out, std::string csv_path) {
    if (lambdas.empty()) throw CLI::ValidationError("--lambdas", "needs at least one value");
    const rkv::DecodeTrace trace = rkv::load(trace_path);
    const PlantedLabels labels = planted_labels(trace);
    const rkv::SimulationReport reference = rkv::run(trace, rkv::PolicyKind::AttentionOnly, cfg);

    json rows = json::array();
    std::cout << "lambda  spike_retention  old_dup_eviction  overlap_vs_attention\n";
    for (double lambda : lambdas) {
        rkv::CacheConfig run_cfg = cfg;
        run_cfg.lambda = static_cast<float>(lambda);
        run_cfg.validate();
        const auto report = rkv::run(trace, rkv::PolicyKind::RKV, run_cfg);
        const SweepRow row = planted_metrics(report, reference, labels, cfg.recency_keep);
        std::printf("%6.3f  %15.4f  %16.4f  %20.4f\n", lambda, row.spike_retention,
                    row.old_duplicate_eviction, row.overlap_attention_only);
        rows.push_back({{"lambda", lambda},
                        {"spike_retention", row.spike_retention},
                        {"old_duplicate_eviction", row.old_duplicate_eviction},
                        {"overlap_attention_only", row.overlap_attention_only}});
    }

    json doc;
    doc["trace"] = trace_path;
    doc["trace_digest"] = rkv::trace_digest(trace);
    doc["config"] = rkv::to_json(cfg);
    doc["rows"] = rows;
    const std::string path = resolve_output(out);
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open sweep output: " + path);
    os << doc.dump(2) << '\n';

    if (csv_path.empty())
        csv_path = (std::filesystem::path(path).parent_path() /
                    (std::filesystem::path(path).stem().string() + ".csv"))
                       .string();
    else
        csv_path = resolve_output(csv_path);
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot open sweep CSV output: " + csv_path);
    csv << "lambda,spike_retention,old_duplicate_eviction,overlap_attention_only\n";
    for (const auto& r : rows)
        csv << r["lambda"].get<double>() << ',' << r["spike_retention"].get<double>() << ','
            << r["old_duplicate_eviction"].get<double>() << ','
            << r["overlap_attention_only"].get<double>() << '\n';
    std::cout << "wrote " << path << " and " << csv_path << "\n";
    return 0;
}

int cmd_compare(const std::vector<std::string>& report_paths, const std::string& out_prefix) {
    std::vector<rkv::SimulationReport> reports;
    for (const auto& p : report_paths) reports.push_back(rkv::load_report(p));
    for (std::size_t i = 1; i < reports.size(); ++i)
        if (reports[i].trace_digest != reports[0].trace_digest)
            throw std::runtime_error("refusing to compare: report '" + report_paths[i] +
                                     "' comes from a different trace (digest " +
                                     reports[i].trace_digest + " vs " + reports[0].trace_digest +
                                     ")");

    const std::size_t steps = reports[0].per_step.size();
    // Per-policy layer-0 retention mask over absolute positions, plus the
    // head-vote counts from the last compression event.
    std::vector<std::vector<int>> masks(reports.size(), std::vector<int>(steps, 0));
    std::vector<std::vector<std::uint32_t>> head_counts(reports.size(),
                                                        std::vector<std::uint32_t>(steps, 0));
    for (std::size_t r = 0; r < reports.size(); ++r) {
        const auto cache_layers = reports[r].final_cache_positions();
        for (std::int64_t p : cache_layers[0]) masks[r][static_cast<std::size_t>(p)] = 1;
        if (!reports[r].per_event.empty()) {
            const auto& layers = reports[r].per_event.back().layers;
            std::vector<std::uint32_t> total(steps, 0);
            for (const auto& layer : layers)
                for (std::size_t i = 0; i < layer.candidate_positions.size(); ++i)
                    total[static_cast<std::size_t>(layer.candidate_positions[i])] +=
                        layer.head_selection_counts[i];
            head_counts[r] = std::move(total);
        }
    }

    json summary;
    summary["trace_digest"] = reports[0].trace_digest;
    summary["policies"] = json::array();
    for (std::size_t r = 0; r < reports.size(); ++r) {
        const auto& rep = reports[r];
        const std::vector<std::int64_t> cache = rep.final_cache_positions()[0];
        json entry;
        entry["policy"] = rkv::to_string(rep.policy);
        entry["lambda"] = rep.config.lambda;
        entry["peak_cache_tokens"] = rep.peak_cache_tokens;
        entry["peak_cache_bytes"] = rep.peak_cache_bytes;
        entry["final_cache_size"] = cache.size();
        entry["positional_spread"] =
            cache.empty() ? 0 : cache.back() - cache.front();
        summary["policies"].push_back(entry);
    }
    summary["overlap"] = json::array();
    for (std::size_t a = 0; a < reports.size(); ++a)
        for (std::size_t b = a + 1; b < reports.size(); ++b) {
            std::size_t inter = 0, uni = 0;
            for (std::size_t t = 0; t < steps; ++t) {
                inter += masks[a][t] && masks[b][t];
                uni += masks[a][t] || masks[b][t];
            }
            summary["overlap"].push_back({{"a", rkv::to_string(reports[a].policy)},
                                          {"b", rkv::to_string(reports[b].policy)},
                                          {"jaccard", uni ? double(inter) / uni : 1.0}});
        }

    const std::string json_path = resolve_output(out_prefix + ".json");
    std::ofstream os(json_path);
    if (!os) throw std::runtime_error("cannot open compare output: " + json_path);
    os << summary.dump(2) << '\n';

    const std::string csv_path = resolve_output(out_prefix + ".csv");
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot open compare CSV output: " + csv_path);
    csv << "position";
    for (const auto& rep : reports)
        csv << ",mask_" << rkv::to_string(rep.policy) << ",heads_" << rkv::to_string(rep.policy);
    csv << '\n';
    for (std::size_t t = 0; t < steps; ++t) {
        csv << t;
        for (std::size_t r = 0; r < reports.size(); ++r)
            csv << ',' << masks[r][t] << ',' << head_counts[r][t];
        csv << '\n';
    }

    std::cout << summary.dump(2) << "\n";
    std::cout << "wrote " << json_path << " and " << csv_path << "\n";
    return 0;
}

int cmd_memcalc(std::uint64_t gen_len, std::uint64_t budget, rkv::CacheConfig cfg,
                rkv::ModelGeometry geom, std::uint64_t weights_bytes, std::uint64_t batch,
                std::uint64_t total_memory, bool table1) {
    if (table1) {
        const struct {
            std::uint64_t gen_len, budget;
        } rows[] = {
            {8192, 1024},  {8192, 1536},  {8192, 3072},  {16384, 1024}, {16384, 1536},
            {16384, 3072}, {16384, 1638}, {16384, 5570}, {16384, 8847},
        };
        std::printf("gen_len  budget  saving\n");
        for (const auto& row : rows)
            std::printf("%7llu  %6llu  %.2f%%\n", static_cast<unsigned long long>(row.gen_len),
                        static_cast<unsigned long long>(row.budget),
                        display_pct(rkv::saving_fraction(row.gen_len, row.budget)));
        return 0;
    }

    if (budget > gen_len) throw std::runtime_error("budget exceeds generation length");
    if (budget == 0)
        std::cerr << "warning: zero budget is degenerate (the whole cache would be evicted)\n";
    const double saving = display_pct(rkv::saving_fraction(gen_len, budget));
    cfg.budget = budget;

    rkv::MemoryBreakdown m = rkv::memory_breakdown(batch, cfg, geom, gen_len, weights_bytes);
    std::printf("gen_len=%llu budget=%llu saving=%.2f%%\n",
                static_cast<unsigned long long>(gen_len),
                static_cast<unsigned long long>(budget), saving);
    std::printf("m_weights=%llu m_budget=%llu m_buffer=%llu m_query_window=%llu\n",
                static_cast<unsigned long long>(m.m_weights),
                static_cast<unsigned long long>(m.m_budget),
                static_cast<unsigned long long>(m.m_buffer),
                static_cast<unsigned long long>(m.m_query_window));
    std::printf("m_total=%llu m_full=%llu m_saving=%lld\n",
                static_cast<unsigned long long>(m.m_total),
                static_cast<unsigned long long>(m.m_full),
                static_cast<long long>(m.m_saving));

    if (total_memory > 0) {
        const std::uint64_t per_request_compressed =
            rkv::kv_memory(1, cfg.budget_total() + cfg.buffer, geom) +
            rkv::query_window_memory(1, cfg.obs_window, geom);
        const std::uint64_t per_request_full = rkv::kv_memory(1, gen_len, geom);
        std::printf("estimated max batch (compressed): %llu\n",
                    static_cast<unsigned long long>(rkv::max_batch_estimate(
                        total_memory, weights_bytes, per_request_compressed)));
        std::printf("estimated max batch (full cache): %llu\n",
                    static_cast<unsigned long long>(
                        rkv::max_batch_estimate(total_memory, weights_bytes, per_request_full)));
        std::puts("(estimates ignore activations and allocator overhead)");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"R-KV: redundancy-aware KV cache eviction at desk scale"};
    app.require_subcommand(1);

    // --- synth ---
    auto* synth = app.add_subcommand("synth", "generate a synthetic decode trace");
    rkv::SynthConfig synth_cfg;
    synth_cfg.geometry = rkv::ModelGeometry{2, 2, 2, 32, 2};
    synth_cfg.steps = 512;
    std::size_t spike_every = 0;
    std::string synth_out;
    synth->add_option("--seed", synth_cfg.seed, "generator seed")->capture_default_str();
    synth->add_option("--steps", synth_cfg.steps, "trace length")->capture_default_str();
    synth->add_option("--clusters", synth_cfg.n_clusters, "number of duplicate clusters")
        ->capture_default_str();
    synth->add_option("--repeat-prob", synth_cfg.cluster_repeat_prob,
                      "probability a step reuses a cluster direction")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    synth->add_option("--noise-sigma", synth_cfg.cluster_noise_sigma,
                      "gaussian noise added to cluster keys")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    synth->add_option("--spike-every", spike_every,
                      "plant one attention-spiked token per this many steps (0 = none)")
        ->capture_default_str();
    synth->add_option("--spike-at", synth_cfg.attention_spike_positions,
                      "explicit spike positions")
        ->delimiter(',');
    synth->add_option("--layers", synth_cfg.geometry.n_layers, "model layers")
        ->capture_default_str();
    synth->add_option("--kv-heads", synth_cfg.geometry.n_kv_heads, "KV heads per layer")
        ->capture_default_str();
    synth->add_option("--group-size", synth_cfg.geometry.group_size, "query heads per KV head")
        ->capture_default_str();
    synth->add_option("--head-dim", synth_cfg.geometry.head_dim, "head dimension")
        ->capture_default_str();
    synth->add_option("--bytes-per-value", synth_cfg.geometry.bytes_per_value,
                      "cache element size used by the memory model")
        ->capture_default_str();
    synth->add_option("-o,--output", synth_out, "trace file to write")->required();

    // --- run ---
    auto* run = app.add_subcommand("run", "simulate one policy over a trace");
    std::string run_trace, run_policy = "rkv", run_out;
    ConfigFlags run_flags;
    run->add_option("trace", run_trace, "input .rkvt trace")->required();
    run->add_option("--policy", run_policy, "eviction policy")
        ->check(CLI::IsMember({"rkv", "snapkv", "fullkv", "attention-only", "redundancy-only"}))
        ->capture_default_str();
    run_flags.add_to(run);
    run->add_option("-o,--output", run_out, "report JSON to write")->required();

    // --- sweep ---
    auto* sweep = app.add_subcommand("sweep", "run the joint policy across lambda values");
    std::string sweep_trace, sweep_out, sweep_csv;
    std::vector<double> lambdas;
    ConfigFlags sweep_flags;
    sweep->add_option("trace", sweep_trace, "input .rkvt trace (needs planted labels)")
        ->required();
    sweep->add_option("--lambdas", lambdas, "lambda values to sweep")
        ->delimiter(',')
        ->required();
    sweep_flags.add_to(sweep);
    sweep->add_option("-o,--output", sweep_out, "sweep JSON to write")->required();
    sweep->add_option("--csv", sweep_csv, "CSV table path (default: next to the JSON)");

    // --- compare ---
    auto* compare = app.add_subcommand("compare", "compare run reports over the same trace");
    std::vector<std::string> compare_reports;
    std::string compare_out = "compare";
    compare->add_option("reports", compare_reports, "two or more report JSON files")
        ->required()
        ->expected(2, -1);
    compare->add_option("-o,--output", compare_out, "output path prefix")->capture_default_str();

    // --- memcalc ---
    auto* memcalc = app.add_subcommand("memcalc", "analytical cache memory model");
    std::uint64_t gen_len = 8192, mc_budget = 1024, weights_bytes = 0, batch = 1, total_memory = 0;
    bool table1 = false;
    ConfigFlags memcalc_flags;
    rkv::ModelGeometry mc_geom{32, 8, 4, 128, 2};
    memcalc->add_option("--gen-len", gen_len, "generation length in tokens")->capture_default_str();
    memcalc->add_option("--budget", mc_budget, "cache budget in tokens")->capture_default_str();
    memcalc->add_option("--buffer", memcalc_flags.cfg.buffer, "buffer size in tokens")
        ->capture_default_str();
    memcalc->add_option("--alpha", memcalc_flags.cfg.obs_window, "observation window")
        ->capture_default_str();
    memcalc->add_option("--layers", mc_geom.n_layers, "model layers")->capture_default_str();
    memcalc->add_option("--kv-heads", mc_geom.n_kv_heads, "KV heads per layer")
        ->capture_default_str();
    memcalc->add_option("--group-size", mc_geom.group_size, "query heads per KV head")
        ->capture_default_str();
    memcalc->add_option("--head-dim", mc_geom.head_dim, "head dimension")->capture_default_str();
    memcalc->add_option("--bytes-per-value", mc_geom.bytes_per_value, "cache element size")
        ->capture_default_str();
    memcalc->add_option("--weights-bytes", weights_bytes, "model weight bytes (M_theta)")
        ->capture_default_str();
    memcalc->add_option("--batch", batch, "batch size")->capture_default_str();
    memcalc->add_option("--total-memory-bytes", total_memory,
                        "device memory for batch-size estimates");
    memcalc->add_flag("--table1", table1, "print the published memory-saving rows");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (synth->parsed()) return cmd_synth(synth_cfg, spike_every, synth_out);
        if (run->parsed()) return cmd_run(run_trace, run_policy, run_flags.finish(), run_out);
        if (sweep->parsed())
            return cmd_sweep(sweep_trace, lambdas, sweep_flags.finish(), sweep_out, sweep_csv);
        if (compare->parsed()) return cmd_compare(compare_reports, compare_out);
        if (memcalc->parsed()) {
            rkv::CacheConfig cfg = memcalc_flags.cfg;  // only sizes are used
            return cmd_memcalc(gen_len, mc_budget, cfg, mc_geom, weights_bytes, batch,
                               total_memory, table1);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

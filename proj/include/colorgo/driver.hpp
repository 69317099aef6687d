// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "colorgo/executor.hpp"
#include "colorgo/instrument.hpp"
#include "colorgo/points_to.hpp"

namespace colorgo {

struct Seed {
    int id = -1;
    std::vector<uint8_t> bytes;
    int parent = -1;      // seed id, -1 for initial seeds
    int origin_site = -1; // check site that produced it, -1 for initial
    int generation = 0;
};

// LIFO stack with content dedup: byte content that was ever admitted is
// never admitted again.
class InputPool {
public:
    bool push(Seed s); // false if the content was seen before
    std::optional<Seed> pop();
    size_t size() const { return stack_.size(); }
    uint64_t total_admitted() const { return admitted_; }
    uint64_t total_rejected() const { return rejected_; }

private:
    std::vector<Seed> stack_;
    std::set<std::vector<uint8_t>> seen_;
    uint64_t admitted_ = 0;
    uint64_t rejected_ = 0;
};

struct ExecRecord {
    int index = 0;
    int seed_id = -1;
    int parent = -1;
    int origin_site = -1;
    std::string status;
    uint64_t instructions = 0;
    int solves = 0;
    int new_seeds = 0;
    int rejected_seeds = 0;
    int prunes = 0;
    size_t seed_len = 0;
    uint64_t seed_hash = 0; // FNV-1a of the bytes
    double duration_us = 0; // timing
};

struct RunReport {
    std::string tool;
    std::string version;
    std::string strategy;
    std::map<std::string, std::string> flags;
    bool reached = false;
    std::string target_hit; // "fn.block", empty if unreached
    uint64_t executions = 0;
    uint64_t solves = 0;
    uint64_t early_terminations = 0;
    uint64_t pruned_edges = 0;
    uint64_t total_instructions = 0;
    double mean_instructions = 0;
    std::optional<double> mean_solve_us; // timing; null when solves == 0
    std::optional<double> ttr_ms;        // timing; null when unreached
    double tet_ms = 0;                   // timing
    double compile_ms = 0;               // timing
    std::optional<double> overhead_ratio; // timing; null unless measured
    std::vector<ExecRecord> runs;
};

struct Compiled {
    std::shared_ptr<const Program> program;
    Icfg icfg;
    PointsToResult pts;
    TargetSpec spec; // feedback applied
    FunctionTargets targets;
    ColorMap color;
    Instrumented instr;
    std::vector<std::string> warnings;
    double compile_ms = 0;
};

// parse -> points-to -> feedback (once) -> target derivation -> static
// coloration -> instrumentation. Throws Error with the failing stage name.
Compiled compile_pipeline(const std::string& ir_text, const std::string& targets_text);
Compiled compile_files(const std::string& ir_path, const std::string& targets_path);

struct CampaignOptions {
    SearchStrategy strategy = SearchStrategy::Fdfs;
    bool early_term = true;
    bool record_only = false;
    bool no_prune = false;
    bool conservative_pruning = false;
    uint64_t max_execs = 1000;
    double time_budget_ms = 60000;
    uint64_t instr_budget = 1'000'000;
    int solver_timeout_ms = 100;
    std::string seed_dir;      // empty: synthesize one empty seed
    std::string emit_smt_dir;  // empty: off
    bool measure_overhead = false;
    bool debug_checks = false;
};

// Pops seeds LIFO, executes, applies prune proposals to the shared ColorMap,
// pushes deduplicated new seeds, and stops on target reach, pool exhaustion,
// or budget. Mutates compiled.color (dynamic coloration).
RunReport run_campaign(Compiled& compiled, const CampaignOptions& opts);

void emit_report(const RunReport& r, const std::string& path);
std::string report_to_json(const RunReport& r);
RunReport parse_report(const std::string& json_text);
RunReport load_report(const std::string& path);

// Report text with all timing fields zeroed, for determinism comparisons.
std::string scrub_report_timings(const std::string& json_text);

uint64_t fnv1a(std::span<const uint8_t> bytes);

} // namespace colorgo

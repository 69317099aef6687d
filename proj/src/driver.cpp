// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#include "colorgo/driver.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "colorgo/parser.hpp"
#include "colorgo/version.hpp"

namespace colorgo {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using Json = nlohmann::ordered_json;

uint64_t fnv1a(std::span<const uint8_t> bytes) {
    uint64_t h = 1469598103934665603ull;
    for (uint8_t b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

bool InputPool::push(Seed s) {
    if (!seen_.insert(s.bytes).second) {
        ++rejected_;
        return false;
    }
    ++admitted_;
    stack_.push_back(std::move(s));
    return true;
}

std::optional<Seed> InputPool::pop() {
    if (stack_.empty())
        return std::nullopt;
    Seed s = std::move(stack_.back());
    stack_.pop_back();
    return s;
}

namespace {

std::string read_file(const std::string& path, const std::string& stage) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw Error(stage + ": file not found: " + path, stage);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<uint8_t> read_bytes(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    std::vector<uint8_t> out((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return out;
}

} // namespace

Compiled compile_pipeline(const std::string& ir_text, const std::string& targets_text) {
    Compiled c;
    auto t0 = Clock::now();

    try {
        c.program = std::make_shared<const Program>(parse_program(ir_text));
    } catch (const ParseError& e) {
        throw Error("parse: " + std::string(e.what()) + " (line " + std::to_string(e.line) +
                        ", col " + std::to_string(e.col) + ")",
                    "parse");
    }

    TargetSpec spec = parse_target_spec(targets_text);

    ConstraintSystem cs = collect_constraints(*c.program);
    c.pts = solve_points_to(cs);
    for (const auto& w : c.pts.warnings)
        c.warnings.push_back("points_to: " + w);

    c.spec = feedback_targets(*c.program, c.pts, spec, &c.warnings);

    c.icfg = build_icfg(c.program, c.pts);
    for (const auto& w : c.icfg.warnings)
        c.warnings.push_back("icfg: " + w);

    c.targets = derive_function_targets(*c.program, c.spec, c.icfg);
    for (const auto& w : c.targets.warnings)
        c.warnings.push_back("targets: " + w);

    c.color = static_color(c.icfg, c.targets);
    c.instr = instrument(c.program, c.color, c.icfg);

    c.compile_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    return c;
}

Compiled compile_files(const std::string& ir_path, const std::string& targets_path) {
    std::string ir = read_file(ir_path, "parse");
    std::string tg = read_file(targets_path, "targets");
    return compile_pipeline(ir, tg);
}

namespace {

ExecOptions exec_options(const CampaignOptions& opts) {
    ExecOptions eo;
    eo.strategy = opts.strategy;
    eo.early_term = opts.early_term;
    eo.record_only = opts.record_only;
    eo.conservative_pruning = opts.conservative_pruning;
    eo.instr_budget = opts.instr_budget;
    eo.solver_timeout_ms = opts.solver_timeout_ms;
    eo.collect_smt = !opts.emit_smt_dir.empty();
    eo.debug_checks = opts.debug_checks;
    return eo;
}

std::vector<Seed> initial_seeds(const CampaignOptions& opts, int& next_id,
                                std::vector<std::string>& warnings) {
    std::vector<Seed> seeds;
    if (!opts.seed_dir.empty()) {
        std::vector<fs::path> files;
        std::error_code ec;
        for (const auto& entry : fs::directory_iterator(opts.seed_dir, ec))
            if (entry.is_regular_file())
                files.push_back(entry.path());
        if (ec)
            throw Error("seeds: cannot read directory " + opts.seed_dir, "seeds");
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            Seed s;
            s.id = next_id++;
            s.bytes = read_bytes(f);
            seeds.push_back(std::move(s));
        }
    }
    if (seeds.empty()) {
        if (!opts.seed_dir.empty())
            warnings.push_back("seed directory is empty; starting from an empty input");
        Seed s;
        s.id = next_id++;
        seeds.push_back(std::move(s));
    }
    return seeds;
}

// Mean wall time of `reps` executions in the given mode over the seeds.
double mean_exec_time_us(const Compiled& c, const std::vector<std::vector<uint8_t>>& seeds,
                         ExecOptions eo, int reps) {
    auto t0 = Clock::now();
    int count = 0;
    for (int i = 0; i < reps; ++i)
        for (const auto& s : seeds) {
            (void)execute(c.instr, c.icfg, s, c.color, eo);
            ++count;
        }
    if (count == 0)
        return 0;
    return std::chrono::duration<double, std::micro>(Clock::now() - t0).count() / count;
}

} // namespace

RunReport run_campaign(Compiled& compiled, const CampaignOptions& opts) {
    RunReport r;
    r.tool = kToolName;
    r.version = kToolVersion;
    r.strategy = opts.strategy == SearchStrategy::Fdfs ? "fdfs" : "dfs";
    r.compile_ms = compiled.compile_ms;
    r.flags["early_term"] = opts.early_term ? "true" : "false";
    r.flags["record_only"] = opts.record_only ? "true" : "false";
    r.flags["prune"] = opts.no_prune ? "false" : "true";
    r.flags["conservative_pruning"] = opts.conservative_pruning ? "true" : "false";
    r.flags["max_execs"] = std::to_string(opts.max_execs);
    r.flags["instr_budget"] = std::to_string(opts.instr_budget);

    ExecOptions eo = exec_options(opts);

    if (!opts.emit_smt_dir.empty())
        fs::create_directories(opts.emit_smt_dir);

    int next_id = 0;
    std::vector<std::string> seed_warnings;
    std::vector<Seed> init = initial_seeds(opts, next_id, seed_warnings);
    std::vector<std::vector<uint8_t>> first_seed_bytes;
    for (const auto& s : init)
        first_seed_bytes.push_back(s.bytes);

    InputPool pool;
    // Reverse push so the first seed file is popped first.
    for (auto it = init.rbegin(); it != init.rend(); ++it)
        pool.push(std::move(*it));

    double total_solve_us = 0;
    int smt_counter = 0;
    auto start = Clock::now();
    auto elapsed_ms = [&] {
        return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    };

    while (r.executions < opts.max_execs && elapsed_ms() < opts.time_budget_ms) {
        std::optional<Seed> seed = pool.pop();
        if (!seed)
            break;

        auto e0 = Clock::now();
        ExecOutcome out = execute(compiled.instr, compiled.icfg, seed->bytes, compiled.color, eo);
        double dur_us = std::chrono::duration<double, std::micro>(Clock::now() - e0).count();
        r.tet_ms += dur_us / 1000.0;
        ++r.executions;

        ExecRecord rec;
        rec.index = static_cast<int>(r.executions) - 1;
        rec.seed_id = seed->id;
        rec.parent = seed->parent;
        rec.origin_site = seed->origin_site;
        rec.status = exec_status_name(out.status);
        rec.instructions = out.instructions;
        rec.solves = out.solves;
        rec.prunes = static_cast<int>(out.prunes.size());
        rec.seed_len = seed->bytes.size();
        rec.seed_hash = fnv1a(seed->bytes);
        rec.duration_us = dur_us;

        r.solves += static_cast<uint64_t>(out.solves);
        for (double us : out.solve_us)
            total_solve_us += us;
        r.total_instructions += out.instructions;
        if (out.status == ExecStatus::EarlyTerminated)
            ++r.early_terminations;

        for (const auto& em : out.smt) {
            fs::path p = fs::path(opts.emit_smt_dir) /
                         ("site" + std::to_string(em.site_id) + "_solve" +
                          std::to_string(++smt_counter) + ".smt2");
            std::ofstream f(p, std::ios::binary);
            f << em.text;
        }

        if (out.status == ExecStatus::TargetReached) {
            r.reached = true;
            r.target_hit = compiled.icfg.node_label(*out.reached_target);
            r.ttr_ms = elapsed_ms();
            r.runs.push_back(std::move(rec));
            break;
        }

        if (!opts.no_prune) {
            for (const auto& pr : out.prunes) {
                if (opts.conservative_pruning) {
                    compiled.color.pruned_edge_prefixes.insert({pr.edge_id, pr.prefix_hash});
                    continue;
                }
                // Proposals built against a stale snapshot may already be
                // settled; apply only those still meaningful.
                if (compiled.color.is_pruned(pr.edge_id))
                    continue;
                const IntraEdge& e = compiled.icfg.edge(pr.edge_id);
                if (!compiled.color.is_colored({e.fn, e.from}))
                    continue;
                prune_edge(compiled.color, pr.edge_id, compiled.icfg);
            }
        }

        for (const auto& ni : out.new_inputs) {
            Seed s;
            s.id = next_id++;
            s.bytes = ni.bytes;
            s.parent = seed->id;
            s.origin_site = ni.origin_site;
            s.generation = seed->generation + 1;
            if (pool.push(std::move(s)))
                ++rec.new_seeds;
            else
                ++rec.rejected_seeds;
        }
        r.runs.push_back(std::move(rec));
    }

    r.pruned_edges = compiled.color.pruned_edges.size() + compiled.color.pruned_edge_prefixes.size();
    if (r.solves > 0)
        r.mean_solve_us = total_solve_us / static_cast<double>(r.solves);
    if (r.executions > 0)
        r.mean_instructions =
            static_cast<double>(r.total_instructions) / static_cast<double>(r.executions);

    if (opts.measure_overhead) {
        ExecOptions plain = eo;
        plain.plain = true;
        plain.record_only = false;
        ExecOptions recording = eo;
        recording.record_only = true;
        recording.plain = false;
        const int reps = 100;
        double plain_us = mean_exec_time_us(compiled, first_seed_bytes, plain, reps);
        double instr_us = mean_exec_time_us(compiled, first_seed_bytes, recording, reps);
        if (plain_us > 0)
            r.overhead_ratio = instr_us / plain_us;
    }
    return r;
}

namespace {

Json report_json(const RunReport& r) {
    Json j;
    j["tool"] = r.tool;
    j["version"] = r.version;
    j["strategy"] = r.strategy;
    j["flags"] = Json::object();
    for (const auto& [k, v] : r.flags)
        j["flags"][k] = v;
    j["reached"] = r.reached;
    j["target_hit"] = r.target_hit;
    j["executions"] = r.executions;
    j["solves"] = r.solves;
    j["early_terminations"] = r.early_terminations;
    j["pruned_edges"] = r.pruned_edges;
    j["total_instructions"] = r.total_instructions;
    j["mean_instructions"] = r.mean_instructions;
    j["mean_solve_us"] = r.mean_solve_us ? Json(*r.mean_solve_us) : Json(nullptr);
    j["ttr_ms"] = r.ttr_ms ? Json(*r.ttr_ms) : Json(nullptr);
    j["tet_ms"] = r.tet_ms;
    j["compile_ms"] = r.compile_ms;
    j["overhead_ratio"] = r.overhead_ratio ? Json(*r.overhead_ratio) : Json(nullptr);
    j["runs"] = Json::array();
    for (const auto& rec : r.runs) {
        Json e;
        e["index"] = rec.index;
        e["seed_id"] = rec.seed_id;
        e["parent"] = rec.parent;
        e["origin_site"] = rec.origin_site;
        e["status"] = rec.status;
        e["instructions"] = rec.instructions;
        e["solves"] = rec.solves;
        e["new_seeds"] = rec.new_seeds;
        e["rejected_seeds"] = rec.rejected_seeds;
        e["prunes"] = rec.prunes;
        e["seed_len"] = rec.seed_len;
        e["seed_hash"] = rec.seed_hash;
        e["duration_us"] = rec.duration_us;
        j["runs"].push_back(std::move(e));
    }
    return j;
}

} // namespace

std::string report_to_json(const RunReport& r) { return report_json(r).dump(2) + "\n"; }

void emit_report(const RunReport& r, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error("report: cannot write " + path, "report");
    f << report_to_json(r);
}

RunReport parse_report(const std::string& json_text) {
    Json j = Json::parse(json_text);
    RunReport r;
    r.tool = j.at("tool").get<std::string>();
    r.version = j.at("version").get<std::string>();
    r.strategy = j.at("strategy").get<std::string>();
    for (const auto& [k, v] : j.at("flags").items())
        r.flags[k] = v.get<std::string>();
    r.reached = j.at("reached").get<bool>();
    r.target_hit = j.at("target_hit").get<std::string>();
    r.executions = j.at("executions").get<uint64_t>();
    r.solves = j.at("solves").get<uint64_t>();
    r.early_terminations = j.at("early_terminations").get<uint64_t>();
    r.pruned_edges = j.at("pruned_edges").get<uint64_t>();
    r.total_instructions = j.at("total_instructions").get<uint64_t>();
    r.mean_instructions = j.at("mean_instructions").get<double>();
    if (!j.at("mean_solve_us").is_null())
        r.mean_solve_us = j.at("mean_solve_us").get<double>();
    if (!j.at("ttr_ms").is_null())
        r.ttr_ms = j.at("ttr_ms").get<double>();
    r.tet_ms = j.at("tet_ms").get<double>();
    r.compile_ms = j.at("compile_ms").get<double>();
    if (!j.at("overhead_ratio").is_null())
        r.overhead_ratio = j.at("overhead_ratio").get<double>();
    for (const auto& e : j.at("runs")) {
        ExecRecord rec;
        rec.index = e.at("index").get<int>();
        rec.seed_id = e.at("seed_id").get<int>();
        rec.parent = e.at("parent").get<int>();
        rec.origin_site = e.at("origin_site").get<int>();
        rec.status = e.at("status").get<std::string>();
        rec.instructions = e.at("instructions").get<uint64_t>();
        rec.solves = e.at("solves").get<int>();
        rec.new_seeds = e.at("new_seeds").get<int>();
        rec.rejected_seeds = e.at("rejected_seeds").get<int>();
        rec.prunes = e.at("prunes").get<int>();
        rec.seed_len = e.at("seed_len").get<size_t>();
        rec.seed_hash = e.at("seed_hash").get<uint64_t>();
        rec.duration_us = e.at("duration_us").get<double>();
        r.runs.push_back(std::move(rec));
    }
    return r;
}

RunReport load_report(const std::string& path) { return parse_report(read_file(path, "report")); }

std::string scrub_report_timings(const std::string& json_text) {
    Json j = Json::parse(json_text);
    j["ttr_ms"] = nullptr;
    j["tet_ms"] = 0;
    j["compile_ms"] = 0;
    j["mean_solve_us"] = nullptr;
    j["overhead_ratio"] = nullptr;
    for (auto& e : j["runs"])
        e["duration_us"] = 0;
    return j.dump(2) + "\n";
}

} // namespace colorgo

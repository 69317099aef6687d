// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: end-to-end checks of the engine against its independent
// oracles and the reproduction scenarios. Prints one PASS/FAIL line per
// criterion and exits nonzero if any fail.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "colorgo/driver.hpp"
#include "support/testutil.hpp"

using namespace colorgo;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

struct Criterion {
    const char* name;
    double limit_ms; // 0 = no limit
    std::function<void(std::ostringstream&)> body;
};

void require(bool cond, const std::string& what) {
    if (!cond)
        throw std::runtime_error(what);
}

Compiled compile_corpus(const std::string& name) {
    return compile_pipeline(testutil::slurp(testutil::corpus_file(name, "prog.ir")),
                            testutil::slurp(testutil::corpus_file(name, "targets.txt")));
}

CampaignOptions corpus_opts(const std::string& name) {
    CampaignOptions o;
    o.seed_dir = testutil::corpus_dir() + "/" + name + "/seeds";
    return o;
}

// ---------------------------------------------------------------------------
// 1. coloration oracle
// ---------------------------------------------------------------------------
void criterion_coloration_oracle(std::ostringstream& note) {
    std::mt19937 rng(0xC01035);
    int graphs = 0;
    for (int i = 0; i < 150; ++i) {
        Program raw = testutil::random_cfg_program(rng, 50);
        auto prog = std::make_shared<const Program>(std::move(raw));
        Icfg g = build_icfg(prog, solve_points_to(collect_constraints(*prog)));
        const FunctionDef& f = prog->functions[0];
        std::uniform_int_distribution<int> pick(0, static_cast<int>(f.blocks.size()) - 1);
        std::set<int> targets{pick(rng)};
        if (i % 3 == 0)
            targets.insert(pick(rng));
        FunctionTargets ft;
        ft.color_seeds[0] = targets;
        for (int t : targets)
            ft.reach_targets.insert({0, t});
        ColorMap cm = static_color(g, ft);
        std::set<int> got;
        for (const NodeRef& n : cm.colored)
            got.insert(n.block);
        require(got == testutil::oracle_colored(f, targets),
                "random CFG " + std::to_string(i) + " disagrees with the oracle");
        ++graphs;
    }
    for (const auto& name : testutil::corpus_cases()) {
        Compiled c = compile_corpus(name);
        for (const auto& [fn, seeds] : c.color.seeds) {
            std::set<int> got;
            for (const NodeRef& n : c.color.colored)
                if (n.fn == fn)
                    got.insert(n.block);
            require(got == testutil::oracle_colored(c.program->functions[fn], seeds),
                    name + "/" + c.program->functions[fn].name + " disagrees with the oracle");
        }
        ++graphs;
    }
    note << graphs << " graphs";
}

// ---------------------------------------------------------------------------
// 2. long-condition reproduction
// ---------------------------------------------------------------------------
void criterion_listing1(std::ostringstream& note) {
    Compiled c = compile_corpus("listing1");
    RunReport r = run_campaign(c, corpus_opts("listing1"));
    require(r.reached, "target not reached");
    require(r.executions == 2, "expected exactly 2 executions, got " + std::to_string(r.executions));
    require(r.solves == 1, "expected exactly 1 solve, got " + std::to_string(r.solves));

    // inspect the generated seed bytes directly
    Compiled c2 = compile_corpus("listing1");
    std::vector<uint8_t> seed{0, 0, 0, 0};
    ExecOutcome first = execute(c2.instr, c2.icfg, seed, c2.color, {});
    require(first.new_inputs.size() == 1, "first run must emit one corrected seed");
    const auto& b = first.new_inputs[0].bytes;
    require(b.size() >= 4, "seed too short");
    uint32_t word = b[0] | (b[1] << 8) | (b[2] << 16) | (uint32_t(b[3]) << 24);
    require(word == 123456789, "seed bytes decode to " + std::to_string(word));
    note << "2 executions, 1 solve, seed decodes to 123456789";
}

// ---------------------------------------------------------------------------
// 3. loop/switch reproduction
// ---------------------------------------------------------------------------
void criterion_listing2(std::ostringstream& note) {
    Compiled c = compile_corpus("listing2_loop");
    const FunctionDef& f = c.program->functions[0];
    for (const char* label : {"body_x", "body_z", "out"})
        require(!c.color.is_colored({0, f.block_of(label)}),
                std::string(label) + " must stay uncolored");
    for (const char* label : {"entry", "head", "dispatch", "body_y"})
        require(c.color.is_colored({0, f.block_of(label)}),
                std::string(label) + " must be colored");
    RunReport r = run_campaign(c, corpus_opts("listing2_loop"));
    require(r.reached, "target not reached");
    require(r.executions <= 2, "expected <= 2 executions, got " + std::to_string(r.executions));
    note << r.executions << " executions; X/Z bodies uncolored";
}

// ---------------------------------------------------------------------------
// 4. early termination
// ---------------------------------------------------------------------------
void criterion_early_termination(std::ostringstream& note) {
    Compiled c = compile_corpus("unsat_path");
    RunReport r = run_campaign(c, corpus_opts("unsat_path"));
    require(!r.reached, "unsat program must not reach");
    require(r.executions > 0 && r.early_terminations == r.executions,
            "ETE " + std::to_string(r.early_terminations) + " != executions " +
                std::to_string(r.executions));

    Compiled c2 = compile_corpus("unsat_path");
    CampaignOptions no_et = corpus_opts("unsat_path");
    no_et.early_term = false;
    RunReport r2 = run_campaign(c2, no_et);

    // at least one execution must visit an uncolored node
    Compiled c3 = compile_corpus("unsat_path");
    ExecOptions eo;
    eo.early_term = false;
    bool saw_uncolored = false;
    namespace fs = std::filesystem;
    for (const auto& e : fs::directory_iterator(corpus_opts("unsat_path").seed_dir)) {
        std::string raw = testutil::slurp(e.path().string());
        std::vector<uint8_t> seed(raw.begin(), raw.end());
        ExecOutcome out = execute(c3.instr, c3.icfg, seed, c3.color, eo);
        for (const NodeRef& n : out.visited)
            if (!c3.color.is_colored(n))
                saw_uncolored = true;
    }
    require(saw_uncolored, "no execution visited an uncolored node without early termination");

    double base = r.mean_instructions;
    double widened = r2.mean_instructions;
    require(widened >= base * 1.10, "mean instructions grew only from " + std::to_string(base) +
                                        " to " + std::to_string(widened));
    std::ostringstream growth;
    growth.setf(std::ios::fixed);
    growth.precision(0);
    growth << (widened / base - 1.0) * 100.0;
    note << "ETE = 100%; mean instructions +" << growth.str() << "% without early termination";
}

// ---------------------------------------------------------------------------
// 5. search strategy ablation
// ---------------------------------------------------------------------------
void criterion_fdfs_vs_dfs(std::ostringstream& note) {
    auto cases = testutil::corpus_cases();
    require(cases.size() >= 10, "corpus needs at least 10 programs");
    int strict = 0;
    for (const auto& name : cases) {
        Compiled cf = compile_corpus(name);

        // a site with two or more colored successors is where naive DFS
        // spends extra solves
        bool has_multi_colored_site = false;
        for (const NodeRef& n : cf.color.colored) {
            Opcode t = cf.program->functions[n.fn].blocks[n.block].terminator().op;
            if (t != Opcode::BrCond && t != Opcode::Switch)
                continue;
            int colored_succs = 0;
            for (int eid : cf.icfg.out_of(n))
                if (cf.color.edge_leads_colored(cf.icfg, eid))
                    ++colored_succs;
            if (colored_succs >= 2)
                has_multi_colored_site = true;
        }

        RunReport rf = run_campaign(cf, corpus_opts(name));
        Compiled cd = compile_corpus(name);
        CampaignOptions dfs = corpus_opts(name);
        dfs.strategy = SearchStrategy::Dfs;
        RunReport rd = run_campaign(cd, dfs);

        require(rf.solves <= rd.solves, name + ": fdfs solves " + std::to_string(rf.solves) +
                                            " > dfs solves " + std::to_string(rd.solves));
        if (has_multi_colored_site) {
            require(rf.solves < rd.solves,
                    name + ": expected strictly fewer fdfs solves on a both-colored program");
            ++strict;
        }
        if (rf.reached && rd.reached)
            require(rf.executions <= rd.executions,
                    name + ": fdfs executions exceed dfs executions");
    }
    require(strict >= 1, "no program exercised the strict case");
    note << cases.size() << " programs, " << strict << " with both-colored sites (all strict)";
}

// ---------------------------------------------------------------------------
// 6. seed validity
// ---------------------------------------------------------------------------

// Replays a campaign manually and re-executes every generated seed, checking
// that the first edge taken at its origin site is the intended one.
struct SeedValidity {
    uint64_t seeds_checked = 0;
    uint64_t violations = 0;
};

void validate_campaign_seeds(Compiled& c, const std::vector<std::vector<uint8_t>>& initial,
                             SeedValidity& stats, SearchStrategy strategy) {
    std::map<int, NodeRef> site_nodes;
    for (const auto& [node, plan] : c.instr.plans)
        site_nodes[plan.site_id] = node;

    ExecOptions eo;
    eo.strategy = strategy;
    ExecOptions replay; // record-only replay never mutates anything
    replay.record_only = true;

    InputPool pool;
    int id = 0;
    for (auto it = initial.rbegin(); it != initial.rend(); ++it)
        pool.push({id++, *it, -1, -1, 0});
    int execs = 0;
    while (execs < 200) {
        auto seed = pool.pop();
        if (!seed)
            break;
        ++execs;
        ExecOutcome out = execute(c.instr, c.icfg, seed->bytes, c.color, eo);
        for (const auto& ni : out.new_inputs) {
            ++stats.seeds_checked;
            NodeRef site = site_nodes.at(ni.origin_site);
            ExecOutcome rerun = execute(c.instr, c.icfg, ni.bytes, c.color, replay);
            bool ok = false, found_site = false;
            for (int eid : rerun.edge_trace) {
                const IntraEdge& e = c.icfg.edge(eid);
                if (e.fn == site.fn && e.from == site.block) {
                    found_site = true;
                    ok = eid == ni.origin_edge;
                    break;
                }
            }
            if (!found_site || !ok)
                ++stats.violations;
            pool.push({id++, ni.bytes, seed->id, ni.origin_site, 0});
        }
        if (out.status == ExecStatus::TargetReached)
            break;
        for (const auto& pr : out.prunes) {
            if (!c.color.is_pruned(pr.edge_id) &&
                c.color.is_colored({c.icfg.edge(pr.edge_id).fn, c.icfg.edge(pr.edge_id).from}))
                prune_edge(c.color, pr.edge_id, c.icfg);
        }
    }
}

void criterion_seed_validity(std::ostringstream& note) {
    SeedValidity stats;
    namespace fs = std::filesystem;
    for (const auto& name : testutil::corpus_cases()) {
        for (SearchStrategy st : {SearchStrategy::Fdfs, SearchStrategy::Dfs}) {
            Compiled c = compile_corpus(name);
            std::vector<std::vector<uint8_t>> seeds;
            for (const auto& e : fs::directory_iterator(corpus_opts(name).seed_dir)) {
                std::string raw = testutil::slurp(e.path().string());
                seeds.emplace_back(raw.begin(), raw.end());
            }
            std::sort(seeds.begin(), seeds.end());
            validate_campaign_seeds(c, seeds, stats, st);
        }
    }

    std::mt19937 rng(0x5EEDF00D);
    int programs = 0;
    while (programs < 1000) {
        bool gauntlet = programs % 2 == 0;
        std::string text = gauntlet ? testutil::random_gauntlet_program(rng)
                                    : testutil::random_micro_program(rng);
        std::string target_line;
        if (gauntlet) {
            target_line = "t.c:1000\n";
        } else {
            Program probe = parse_program(text);
            int last = static_cast<int>(probe.functions[0].blocks.size());
            std::uniform_int_distribution<int> line_d(1, last);
            target_line = "t.c:" + std::to_string(line_d(rng)) + "\n";
        }
        Compiled c;
        try {
            c = compile_pipeline(text, target_line);
        } catch (const Error&) {
            continue; // random target happened to be unreachable
        }
        ++programs;
        std::vector<std::vector<uint8_t>> seeds{testutil::random_input(rng)};
        validate_campaign_seeds(c, seeds, stats, SearchStrategy::Fdfs);
    }
    require(stats.violations == 0,
            std::to_string(stats.violations) + " of " + std::to_string(stats.seeds_checked) +
                " seeds missed their intended edge");
    require(stats.seeds_checked >= 500, "too few seeds generated to be meaningful");
    note << stats.seeds_checked << " seeds across corpus + " << programs
         << " random programs, 0 violations";
}

// ---------------------------------------------------------------------------
// 7. semantic preservation and overhead metric
// ---------------------------------------------------------------------------
void criterion_semantic_preservation(std::ostringstream& note) {
    std::mt19937 rng(0xFACADE);
    int pairs = 0;
    while (pairs < 1000) {
        std::string text = testutil::random_micro_program(rng);
        Program probe = parse_program(text);
        int last = static_cast<int>(probe.functions[0].blocks.size());
        Compiled c;
        try {
            c = compile_pipeline(text, "t.c:" + std::to_string(last) + "\n");
        } catch (const Error&) {
            continue;
        }
        std::vector<uint8_t> input = testutil::random_input(rng);
        ExecOptions rec;
        rec.record_only = true;
        ExecOptions plain;
        plain.plain = true;
        ExecOutcome a = execute(c.instr, c.icfg, input, c.color, rec);
        ExecOutcome b = execute(c.instr, c.icfg, input, c.color, plain);
        require(a.visited == b.visited, "block traces diverge");
        require(a.status == b.status, "exit status diverges");
        require(a.exit_value == b.exit_value, "exit value diverges");
        ++pairs;
    }

    Compiled c = compile_corpus("listing2_loop");
    CampaignOptions o = corpus_opts("listing2_loop");
    o.measure_overhead = true;
    RunReport r = run_campaign(c, o);
    require(r.overhead_ratio.has_value(), "overhead ratio missing from the report");
    std::string json = report_to_json(r);
    require(json.find("overhead_ratio") != std::string::npos, "report key missing");
    std::ostringstream ratio;
    ratio.setf(std::ios::fixed);
    ratio.precision(2);
    ratio << *r.overhead_ratio;
    note << pairs << " pairs identical; overhead ratio " << ratio.str() << " reported";
}

// ---------------------------------------------------------------------------
// 8. determinism
// ---------------------------------------------------------------------------
void criterion_determinism(std::ostringstream& note) {
    for (const auto& name : testutil::corpus_cases()) {
        for (SearchStrategy st : {SearchStrategy::Fdfs, SearchStrategy::Dfs}) {
            Compiled c1 = compile_corpus(name);
            CampaignOptions o = corpus_opts(name);
            o.strategy = st;
            RunReport r1 = run_campaign(c1, o);
            Compiled c2 = compile_corpus(name);
            RunReport r2 = run_campaign(c2, o);
            require(scrub_report_timings(report_to_json(r1)) ==
                        scrub_report_timings(report_to_json(r2)),
                    name + " reports differ beyond timing fields");
        }
    }
    note << "both strategies, every corpus campaign";
}

// ---------------------------------------------------------------------------
// 9. points-to soundness
// ---------------------------------------------------------------------------
void criterion_points_to(std::ostringstream& note) {
    namespace fs = std::filesystem;
    uint64_t observed = 0;
    // A solving mini-campaign per corpus case so executions actually walk
    // through guarded indirect calls, checking every observed callee.
    for (const auto& name : testutil::corpus_cases()) {
        Compiled c = compile_corpus(name);
        InputPool pool;
        int id = 0;
        std::vector<std::vector<uint8_t>> seeds;
        for (const auto& e : fs::directory_iterator(corpus_opts(name).seed_dir)) {
            std::string raw = testutil::slurp(e.path().string());
            seeds.emplace_back(raw.begin(), raw.end());
        }
        std::sort(seeds.begin(), seeds.end());
        for (auto it = seeds.rbegin(); it != seeds.rend(); ++it)
            pool.push({id++, *it, -1, -1, 0});
        int execs = 0;
        while (execs < 50) {
            auto seed = pool.pop();
            if (!seed)
                break;
            ++execs;
            ExecOutcome out = execute(c.instr, c.icfg, seed->bytes, c.color, {});
            for (const auto& obs : out.icalls) {
                ++observed;
                const std::vector<int>* cands =
                    c.pts.candidates_for(obs.node.fn, obs.node.block, obs.instr);
                require(cands != nullptr, name + ": icall site missing from the analysis");
                require(std::find(cands->begin(), cands->end(), obs.callee) != cands->end(),
                        name + ": dynamic icall target not in the static candidate set");
            }
            if (out.status == ExecStatus::TargetReached)
                break;
            for (const auto& ni : out.new_inputs)
                pool.push({id++, ni.bytes, seed->id, ni.origin_site, 0});
            for (const auto& pr : out.prunes)
                if (!c.color.is_pruned(pr.edge_id) &&
                    c.color.is_colored({c.icfg.edge(pr.edge_id).fn, c.icfg.edge(pr.edge_id).from}))
                    prune_edge(c.color, pr.edge_id, c.icfg);
        }
    }
    require(observed >= 1, "no dynamic icall was ever observed");

    Compiled fig2 = compile_corpus("fig2_icall");
    require(fig2.pts.site_candidates.size() == 1, "fig2 has one icall site");
    const auto& cand = fig2.pts.site_candidates[0];
    require(cand.size() == 1 && fig2.program->functions[cand[0]].name == "add",
            "fig2 icall must resolve to exactly {add}");
    note << observed << " dynamic icalls contained; fig2 resolves to {add}";
}

} // namespace

int main() {
    std::vector<Criterion> criteria = {
        {"coloration matches the backward-BFS oracle", 5000, criterion_coloration_oracle},
        {"long-condition program: 2 executions, 1 solve, exact seed", 1000, criterion_listing1},
        {"loop/switch program: reached, case bodies uncolored", 1000, criterion_listing2},
        {"early termination: 100% ETE, >=10% instruction growth without it", 0,
         criterion_early_termination},
        {"deviation-driven search solves no more than naive DFS", 30000, criterion_fdfs_vs_dfs},
        {"every generated seed takes its intended edge", 0, criterion_seed_validity},
        {"record-only runs match plain interpretation; overhead reported", 0,
         criterion_semantic_preservation},
        {"campaign reports are deterministic modulo timing", 0, criterion_determinism},
        {"dynamic icall targets lie in the static points-to sets", 0, criterion_points_to},
    };

    for (size_t i = 0; i < criteria.size(); ++i) {
        const auto& c = criteria[i];
        std::ostringstream detail;
        auto t0 = Clock::now();
        std::string failure;
        try {
            c.body(detail);
        } catch (const std::exception& e) {
            failure = e.what();
        }
        double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        if (failure.empty() && c.limit_ms > 0 && ms > c.limit_ms)
            failure = "exceeded the " + std::to_string(static_cast<int>(c.limit_ms)) + " ms budget";
        if (failure.empty()) {
            std::printf("PASS  %zu. %s — %s (%.0f ms)\n", i + 1, c.name, detail.str().c_str(), ms);
        } else {
            std::printf("FAIL  %zu. %s — %s (%.0f ms)\n", i + 1, c.name, failure.c_str(), ms);
            ++g_failures;
        }
    }
    if (g_failures) {
        std::printf("%d of %zu criteria failed\n", g_failures, criteria.size());
        return 1;
    }
    std::printf("all %zu criteria passed\n", criteria.size());
    return 0;
}

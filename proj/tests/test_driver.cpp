// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>

#include "colorgo/driver.hpp"
#include "support/testutil.hpp"

using namespace colorgo;

namespace {

Compiled compile_corpus(const std::string& name) {
    return compile_pipeline(testutil::slurp(testutil::corpus_file(name, "prog.ir")),
                            testutil::slurp(testutil::corpus_file(name, "targets.txt")));
}

CampaignOptions corpus_opts(const std::string& name) {
    CampaignOptions o;
    o.seed_dir = testutil::corpus_dir() + "/" + name + "/seeds";
    return o;
}

} // namespace

TEST_CASE("input pool is strict LIFO with content dedup") {
    InputPool pool;
    CHECK(pool.push({0, {1}, -1, -1, 0}));
    CHECK(pool.push({1, {2}, -1, -1, 0}));
    CHECK_FALSE(pool.push({2, {1}, -1, -1, 0})); // duplicate content
    CHECK(pool.size() == 2);
    CHECK(pool.pop()->id == 1);
    CHECK(pool.push({3, {3}, -1, -1, 0}));
    CHECK(pool.pop()->id == 3); // most recently pushed pops first
    CHECK(pool.pop()->id == 0);
    CHECK_FALSE(pool.pop().has_value());
    // content never re-enters, even after being popped
    CHECK_FALSE(pool.push({4, {2}, -1, -1, 0}));
    CHECK(pool.total_rejected() == 2);
}

TEST_CASE("compile summarizes the long-condition program") {
    Compiled c = compile_corpus("listing1");
    CHECK(c.color.targets.size() == 1);
    CHECK(c.color.deviation.size() == 1);
    CHECK(c.instr.plan_count == 1);
    CHECK(c.compile_ms >= 0);
}

TEST_CASE("compile colors the icall site through points-to feedback") {
    Compiled c = compile_corpus("fig2_icall");
    int fn_main = c.program->function_index.at("main");
    int docall = c.program->functions[fn_main].block_of("docall");
    CHECK(c.color.is_colored({fn_main, docall}));
    REQUIRE(c.spec.feedback_lines.size() == 1);
    CHECK(c.spec.feedback_lines[0].line == 8);
}

TEST_CASE("missing inputs surface as stage errors") {
    CHECK_THROWS_WITH_AS(compile_files("/nonexistent/prog.ir", "/nonexistent/targets.txt"),
                         doctest::Contains("file not found"), Error);
    // targets file specifically
    try {
        compile_files(testutil::corpus_file("listing1", "prog.ir"), "/nonexistent/targets.txt");
        FAIL("expected Error");
    } catch (const Error& e) {
        CHECK(e.stage == "targets");
        CHECK(std::string(e.what()).find("file not found") != std::string::npos);
    }
}

TEST_CASE("vacuous targets abort the compile") {
    CHECK_THROWS_AS(compile_pipeline(testutil::slurp(testutil::corpus_file("listing1", "prog.ir")),
                                     "elsewhere.c:1\n"),
                    Error);
}

TEST_CASE("campaigns satisfy their corpus expectations") {
    for (const auto& name : testutil::corpus_cases()) {
        CAPTURE(name);
        Compiled c = compile_corpus(name);
        RunReport r = run_campaign(c, corpus_opts(name));
        auto expectations =
            testutil::parse_expected(testutil::slurp(testutil::corpus_file(name, "expected.txt")));
        REQUIRE_FALSE(expectations.empty());
        for (const auto& e : expectations) {
            CAPTURE(e.key);
            CHECK(testutil::expectation_holds(e, r));
        }
        // structural report invariants
        CHECK(r.executions == r.runs.size());
        CHECK(r.early_terminations <= r.executions);
        if (r.reached) {
            REQUIRE(r.ttr_ms.has_value());
            CHECK(r.tet_ms <= *r.ttr_ms);
        }
    }
}

TEST_CASE("seeds lexicographically first in the directory run first") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "colorgo_seed_order";
    fs::create_directories(dir);
    {
        std::ofstream(dir / "b_second", std::ios::binary) << "\x01";
        std::ofstream(dir / "a_first", std::ios::binary) << "\x02";
    }
    Compiled c = compile_corpus("unsat_path");
    CampaignOptions o;
    o.seed_dir = dir.string();
    RunReport r = run_campaign(c, o);
    REQUIRE(r.runs.size() == 2);
    CHECK(r.runs[0].seed_hash == fnv1a(std::vector<uint8_t>{2}));
    CHECK(r.runs[1].seed_hash == fnv1a(std::vector<uint8_t>{1}));
    fs::remove_all(dir);
}

TEST_CASE("an empty seed is synthesized when no directory is given") {
    Compiled c = compile_corpus("fig4a_interproc");
    CampaignOptions o; // no seed_dir
    RunReport r = run_campaign(c, o);
    CHECK(r.executions == 1);
    CHECK(r.runs[0].seed_len == 0);
}

TEST_CASE("generated seeds run immediately (LIFO discipline)") {
    Compiled c = compile_corpus("chain_calls");
    RunReport r = run_campaign(c, corpus_opts("chain_calls"));
    REQUIRE(r.reached);
    REQUIRE(r.runs.size() == 3);
    // every follow-up execution consumes the seed produced by the previous one
    CHECK(r.runs[1].parent == r.runs[0].seed_id);
    CHECK(r.runs[2].parent == r.runs[1].seed_id);
}

TEST_CASE("no byte content executes twice in a campaign") {
    for (const auto& name : testutil::corpus_cases()) {
        Compiled c = compile_corpus(name);
        CampaignOptions o = corpus_opts(name);
        o.strategy = SearchStrategy::Dfs; // dfs generates the most duplicates
        RunReport r = run_campaign(c, o);
        std::set<std::pair<uint64_t, size_t>> seen;
        for (const auto& rec : r.runs)
            CHECK(seen.insert({rec.seed_hash, rec.seed_len}).second);
    }
}

TEST_CASE("campaign honors the execution budget") {
    Compiled c = compile_corpus("unsat_path");
    CampaignOptions o = corpus_opts("unsat_path");
    o.max_execs = 2;
    RunReport r = run_campaign(c, o);
    CHECK(r.executions == 2);
}

TEST_CASE("prune proposals from stale snapshots are skipped, not fatal") {
    Compiled c = compile_corpus("unsat_path");
    RunReport r = run_campaign(c, corpus_opts("unsat_path"));
    CHECK(r.pruned_edges == 1);
}

TEST_CASE("no-prune mode leaves the color map untouched") {
    Compiled c = compile_corpus("unsat_path");
    CampaignOptions o = corpus_opts("unsat_path");
    o.no_prune = true;
    RunReport r = run_campaign(c, o);
    CHECK(r.pruned_edges == 0);
    CHECK(c.color.pruned_edges.empty());
    // without pruning every run deviates and re-solves the same unsat goal
    CHECK(r.solves == r.executions);
}

TEST_CASE("report round-trips through the parser") {
    Compiled c = compile_corpus("listing1");
    RunReport r = run_campaign(c, corpus_opts("listing1"));
    std::string json = report_to_json(r);
    RunReport back = parse_report(json);
    CHECK(report_to_json(back) == json);
    CHECK(back.reached == r.reached);
    CHECK(back.executions == r.executions);
    CHECK(back.runs.size() == r.runs.size());
    CHECK(back.mean_solve_us.has_value() == r.mean_solve_us.has_value());
}

TEST_CASE("mean solve time is null when nothing was solved") {
    Compiled c = compile_corpus("fig4a_interproc");
    RunReport r = run_campaign(c, corpus_opts("fig4a_interproc"));
    CHECK(r.solves == 0);
    CHECK_FALSE(r.mean_solve_us.has_value());
    std::string json = report_to_json(r);
    CHECK(json.find("\"mean_solve_us\": null") != std::string::npos);
}

TEST_CASE("campaigns are deterministic modulo timing fields") {
    for (const auto& name : testutil::corpus_cases()) {
        CAPTURE(name);
        Compiled c1 = compile_corpus(name);
        RunReport r1 = run_campaign(c1, corpus_opts(name));
        Compiled c2 = compile_corpus(name);
        RunReport r2 = run_campaign(c2, corpus_opts(name));
        CHECK(scrub_report_timings(report_to_json(r1)) == scrub_report_timings(report_to_json(r2)));
    }
}

TEST_CASE("overhead measurement emits a ratio") {
    Compiled c = compile_corpus("listing2_loop");
    CampaignOptions o = corpus_opts("listing2_loop");
    o.measure_overhead = true;
    RunReport r = run_campaign(c, o);
    REQUIRE(r.overhead_ratio.has_value());
    CHECK(*r.overhead_ratio > 0);
}

TEST_CASE("emit-smt writes one verifiable script per solve") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "colorgo_smt_out";
    fs::remove_all(dir);
    Compiled c = compile_corpus("switch_two_colored");
    CampaignOptions o = corpus_opts("switch_two_colored");
    o.emit_smt_dir = dir.string();
    RunReport r = run_campaign(c, o);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        files.push_back(e.path());
    CHECK(files.size() == r.solves);
    for (const auto& f : files) {
        std::string err;
        std::string label = f.string() + ": " + err;
        CHECK_MESSAGE(testutil::check_smtlib_syntax(testutil::slurp(f.string()), &err), label);
        CHECK(f.filename().string().find("site") == 0);
        CHECK(f.filename().string().find(".smt2") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("points-to soundness: observed icall targets lie in the static sets") {
    namespace fs = std::filesystem;
    for (const auto& name : testutil::corpus_cases()) {
        Compiled c = compile_corpus(name);
        for (const auto& e : fs::directory_iterator(testutil::corpus_dir() + "/" + name + "/seeds")) {
            std::string raw = testutil::slurp(e.path().string());
            std::vector<uint8_t> seed(raw.begin(), raw.end());
            ExecOutcome out = execute(c.instr, c.icfg, seed, c.color, {});
            for (const auto& obs : out.icalls) {
                const std::vector<int>* cands =
                    c.pts.candidates_for(obs.node.fn, obs.node.block, obs.instr);
                REQUIRE(cands != nullptr);
                CHECK(std::find(cands->begin(), cands->end(), obs.callee) != cands->end());
            }
        }
    }
}

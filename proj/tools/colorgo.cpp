// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
//
// colorgo — directed concolic execution on mini-IR programs.
//
//   colorgo compile PROG.ir --targets T.txt [--dot OUT.dot] [--dump-checks] [--dump-pts]
//   colorgo run PROG.ir --targets T.txt --seeds DIR --strategy fdfs --report OUT [flags]
//
// Exit codes: 0 target reached, 1 not reached, 2 usage or compile error.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "colorgo/driver.hpp"
#include "colorgo/version.hpp"

namespace {

struct CommonArgs {
    std::string ir_path;
    std::string targets_path;
};

int do_compile(const CommonArgs& common, const std::string& dot_path, bool dump_checks_flag,
               bool dump_pts_flag) {
    colorgo::Compiled c = colorgo::compile_files(common.ir_path, common.targets_path);
    for (const auto& w : c.warnings)
        std::cerr << "warning: " << w << "\n";
    std::cout << "functions: " << c.program->functions.size() << "\n"
              << "colored nodes: " << c.color.colored.size() << "\n"
              << "targets: " << c.color.targets.size() << "\n"
              << "deviation nodes: " << c.color.deviation.size() << "\n"
              << "check sites: " << c.instr.plan_count << "\n"
              << "compile ms: " << c.compile_ms << "\n";
    if (!dot_path.empty()) {
        std::ofstream f(dot_path, std::ios::binary);
        if (!f) {
            std::cerr << "error: cannot write " << dot_path << "\n";
            return 2;
        }
        f << colorgo::export_dot(c.color, c.icfg);
    }
    if (dump_checks_flag)
        std::cout << colorgo::dump_checks(c.instr, c.icfg);
    if (dump_pts_flag)
        std::cout << colorgo::dump_points_to(*c.program, c.pts);
    return 0;
}

int do_run(const CommonArgs& common, const colorgo::CampaignOptions& opts,
           const std::string& report_path, const std::string& dot_path) {
    colorgo::Compiled c = colorgo::compile_files(common.ir_path, common.targets_path);
    for (const auto& w : c.warnings)
        std::cerr << "warning: " << w << "\n";
    colorgo::RunReport r = colorgo::run_campaign(c, opts);
    if (!report_path.empty())
        colorgo::emit_report(r, report_path);
    else
        std::cout << colorgo::report_to_json(r);
    if (!dot_path.empty()) {
        std::ofstream f(dot_path, std::ios::binary);
        f << colorgo::export_dot(c.color, c.icfg);
    }
    std::cerr << (r.reached ? "reached " + r.target_hit : "target not reached") << " after "
              << r.executions << " executions, " << r.solves << " solves\n";
    return r.reached ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(colorgo::kToolName) + " " + colorgo::kToolVersion +
                 " — directed concolic execution for mini-IR"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string dot_path;
    bool dump_checks_flag = false;
    bool dump_pts_flag = false;

    CLI::App* cmd_compile = app.add_subcommand("compile", "color and instrument a program");
    cmd_compile->add_option("prog", common.ir_path, "mini-IR source file")->required();
    cmd_compile->add_option("--targets", common.targets_path, "target spec file")->required();
    cmd_compile->add_option("--dot", dot_path, "write the colored iCFG as DOT");
    cmd_compile->add_flag("--dump-checks", dump_checks_flag, "print the planned check sites");
    cmd_compile->add_flag("--dump-pts", dump_pts_flag, "print icall points-to candidates");

    colorgo::CampaignOptions opts;
    std::string report_path;
    std::string run_dot_path;
    std::string strategy = "fdfs";
    bool no_early_term = false;
    double time_budget_s = 60.0;

    CLI::App* cmd_run = app.add_subcommand("run", "run a directed campaign");
    cmd_run->add_option("prog", common.ir_path, "mini-IR source file")->required();
    cmd_run->add_option("--targets", common.targets_path, "target spec file")->required();
    cmd_run->add_option("--seeds", opts.seed_dir, "initial seed directory");
    cmd_run->add_option("--strategy", strategy, "fdfs or dfs")->check(CLI::IsMember({"fdfs", "dfs"}));
    cmd_run->add_option("--report", report_path, "write the run report (JSON) here");
    cmd_run->add_option("--emit-smt", opts.emit_smt_dir, "write one SMT-LIB2 file per solve");
    cmd_run->add_flag("--no-early-term", no_early_term, "disable early termination");
    cmd_run->add_flag("--no-prune", opts.no_prune, "disable dynamic coloration");
    cmd_run->add_flag("--record-only", opts.record_only, "record conditions, never solve or stop");
    cmd_run->add_flag("--conservative-pruning", opts.conservative_pruning,
                      "prune per (edge, path prefix) instead of globally");
    cmd_run->add_flag("--measure-overhead", opts.measure_overhead,
                      "measure instrumented vs plain interpretation time");
    cmd_run->add_flag("--debug-checks", opts.debug_checks,
                      "assert shadow/concrete agreement while executing");
    cmd_run->add_option("--max-execs", opts.max_execs, "execution budget");
    cmd_run->add_option("--time-budget", time_budget_s, "wall-clock budget in seconds");
    cmd_run->add_option("--instr-budget", opts.instr_budget, "per-execution instruction budget");
    cmd_run->add_option("--solver-timeout", opts.solver_timeout_ms, "per-solve timeout in ms");
    cmd_run->add_option("--dot", run_dot_path, "write the final colored iCFG as DOT");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cmd_compile->parsed())
            return do_compile(common, dot_path, dump_checks_flag, dump_pts_flag);
        opts.strategy = strategy == "dfs" ? colorgo::SearchStrategy::Dfs
                                          : colorgo::SearchStrategy::Fdfs;
        opts.early_term = !no_early_term;
        opts.time_budget_ms = time_budget_s * 1000.0;
        return do_run(common, opts, report_path, run_dot_path);
    } catch (const colorgo::Error& e) {
        std::cerr << "error";
        if (!e.stage.empty())
            std::cerr << " [" << e.stage << "]";
        std::cerr << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "colorgo/color.hpp"
#include "colorgo/instrument.hpp"
#include "colorgo/solver.hpp"

namespace colorgo {

enum class ExecStatus { TargetReached, EarlyTerminated, RanToExit, Aborted, BudgetExceeded };
const char* exec_status_name(ExecStatus s);

enum class SearchStrategy { Fdfs, Dfs };

struct ExecOptions {
    SearchStrategy strategy = SearchStrategy::Fdfs;
    bool early_term = true;    // false: --no-early-term ablation
    bool record_only = false;  // checks record but never solve or terminate
    bool plain = false;        // uninstrumented interpretation: no shadow, no checks
    bool conservative_pruning = false;
    uint64_t instr_budget = 1'000'000;
    int solver_timeout_ms = 100;
    bool collect_smt = false;  // keep SMT-LIB text per solve in the outcome
    bool debug_checks = false; // assert shadow/concrete and path-constraint agreement
};

struct NewInput {
    std::vector<uint8_t> bytes;
    int origin_site = -1;
    int origin_edge = -1;
};

struct PruneProposal {
    int edge_id = -1;
    uint64_t prefix_hash = 0;
};

struct IcallObs {
    NodeRef node;
    int instr = -1;
    int callee = -1;
};

struct SmtEmission {
    int site_id = -1;
    std::string text;
};

struct ExecOutcome {
    ExecStatus status = ExecStatus::RanToExit;
    std::optional<NodeRef> reached_target;
    std::vector<NodeRef> visited;   // block trace, call frames included
    std::vector<int> edge_trace;    // intra edge ids taken, in order
    std::vector<NewInput> new_inputs;
    std::vector<PruneProposal> prunes;
    int solves = 0;
    std::vector<double> solve_us;
    uint64_t instructions = 0;
    std::optional<NodeRef> fault_node;
    std::string fault; // Aborted: "abort" or a runtime fault description
    uint32_t exit_value = 0;
    std::vector<IcallObs> icalls;
    std::vector<SmtEmission> smt;
    std::vector<std::string> warnings;
    uint64_t max_input_ref = 0; // highest input byte index read
};

// Concretely interprets the program with symbolic shadow propagation,
// applying the check logic at every planned site against the given ColorMap
// snapshot. Visiting a target node stops the run with TargetReached in every
// mode. Runtime faults (division by zero, out-of-bounds memory, bad indirect
// call) yield Aborted with the faulting node.
ExecOutcome execute(const Instrumented& ip, const Icfg& icfg, std::span<const uint8_t> input,
                    const ColorMap& cm, const ExecOptions& opts = {});

} // namespace colorgo

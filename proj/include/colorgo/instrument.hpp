// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "colorgo/cfg.hpp"
#include "colorgo/color.hpp"

namespace colorgo {

// One successor of a checked branch/switch site. `colored_at_compile` is the
// snapshot taken when the check was planned; the executor re-derives the
// effective color from its own ColorMap snapshot so runtime pruning applies.
struct SuccInfo {
    int edge_id = -1;
    NodeRef to;
    bool colored_at_compile = false;
    EdgeKind kind = EdgeKind::Uncond;
    uint32_t case_value = 0; // Case only
};

struct CheckPlan {
    int site_id = -1;
    NodeRef node;
    bool is_switch = false;
    std::vector<SuccInfo> succs; // br_cond: [true, false]; switch: cases then default
    std::vector<uint32_t> case_values; // switch case constants, site order
};

// The compiled artifact the executor runs: the unmodified program plus the
// per-site check plans. Checks are side-channel metadata; concrete semantics
// are untouched.
struct Instrumented {
    std::shared_ptr<const Program> program;
    std::map<NodeRef, CheckPlan> plans;
    int plan_count = 0;
};

// Plans one check per br_cond/switch in every function with a non-empty
// colored set; functions with empty colored sets get none.
Instrumented instrument(std::shared_ptr<const Program> prog, const ColorMap& cm, const Icfg& icfg);

// Human-readable listing of all check plans, for --dump-checks.
std::string dump_checks(const Instrumented& ip, const Icfg& icfg);

} // namespace colorgo

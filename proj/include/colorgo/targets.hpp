// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "colorgo/ir.hpp"

namespace colorgo {

// A target specification: source lines to reach plus an optional
// caller-to-callee function chain taken from a crash stack trace.
// `feedback_lines` holds call-site lines added by the points-to feedback
// pass; they seed coloration but are not campaign goals themselves.
struct TargetSpec {
    std::vector<SourceLoc> lines;
    std::vector<std::string> stack_chain; // outermost caller first
    std::vector<SourceLoc> feedback_lines;

    bool empty() const { return lines.empty() && stack_chain.empty(); }
};

// Text format: one FILE:LINE per line; blank lines and lines starting with
// '#' or ';' are skipped; an optional trailing section starts with "stack:"
// followed by one function name per line (caller before callee).
TargetSpec parse_target_spec(std::string_view text);
TargetSpec load_target_spec(const std::string& path);
std::string print_target_spec(const TargetSpec& spec);

// Per-function block labels whose instructions carry a matching SourceLoc.
// Lines that match no instruction are reported in `warnings`.
struct LineTargets {
    std::map<int, std::set<int>> blocks; // function index -> block indices
    std::vector<std::string> warnings;
};
LineTargets resolve_line_targets(const Program& p, const std::vector<SourceLoc>& lines);

} // namespace colorgo

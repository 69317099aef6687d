// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "colorgo/ir.hpp"
#include "colorgo/targets.hpp"

namespace colorgo {

// Abstract variables of the inclusion analysis: function-local registers,
// per-function return values, and the contents of per-site alloca slots.
struct PtsVar {
    enum class Kind { Reg, Ret, Slot };
    Kind kind = Kind::Reg;
    int fn = -1;   // Reg/Ret
    int reg = -1;  // Reg
    int slot = -1; // Slot (alloca site id)
    auto operator<=>(const PtsVar&) const = default;

    static PtsVar make_reg(int fn, int reg) { return {Kind::Reg, fn, reg, -1}; }
    static PtsVar make_ret(int fn) { return {Kind::Ret, fn, -1, -1}; }
    static PtsVar make_slot(int slot) { return {Kind::Slot, -1, -1, slot}; }
};

// Abstract objects: function addresses and alloca slots.
struct PtsObj {
    enum class Kind { Function, Slot };
    Kind kind = Kind::Function;
    int index = -1; // function index or alloca site id
    auto operator<=>(const PtsObj&) const = default;
};

struct PtsConstraint {
    enum class Kind {
        AddrOf, // lhs ⊇ {obj}
        Copy,   // lhs ⊇ rhs
        Load,   // lhs ⊇ *rhs
        Store,  // *lhs ⊇ rhs
    };
    Kind kind = Kind::AddrOf;
    PtsVar lhs;
    PtsVar rhs;
    PtsObj obj; // AddrOf only
    auto operator<=>(const PtsConstraint&) const = default;
};

struct IcallSite {
    int ordinal = -1; // dense id, program order
    int fn = -1;
    int block = -1;
    int instr = -1;
    PtsVar fp;                 // the register holding the callee address
    std::vector<PtsVar> args;  // register args only (immediates carry no pointers)
    std::vector<bool> arg_is_reg;
    int arity = 0;
    PtsVar dst;                // valid only if has_dst
    bool has_dst = false;
    std::optional<SourceLoc> loc;
};

// collect_constraints output: the inclusion constraints plus the call-site
// metadata the solver needs for on-the-fly indirect-call expansion.
struct ConstraintSystem {
    std::vector<PtsConstraint> constraints;
    std::vector<IcallSite> icall_sites;
    const Program* prog = nullptr;
};

struct PointsToResult {
    // Candidate functions per abstract variable (slots included for tests).
    std::map<PtsVar, std::set<int>> var_functions;
    // Candidate callee function indices per icall site ordinal, arity-filtered.
    std::vector<std::vector<int>> site_candidates;
    std::vector<IcallSite> sites;
    std::vector<std::string> warnings;

    const std::vector<int>* candidates_for(int fn, int block, int instr) const {
        for (const auto& s : sites)
            if (s.fn == fn && s.block == block && s.instr == instr)
                return &site_candidates[s.ordinal];
        return nullptr;
    }
};

ConstraintSystem collect_constraints(const Program& p);

// Least fixpoint under the inclusion constraints; deterministic. Indirect
// call sites add argument/return copy edges on the fly as their candidate
// sets grow, filtered by arity match.
PointsToResult solve_points_to(const ConstraintSystem& cs);

// Appends to spec.feedback_lines the source line of every icall site whose
// candidate set intersects the target functions (stack-chain entries plus
// owners of target lines). Idempotent. Sites without a SourceLoc produce a
// warning in the result.
TargetSpec feedback_targets(const Program& p, const PointsToResult& pts, const TargetSpec& spec,
                            std::vector<std::string>* warnings = nullptr);

// One "fn.block#instr -> {f, g}" line per icall site, for --dump-pts.
std::string dump_points_to(const Program& p, const PointsToResult& pts);

} // namespace colorgo

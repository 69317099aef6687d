// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "colorgo/sym.hpp"

namespace colorgo {

// One recorded branch condition: the predicate held `observed` when the
// current input passed the site.
struct PcEntry {
    SymExprPtr pred; // width 1
    bool observed = true;
    int site_id = -1;
    int edge_id = -1;
};

struct SolveResult {
    enum class Kind { Sat, Unsat, Unknown };
    Kind kind = Kind::Unknown;
    std::map<uint32_t, uint8_t> model; // byte index -> value; others copy the input
    std::string reason;                // Unknown only

    bool is_sat() const { return kind == Kind::Sat; }
    bool is_unsat() const { return kind == Kind::Unsat; }
};

struct SolverOptions {
    int timeout_ms = 100;
};

// Finds input bytes satisfying every prefix entry at its observed value and
// goal == true. Backends, in order: algebraic inversion of single-variable
// invertible chains (add/sub/xor/shl-by-const/mul-by-odd-const over a concat
// of input bytes), bounded brute force when the goal touches at most two
// distinct bytes, otherwise Unknown. Sat results are verified with eval_expr
// before being returned; an unverifiable candidate degrades to Unknown.
SolveResult solve(std::span<const PcEntry> prefix, const SymExprPtr& goal,
                  std::span<const uint8_t> input, const SolverOptions& opts = {});

// QF_BV script asserting the prefix entries and the goal, one 8-bit constant
// per referenced input byte, ending in (check-sat)(get-model).
std::string export_smtlib(std::span<const PcEntry> prefix, const SymExprPtr& goal);

} // namespace colorgo

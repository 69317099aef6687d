// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#include "colorgo/solver.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

namespace colorgo {

namespace {

using Clock = std::chrono::steady_clock;

// Overlay: the candidate model applied over the executing input, padded with
// zeroes up to the highest referenced byte.
struct Overlay {
    std::vector<uint8_t> bytes;

    Overlay(std::span<const uint8_t> input, uint32_t need) : bytes(input.begin(), input.end()) {
        if (bytes.size() < need)
            bytes.resize(need, 0);
    }
    void apply(const std::map<uint32_t, uint8_t>& model) {
        for (auto [i, v] : model) {
            if (i >= bytes.size())
                bytes.resize(i + 1, 0);
            bytes[i] = v;
        }
    }
};

uint32_t highest_var(std::span<const PcEntry> prefix, const SymExprPtr& goal) {
    std::vector<uint32_t> vars;
    collect_vars(goal, vars);
    uint32_t hi = vars.empty() ? 0 : vars.back() + 1;
    for (const auto& pe : prefix) {
        std::vector<uint32_t> pv;
        collect_vars(pe.pred, pv);
        if (!pv.empty())
            hi = std::max(hi, pv.back() + 1);
    }
    return hi;
}

bool model_satisfies(std::span<const PcEntry> prefix, const SymExprPtr& goal,
                     std::span<const uint8_t> input, const std::map<uint32_t, uint8_t>& model,
                     uint32_t need) {
    Overlay ov(input, need);
    ov.apply(model);
    if (eval_expr(goal, ov.bytes) != 1)
        return false;
    for (const auto& pe : prefix)
        if (eval_expr(pe.pred, ov.bytes) != (pe.observed ? 1u : 0u))
            return false;
    return true;
}

// --- algebraic inversion ------------------------------------------------
//
// Unwinds goal predicates of the form (cmp CHAIN CONST) where CHAIN is a
// single-use stack of invertible operations (add/sub/xor, shl by constant,
// mul by odd constant) over a concat of distinct input bytes. Produces the
// byte assignment making CHAIN == wanted.

uint64_t mul_inverse_odd(uint64_t c, int width) {
    // Newton iteration doubles correct low bits each round.
    uint64_t x = c;
    for (int i = 0; i < 6; ++i)
        x = x * (2 - c * x);
    return mask_width(x, width);
}

// Assigns bytes so `e` evaluates to `want`; false when the shape is not an
// invertible chain or the value is unreachable (e.g. shl low bits set).
bool invert_onto(const SymExprPtr& e, uint64_t want, std::map<uint32_t, uint8_t>& model) {
    want = mask_width(want, e->width);
    switch (e->kind) {
    case SymKind::Var: {
        auto it = model.find(e->var_index);
        if (it != model.end())
            return it->second == want; // the same byte twice: values must agree
        model[e->var_index] = static_cast<uint8_t>(want);
        return true;
    }
    case SymKind::Const:
        return e->value == want;
    case SymKind::Concat: {
        uint64_t lo_mask = mask_width(want, e->b->width);
        uint64_t hi = e->width > e->b->width ? want >> e->b->width : 0;
        return invert_onto(e->b, lo_mask, model) && invert_onto(e->a, hi, model);
    }
    case SymKind::BinOp: {
        bool a_const = e->a->kind == SymKind::Const;
        bool b_const = e->b->kind == SymKind::Const;
        if (a_const == b_const)
            return false; // need exactly one constant side
        const SymExprPtr& sub = a_const ? e->b : e->a;
        uint64_t c = a_const ? e->a->value : e->b->value;
        int w = e->width;
        switch (e->bin_op) {
        case SymBinOp::Add:
            return invert_onto(sub, want - c, model);
        case SymBinOp::Sub:
            // sub - c == want  |  c - sub == want
            return a_const ? invert_onto(sub, c - want, model)
                           : invert_onto(sub, want + c, model);
        case SymBinOp::Xor:
            return invert_onto(sub, want ^ c, model);
        case SymBinOp::Shl: {
            if (a_const)
                return false; // constant shifted by a symbolic amount
            if (c >= static_cast<uint64_t>(w))
                return want == 0 && invert_onto(sub, 0, model);
            if (mask_width(want, static_cast<int>(c)) != 0)
                return false; // low bits of a left shift are always zero
            return invert_onto(sub, want >> c, model);
        }
        case SymBinOp::Mul: {
            if ((c & 1) == 0)
                return false; // even multipliers are not invertible mod 2^w
            return invert_onto(sub, want * mul_inverse_odd(c, w), model);
        }
        default:
            return false;
        }
    }
    default:
        return false;
    }
}

bool cmp_holds(SymCmp op, uint64_t l, uint64_t r, int width) {
    auto sext = [&](uint64_t v) {
        if (width >= 64)
            return static_cast<int64_t>(v);
        uint64_t sign = uint64_t{1} << (width - 1);
        return static_cast<int64_t>((v ^ sign) - sign);
    };
    switch (op) {
    case SymCmp::Eq: return l == r;
    case SymCmp::Ne: return l != r;
    case SymCmp::Ult: return l < r;
    case SymCmp::Ule: return l <= r;
    case SymCmp::Slt: return sext(l) < sext(r);
    case SymCmp::Sle: return sext(l) <= sext(r);
    }
    return false;
}

// Candidate chain values to try for (chain OP const): equality needs the
// constant itself; the other operators get nearby witnesses.
std::vector<uint64_t> wanted_values(SymCmp op, uint64_t c, int width) {
    uint64_t all = mask_width(~uint64_t{0}, width);
    std::vector<uint64_t> raw;
    switch (op) {
    case SymCmp::Eq:
        raw = {c};
        break;
    case SymCmp::Ne:
        raw = {c + 1, c - 1, 0, all};
        break;
    case SymCmp::Ult: // chain < c
        raw = {0, c - 1, c >> 1};
        break;
    case SymCmp::Ule:
        raw = {0, c, c - 1};
        break;
    case SymCmp::Slt:
    case SymCmp::Sle:
        raw = {c, c - 1, 0, uint64_t{1} << (width - 1), all};
        break;
    }
    std::vector<uint64_t> out;
    for (uint64_t v : raw) {
        v = mask_width(v, width);
        if (cmp_holds(op, v, c, width) && std::find(out.begin(), out.end(), v) == out.end())
            out.push_back(v);
    }
    return out;
}

bool try_inversion(std::span<const PcEntry> prefix, const SymExprPtr& goal,
                   std::span<const uint8_t> input, uint32_t need, SolveResult& out) {
    SymExprPtr g = simplify(goal);
    if (g->kind != SymKind::Cmp)
        return false;
    SymExprPtr chain = g->a, konst = g->b;
    SymCmp op = g->cmp_op;
    if (chain->kind == SymKind::Const) {
        // eq/ne are symmetric; mirrored orderings go to brute force instead.
        if (op != SymCmp::Eq && op != SymCmp::Ne)
            return false;
        std::swap(chain, konst);
    }
    if (konst->kind != SymKind::Const)
        return false;
    for (uint64_t v : wanted_values(op, konst->value, chain->width)) {
        std::map<uint32_t, uint8_t> model;
        if (!invert_onto(chain, v, model))
            continue;
        if (model_satisfies(prefix, goal, input, model, need)) {
            out.kind = SolveResult::Kind::Sat;
            out.model = std::move(model);
            return true;
        }
    }
    return false;
}

} // namespace

SolveResult solve(std::span<const PcEntry> prefix, const SymExprPtr& goal,
                  std::span<const uint8_t> input, const SolverOptions& opts) {
    SolveResult res;
    if (!goal || goal->width != 1) {
        res.kind = SolveResult::Kind::Unknown;
        res.reason = "goal is not a width-1 predicate";
        return res;
    }
    auto deadline = Clock::now() + std::chrono::milliseconds(opts.timeout_ms);
    uint32_t need = highest_var(prefix, goal);

    // Constant goals decide immediately.
    SymExprPtr g = simplify(goal);
    if (g->kind == SymKind::Const) {
        if (g->value == 1) {
            // Feasible with the current bytes themselves if the prefix holds.
            std::map<uint32_t, uint8_t> empty;
            if (model_satisfies(prefix, goal, input, empty, need)) {
                res.kind = SolveResult::Kind::Sat;
                return res;
            }
            res.kind = SolveResult::Kind::Unknown;
            res.reason = "constant-true goal under an unsatisfied prefix";
            return res;
        }
        res.kind = SolveResult::Kind::Unsat;
        return res;
    }

    if (try_inversion(prefix, g, input, need, res))
        return res;

    // Bounded brute force over the goal's support.
    std::vector<uint32_t> support;
    collect_vars(g, support);
    if (support.empty()) {
        res.kind = SolveResult::Kind::Unknown;
        res.reason = "no input bytes in goal";
        return res;
    }
    if (support.size() > 2) {
        res.kind = SolveResult::Kind::Unknown;
        res.reason = "goal support exceeds brute-force bound (" + std::to_string(support.size()) +
                     " bytes)";
        return res;
    }

    uint64_t limit = support.size() == 1 ? 256 : 65536;
    for (uint64_t v = 0; v < limit; ++v) {
        if ((v & 1023) == 0 && Clock::now() > deadline) {
            res.kind = SolveResult::Kind::Unknown;
            res.reason = "solver timeout";
            return res;
        }
        std::map<uint32_t, uint8_t> model;
        model[support[0]] = static_cast<uint8_t>(v & 0xFF);
        if (support.size() == 2)
            model[support[1]] = static_cast<uint8_t>(v >> 8);
        if (model_satisfies(prefix, g, input, model, need)) {
            if (!model_satisfies(prefix, goal, input, model, need))
                continue; // simplification mismatch; never report an unverified model
            res.kind = SolveResult::Kind::Sat;
            res.model = std::move(model);
            return res;
        }
    }
    res.kind = SolveResult::Kind::Unsat;
    return res;
}

namespace {

void smt_expr(std::ostream& os, const SymExprPtr& e) {
    switch (e->kind) {
    case SymKind::Var:
        os << "b" << e->var_index;
        break;
    case SymKind::Const:
        os << "(_ bv" << e->value << " " << e->width << ")";
        break;
    case SymKind::BinOp: {
        const char* names[] = {"bvadd", "bvsub", "bvmul", "bvudiv", "bvand", "bvor",
                               "bvxor", "bvshl", "bvlshr"};
        os << "(" << names[static_cast<int>(e->bin_op)] << " ";
        smt_expr(os, e->a);
        os << " ";
        smt_expr(os, e->b);
        os << ")";
        break;
    }
    case SymKind::Cmp: {
        // comparisons stay in bitvector sort: (ite pred #b1 #b0)
        const char* names[] = {"=", "distinct", "bvult", "bvule", "bvslt", "bvsle"};
        os << "(ite (" << names[static_cast<int>(e->cmp_op)] << " ";
        smt_expr(os, e->a);
        os << " ";
        smt_expr(os, e->b);
        os << ") #b1 #b0)";
        break;
    }
    case SymKind::Ite:
        os << "(ite (= ";
        smt_expr(os, e->a);
        os << " #b1) ";
        smt_expr(os, e->b);
        os << " ";
        smt_expr(os, e->c);
        os << ")";
        break;
    case SymKind::Concat:
        os << "(concat ";
        smt_expr(os, e->a);
        os << " ";
        smt_expr(os, e->b);
        os << ")";
        break;
    case SymKind::Extract:
        os << "((_ extract " << e->hi_bit << " " << e->lo_bit << ") ";
        smt_expr(os, e->a);
        os << ")";
        break;
    }
}

} // namespace

std::string export_smtlib(std::span<const PcEntry> prefix, const SymExprPtr& goal) {
    std::ostringstream os;
    os << "(set-logic QF_BV)\n";
    std::vector<uint32_t> vars;
    collect_vars(goal, vars);
    for (const auto& pe : prefix) {
        std::vector<uint32_t> pv;
        collect_vars(pe.pred, pv);
        vars.insert(vars.end(), pv.begin(), pv.end());
    }
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    for (uint32_t v : vars)
        os << "(declare-const b" << v << " (_ BitVec 8))\n";
    for (const auto& pe : prefix) {
        os << "(assert (= ";
        smt_expr(os, pe.pred);
        os << (pe.observed ? " #b1" : " #b0") << "))\n";
    }
    os << "(assert (= ";
    smt_expr(os, goal);
    os << " #b1))\n";
    os << "(check-sat)\n(get-model)\n";
    return os.str();
}

} // namespace colorgo

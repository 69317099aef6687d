// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "colorgo/ir.hpp"

namespace colorgo {

enum class SymKind { Var, Const, BinOp, Cmp, Ite, Concat, Extract };
enum class SymBinOp { Add, Sub, Mul, UDiv, And, Or, Xor, Shl, LShr };
enum class SymCmp { Eq, Ne, Ult, Ule, Slt, Sle };

struct SymExpr;
using SymExprPtr = std::shared_ptr<const SymExpr>;

// Immutable bitvector expression over input bytes. Var is always 8 bits wide;
// Cmp yields width 1; widths up to 64 are supported (Concat of word parts
// produces intermediate widths).
struct SymExpr {
    SymKind kind;
    int width;
    uint32_t var_index = 0;  // Var
    uint64_t value = 0;      // Const, masked to width
    SymBinOp bin_op = SymBinOp::Add;
    SymCmp cmp_op = SymCmp::Eq;
    SymExprPtr a, b, c;      // BinOp/Cmp/Concat: a,b; Ite: cond=a, then=b, else=c
    int hi_bit = 0, lo_bit = 0; // Extract
};

uint64_t mask_width(uint64_t v, int width);

SymExprPtr sym_var(uint32_t byte_index);
SymExprPtr sym_const(uint64_t value, int width);
SymExprPtr sym_binop(SymBinOp op, SymExprPtr l, SymExprPtr r); // throws on width mismatch
SymExprPtr sym_cmp(SymCmp op, SymExprPtr l, SymExprPtr r);     // throws on width mismatch
SymExprPtr sym_ite(SymExprPtr cond, SymExprPtr t, SymExprPtr e);
SymExprPtr sym_concat(SymExprPtr hi, SymExprPtr lo);
SymExprPtr sym_extract(SymExprPtr e, int hi_bit, int lo_bit);
SymExprPtr sym_zext(SymExprPtr e, int width); // Concat with a zero Const
SymExprPtr sym_not(SymExprPtr pred);          // width-1 negation
SymExprPtr sym_and1(SymExprPtr l, SymExprPtr r);

bool sym_equal(const SymExprPtr& a, const SymExprPtr& b); // structural

// Standard bitvector semantics; udiv by zero yields all-ones (SMT-LIB
// convention). Throws Error on a Var index past the end of `input`.
uint64_t eval_expr(const SymExprPtr& e, std::span<const uint8_t> input);

// Sound rewriting: constant folding, arithmetic identities, zero-extension
// compare narrowing, Ite collapsing. eval(simplify(e)) == eval(e) always.
SymExprPtr simplify(const SymExprPtr& e);

// Prefix textual form, e.g. "(eq (concat b1 b0) #5:16)".
std::string to_prefix_string(const SymExprPtr& e);

void collect_vars(const SymExprPtr& e, std::vector<uint32_t>& out); // sorted, deduped

// Symbolic counterpart of a binary operation over two register values.
// Returns null when both operands are concrete. The concrete side is lifted
// to a Const; the result is constant-folded where possible.
SymExprPtr shadow_binop(SymBinOp op, uint32_t lhs_val, const SymExprPtr& lhs_shadow,
                        uint32_t rhs_val, const SymExprPtr& rhs_shadow, int width);
SymExprPtr shadow_icmp(SymCmp op, uint32_t lhs_val, const SymExprPtr& lhs_shadow,
                       uint32_t rhs_val, const SymExprPtr& rhs_shadow, int width);

// Per-execution shadow state: one register map per call frame plus a sparse
// byte-granular memory shadow. A missing entry means fully concrete.
struct ShadowState {
    struct Frame {
        std::vector<SymExprPtr> regs; // sized to the function's register count
        SymExprPtr ret;
    };
    std::vector<Frame> frames;
    std::unordered_map<uint32_t, SymExprPtr> memory;

    Frame& top() { return frames.back(); }
};

} // namespace colorgo

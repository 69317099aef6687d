// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "colorgo/sym.hpp"
#include "support/testutil.hpp"

using namespace colorgo;

namespace {

SymExprPtr word_le(uint32_t offset) {
    SymExprPtr e = sym_var(offset);
    for (uint32_t i = 1; i < 4; ++i)
        e = sym_concat(sym_var(offset + i), e);
    return e;
}

// Random expression tree over a fixed byte universe, for simplifier and
// round-trip soundness sweeps.
SymExprPtr random_expr(std::mt19937& rng, int depth, int width) {
    std::uniform_int_distribution<int> kind_d(0, 6);
    std::uniform_int_distribution<int> byte_d(0, 5);
    std::uniform_int_distribution<uint64_t> val_d(0, ~uint64_t{0});
    if (depth == 0 || kind_d(rng) == 0) {
        if (width == 8 && kind_d(rng) < 4)
            return sym_var(static_cast<uint32_t>(byte_d(rng)));
        return sym_const(val_d(rng), width);
    }
    switch (kind_d(rng)) {
    case 1: {
        std::uniform_int_distribution<int> op_d(0, 8);
        return sym_binop(static_cast<SymBinOp>(op_d(rng)), random_expr(rng, depth - 1, width),
                         random_expr(rng, depth - 1, width));
    }
    case 2: {
        if (width != 1)
            break;
        std::uniform_int_distribution<int> op_d(0, 5);
        return sym_cmp(static_cast<SymCmp>(op_d(rng)), random_expr(rng, depth - 1, 8),
                       random_expr(rng, depth - 1, 8));
    }
    case 3:
        return sym_ite(random_expr(rng, depth - 1, 1), random_expr(rng, depth - 1, width),
                       random_expr(rng, depth - 1, width));
    case 4:
        if (width > 8)
            return sym_concat(random_expr(rng, depth - 1, width - 8),
                              random_expr(rng, depth - 1, 8));
        break;
    case 5: {
        int src_w = width + 8;
        std::uniform_int_distribution<int> lo_d(0, src_w - width);
        int lo = lo_d(rng);
        return sym_extract(random_expr(rng, depth - 1, src_w), lo + width - 1, lo);
    }
    default:
        break;
    }
    return sym_const(val_d(rng), width);
}

} // namespace

TEST_CASE("eval of constants and variables") {
    std::vector<uint8_t> input{10, 20, 30};
    CHECK(eval_expr(sym_const(7, 32), input) == 7);
    CHECK(eval_expr(sym_var(1), input) == 20);
    CHECK_THROWS_AS(eval_expr(sym_var(3), input), Error);
}

TEST_CASE("ite with a true condition evaluates the then-arm") {
    std::vector<uint8_t> input{1};
    SymExprPtr e = sym_ite(sym_const(1, 1), sym_const(5, 32), sym_const(9, 32));
    CHECK(eval_expr(e, input) == 5); // folded at construction, same value
}

TEST_CASE("word compare against the decimal constant from its little-endian bytes") {
    // 123456789 = 0x075BCD15, little-endian bytes 15 CD 5B 07
    std::vector<uint8_t> input{0x15, 0xCD, 0x5B, 0x07};
    SymExprPtr pred = sym_cmp(SymCmp::Eq, word_le(0), sym_const(123456789, 32));
    CHECK(eval_expr(pred, input) == 1);
    input[0] ^= 1;
    CHECK(eval_expr(pred, input) == 0);
}

TEST_CASE("shadow_binop lifts the concrete side and folds constants") {
    // both concrete: nothing to track
    CHECK(shadow_binop(SymBinOp::Add, 2, nullptr, 3, nullptr, 32) == nullptr);

    // the 2a+1 shape
    SymExprPtr a = sym_zext(sym_var(0), 32);
    SymExprPtr doubled = shadow_binop(SymBinOp::Mul, 7, a, 2, nullptr, 32);
    REQUIRE(doubled);
    SymExprPtr form = shadow_binop(SymBinOp::Add, 14, doubled, 1, nullptr, 32);
    REQUIRE(form);
    std::vector<uint8_t> input{2};
    CHECK(eval_expr(form, input) == 5);

    // width mismatch is an error
    CHECK_THROWS_AS(sym_binop(SymBinOp::Add, sym_var(0), sym_const(1, 32)), Error);
}

TEST_CASE("xor of identical expressions simplifies to zero and stays sound") {
    SymExprPtr a = sym_zext(sym_var(2), 32);
    SymExprPtr x = sym_binop(SymBinOp::Xor, a, a);
    SymExprPtr s = simplify(x);
    CHECK(s->kind == SymKind::Const);
    CHECK(s->value == 0);
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> byte_d(0, 255);
    for (int i = 0; i < 100; ++i) {
        std::vector<uint8_t> input(6);
        for (auto& b : input)
            b = static_cast<uint8_t>(byte_d(rng));
        CHECK(eval_expr(x, input) == eval_expr(s, input));
    }
}

TEST_CASE("simplifier narrows zero-extended comparisons") {
    SymExprPtr z = sym_zext(sym_var(0), 32);
    SymExprPtr c = simplify(sym_cmp(SymCmp::Eq, z, sym_const(81, 32)));
    REQUIRE(c->kind == SymKind::Cmp);
    CHECK(c->a->kind == SymKind::Var);
    CHECK(c->b->width == 8);
    // constants too wide for the narrow side decide immediately
    SymExprPtr never = simplify(sym_cmp(SymCmp::Eq, z, sym_const(0x1234, 32)));
    CHECK(never->kind == SymKind::Const);
    CHECK(never->value == 0);
}

TEST_CASE("boolean-against-constant collapses to the predicate") {
    SymExprPtr inner = sym_cmp(SymCmp::Eq, sym_var(0), sym_const(7, 8));
    SymExprPtr wrapped = sym_cmp(SymCmp::Ne, sym_zext(inner, 32), sym_const(0, 32));
    SymExprPtr s = simplify(wrapped);
    CHECK(sym_equal(s, inner));
}

TEST_CASE("negation stays within the comparison operator set") {
    SymExprPtr l = sym_var(0), r = sym_var(1);
    std::vector<uint8_t> input{3, 9};
    for (SymCmp op : {SymCmp::Eq, SymCmp::Ne, SymCmp::Ult, SymCmp::Ule, SymCmp::Slt, SymCmp::Sle}) {
        SymExprPtr p = sym_cmp(op, l, r);
        SymExprPtr n = sym_not(p);
        CHECK(eval_expr(n, input) == (1 - eval_expr(p, input)));
    }
}

TEST_CASE("simplify preserves evaluation on random expressions") {
    std::mt19937 rng(20240818);
    std::uniform_int_distribution<int> byte_d(0, 255);
    int width_pool[] = {1, 8, 16, 32};
    for (int i = 0; i < 300; ++i) {
        int width = width_pool[i % 4];
        SymExprPtr e = random_expr(rng, 4, width);
        SymExprPtr s = simplify(e);
        for (int m = 0; m < 20; ++m) {
            std::vector<uint8_t> input(6);
            for (auto& b : input)
                b = static_cast<uint8_t>(byte_d(rng));
            CHECK(eval_expr(e, input) == eval_expr(s, input));
        }
    }
}

TEST_CASE("udiv by zero follows the all-ones convention") {
    SymExprPtr e = sym_binop(SymBinOp::UDiv, sym_zext(sym_var(0), 32), sym_const(0, 32));
    std::vector<uint8_t> input{9};
    CHECK(eval_expr(e, input) == 0xFFFFFFFFu);
}

TEST_CASE("shift semantics saturate at width") {
    SymExprPtr big = sym_binop(SymBinOp::Shl, sym_zext(sym_var(0), 32), sym_const(40, 32));
    std::vector<uint8_t> input{0xFF};
    CHECK(eval_expr(big, input) == 0);
}

TEST_CASE("prefix dump is stable") {
    SymExprPtr e = sym_cmp(SymCmp::Eq, sym_concat(sym_var(1), sym_var(0)), sym_const(513, 16));
    CHECK(to_prefix_string(e) == "(eq (concat b1 b0) #513:16)");
}

TEST_CASE("collect_vars sorts and dedupes") {
    SymExprPtr e = sym_binop(SymBinOp::Add, sym_zext(sym_var(3), 32),
                             sym_binop(SymBinOp::Xor, sym_zext(sym_var(0), 32),
                                       sym_zext(sym_var(3), 32)));
    std::vector<uint32_t> vars;
    collect_vars(e, vars);
    CHECK(vars == std::vector<uint32_t>{0, 3});
}

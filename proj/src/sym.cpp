// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#include "colorgo/sym.hpp"

#include <algorithm>
#include <sstream>

namespace colorgo {

uint64_t mask_width(uint64_t v, int width) {
    return width >= 64 ? v : (v & ((uint64_t{1} << width) - 1));
}

namespace {

SymExprPtr make(SymExpr e) { return std::make_shared<const SymExpr>(std::move(e)); }

int64_t sext(uint64_t v, int width) {
    if (width >= 64)
        return static_cast<int64_t>(v);
    uint64_t sign = uint64_t{1} << (width - 1);
    return static_cast<int64_t>((v ^ sign) - sign);
}

uint64_t eval_binop(SymBinOp op, uint64_t l, uint64_t r, int width) {
    switch (op) {
    case SymBinOp::Add: return mask_width(l + r, width);
    case SymBinOp::Sub: return mask_width(l - r, width);
    case SymBinOp::Mul: return mask_width(l * r, width);
    case SymBinOp::UDiv: return r == 0 ? mask_width(~uint64_t{0}, width) : mask_width(l / r, width);
    case SymBinOp::And: return l & r;
    case SymBinOp::Or: return l | r;
    case SymBinOp::Xor: return l ^ r;
    case SymBinOp::Shl: return r >= static_cast<uint64_t>(width) ? 0 : mask_width(l << r, width);
    case SymBinOp::LShr: return r >= static_cast<uint64_t>(width) ? 0 : (l >> r);
    }
    return 0;
}

uint64_t eval_cmp(SymCmp op, uint64_t l, uint64_t r, int width) {
    switch (op) {
    case SymCmp::Eq: return l == r;
    case SymCmp::Ne: return l != r;
    case SymCmp::Ult: return l < r;
    case SymCmp::Ule: return l <= r;
    case SymCmp::Slt: return sext(l, width) < sext(r, width);
    case SymCmp::Sle: return sext(l, width) <= sext(r, width);
    }
    return 0;
}

bool is_const(const SymExprPtr& e) { return e && e->kind == SymKind::Const; }

} // namespace

SymExprPtr sym_var(uint32_t byte_index) {
    SymExpr e;
    e.kind = SymKind::Var;
    e.width = 8;
    e.var_index = byte_index;
    return make(std::move(e));
}

SymExprPtr sym_const(uint64_t value, int width) {
    if (width < 1 || width > 64)
        throw Error("const width out of range: " + std::to_string(width), "sym");
    SymExpr e;
    e.kind = SymKind::Const;
    e.width = width;
    e.value = mask_width(value, width);
    return make(std::move(e));
}

SymExprPtr sym_binop(SymBinOp op, SymExprPtr l, SymExprPtr r) {
    if (!l || !r)
        throw Error("binop over null expression", "sym");
    if (l->width != r->width)
        throw Error("binop width mismatch: " + std::to_string(l->width) + " vs " +
                        std::to_string(r->width),
                    "sym");
    if (is_const(l) && is_const(r))
        return sym_const(eval_binop(op, l->value, r->value, l->width), l->width);
    SymExpr e;
    e.kind = SymKind::BinOp;
    e.width = l->width;
    e.bin_op = op;
    e.a = std::move(l);
    e.b = std::move(r);
    return make(std::move(e));
}

SymExprPtr sym_cmp(SymCmp op, SymExprPtr l, SymExprPtr r) {
    if (!l || !r)
        throw Error("cmp over null expression", "sym");
    if (l->width != r->width)
        throw Error("cmp width mismatch: " + std::to_string(l->width) + " vs " +
                        std::to_string(r->width),
                    "sym");
    if (is_const(l) && is_const(r))
        return sym_const(eval_cmp(op, l->value, r->value, l->width), 1);
    SymExpr e;
    e.kind = SymKind::Cmp;
    e.width = 1;
    e.cmp_op = op;
    e.a = std::move(l);
    e.b = std::move(r);
    return make(std::move(e));
}

SymExprPtr sym_ite(SymExprPtr cond, SymExprPtr t, SymExprPtr f) {
    if (!cond || cond->width != 1)
        throw Error("ite condition must have width 1", "sym");
    if (!t || !f || t->width != f->width)
        throw Error("ite arm width mismatch", "sym");
    if (is_const(cond))
        return cond->value ? t : f;
    SymExpr e;
    e.kind = SymKind::Ite;
    e.width = t->width;
    e.a = std::move(cond);
    e.b = std::move(t);
    e.c = std::move(f);
    return make(std::move(e));
}

SymExprPtr sym_concat(SymExprPtr hi, SymExprPtr lo) {
    if (!hi || !lo)
        throw Error("concat over null expression", "sym");
    if (hi->width + lo->width > 64)
        throw Error("concat width exceeds 64", "sym");
    if (is_const(hi) && is_const(lo))
        return sym_const((hi->value << lo->width) | lo->value, hi->width + lo->width);
    SymExpr e;
    e.kind = SymKind::Concat;
    e.width = hi->width + lo->width;
    e.a = std::move(hi);
    e.b = std::move(lo);
    return make(std::move(e));
}

SymExprPtr sym_extract(SymExprPtr src, int hi_bit, int lo_bit) {
    if (!src || hi_bit < lo_bit || lo_bit < 0 || hi_bit >= src->width)
        throw Error("bad extract range", "sym");
    if (hi_bit == src->width - 1 && lo_bit == 0)
        return src;
    if (is_const(src))
        return sym_const(src->value >> lo_bit, hi_bit - lo_bit + 1);
    SymExpr e;
    e.kind = SymKind::Extract;
    e.width = hi_bit - lo_bit + 1;
    e.a = std::move(src);
    e.hi_bit = hi_bit;
    e.lo_bit = lo_bit;
    return make(std::move(e));
}

SymExprPtr sym_zext(SymExprPtr e, int width) {
    if (!e || e->width > width)
        throw Error("zext to narrower width", "sym");
    if (e->width == width)
        return e;
    int pad = width - e->width;
    return sym_concat(sym_const(0, pad), std::move(e));
}

SymExprPtr sym_not(SymExprPtr pred) {
    if (!pred || pred->width != 1)
        throw Error("negation of a non-predicate", "sym");
    // Comparison operators close under negation by swapping operands.
    if (pred->kind == SymKind::Cmp) {
        switch (pred->cmp_op) {
        case SymCmp::Eq: return sym_cmp(SymCmp::Ne, pred->a, pred->b);
        case SymCmp::Ne: return sym_cmp(SymCmp::Eq, pred->a, pred->b);
        case SymCmp::Ult: return sym_cmp(SymCmp::Ule, pred->b, pred->a);
        case SymCmp::Ule: return sym_cmp(SymCmp::Ult, pred->b, pred->a);
        case SymCmp::Slt: return sym_cmp(SymCmp::Sle, pred->b, pred->a);
        case SymCmp::Sle: return sym_cmp(SymCmp::Slt, pred->b, pred->a);
        }
    }
    return sym_cmp(SymCmp::Eq, pred, sym_const(0, 1));
}

SymExprPtr sym_and1(SymExprPtr l, SymExprPtr r) {
    return sym_binop(SymBinOp::And, std::move(l), std::move(r));
}

bool sym_equal(const SymExprPtr& a, const SymExprPtr& b) {
    if (a == b)
        return true;
    if (!a || !b)
        return false;
    if (a->kind != b->kind || a->width != b->width)
        return false;
    switch (a->kind) {
    case SymKind::Var: return a->var_index == b->var_index;
    case SymKind::Const: return a->value == b->value;
    case SymKind::BinOp:
        return a->bin_op == b->bin_op && sym_equal(a->a, b->a) && sym_equal(a->b, b->b);
    case SymKind::Cmp:
        return a->cmp_op == b->cmp_op && sym_equal(a->a, b->a) && sym_equal(a->b, b->b);
    case SymKind::Ite:
        return sym_equal(a->a, b->a) && sym_equal(a->b, b->b) && sym_equal(a->c, b->c);
    case SymKind::Concat:
        return sym_equal(a->a, b->a) && sym_equal(a->b, b->b);
    case SymKind::Extract:
        return a->hi_bit == b->hi_bit && a->lo_bit == b->lo_bit && sym_equal(a->a, b->a);
    }
    return false;
}

uint64_t eval_expr(const SymExprPtr& e, std::span<const uint8_t> input) {
    if (!e)
        throw Error("eval of null expression", "sym");
    switch (e->kind) {
    case SymKind::Var:
        if (e->var_index >= input.size())
            throw Error("input byte " + std::to_string(e->var_index) + " out of range (input has " +
                            std::to_string(input.size()) + " bytes)",
                        "sym");
        return input[e->var_index];
    case SymKind::Const:
        return e->value;
    case SymKind::BinOp:
        return eval_binop(e->bin_op, eval_expr(e->a, input), eval_expr(e->b, input), e->width);
    case SymKind::Cmp:
        return eval_cmp(e->cmp_op, eval_expr(e->a, input), eval_expr(e->b, input), e->a->width);
    case SymKind::Ite:
        return eval_expr(e->a, input) ? eval_expr(e->b, input) : eval_expr(e->c, input);
    case SymKind::Concat:
        return mask_width((eval_expr(e->a, input) << e->b->width) | eval_expr(e->b, input), e->width);
    case SymKind::Extract:
        return mask_width(eval_expr(e->a, input) >> e->lo_bit, e->width);
    }
    return 0;
}

namespace {

bool is_const_val(const SymExprPtr& e, uint64_t v) { return is_const(e) && e->value == v; }

bool is_all_ones(const SymExprPtr& e) {
    return is_const(e) && e->value == mask_width(~uint64_t{0}, e->width);
}

} // namespace

SymExprPtr simplify(const SymExprPtr& e) {
    if (!e)
        return e;
    switch (e->kind) {
    case SymKind::Var:
    case SymKind::Const:
        return e;
    case SymKind::BinOp: {
        SymExprPtr a = simplify(e->a);
        SymExprPtr b = simplify(e->b);
        switch (e->bin_op) {
        case SymBinOp::Add:
            if (is_const_val(a, 0)) return b;
            if (is_const_val(b, 0)) return a;
            break;
        case SymBinOp::Sub:
            if (is_const_val(b, 0)) return a;
            if (sym_equal(a, b)) return sym_const(0, e->width);
            break;
        case SymBinOp::Mul:
            if (is_const_val(a, 1)) return b;
            if (is_const_val(b, 1)) return a;
            if (is_const_val(a, 0) || is_const_val(b, 0)) return sym_const(0, e->width);
            break;
        case SymBinOp::And:
            if (is_const_val(a, 0) || is_const_val(b, 0)) return sym_const(0, e->width);
            if (is_all_ones(a)) return b;
            if (is_all_ones(b)) return a;
            if (sym_equal(a, b)) return a;
            break;
        case SymBinOp::Or:
            if (is_const_val(a, 0)) return b;
            if (is_const_val(b, 0)) return a;
            if (sym_equal(a, b)) return a;
            break;
        case SymBinOp::Xor:
            if (is_const_val(a, 0)) return b;
            if (is_const_val(b, 0)) return a;
            if (sym_equal(a, b)) return sym_const(0, e->width);
            break;
        case SymBinOp::Shl:
        case SymBinOp::LShr:
            if (is_const_val(b, 0)) return a;
            break;
        default:
            break;
        }
        return sym_binop(e->bin_op, std::move(a), std::move(b));
    }
    case SymKind::Cmp: {
        SymExprPtr a = simplify(e->a);
        SymExprPtr b = simplify(e->b);
        if (sym_equal(a, b)) {
            bool holds = e->cmp_op == SymCmp::Eq || e->cmp_op == SymCmp::Ule ||
                         e->cmp_op == SymCmp::Sle;
            return sym_const(holds ? 1 : 0, 1);
        }
        // Narrow (zext(x) op const) to (x op const) for unsigned operators
        // when the constant fits.
        bool unsigned_op = e->cmp_op == SymCmp::Eq || e->cmp_op == SymCmp::Ne ||
                           e->cmp_op == SymCmp::Ult || e->cmp_op == SymCmp::Ule;
        if (unsigned_op && a->kind == SymKind::Concat && is_const_val(a->a, 0) && is_const(b)) {
            int low_w = a->b->width;
            if ((b->value >> low_w) == 0)
                return simplify(sym_cmp(e->cmp_op, a->b, sym_const(b->value, low_w)));
            // high bits of the constant can never match a zero extension
            if (e->cmp_op == SymCmp::Eq)
                return sym_const(0, 1);
            if (e->cmp_op == SymCmp::Ne)
                return sym_const(1, 1);
        }
        // A boolean tested against a constant collapses to the predicate
        // itself (or, when the operand is a comparison, its negation).
        if (a->width == 1 && is_const(b) && (e->cmp_op == SymCmp::Eq || e->cmp_op == SymCmp::Ne)) {
            bool want_true = (e->cmp_op == SymCmp::Eq) == (b->value == 1);
            if (want_true)
                return a;
            if (a->kind == SymKind::Cmp)
                return simplify(sym_not(a));
        }
        return sym_cmp(e->cmp_op, std::move(a), std::move(b));
    }
    case SymKind::Ite: {
        SymExprPtr c = simplify(e->a);
        SymExprPtr t = simplify(e->b);
        SymExprPtr f = simplify(e->c);
        if (sym_equal(t, f))
            return t;
        return sym_ite(std::move(c), std::move(t), std::move(f));
    }
    case SymKind::Concat: {
        SymExprPtr hi = simplify(e->a);
        SymExprPtr lo = simplify(e->b);
        return sym_concat(std::move(hi), std::move(lo));
    }
    case SymKind::Extract: {
        SymExprPtr src = simplify(e->a);
        // Extract entirely within one side of a concat narrows to that side.
        if (src->kind == SymKind::Concat) {
            int low_w = src->b->width;
            if (e->hi_bit < low_w)
                return simplify(sym_extract(src->b, e->hi_bit, e->lo_bit));
            if (e->lo_bit >= low_w)
                return simplify(sym_extract(src->a, e->hi_bit - low_w, e->lo_bit - low_w));
        }
        return sym_extract(std::move(src), e->hi_bit, e->lo_bit);
    }
    }
    return e;
}

std::string to_prefix_string(const SymExprPtr& e) {
    if (!e)
        return "<none>";
    std::ostringstream os;
    switch (e->kind) {
    case SymKind::Var:
        os << "b" << e->var_index;
        break;
    case SymKind::Const:
        os << "#" << e->value << ":" << e->width;
        break;
    case SymKind::BinOp: {
        const char* names[] = {"add", "sub", "mul", "udiv", "and", "or", "xor", "shl", "lshr"};
        os << "(" << names[static_cast<int>(e->bin_op)] << " " << to_prefix_string(e->a) << " "
           << to_prefix_string(e->b) << ")";
        break;
    }
    case SymKind::Cmp: {
        const char* names[] = {"eq", "ne", "ult", "ule", "slt", "sle"};
        os << "(" << names[static_cast<int>(e->cmp_op)] << " " << to_prefix_string(e->a) << " "
           << to_prefix_string(e->b) << ")";
        break;
    }
    case SymKind::Ite:
        os << "(ite " << to_prefix_string(e->a) << " " << to_prefix_string(e->b) << " "
           << to_prefix_string(e->c) << ")";
        break;
    case SymKind::Concat:
        os << "(concat " << to_prefix_string(e->a) << " " << to_prefix_string(e->b) << ")";
        break;
    case SymKind::Extract:
        os << "(extract " << e->hi_bit << " " << e->lo_bit << " " << to_prefix_string(e->a) << ")";
        break;
    }
    return os.str();
}

void collect_vars(const SymExprPtr& e, std::vector<uint32_t>& out) {
    if (!e)
        return;
    if (e->kind == SymKind::Var) {
        out.push_back(e->var_index);
    } else {
        collect_vars(e->a, out);
        collect_vars(e->b, out);
        collect_vars(e->c, out);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
}

SymExprPtr shadow_binop(SymBinOp op, uint32_t lhs_val, const SymExprPtr& lhs_shadow,
                        uint32_t rhs_val, const SymExprPtr& rhs_shadow, int width) {
    if (!lhs_shadow && !rhs_shadow)
        return nullptr;
    SymExprPtr l = lhs_shadow ? lhs_shadow : sym_const(lhs_val, width);
    SymExprPtr r = rhs_shadow ? rhs_shadow : sym_const(rhs_val, width);
    return sym_binop(op, std::move(l), std::move(r));
}

SymExprPtr shadow_icmp(SymCmp op, uint32_t lhs_val, const SymExprPtr& lhs_shadow,
                       uint32_t rhs_val, const SymExprPtr& rhs_shadow, int width) {
    if (!lhs_shadow && !rhs_shadow)
        return nullptr;
    SymExprPtr l = lhs_shadow ? lhs_shadow : sym_const(lhs_val, width);
    SymExprPtr r = rhs_shadow ? rhs_shadow : sym_const(rhs_val, width);
    return sym_cmp(op, std::move(l), std::move(r));
}

} // namespace colorgo

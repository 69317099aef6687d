// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#include "colorgo/ir.hpp"

#include <sstream>

namespace colorgo {

bool is_terminator(Opcode op) {
    switch (op) {
    case Opcode::Ret:
    case Opcode::BrCond:
    case Opcode::Br:
    case Opcode::Switch:
    case Opcode::Abort:
        return true;
    default:
        return false;
    }
}

bool is_binop(Opcode op) {
    switch (op) {
    case Opcode::Add: case Opcode::Sub: case Opcode::Mul: case Opcode::UDiv:
    case Opcode::And: case Opcode::Or: case Opcode::Xor:
    case Opcode::Shl: case Opcode::LShr:
        return true;
    default:
        return false;
    }
}

bool is_icmp(Opcode op) {
    switch (op) {
    case Opcode::IcmpEq: case Opcode::IcmpNe:
    case Opcode::IcmpUlt: case Opcode::IcmpUle:
    case Opcode::IcmpSlt: case Opcode::IcmpSle:
        return true;
    default:
        return false;
    }
}

const char* opcode_name(Opcode op) {
    switch (op) {
    case Opcode::Const: return "const";
    case Opcode::Add: return "add";
    case Opcode::Sub: return "sub";
    case Opcode::Mul: return "mul";
    case Opcode::UDiv: return "udiv";
    case Opcode::And: return "and";
    case Opcode::Or: return "or";
    case Opcode::Xor: return "xor";
    case Opcode::Shl: return "shl";
    case Opcode::LShr: return "lshr";
    case Opcode::IcmpEq: return "icmp eq";
    case Opcode::IcmpNe: return "icmp ne";
    case Opcode::IcmpUlt: return "icmp ult";
    case Opcode::IcmpUle: return "icmp ule";
    case Opcode::IcmpSlt: return "icmp slt";
    case Opcode::IcmpSle: return "icmp sle";
    case Opcode::Load: return "load";
    case Opcode::Store: return "store";
    case Opcode::Alloca: return "alloca";
    case Opcode::Inb: return "inb";
    case Opcode::Inw: return "inw";
    case Opcode::Call: return "call";
    case Opcode::Icall: return "icall";
    case Opcode::Funcaddr: return "funcaddr";
    case Opcode::Ret: return "ret";
    case Opcode::BrCond: return "br_cond";
    case Opcode::Br: return "br";
    case Opcode::Switch: return "switch";
    case Opcode::Abort: return "abort";
    case Opcode::Nop: return "nop";
    }
    return "?";
}

bool is_model_name(const std::string& name) {
    return name == "strlen" || name == "strchr" || name == "memcmp";
}

int model_arity(const std::string& name) {
    if (name == "strlen") return 1;
    if (name == "strchr") return 2;
    if (name == "memcmp") return 3;
    return -1;
}

namespace {

void print_operand(std::ostream& os, const Operand& o) {
    if (o.is_reg())
        os << o.reg_name;
    else
        os << o.imm;
}

void print_instruction(std::ostream& os, const Instruction& in) {
    if (in.dst >= 0)
        os << in.dst_name << " = ";
    switch (in.op) {
    case Opcode::Const:
        os << "const " << in.args[0].imm;
        break;
    case Opcode::Add: case Opcode::Sub: case Opcode::Mul: case Opcode::UDiv:
    case Opcode::And: case Opcode::Or: case Opcode::Xor:
    case Opcode::Shl: case Opcode::LShr:
    case Opcode::IcmpEq: case Opcode::IcmpNe:
    case Opcode::IcmpUlt: case Opcode::IcmpUle:
    case Opcode::IcmpSlt: case Opcode::IcmpSle:
        os << opcode_name(in.op) << " ";
        print_operand(os, in.args[0]);
        os << ", ";
        print_operand(os, in.args[1]);
        break;
    case Opcode::Load:
        os << "load ";
        print_operand(os, in.args[0]);
        os << ", " << in.mem_size;
        break;
    case Opcode::Store:
        os << "store ";
        print_operand(os, in.args[0]);
        os << ", ";
        print_operand(os, in.args[1]);
        os << ", " << in.mem_size;
        break;
    case Opcode::Alloca:
        os << "alloca " << in.args[0].imm;
        break;
    case Opcode::Inb:
        os << "inb " << in.args[0].imm;
        break;
    case Opcode::Inw:
        os << "inw " << in.args[0].imm;
        break;
    case Opcode::Call:
        os << "call @" << in.callee;
        for (const auto& a : in.args) {
            os << ", ";
            print_operand(os, a);
        }
        break;
    case Opcode::Icall:
        os << "icall ";
        print_operand(os, in.args[0]);
        for (size_t i = 1; i < in.args.size(); ++i) {
            os << ", ";
            print_operand(os, in.args[i]);
        }
        break;
    case Opcode::Funcaddr:
        os << "funcaddr @" << in.callee;
        break;
    case Opcode::Ret:
        os << "ret";
        if (!in.args.empty()) {
            os << " ";
            print_operand(os, in.args[0]);
        }
        break;
    case Opcode::BrCond:
        os << "br_cond ";
        print_operand(os, in.args[0]);
        os << ", " << in.label_a_name << ", " << in.label_b_name;
        break;
    case Opcode::Br:
        os << "br " << in.label_a_name;
        break;
    case Opcode::Switch:
        os << "switch ";
        print_operand(os, in.args[0]);
        os << ", " << in.label_a_name;
        for (const auto& c : in.cases)
            os << ", " << c.value << ": " << c.label_name;
        break;
    case Opcode::Abort:
        os << "abort";
        break;
    case Opcode::Nop:
        os << "nop";
        break;
    }
    if (in.loc)
        os << " !loc " << in.loc->file << ":" << in.loc->line;
}

} // namespace

std::string print_program(const Program& p) {
    std::ostringstream os;
    bool first = true;
    for (const auto& f : p.functions) {
        if (!first)
            os << "\n";
        first = false;
        os << "fn " << f.name << "(";
        for (size_t i = 0; i < f.params.size(); ++i) {
            if (i) os << ", ";
            os << f.params[i];
        }
        os << ")";
        if (f.nosym)
            os << " nosym";
        os << " {\n";
        for (const auto& b : f.blocks) {
            os << b.label << ":\n";
            for (const auto& in : b.instrs) {
                os << "  ";
                print_instruction(os, in);
                os << "\n";
            }
        }
        os << "}\n";
    }
    return os.str();
}

} // namespace colorgo

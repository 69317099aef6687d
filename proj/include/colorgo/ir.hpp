// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace colorgo {

// Error type used across the pipeline. `stage` names the pipeline step that
// failed so the CLI can report "points_to: ..." etc.
struct Error : std::runtime_error {
    explicit Error(const std::string& what, std::string stage_ = "")
        : std::runtime_error(what), stage(std::move(stage_)) {}
    std::string stage;
};

struct SourceLoc {
    std::string file;
    int line = 0; // >= 1
    auto operator<=>(const SourceLoc&) const = default;
};

enum class Opcode {
    Const,
    // binops
    Add, Sub, Mul, UDiv, And, Or, Xor, Shl, LShr,
    // comparisons (result 0/1 in a 32-bit register)
    IcmpEq, IcmpNe, IcmpUlt, IcmpUle, IcmpSlt, IcmpSle,
    Load, Store, Alloca, Inb, Inw,
    Call, Icall, Funcaddr,
    Ret, BrCond, Br, Switch, Abort, Nop,
};

bool is_terminator(Opcode op);
bool is_binop(Opcode op);
bool is_icmp(Opcode op);
const char* opcode_name(Opcode op);

struct Operand {
    enum class Kind { Reg, Imm };
    Kind kind = Kind::Imm;
    int reg = -1;       // register index within the owning function
    int64_t imm = 0;    // truncated to 32 bits at use
    std::string reg_name; // kept for printing and diagnostics

    static Operand make_reg(int idx, std::string name) {
        Operand o; o.kind = Kind::Reg; o.reg = idx; o.reg_name = std::move(name); return o;
    }
    static Operand make_imm(int64_t v) {
        Operand o; o.kind = Kind::Imm; o.imm = v; return o;
    }
    bool is_reg() const { return kind == Kind::Reg; }
};

struct SwitchCase {
    uint32_t value = 0;
    int label = -1;          // block index, resolved after parse
    std::string label_name;
};

struct Instruction {
    Opcode op = Opcode::Nop;
    int dst = -1;                   // destination register index, -1 if none
    std::string dst_name;
    std::vector<Operand> args;      // semantics depend on op (see parser.cpp)
    uint32_t mem_size = 0;          // load/store access width in bytes (1 or 4)
    int label_a = -1, label_b = -1; // br: a; br_cond: a=true, b=false
    std::string label_a_name, label_b_name;
    std::vector<SwitchCase> cases;  // switch only; label_a is the default
    std::string callee;             // call/funcaddr target name
    int callee_fn = -1;             // resolved function index; -1 = library model
    int alloca_site = -1;           // program-wide alloca site id
    std::optional<SourceLoc> loc;
    int src_line = 0, src_col = 0;  // position in the IR text, for diagnostics
};

struct BasicBlock {
    std::string label;
    std::vector<Instruction> instrs; // non-empty; last is the unique terminator
    const Instruction& terminator() const { return instrs.back(); }
};

struct FunctionDef {
    std::string name;
    std::vector<std::string> params;    // parameter register names, in order
    std::vector<std::string> registers; // all register names; params occupy [0, params.size())
    std::vector<BasicBlock> blocks;     // parse order; blocks[entry_block] is the entry
    std::map<std::string, int> block_index;
    int entry_block = 0;
    bool nosym = false; // uninstrumented: executes concretely, drops all shadow state

    int block_of(const std::string& label) const {
        auto it = block_index.find(label);
        return it == block_index.end() ? -1 : it->second;
    }
};

struct Program {
    std::vector<FunctionDef> functions;
    std::map<std::string, int> function_index;
    std::string entry = "main";
    int entry_fn = -1;
    int alloca_site_count = 0;

    const FunctionDef* find(const std::string& name) const {
        auto it = function_index.find(name);
        return it == function_index.end() ? nullptr : &functions[it->second];
    }
};

// Canonical textual form; parse_program(print_program(p)) is structurally
// identical to p (print is a fixed point).
std::string print_program(const Program& p);

// Library functions callable without a definition in the program.
bool is_model_name(const std::string& name);
int model_arity(const std::string& name);

} // namespace colorgo

// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#include "colorgo/executor.hpp"

#include <algorithm>
#include <chrono>

#include "colorgo/models.hpp"

namespace colorgo {

const char* exec_status_name(ExecStatus s) {
    switch (s) {
    case ExecStatus::TargetReached: return "target_reached";
    case ExecStatus::EarlyTerminated: return "early_terminated";
    case ExecStatus::RanToExit: return "ran_to_exit";
    case ExecStatus::Aborted: return "aborted";
    case ExecStatus::BudgetExceeded: return "budget_exceeded";
    }
    return "?";
}

namespace {

constexpr uint32_t kFuncAddrBase = 0xF0000000u;
constexpr size_t kMaxFrames = 4096;

struct StopRun {
    ExecStatus status;
};

struct Fault {
    std::string what;
};

SymBinOp binop_of(Opcode op) {
    switch (op) {
    case Opcode::Add: return SymBinOp::Add;
    case Opcode::Sub: return SymBinOp::Sub;
    case Opcode::Mul: return SymBinOp::Mul;
    case Opcode::UDiv: return SymBinOp::UDiv;
    case Opcode::And: return SymBinOp::And;
    case Opcode::Or: return SymBinOp::Or;
    case Opcode::Xor: return SymBinOp::Xor;
    case Opcode::Shl: return SymBinOp::Shl;
    default: return SymBinOp::LShr;
    }
}

SymCmp icmp_of(Opcode op) {
    switch (op) {
    case Opcode::IcmpEq: return SymCmp::Eq;
    case Opcode::IcmpNe: return SymCmp::Ne;
    case Opcode::IcmpUlt: return SymCmp::Ult;
    case Opcode::IcmpUle: return SymCmp::Ule;
    case Opcode::IcmpSlt: return SymCmp::Slt;
    default: return SymCmp::Sle;
    }
}

class Machine {
public:
    Machine(const Instrumented& ip, const Icfg& icfg, std::span<const uint8_t> input,
            const ColorMap& cm, const ExecOptions& opts)
        : ip_(ip), icfg_(icfg), p_(*ip.program), cm_(cm), opts_(opts), input_(input) {}

    ExecOutcome run() {
        try {
            push_frame(p_.entry_fn, {}, {}, -1);
            loop();
        } catch (const StopRun& s) {
            out_.status = s.status;
        } catch (const Fault& f) {
            out_.status = ExecStatus::Aborted;
            out_.fault = f.what;
            if (!frames_.empty())
                out_.fault_node = current_node();
        }
        return std::move(out_);
    }

private:
    struct Frame {
        int fn = -1;
        int block = -1;
        size_t instr = 0;
        std::vector<uint32_t> regs;
        int ret_dst = -1;   // caller register receiving the return value
        bool shadowed = true;
    };

    NodeRef current_node() const { return {frames_.back().fn, frames_.back().block}; }

    bool track_shadow() const { return !opts_.plain; }

    void push_frame(int fn, const std::vector<uint32_t>& args,
                    const std::vector<SymExprPtr>& arg_shadows, int ret_dst) {
        if (frames_.size() >= kMaxFrames)
            throw Fault{"call depth exceeded"};
        const FunctionDef& f = p_.functions[fn];
        Frame fr;
        fr.fn = fn;
        fr.block = f.entry_block;
        fr.regs.assign(f.registers.size(), 0);
        fr.ret_dst = ret_dst;
        fr.shadowed = track_shadow() && !f.nosym;
        for (size_t i = 0; i < args.size() && i < f.params.size(); ++i)
            fr.regs[i] = args[i];
        frames_.push_back(std::move(fr));
        if (track_shadow()) {
            ShadowState::Frame sf;
            sf.regs.assign(f.registers.size(), nullptr);
            if (frames_.back().shadowed)
                for (size_t i = 0; i < arg_shadows.size() && i < f.params.size(); ++i)
                    sf.regs[i] = arg_shadows[i];
            shadow_.frames.push_back(std::move(sf));
        }
        enter_block(f.entry_block);
    }

    void enter_block(int block) {
        Frame& fr = frames_.back();
        fr.block = block;
        fr.instr = 0;
        NodeRef node{fr.fn, block};
        out_.visited.push_back(node);
        if (cm_.targets.count(node)) {
            out_.reached_target = node;
            throw StopRun{ExecStatus::TargetReached};
        }
    }

    void loop() {
        while (!frames_.empty()) {
            Frame& fr = frames_.back();
            const BasicBlock& blk = p_.functions[fr.fn].blocks[fr.block];
            const Instruction& in = blk.instrs[fr.instr];
            if (out_.instructions >= opts_.instr_budget)
                throw StopRun{ExecStatus::BudgetExceeded};
            ++out_.instructions;
            step(in);
        }
        out_.status = ExecStatus::RanToExit;
    }

    uint32_t val(const Operand& o) const {
        return o.is_reg() ? frames_.back().regs[o.reg] : static_cast<uint32_t>(o.imm);
    }

    SymExprPtr shv(const Operand& o) const {
        if (!o.is_reg() || !track_shadow() || !frames_.back().shadowed)
            return nullptr;
        return shadow_.frames.back().regs[o.reg];
    }

    void debug_check_shadow(const SymExprPtr& sh, uint32_t v) {
        if (!opts_.debug_checks || !sh)
            return;
        if (eval_expr(sh, padded_input()) != v)
            throw Fault{"shadow/concrete disagreement: " + to_prefix_string(sh) + " != " +
                        std::to_string(v)};
    }

    void set_reg(int dst, uint32_t v, SymExprPtr sh) {
        Frame& fr = frames_.back();
        fr.regs[dst] = v;
        if (!track_shadow())
            return;
        if (sh && sh->kind == SymKind::Const)
            sh = nullptr; // constant shadows carry no input dependence
        if (!fr.shadowed)
            sh = nullptr;
        debug_check_shadow(sh, v);
        shadow_.frames.back().regs[dst] = std::move(sh);
    }

    std::span<const uint8_t> padded_input() {
        if (out_.max_input_ref < input_.size())
            return input_;
        padded_.assign(input_.begin(), input_.end());
        padded_.resize(out_.max_input_ref + 1, 0);
        return padded_;
    }

    uint8_t input_byte(uint32_t off) {
        out_.max_input_ref = std::max<uint64_t>(out_.max_input_ref, off);
        return off < input_.size() ? input_[off] : 0;
    }

    void check_mem(uint32_t addr, uint32_t size) {
        if (static_cast<uint64_t>(addr) + size > memory_.size())
            throw Fault{"memory access out of bounds at offset " + std::to_string(addr)};
    }

    void store_shadow_byte(uint32_t addr, SymExprPtr sh) {
        if (!track_shadow())
            return;
        if (sh && sh->kind == SymKind::Const)
            sh = nullptr;
        if (sh)
            shadow_.memory[addr] = std::move(sh);
        else
            shadow_.memory.erase(addr);
    }

    SymExprPtr load_shadow_byte(uint32_t addr) const {
        if (!track_shadow())
            return nullptr;
        auto it = shadow_.memory.find(addr);
        return it == shadow_.memory.end() ? nullptr : it->second;
    }

    void step(const Instruction& in) {
        Frame& fr = frames_.back();
        switch (in.op) {
        case Opcode::Const:
            set_reg(in.dst, static_cast<uint32_t>(in.args[0].imm), nullptr);
            ++fr.instr;
            break;
        case Opcode::Add: case Opcode::Sub: case Opcode::Mul: case Opcode::UDiv:
        case Opcode::And: case Opcode::Or: case Opcode::Xor:
        case Opcode::Shl: case Opcode::LShr: {
            uint32_t l = val(in.args[0]), r = val(in.args[1]);
            if (in.op == Opcode::UDiv && r == 0)
                throw Fault{"division by zero"};
            SymBinOp op = binop_of(in.op);
            uint32_t v;
            switch (op) {
            case SymBinOp::Add: v = l + r; break;
            case SymBinOp::Sub: v = l - r; break;
            case SymBinOp::Mul: v = l * r; break;
            case SymBinOp::UDiv: v = l / r; break;
            case SymBinOp::And: v = l & r; break;
            case SymBinOp::Or: v = l | r; break;
            case SymBinOp::Xor: v = l ^ r; break;
            case SymBinOp::Shl: v = r >= 32 ? 0 : l << r; break;
            default: v = r >= 32 ? 0 : l >> r; break;
            }
            SymExprPtr sh;
            if (fr.shadowed)
                sh = shadow_binop(op, l, shv(in.args[0]), r, shv(in.args[1]), 32);
            set_reg(in.dst, v, std::move(sh));
            ++fr.instr;
            break;
        }
        case Opcode::IcmpEq: case Opcode::IcmpNe:
        case Opcode::IcmpUlt: case Opcode::IcmpUle:
        case Opcode::IcmpSlt: case Opcode::IcmpSle: {
            uint32_t l = val(in.args[0]), r = val(in.args[1]);
            SymCmp op = icmp_of(in.op);
            uint64_t v = 0;
            switch (op) {
            case SymCmp::Eq: v = l == r; break;
            case SymCmp::Ne: v = l != r; break;
            case SymCmp::Ult: v = l < r; break;
            case SymCmp::Ule: v = l <= r; break;
            case SymCmp::Slt: v = static_cast<int32_t>(l) < static_cast<int32_t>(r); break;
            case SymCmp::Sle: v = static_cast<int32_t>(l) <= static_cast<int32_t>(r); break;
            }
            SymExprPtr sh;
            if (fr.shadowed) {
                sh = shadow_icmp(op, l, shv(in.args[0]), r, shv(in.args[1]), 32);
                if (sh)
                    sh = sym_zext(sh, 32);
            }
            set_reg(in.dst, static_cast<uint32_t>(v), std::move(sh));
            ++fr.instr;
            break;
        }
        case Opcode::Load: {
            uint32_t addr = val(in.args[0]);
            check_mem(addr, in.mem_size);
            uint32_t v = 0;
            for (uint32_t i = 0; i < in.mem_size; ++i)
                v |= static_cast<uint32_t>(memory_[addr + i]) << (8 * i);
            SymExprPtr sh;
            if (fr.shadowed) {
                bool any = false;
                for (uint32_t i = 0; i < in.mem_size; ++i)
                    any = any || load_shadow_byte(addr + i) != nullptr;
                if (any) {
                    sh = load_shadow_byte(addr) ? load_shadow_byte(addr)
                                                : sym_const(memory_[addr], 8);
                    for (uint32_t i = 1; i < in.mem_size; ++i) {
                        SymExprPtr byte = load_shadow_byte(addr + i)
                                              ? load_shadow_byte(addr + i)
                                              : sym_const(memory_[addr + i], 8);
                        sh = sym_concat(std::move(byte), std::move(sh));
                    }
                    sh = sym_zext(std::move(sh), 32);
                }
            }
            set_reg(in.dst, v, std::move(sh));
            ++fr.instr;
            break;
        }
        case Opcode::Store: {
            uint32_t addr = val(in.args[0]);
            uint32_t v = val(in.args[1]);
            check_mem(addr, in.mem_size);
            SymExprPtr vsh = shv(in.args[1]);
            for (uint32_t i = 0; i < in.mem_size; ++i) {
                memory_[addr + i] = static_cast<uint8_t>(v >> (8 * i));
                SymExprPtr byte;
                if (vsh && fr.shadowed)
                    byte = sym_extract(vsh, 8 * i + 7, 8 * i);
                store_shadow_byte(addr + i, std::move(byte));
            }
            ++fr.instr;
            break;
        }
        case Opcode::Alloca: {
            uint32_t base = static_cast<uint32_t>(memory_.size());
            memory_.resize(memory_.size() + static_cast<size_t>(in.args[0].imm), 0);
            set_reg(in.dst, base, nullptr);
            ++fr.instr;
            break;
        }
        case Opcode::Inb: {
            uint32_t off = static_cast<uint32_t>(in.args[0].imm);
            uint8_t b = input_byte(off);
            SymExprPtr sh;
            if (fr.shadowed)
                sh = sym_zext(sym_var(off), 32);
            set_reg(in.dst, b, std::move(sh));
            ++fr.instr;
            break;
        }
        case Opcode::Inw: {
            uint32_t off = static_cast<uint32_t>(in.args[0].imm);
            uint32_t v = 0;
            for (uint32_t i = 0; i < 4; ++i)
                v |= static_cast<uint32_t>(input_byte(off + i)) << (8 * i);
            SymExprPtr sh;
            if (fr.shadowed) {
                sh = sym_var(off);
                for (uint32_t i = 1; i < 4; ++i)
                    sh = sym_concat(sym_var(off + i), std::move(sh));
            }
            set_reg(in.dst, v, std::move(sh));
            ++fr.instr;
            break;
        }
        case Opcode::Funcaddr:
            set_reg(in.dst, kFuncAddrBase + static_cast<uint32_t>(in.callee_fn), nullptr);
            ++fr.instr;
            break;
        case Opcode::Call:
            do_call(in, in.callee_fn, false);
            break;
        case Opcode::Icall: {
            uint32_t fpv = val(in.args[0]);
            if (fpv < kFuncAddrBase || fpv - kFuncAddrBase >= p_.functions.size())
                throw Fault{"indirect call through a non-function value"};
            int callee = static_cast<int>(fpv - kFuncAddrBase);
            if (p_.functions[callee].params.size() + 1 != in.args.size())
                throw Fault{"indirect call arity mismatch for '" + p_.functions[callee].name + "'"};
            out_.icalls.push_back({current_node(), static_cast<int>(fr.instr), callee});
            do_call(in, callee, true);
            break;
        }
        case Opcode::Ret:
            do_ret(in);
            break;
        case Opcode::BrCond: {
            uint32_t c = val(in.args[0]);
            SymExprPtr csh = shv(in.args[0]);
            bool taken_true = c != 0;
            const auto& outs = icfg_.out_of(current_node());
            int edge = taken_true ? outs[0] : outs[1];
            SymExprPtr pred;
            if (csh)
                pred = simplify(sym_cmp(SymCmp::Ne, csh, sym_const(0, 32)));
            apply_check(current_node(), edge, pred, taken_true, 0, false);
            out_.edge_trace.push_back(edge);
            enter_block(taken_true ? in.label_a : in.label_b);
            break;
        }
        case Opcode::Switch: {
            uint32_t c = val(in.args[0]);
            SymExprPtr csh = shv(in.args[0]);
            const auto& outs = icfg_.out_of(current_node());
            int taken_index = -1;
            for (size_t i = 0; i < in.cases.size(); ++i)
                if (in.cases[i].value == c) {
                    taken_index = static_cast<int>(i);
                    break;
                }
            int edge = taken_index >= 0 ? outs[taken_index] : outs.back();
            int target = taken_index >= 0 ? in.cases[taken_index].label : in.label_a;
            apply_check(current_node(), edge, csh, true, c, true);
            out_.edge_trace.push_back(edge);
            enter_block(target);
            break;
        }
        case Opcode::Abort:
            out_.fault = "abort";
            out_.fault_node = current_node();
            throw StopRun{ExecStatus::Aborted};
        case Opcode::Br: {
            const auto& outs = icfg_.out_of(current_node());
            out_.edge_trace.push_back(outs[0]);
            enter_block(in.label_a);
            break;
        }
        case Opcode::Nop:
            ++fr.instr;
            break;
        }
    }

    void do_call(const Instruction& in, int callee, bool indirect) {
        Frame& fr = frames_.back();
        size_t first_arg = indirect ? 1 : 0;
        std::vector<uint32_t> args;
        std::vector<SymExprPtr> arg_shadows;
        for (size_t i = first_arg; i < in.args.size(); ++i) {
            args.push_back(val(in.args[i]));
            arg_shadows.push_back(shv(in.args[i]));
        }
        if (callee < 0) {
            // library model call
            ModelResult mr;
            try {
                mr = apply_function_model(in.callee, args, arg_shadows, memory_, shadow_.memory);
            } catch (const Error& e) {
                throw Fault{e.what()};
            }
            if (mr.warning)
                out_.warnings.push_back(*mr.warning);
            if (in.dst >= 0)
                set_reg(in.dst, mr.ret, fr.shadowed ? mr.shadow : nullptr);
            ++fr.instr;
            return;
        }
        push_frame(callee, args, arg_shadows, in.dst);
    }

    void do_ret(const Instruction& in) {
        uint32_t v = 0;
        SymExprPtr vsh;
        bool has_value = !in.args.empty();
        if (has_value) {
            v = val(in.args[0]);
            vsh = shv(in.args[0]);
        }
        int ret_dst = frames_.back().ret_dst;
        frames_.pop_back();
        if (track_shadow())
            shadow_.frames.pop_back();
        if (frames_.empty()) {
            out_.exit_value = v;
            throw StopRun{ExecStatus::RanToExit};
        }
        Frame& caller = frames_.back();
        if (ret_dst >= 0) {
            if (!has_value)
                throw Fault{"callee returned no value into a destination register"};
            set_reg(ret_dst, v, std::move(vsh));
        }
        ++caller.instr; // move past the call
    }

    // --- check logic -----------------------------------------------------

    uint64_t prefix_hash(size_t len) const {
        uint64_t h = 1469598103934665603ull;
        auto mix = [&h](uint64_t x) {
            h ^= x;
            h *= 1099511628211ull;
        };
        for (size_t i = 0; i < len; ++i) {
            mix(static_cast<uint64_t>(pc_[i].site_id));
            mix(pc_[i].observed ? 1 : 0);
            mix(static_cast<uint64_t>(pc_[i].edge_id));
        }
        return h;
    }

    bool succ_effective(const SuccInfo& s, uint64_t cur_hash) const {
        if (!cm_.edge_leads_colored(icfg_, s.edge_id))
            return false;
        if (opts_.conservative_pruning && cm_.is_pruned_for_prefix(s.edge_id, cur_hash))
            return false;
        return true;
    }

    SymExprPtr case_pred(const SymExprPtr& cond_sh, uint32_t value) const {
        return simplify(sym_cmp(SymCmp::Eq, cond_sh, sym_const(value, 32)));
    }

    SymExprPtr default_pred(const SymExprPtr& cond_sh, const CheckPlan& plan) const {
        SymExprPtr pred;
        for (uint32_t cv : plan.case_values) {
            SymExprPtr ne = sym_cmp(SymCmp::Ne, cond_sh, sym_const(cv, 32));
            pred = pred ? sym_and1(std::move(pred), std::move(ne)) : std::move(ne);
        }
        if (!pred)
            pred = sym_const(1, 1); // switch with no cases always takes the default
        return simplify(pred);
    }

    // The wanted predicate that steers the condition onto `s`.
    SymExprPtr goal_for(const CheckPlan& plan, const SuccInfo& s, const SymExprPtr& pred,
                        const SymExprPtr& cond_sh) const {
        if (plan.is_switch) {
            if (!cond_sh)
                return nullptr;
            if (s.kind == EdgeKind::Default)
                return default_pred(cond_sh, plan);
            return case_pred(cond_sh, s.case_value);
        }
        if (!pred)
            return nullptr;
        return s.kind == EdgeKind::True ? pred : sym_not(pred);
    }

    void try_solve(const CheckPlan& plan, const SuccInfo& s, size_t prefix_len,
                   const SymExprPtr& goal) {
        if (!goal)
            return; // concrete condition: nothing to send to the backend
        std::span<const PcEntry> prefix(pc_.data(), prefix_len);
        if (opts_.collect_smt)
            out_.smt.push_back({plan.site_id, export_smtlib(prefix, goal)});
        ++out_.solves;
        auto t0 = std::chrono::steady_clock::now();
        SolverOptions so;
        so.timeout_ms = opts_.solver_timeout_ms;
        SolveResult res = solve(prefix, goal, input_, so);
        auto t1 = std::chrono::steady_clock::now();
        out_.solve_us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
        if (res.is_sat()) {
            NewInput ni;
            ni.bytes.assign(input_.begin(), input_.end());
            for (auto [idx, byte] : res.model) {
                if (idx >= ni.bytes.size())
                    ni.bytes.resize(idx + 1, 0);
                ni.bytes[idx] = byte;
            }
            ni.origin_site = plan.site_id;
            ni.origin_edge = s.edge_id;
            out_.new_inputs.push_back(std::move(ni));
        } else if (res.is_unsat()) {
            out_.prunes.push_back({s.edge_id, prefix_hash(prefix_len)});
        }
        // Unknown proves nothing: no seed, no prune.
    }

    void apply_check(NodeRef node, int taken_edge, const SymExprPtr& pred, bool observed,
                     uint32_t switch_value, bool is_switch) {
        if (opts_.plain)
            return;
        auto it = ip_.plans.find(node);
        if (it == ip_.plans.end())
            return;
        const CheckPlan& plan = it->second;
        uint64_t cur_hash = opts_.conservative_pruning ? prefix_hash(pc_.size()) : 0;

        const SuccInfo* taken = nullptr;
        bool any_colored = false;
        for (const auto& s : plan.succs) {
            if (succ_effective(s, cur_hash))
                any_colored = true;
            if (s.edge_id == taken_edge)
                taken = &s;
        }

        // Record the observed condition before anything else so later sites
        // solve under a complete prefix.
        size_t prefix_len = pc_.size();
        SymExprPtr observed_pred = pred;
        bool observed_value = observed;
        if (is_switch && pred) {
            // pred is the raw condition shadow here; build the taken-case
            // predicate (case equality or the manual default conjunction).
            if (taken && taken->kind == EdgeKind::Default)
                observed_pred = default_pred(pred, plan);
            else
                observed_pred = case_pred(pred, switch_value);
            observed_value = true;
        }
        if (observed_pred && observed_pred->kind != SymKind::Const) {
            if (opts_.debug_checks &&
                eval_expr(observed_pred, padded_input()) != (observed_value ? 1u : 0u))
                throw Fault{"path constraint entry disagrees with concrete flow"};
            pc_.push_back({observed_pred, observed_value, plan.site_id, taken_edge});
        }

        if (!any_colored) {
            // end of the colored region
            if (opts_.record_only || !opts_.early_term)
                return;
            throw StopRun{ExecStatus::EarlyTerminated};
        }
        if (opts_.record_only)
            return;

        bool taken_colored = taken && succ_effective(*taken, cur_hash);
        SymExprPtr cond_sh = is_switch ? pred : nullptr;

        if (taken_colored) {
            // Still on a colored path. A naive DFS additionally solves toward
            // every other colored side; deviation-driven search does not.
            if (opts_.strategy == SearchStrategy::Dfs) {
                for (const auto& s : plan.succs) {
                    if (s.edge_id == taken_edge || !succ_effective(s, cur_hash))
                        continue;
                    try_solve(plan, s, prefix_len, goal_for(plan, s, pred, cond_sh));
                }
            }
            return;
        }

        // Deviation: the concrete flow leaves the colored region here.
        // Produce a solution for every colored side, then stop this run.
        for (const auto& s : plan.succs) {
            if (s.edge_id == taken_edge || !succ_effective(s, cur_hash))
                continue;
            try_solve(plan, s, prefix_len, goal_for(plan, s, pred, cond_sh));
        }
        if (opts_.early_term)
            throw StopRun{ExecStatus::EarlyTerminated};
    }

    const Instrumented& ip_;
    const Icfg& icfg_;
    const Program& p_;
    const ColorMap& cm_;
    const ExecOptions& opts_;
    std::span<const uint8_t> input_;
    std::vector<uint8_t> padded_;

    ExecOutcome out_;
    std::vector<Frame> frames_;
    ShadowState shadow_;
    std::vector<uint8_t> memory_;
    std::vector<PcEntry> pc_;
};

} // namespace

ExecOutcome execute(const Instrumented& ip, const Icfg& icfg, std::span<const uint8_t> input,
                    const ColorMap& cm, const ExecOptions& opts) {
    Machine m(ip, icfg, input, cm, opts);
    return m.run();
}

} // namespace colorgo

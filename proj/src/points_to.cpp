// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#include "colorgo/points_to.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace colorgo {

namespace {

PtsVar reg_var(int fn, const Operand& o) { return PtsVar::make_reg(fn, o.reg); }

} // namespace

ConstraintSystem collect_constraints(const Program& p) {
    ConstraintSystem cs;
    cs.prog = &p;
    auto add = [&](PtsConstraint c) { cs.constraints.push_back(c); };

    for (size_t fi = 0; fi < p.functions.size(); ++fi) {
        const auto& f = p.functions[fi];
        int fn = static_cast<int>(fi);
        for (size_t bi = 0; bi < f.blocks.size(); ++bi) {
            for (size_t ii = 0; ii < f.blocks[bi].instrs.size(); ++ii) {
                const Instruction& in = f.blocks[bi].instrs[ii];
                switch (in.op) {
                case Opcode::Funcaddr:
                    add({PtsConstraint::Kind::AddrOf, PtsVar::make_reg(fn, in.dst), {},
                         {PtsObj::Kind::Function, in.callee_fn}});
                    break;
                case Opcode::Alloca:
                    add({PtsConstraint::Kind::AddrOf, PtsVar::make_reg(fn, in.dst), {},
                         {PtsObj::Kind::Slot, in.alloca_site}});
                    break;
                case Opcode::Load:
                    if (in.args[0].is_reg())
                        add({PtsConstraint::Kind::Load, PtsVar::make_reg(fn, in.dst),
                             reg_var(fn, in.args[0]), {}});
                    break;
                case Opcode::Store:
                    if (in.args[0].is_reg() && in.args[1].is_reg())
                        add({PtsConstraint::Kind::Store, reg_var(fn, in.args[0]),
                             reg_var(fn, in.args[1]), {}});
                    break;
                case Opcode::Call: {
                    if (in.callee_fn < 0)
                        break; // library models never traffic in function addresses
                    const auto& callee = p.functions[in.callee_fn];
                    for (size_t ai = 0; ai < in.args.size(); ++ai)
                        if (in.args[ai].is_reg())
                            add({PtsConstraint::Kind::Copy,
                                 PtsVar::make_reg(in.callee_fn, static_cast<int>(ai)),
                                 reg_var(fn, in.args[ai]), {}});
                    (void)callee;
                    if (in.dst >= 0)
                        add({PtsConstraint::Kind::Copy, PtsVar::make_reg(fn, in.dst),
                             PtsVar::make_ret(in.callee_fn), {}});
                    break;
                }
                case Opcode::Ret:
                    if (!in.args.empty() && in.args[0].is_reg())
                        add({PtsConstraint::Kind::Copy, PtsVar::make_ret(fn),
                             reg_var(fn, in.args[0]), {}});
                    break;
                case Opcode::Icall: {
                    IcallSite site;
                    site.ordinal = static_cast<int>(cs.icall_sites.size());
                    site.fn = fn;
                    site.block = static_cast<int>(bi);
                    site.instr = static_cast<int>(ii);
                    site.fp = reg_var(fn, in.args[0]);
                    site.arity = static_cast<int>(in.args.size()) - 1;
                    for (size_t ai = 1; ai < in.args.size(); ++ai) {
                        site.arg_is_reg.push_back(in.args[ai].is_reg());
                        site.args.push_back(in.args[ai].is_reg() ? reg_var(fn, in.args[ai]) : PtsVar{});
                    }
                    if (in.dst >= 0) {
                        site.has_dst = true;
                        site.dst = PtsVar::make_reg(fn, in.dst);
                    }
                    site.loc = in.loc;
                    cs.icall_sites.push_back(std::move(site));
                    break;
                }
                default:
                    break;
                }
            }
        }
    }
    return cs;
}

namespace {

// Worklist solver state. Variables are interned in first-seen order so the
// iteration is reproducible; the result is the least fixpoint either way.
struct Solver {
    const ConstraintSystem& cs;
    std::map<PtsVar, int> var_ids;
    std::vector<PtsVar> vars;
    std::vector<std::set<PtsObj>> pts;
    std::vector<std::vector<int>> copy_out; // var -> vars that include it
    std::vector<std::set<int>> copy_out_set;
    std::vector<std::vector<std::pair<int, bool>>> deref_uses; // pointer var -> (other, is_load)
    std::deque<int> work;
    std::vector<bool> queued;
    std::set<std::pair<int, int>> icall_expanded; // (site ordinal, callee)

    explicit Solver(const ConstraintSystem& sys) : cs(sys) {}

    int id_of(PtsVar v) {
        auto it = var_ids.find(v);
        if (it != var_ids.end())
            return it->second;
        int id = static_cast<int>(vars.size());
        var_ids.emplace(v, id);
        vars.push_back(v);
        pts.emplace_back();
        copy_out.emplace_back();
        copy_out_set.emplace_back();
        deref_uses.emplace_back();
        queued.push_back(false);
        return id;
    }

    void enqueue(int v) {
        if (!queued[v]) {
            queued[v] = true;
            work.push_back(v);
        }
    }

    bool add_obj(int v, PtsObj o) {
        if (pts[v].insert(o).second) {
            enqueue(v);
            return true;
        }
        return false;
    }

    void add_copy(int dst, int src) {
        if (copy_out_set[src].insert(dst).second) {
            copy_out[src].push_back(dst);
            bool grew = false;
            for (PtsObj o : pts[src])
                grew |= pts[dst].insert(o).second;
            if (grew)
                enqueue(dst);
        }
    }

    int slot_content(int slot) { return id_of(PtsVar::make_slot(slot)); }

    void expand_icall(const IcallSite& site, int callee) {
        if (!icall_expanded.insert({site.ordinal, callee}).second)
            return;
        const auto& f = cs.prog->functions[callee];
        if (static_cast<int>(f.params.size()) != site.arity)
            return; // arity filter
        for (int ai = 0; ai < site.arity; ++ai)
            if (site.arg_is_reg[ai])
                add_copy(id_of(PtsVar::make_reg(callee, ai)), id_of(site.args[ai]));
        if (site.has_dst)
            add_copy(id_of(site.dst), id_of(PtsVar::make_ret(callee)));
    }

    PointsToResult run() {
        // Seed base constraints. id_of may grow the side tables, so intern
        // both variables before touching any indexed slot.
        for (const auto& c : cs.constraints) {
            switch (c.kind) {
            case PtsConstraint::Kind::AddrOf:
                add_obj(id_of(c.lhs), c.obj);
                break;
            case PtsConstraint::Kind::Copy: {
                int dst = id_of(c.lhs);
                int src = id_of(c.rhs);
                add_copy(dst, src);
                break;
            }
            case PtsConstraint::Kind::Load: {
                int dst = id_of(c.lhs);
                int ptr = id_of(c.rhs);
                deref_uses[ptr].push_back({dst, true});
                enqueue(ptr);
                break;
            }
            case PtsConstraint::Kind::Store: {
                int ptr = id_of(c.lhs);
                int src = id_of(c.rhs);
                deref_uses[ptr].push_back({src, false});
                enqueue(ptr);
                break;
            }
            }
        }
        for (const auto& site : cs.icall_sites)
            enqueue(id_of(site.fp));

        while (!work.empty()) {
            int v = work.front();
            work.pop_front();
            queued[v] = false;

            // Propagate along copy edges.
            for (int dst : copy_out[v]) {
                bool grew = false;
                for (PtsObj o : pts[v])
                    grew |= pts[dst].insert(o).second;
                if (grew)
                    enqueue(dst);
            }
            // Expand loads/stores through the slots v points to. Copies of
            // the use list and the points-to set keep this safe against the
            // interning done by slot_content.
            const auto uses = deref_uses[v];
            const auto objs = pts[v];
            for (auto [other, is_load] : uses) {
                for (PtsObj o : objs) {
                    if (o.kind != PtsObj::Kind::Slot)
                        continue;
                    int content = slot_content(o.index);
                    if (is_load)
                        add_copy(other, content);
                    else
                        add_copy(content, other);
                }
            }
            // Expand indirect calls whose pointer set grew.
            for (const auto& site : cs.icall_sites) {
                int fp = id_of(site.fp);
                if (fp != v)
                    continue;
                for (PtsObj o : std::set<PtsObj>(pts[fp]))
                    if (o.kind == PtsObj::Kind::Function)
                        expand_icall(site, o.index);
            }
        }

        PointsToResult res;
        res.sites = cs.icall_sites;
        res.site_candidates.resize(cs.icall_sites.size());
        for (const auto& [var, id] : var_ids) {
            std::set<int> fns;
            for (PtsObj o : pts[id])
                if (o.kind == PtsObj::Kind::Function)
                    fns.insert(o.index);
            res.var_functions[var] = std::move(fns);
        }
        for (const auto& site : cs.icall_sites) {
            std::vector<int>& cand = res.site_candidates[site.ordinal];
            auto it = var_ids.find(site.fp);
            if (it != var_ids.end()) {
                for (PtsObj o : pts[it->second]) {
                    if (o.kind != PtsObj::Kind::Function)
                        continue;
                    if (static_cast<int>(cs.prog->functions[o.index].params.size()) != site.arity)
                        continue;
                    cand.push_back(o.index);
                }
            }
            std::sort(cand.begin(), cand.end());
            if (cand.empty())
                res.warnings.push_back("icall in " + cs.prog->functions[site.fn].name +
                                       " resolves to no candidates");
        }
        return res;
    }
};

} // namespace

PointsToResult solve_points_to(const ConstraintSystem& cs) {
    Solver s(cs);
    return s.run();
}

TargetSpec feedback_targets(const Program& p, const PointsToResult& pts, const TargetSpec& spec,
                            std::vector<std::string>* warnings) {
    TargetSpec out = spec;

    std::set<int> target_fns;
    for (const auto& name : spec.stack_chain) {
        auto it = p.function_index.find(name);
        if (it != p.function_index.end())
            target_fns.insert(it->second);
    }
    LineTargets lt = resolve_line_targets(p, spec.lines);
    for (const auto& [fn, blocks] : lt.blocks)
        target_fns.insert(fn);

    for (const auto& site : pts.sites) {
        const auto& cand = pts.site_candidates[site.ordinal];
        bool hits_target = std::any_of(cand.begin(), cand.end(),
                                       [&](int c) { return target_fns.count(c) != 0; });
        if (!hits_target)
            continue;
        if (!site.loc) {
            if (warnings)
                warnings->push_back("icall to a target function in " + p.functions[site.fn].name +
                                    " has no source location; its call site cannot be colored");
            continue;
        }
        bool already =
            std::find(out.feedback_lines.begin(), out.feedback_lines.end(), *site.loc) !=
                out.feedback_lines.end() ||
            std::find(out.lines.begin(), out.lines.end(), *site.loc) != out.lines.end();
        if (!already)
            out.feedback_lines.push_back(*site.loc);
    }
    return out;
}

std::string dump_points_to(const Program& p, const PointsToResult& pts) {
    std::ostringstream os;
    for (const auto& site : pts.sites) {
        const auto& f = p.functions[site.fn];
        os << f.name << "." << f.blocks[site.block].label << "#" << site.instr << " -> {";
        const auto& cand = pts.site_candidates[site.ordinal];
        for (size_t i = 0; i < cand.size(); ++i) {
            if (i)
                os << ",";
            os << p.functions[cand[i]].name;
        }
        os << "}\n";
    }
    return os.str();
}

} // namespace colorgo

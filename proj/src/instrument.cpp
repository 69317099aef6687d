// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#include "colorgo/instrument.hpp"

#include <sstream>

namespace colorgo {

Instrumented instrument(std::shared_ptr<const Program> prog, const ColorMap& cm, const Icfg& icfg) {
    Instrumented ip;
    ip.program = std::move(prog);
    const Program& p = *ip.program;

    int site_id = 0;
    for (size_t fi = 0; fi < p.functions.size(); ++fi) {
        if (!cm.instrumented_functions.count(static_cast<int>(fi)))
            continue; // empty colored set: no distinction to check
        const auto& f = p.functions[fi];
        if (f.nosym)
            continue; // outside the compilation boundary: no check logic

        for (size_t bi = 0; bi < f.blocks.size(); ++bi) {
            const Instruction& t = f.blocks[bi].terminator();
            if (t.op != Opcode::BrCond && t.op != Opcode::Switch)
                continue;
            NodeRef node{static_cast<int>(fi), static_cast<int>(bi)};
            CheckPlan plan;
            plan.site_id = site_id++;
            plan.node = node;
            plan.is_switch = t.op == Opcode::Switch;
            for (int eid : icfg.out_of(node)) {
                const IntraEdge& e = icfg.edge(eid);
                SuccInfo s;
                s.edge_id = eid;
                s.to = {e.fn, e.to};
                s.colored_at_compile = cm.is_colored(s.to) && !cm.is_pruned(eid);
                s.kind = e.kind;
                s.case_value = e.case_value;
                plan.succs.push_back(s);
                if (e.kind == EdgeKind::Case)
                    plan.case_values.push_back(e.case_value);
            }
            ip.plans.emplace(node, std::move(plan));
        }
    }
    ip.plan_count = site_id;
    return ip;
}

std::string dump_checks(const Instrumented& ip, const Icfg& icfg) {
    std::ostringstream os;
    for (const auto& [node, plan] : ip.plans) {
        os << "site " << plan.site_id << " at " << icfg.node_label(node)
           << (plan.is_switch ? " (switch)" : " (branch)") << "\n";
        for (const auto& s : plan.succs) {
            os << "  ";
            if (s.kind == EdgeKind::Case)
                os << "case " << s.case_value;
            else
                os << edge_kind_name(s.kind);
            os << " -> " << icfg.node_label(s.to) << " edge " << s.edge_id
               << (s.colored_at_compile ? " [colored]" : " [uncolored]") << "\n";
        }
        if (plan.is_switch) {
            os << "  default predicate: ";
            if (plan.case_values.empty()) {
                os << "true\n";
            } else {
                for (size_t i = 0; i < plan.case_values.size(); ++i) {
                    if (i)
                        os << " and ";
                    os << "cond != " << plan.case_values[i];
                }
                os << "\n";
            }
        }
    }
    return os.str();
}

} // namespace colorgo

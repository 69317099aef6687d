// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#include "colorgo/cfg.hpp"

#include <algorithm>

namespace colorgo {

const char* edge_kind_name(EdgeKind k) {
    switch (k) {
    case EdgeKind::Uncond: return "uncond";
    case EdgeKind::True: return "true";
    case EdgeKind::False: return "false";
    case EdgeKind::Case: return "case";
    case EdgeKind::Default: return "default";
    }
    return "?";
}

std::vector<SuccDesc> terminator_successors(const FunctionDef& f, int block) {
    const Instruction& t = f.blocks[block].terminator();
    std::vector<SuccDesc> out;
    switch (t.op) {
    case Opcode::Br:
        out.push_back({t.label_a, EdgeKind::Uncond, 0});
        break;
    case Opcode::BrCond:
        out.push_back({t.label_a, EdgeKind::True, 0});
        out.push_back({t.label_b, EdgeKind::False, 0});
        break;
    case Opcode::Switch:
        for (const auto& c : t.cases)
            out.push_back({c.label, EdgeKind::Case, c.value});
        out.push_back({t.label_a, EdgeKind::Default, 0});
        break;
    default:
        break; // ret/abort: no intra successors
    }
    return out;
}

namespace {

// Postorder over the intra CFG from the entry block; unreachable blocks are
// left out.
void postorder_visit(const FunctionDef& f, int b, std::vector<bool>& seen, std::vector<int>& order) {
    seen[b] = true;
    for (const auto& s : terminator_successors(f, b))
        if (!seen[s.block])
            postorder_visit(f, s.block, seen, order);
    order.push_back(b);
}

} // namespace

std::vector<int> compute_idoms(const FunctionDef& f) {
    const int n = static_cast<int>(f.blocks.size());
    std::vector<bool> seen(n, false);
    std::vector<int> post;
    postorder_visit(f, f.entry_block, seen, post);

    std::vector<int> rpo(post.rbegin(), post.rend());
    std::vector<int> rpo_index(n, -1);
    for (size_t i = 0; i < rpo.size(); ++i)
        rpo_index[rpo[i]] = static_cast<int>(i);

    std::vector<std::vector<int>> preds(n);
    for (int b = 0; b < n; ++b) {
        if (!seen[b])
            continue;
        for (const auto& s : terminator_successors(f, b))
            preds[s.block].push_back(b);
    }

    std::vector<int> idom(n, -1);
    idom[f.entry_block] = f.entry_block;

    auto intersect = [&](int a, int b) {
        while (a != b) {
            while (rpo_index[a] > rpo_index[b])
                a = idom[a];
            while (rpo_index[b] > rpo_index[a])
                b = idom[b];
        }
        return a;
    };

    bool changed = true;
    while (changed) {
        changed = false;
        for (int b : rpo) {
            if (b == f.entry_block)
                continue;
            int new_idom = -1;
            for (int p : preds[b]) {
                if (idom[p] == -1)
                    continue;
                new_idom = new_idom == -1 ? p : intersect(p, new_idom);
            }
            if (new_idom != -1 && idom[b] != new_idom) {
                idom[b] = new_idom;
                changed = true;
            }
        }
    }
    return idom;
}

bool dominates(const std::vector<int>& idom, int a, int b) {
    if (idom[b] == -1 || idom[a] == -1)
        return false;
    int x = b;
    for (;;) {
        if (x == a)
            return true;
        if (idom[x] == x)
            return false;
        x = idom[x];
    }
}

std::set<std::pair<int, int>> find_back_edges(const FunctionDef& f) {
    std::set<std::pair<int, int>> out;
    std::vector<int> idom = compute_idoms(f);
    for (int b = 0; b < static_cast<int>(f.blocks.size()); ++b) {
        if (idom[b] == -1 && b != f.entry_block)
            continue; // unreachable
        for (const auto& s : terminator_successors(f, b))
            if (dominates(idom, s.block, b))
                out.insert({b, s.block});
    }
    return out;
}

Icfg build_icfg(std::shared_ptr<const Program> prog, const PointsToResult& pts) {
    Icfg g;
    g.prog = prog;
    const Program& p = *prog;

    g.back_edges_per_fn.resize(p.functions.size());
    for (size_t fi = 0; fi < p.functions.size(); ++fi)
        g.back_edges_per_fn[fi] = find_back_edges(p.functions[fi]);

    for (size_t fi = 0; fi < p.functions.size(); ++fi) {
        const auto& f = p.functions[fi];
        for (size_t bi = 0; bi < f.blocks.size(); ++bi) {
            NodeRef from{static_cast<int>(fi), static_cast<int>(bi)};
            for (const auto& s : terminator_successors(f, static_cast<int>(bi))) {
                IntraEdge e;
                e.id = static_cast<int>(g.intra_edges.size());
                e.fn = from.fn;
                e.from = from.block;
                e.to = s.block;
                e.kind = s.kind;
                e.case_value = s.case_value;
                e.back = g.back_edges_per_fn[fi].count({e.from, e.to}) != 0;
                g.out_edges[from].push_back(e.id);
                g.in_edges[{from.fn, e.to}].push_back(e.id);
                g.intra_edges.push_back(e);
            }
            // call and return edges
            for (size_t ii = 0; ii < f.blocks[bi].instrs.size(); ++ii) {
                const Instruction& in = f.blocks[bi].instrs[ii];
                if (in.op == Opcode::Call && in.callee_fn >= 0) {
                    g.call_edges.push_back({from, static_cast<int>(ii), in.callee_fn, false});
                } else if (in.op == Opcode::Icall) {
                    const std::vector<int>* cands =
                        pts.candidates_for(from.fn, from.block, static_cast<int>(ii));
                    if (!cands || cands->empty()) {
                        g.warnings.push_back("icall at " + g.node_label(from) + "#" +
                                             std::to_string(ii) + " has no points-to candidates");
                        continue;
                    }
                    for (int callee : *cands)
                        g.call_edges.push_back({from, static_cast<int>(ii), callee, true});
                }
            }
        }
    }

    // Return edges: callee exit blocks back to the call-site node.
    for (const auto& ce : g.call_edges) {
        const auto& callee = p.functions[ce.callee];
        for (size_t bi = 0; bi < callee.blocks.size(); ++bi)
            if (callee.blocks[bi].terminator().op == Opcode::Ret)
                g.return_edges.push_back({ce.callee, static_cast<int>(bi), ce.site});
    }
    return g;
}

CallGraph build_call_graph(const Icfg& icfg) {
    CallGraph cg;
    for (const auto& ce : icfg.call_edges) {
        cg.callees[ce.site.fn].insert(ce.callee);
        cg.call_blocks[{ce.site.fn, ce.callee}].insert(ce.site.block);
    }
    // forward reachability from the entry function
    std::vector<int> work{icfg.prog->entry_fn};
    while (!work.empty()) {
        int fn = work.back();
        work.pop_back();
        if (!cg.reachable.insert(fn).second)
            continue;
        auto it = cg.callees.find(fn);
        if (it != cg.callees.end())
            for (int c : it->second)
                work.push_back(c);
    }
    return cg;
}

} // namespace colorgo

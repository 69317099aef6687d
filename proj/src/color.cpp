// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#include "colorgo/color.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace colorgo {

namespace {

// All call-graph edges lying on some entry->fn path, computed from forward
// reachability and a backward sweep.
std::set<std::pair<int, int>> edges_on_paths_to(const Icfg& icfg, const CallGraph& cg, int target_fn) {
    std::map<int, std::set<int>> callers;
    for (const auto& [fn, cs] : cg.callees)
        for (int c : cs)
            callers[c].insert(fn);
    std::set<int> reaches_target;
    std::vector<int> work{target_fn};
    while (!work.empty()) {
        int fn = work.back();
        work.pop_back();
        if (!reaches_target.insert(fn).second)
            continue;
        for (int c : callers[fn])
            work.push_back(c);
    }
    std::set<std::pair<int, int>> out;
    for (const auto& [fn, cs] : cg.callees)
        for (int c : cs)
            if (cg.reachable.count(fn) && reaches_target.count(c))
                out.insert({fn, c});
    (void)icfg;
    return out;
}

} // namespace

FunctionTargets derive_function_targets(const Program& p, const TargetSpec& spec, const Icfg& icfg) {
    FunctionTargets out;
    CallGraph cg = build_call_graph(icfg);

    LineTargets user_lines = resolve_line_targets(p, spec.lines);
    LineTargets feedback_lines = resolve_line_targets(p, spec.feedback_lines);
    for (auto& w : user_lines.warnings)
        out.warnings.push_back(w);
    for (auto& w : feedback_lines.warnings)
        out.warnings.push_back(w);

    for (const auto& [fn, blocks] : user_lines.blocks) {
        out.color_seeds[fn].insert(blocks.begin(), blocks.end());
        for (int b : blocks)
            out.reach_targets.insert({fn, b});
    }
    for (const auto& [fn, blocks] : feedback_lines.blocks)
        out.color_seeds[fn].insert(blocks.begin(), blocks.end());

    if (!spec.stack_chain.empty()) {
        // Validate the chain and seed the callers' call-site blocks.
        std::vector<int> chain;
        for (const auto& name : spec.stack_chain) {
            auto it = p.function_index.find(name);
            if (it == p.function_index.end())
                throw Error("stack chain names unknown function '" + name + "'", "targets");
            chain.push_back(it->second);
        }
        if (!cg.reachable.count(chain.front()))
            throw Error("stack chain head '" + p.functions[chain.front()].name +
                            "' is unreachable from " + p.entry,
                        "targets");
        for (size_t i = 0; i + 1 < chain.size(); ++i) {
            auto it = cg.call_blocks.find({chain[i], chain[i + 1]});
            if (it == cg.call_blocks.end())
                throw Error("stack chain link " + p.functions[chain[i]].name + " -> " +
                                p.functions[chain[i + 1]].name + " has no call edge",
                            "targets");
            out.color_seeds[chain[i]].insert(it->second.begin(), it->second.end());
        }
    } else {
        // No stack trace given: treat every call site on some entry->owner
        // path as a coloration seed.
        for (const auto& [fn, blocks] : user_lines.blocks) {
            (void)blocks;
            if (!cg.reachable.count(fn))
                throw Error("target function '" + p.functions[fn].name + "' is unreachable from " +
                                p.entry,
                            "targets");
            for (const auto& [caller, callee] : edges_on_paths_to(icfg, cg, fn)) {
                const auto& cbs = cg.call_blocks[{caller, callee}];
                out.color_seeds[caller].insert(cbs.begin(), cbs.end());
            }
        }
        for (const auto& [fn, blocks] : feedback_lines.blocks) {
            (void)blocks;
            if (!cg.reachable.count(fn))
                out.warnings.push_back("feedback call-site function '" + p.functions[fn].name +
                                       "' is unreachable from " + p.entry);
        }
    }

    // Reachability of user line-target owners when a chain was given.
    if (!spec.stack_chain.empty()) {
        for (const auto& [fn, blocks] : user_lines.blocks) {
            (void)blocks;
            if (!cg.reachable.count(fn))
                throw Error("target function '" + p.functions[fn].name + "' is unreachable from " +
                                p.entry,
                            "targets");
        }
    }

    if (out.color_seeds.empty())
        throw Error("no function owns any target; nothing to direct towards", "targets");
    return out;
}

namespace {

// Backward closure from a function's seed blocks along intra edges, skipping
// back edges and pruned edges.
void color_function(const Icfg& icfg, int fn, const std::set<int>& seed_blocks,
                    const std::set<int>& pruned, std::set<NodeRef>& colored) {
    std::deque<int> work(seed_blocks.begin(), seed_blocks.end());
    std::set<int> seen(seed_blocks.begin(), seed_blocks.end());
    while (!work.empty()) {
        int b = work.front();
        work.pop_front();
        colored.insert({fn, b});
        auto it = icfg.in_edges.find({fn, b});
        if (it == icfg.in_edges.end())
            continue;
        for (int eid : it->second) {
            const IntraEdge& e = icfg.edge(eid);
            if (e.back || pruned.count(eid))
                continue;
            if (seen.insert(e.from).second)
                work.push_back(e.from);
        }
    }
}

void recompute(ColorMap& cm, const Icfg& icfg) {
    cm.colored.clear();
    for (const auto& [fn, seeds] : cm.seeds)
        color_function(icfg, fn, seeds, cm.pruned_edges, cm.colored);

    cm.deviation.clear();
    for (const NodeRef& n : cm.colored) {
        const auto& blk = icfg.prog->functions[n.fn].blocks[n.block];
        Opcode t = blk.terminator().op;
        if (t != Opcode::BrCond && t != Opcode::Switch)
            continue;
        bool any_colored = false, any_uncolored = false;
        for (int eid : icfg.out_of(n)) {
            if (cm.edge_leads_colored(icfg, eid))
                any_colored = true;
            else
                any_uncolored = true;
        }
        if (any_colored && any_uncolored)
            cm.deviation.insert(n);
    }

    for (const NodeRef& t : cm.targets)
        if (!cm.colored.count(t))
            throw Error("internal: target " + icfg.node_label(t) + " lost its color", "color");
}

} // namespace

ColorMap static_color(const Icfg& icfg, const FunctionTargets& targets) {
    ColorMap cm;
    cm.targets = targets.reach_targets;
    for (const auto& [fn, blocks] : targets.color_seeds)
        if (!blocks.empty())
            cm.seeds[fn] = blocks;
    recompute(cm, icfg);
    for (const NodeRef& n : cm.colored)
        cm.instrumented_functions.insert(n.fn);
    return cm;
}

void prune_edge(ColorMap& cm, int edge_id, const Icfg& icfg) {
    if (cm.pruned_edges.count(edge_id))
        throw Error("edge " + std::to_string(edge_id) + " is already pruned", "color");
    const IntraEdge& e = icfg.edge(edge_id);
    if (!cm.is_colored({e.fn, e.from}))
        throw Error("pruning an edge out of uncolored node " + icfg.node_label({e.fn, e.from}),
                    "color");
    cm.pruned_edges.insert(edge_id);
    recompute(cm, icfg);
}

std::string export_dot(const ColorMap& cm, const Icfg& icfg) {
    std::ostringstream os;
    os << "digraph colored_icfg {\n";
    os << "  rankdir=TB;\n";
    const Program& p = *icfg.prog;
    for (size_t fi = 0; fi < p.functions.size(); ++fi) {
        for (size_t bi = 0; bi < p.functions[fi].blocks.size(); ++bi) {
            NodeRef n{static_cast<int>(fi), static_cast<int>(bi)};
            os << "  \"" << icfg.node_label(n) << "\" [";
            if (cm.targets.count(n))
                os << "shape=doublecircle";
            else if (cm.deviation.count(n))
                os << "shape=diamond";
            else
                os << "shape=ellipse";
            if (cm.is_colored(n))
                os << ", style=filled, fillcolor=lightblue";
            os << "];\n";
        }
    }
    for (const auto& e : icfg.intra_edges) {
        os << "  \"" << icfg.node_label({e.fn, e.from}) << "\" -> \""
           << icfg.node_label({e.fn, e.to}) << "\" [label=\"";
        if (e.kind == EdgeKind::Case)
            os << "case " << e.case_value;
        else if (e.kind != EdgeKind::Uncond)
            os << edge_kind_name(e.kind);
        os << "\"";
        if (cm.is_pruned(e.id))
            os << ", style=dashed";
        if (e.back)
            os << ", color=gray";
        os << "];\n";
    }
    for (const auto& ce : icfg.call_edges) {
        NodeRef callee_entry{ce.callee, p.functions[ce.callee].entry_block};
        os << "  \"" << icfg.node_label(ce.site) << "\" -> \"" << icfg.node_label(callee_entry)
           << "\" [style=dotted, label=\"" << (ce.indirect ? "icall" : "call") << "\"];\n";
    }
    os << "}\n";
    return os.str();
}

std::string dump_colored(const ColorMap& cm, const Icfg& icfg) {
    std::ostringstream os;
    for (const NodeRef& n : cm.colored)
        os << icfg.node_label(n) << "\n";
    return os.str();
}

} // namespace colorgo

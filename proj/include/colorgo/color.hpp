// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "colorgo/cfg.hpp"
#include "colorgo/targets.hpp"

namespace colorgo {

// Output of target derivation: per-function coloration seeds (line-target
// blocks plus call-site blocks along the chain) and the campaign goal nodes
// (user target-line blocks only; chain call sites steer coloration but do
// not terminate a campaign).
struct FunctionTargets {
    std::map<int, std::set<int>> color_seeds;
    std::set<NodeRef> reach_targets;
    std::vector<std::string> warnings;
};

FunctionTargets derive_function_targets(const Program& p, const TargetSpec& spec, const Icfg& icfg);

// The colored iCFG. `pruned_edges` grows at runtime as branch constraints
// are proven infeasible; `colored` and `deviation` are recomputed after each
// prune. In conservative mode pruning is restricted to (edge, path-prefix)
// pairs and the global sets stay untouched.
struct ColorMap {
    std::set<NodeRef> colored;
    std::set<NodeRef> targets;   // campaign goals
    std::set<NodeRef> deviation; // colored br_cond/switch blocks with mixed successors
    std::set<int> pruned_edges;
    std::set<std::pair<int, uint64_t>> pruned_edge_prefixes;
    std::map<int, std::set<int>> seeds; // coloration seeds, kept for recomputation
    std::set<int> instrumented_functions; // non-empty colored set at compile time

    bool is_colored(NodeRef n) const { return colored.count(n) != 0; }
    bool is_pruned(int edge_id) const { return pruned_edges.count(edge_id) != 0; }
    bool is_pruned_for_prefix(int edge_id, uint64_t prefix_hash) const {
        return pruned_edge_prefixes.count({edge_id, prefix_hash}) != 0;
    }
    // Effective coloring of an edge's destination as the check logic sees it.
    bool edge_leads_colored(const Icfg& icfg, int edge_id) const {
        const IntraEdge& e = icfg.edge(edge_id);
        return !is_pruned(edge_id) && is_colored({e.fn, e.to});
    }
};

// Backward closure from the seeds along intra edges, refusing back edges and
// pruned edges. Functions without seeds stay uncolored and uninstrumented.
ColorMap static_color(const Icfg& icfg, const FunctionTargets& targets);

// Removes `edge_id` and every colored node whose colored paths to the seeds
// all traversed it. Throws if the edge is already pruned or its source is
// not colored. Targets are never removed.
void prune_edge(ColorMap& cm, int edge_id, const Icfg& icfg);

// GraphViz dump: colored nodes filled, targets double-circled, deviation
// nodes diamonds, pruned edges dashed, call edges dotted.
std::string export_dot(const ColorMap& cm, const Icfg& icfg);

// One sorted "fn.block" line per colored node, for tests and debugging.
std::string dump_colored(const ColorMap& cm, const Icfg& icfg);

} // namespace colorgo

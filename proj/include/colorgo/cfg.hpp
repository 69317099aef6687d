// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "colorgo/ir.hpp"
#include "colorgo/points_to.hpp"

namespace colorgo {

struct NodeRef {
    int fn = -1;
    int block = -1;
    auto operator<=>(const NodeRef&) const = default;
};

enum class EdgeKind { Uncond, True, False, Case, Default };
const char* edge_kind_name(EdgeKind k);

struct IntraEdge {
    int id = -1;
    int fn = -1;
    int from = -1;
    int to = -1;
    EdgeKind kind = EdgeKind::Uncond;
    uint32_t case_value = 0; // Case only
    bool back = false;       // head dominates tail
};

struct CallEdge {
    NodeRef site;
    int instr = -1;
    int callee = -1;
    bool indirect = false;
};

struct ReturnEdge {
    int callee = -1;
    int exit_block = -1; // block ending in ret within callee
    NodeRef return_to;   // the call-site node (execution resumes inside it)
};

struct Icfg {
    std::shared_ptr<const Program> prog;
    std::vector<IntraEdge> intra_edges;
    std::map<NodeRef, std::vector<int>> out_edges; // edge ids, deterministic order
    std::map<NodeRef, std::vector<int>> in_edges;
    std::vector<CallEdge> call_edges;
    std::vector<ReturnEdge> return_edges;
    std::vector<std::set<std::pair<int, int>>> back_edges_per_fn; // (from,to) block pairs
    std::vector<std::string> warnings;

    const IntraEdge& edge(int id) const { return intra_edges[id]; }
    std::string node_label(NodeRef n) const {
        return prog->functions[n.fn].name + "." + prog->functions[n.fn].blocks[n.block].label;
    }
    const std::vector<int>& out_of(NodeRef n) const {
        static const std::vector<int> none;
        auto it = out_edges.find(n);
        return it == out_edges.end() ? none : it->second;
    }
};

// Successor (block, kind, case value) triples of a block's terminator, in
// terminator order (true/false; default then cases for switch is NOT used —
// cases first, then default, matching instrumentation order).
struct SuccDesc {
    int block = -1;
    EdgeKind kind = EdgeKind::Uncond;
    uint32_t case_value = 0;
};
std::vector<SuccDesc> terminator_successors(const FunctionDef& f, int block);

// Immediate dominators per block (index into blocks); entry maps to itself,
// unreachable blocks map to -1. Cooper/Harvey/Kennedy over reverse postorder.
std::vector<int> compute_idoms(const FunctionDef& f);
bool dominates(const std::vector<int>& idom, int a, int b); // a dom b

// Natural-loop back edges: (from,to) block pairs where `to` dominates `from`.
std::set<std::pair<int, int>> find_back_edges(const FunctionDef& f);

// Builds the interprocedural CFG: intra edges mirror terminators, one call
// edge per direct call, one per (icall site, candidate). Icall sites with an
// empty candidate set are reported as warnings.
Icfg build_icfg(std::shared_ptr<const Program> prog, const PointsToResult& pts);

// Call-graph view over the call edges.
struct CallGraph {
    std::map<int, std::set<int>> callees;                         // fn -> fns
    std::map<std::pair<int, int>, std::set<int>> call_blocks;     // (caller,callee) -> blocks
    std::set<int> reachable;                                      // from program entry
};
CallGraph build_call_graph(const Icfg& icfg);

} // namespace colorgo

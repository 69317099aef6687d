// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#include "colorgo/targets.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace colorgo {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

TargetSpec parse_target_spec(std::string_view text) {
    TargetSpec spec;
    std::istringstream is{std::string(text)};
    std::string raw;
    bool in_stack = false;
    int lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';')
            continue;
        if (line == "stack:") {
            in_stack = true;
            continue;
        }
        if (in_stack) {
            if (line.find(':') != std::string::npos)
                throw Error("targets: unexpected '" + line + "' inside stack section (line " +
                                std::to_string(lineno) + ")",
                            "targets");
            spec.stack_chain.push_back(line);
            continue;
        }
        size_t colon = line.rfind(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 >= line.size())
            throw Error("targets: expected FILE:LINE at line " + std::to_string(lineno), "targets");
        SourceLoc loc;
        loc.file = trim(line.substr(0, colon));
        std::string num = trim(line.substr(colon + 1));
        try {
            loc.line = std::stoi(num);
        } catch (const std::exception&) {
            throw Error("targets: bad line number '" + num + "' at line " + std::to_string(lineno),
                        "targets");
        }
        if (loc.line < 1)
            throw Error("targets: line numbers start at 1 (line " + std::to_string(lineno) + ")",
                        "targets");
        spec.lines.push_back(std::move(loc));
    }
    if (spec.empty())
        throw Error("targets: no target lines or stack chain given", "targets");
    return spec;
}

TargetSpec load_target_spec(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw Error("targets: file not found: " + path, "targets");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_target_spec(ss.str());
}

std::string print_target_spec(const TargetSpec& spec) {
    std::ostringstream os;
    for (const auto& l : spec.lines)
        os << l.file << ":" << l.line << "\n";
    for (const auto& l : spec.feedback_lines)
        os << l.file << ":" << l.line << "\n";
    if (!spec.stack_chain.empty()) {
        os << "stack:\n";
        for (const auto& f : spec.stack_chain)
            os << f << "\n";
    }
    return os.str();
}

LineTargets resolve_line_targets(const Program& p, const std::vector<SourceLoc>& lines) {
    LineTargets out;
    for (const auto& want : lines) {
        bool matched = false;
        for (size_t fi = 0; fi < p.functions.size(); ++fi) {
            const auto& f = p.functions[fi];
            for (size_t bi = 0; bi < f.blocks.size(); ++bi) {
                for (const auto& in : f.blocks[bi].instrs) {
                    if (in.loc && *in.loc == want) {
                        out.blocks[static_cast<int>(fi)].insert(static_cast<int>(bi));
                        matched = true;
                    }
                }
            }
        }
        if (!matched)
            out.warnings.push_back("target line " + want.file + ":" + std::to_string(want.line) +
                                   " matches no instruction");
    }
    return out;
}

} // namespace colorgo

// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

#include "colorgo/ir.hpp"

namespace colorgo {

struct ParseError : Error {
    ParseError(const std::string& msg, int line_, int col_)
        : Error(msg, "parse"), line(line_), col(col_) {}
    int line = 0;
    int col = 0;
};

// Parses mini-IR text into a validated Program. Throws ParseError with
// 1-based line/column on syntax or invariant violations (duplicate
// function/label, unknown opcode or label, terminator misplacement, call
// arity mismatch, missing entry function).
Program parse_program(std::string_view text);

} // namespace colorgo

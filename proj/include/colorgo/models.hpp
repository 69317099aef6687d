// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "colorgo/sym.hpp"

namespace colorgo {

// Result of a library function model: the concrete return value plus an
// optional symbolic summary that encodes the function's control flow as an
// Ite chain over the scanned byte positions.
struct ModelResult {
    uint32_t ret = 0;
    SymExprPtr shadow;              // null = concrete-only
    std::optional<std::string> warning;
};

// Modeled C-library functions: strlen(s), strchr(s, c), memcmp(a, b, n).
// Pointers are flat-memory offsets; strchr returns the address of the first
// match (0 when absent). When a scan runs off the end of memory before the
// terminator, the model degrades to a concrete-only return with a warning.
ModelResult apply_function_model(const std::string& name,
                                 std::span<const uint32_t> args,
                                 std::span<const SymExprPtr> shadow_args,
                                 const std::vector<uint8_t>& memory,
                                 const std::unordered_map<uint32_t, SymExprPtr>& shadow_memory);

} // namespace colorgo

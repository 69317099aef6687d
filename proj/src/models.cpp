// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#include "colorgo/models.hpp"

namespace colorgo {

namespace {

SymExprPtr byte_shadow(uint32_t off, const std::vector<uint8_t>& memory,
                       const std::unordered_map<uint32_t, SymExprPtr>& shadow_memory) {
    auto it = shadow_memory.find(off);
    if (it != shadow_memory.end() && it->second)
        return it->second;
    return sym_const(memory[off], 8);
}

bool any_shadow(uint32_t begin, uint32_t end,
                const std::unordered_map<uint32_t, SymExprPtr>& shadow_memory) {
    for (uint32_t i = begin; i < end; ++i) {
        auto it = shadow_memory.find(i);
        if (it != shadow_memory.end() && it->second)
            return true;
    }
    return false;
}

// strlen: scan for the terminator. The summary encodes the first-zero
// position as an Ite chain bounded by the concrete terminator position.
ModelResult model_strlen(std::span<const uint32_t> args, std::span<const SymExprPtr>,
                         const std::vector<uint8_t>& memory,
                         const std::unordered_map<uint32_t, SymExprPtr>& shadow_memory) {
    ModelResult res;
    uint32_t s = args[0];
    uint32_t end = s;
    while (end < memory.size() && memory[end] != 0)
        ++end;
    if (end >= memory.size()) {
        res.ret = end - s;
        res.warning = "strlen scan ran off the end of memory; returning concrete-only";
        return res;
    }
    uint32_t len = end - s;
    res.ret = len;
    if (!any_shadow(s, end + 1, shadow_memory))
        return res; // fully concrete buffer
    SymExprPtr summary = sym_const(len, 32);
    for (uint32_t i = len; i-- > 0;) {
        SymExprPtr guard = sym_cmp(SymCmp::Eq, byte_shadow(s + i, memory, shadow_memory),
                                   sym_const(0, 8));
        summary = sym_ite(std::move(guard), sym_const(i, 32), std::move(summary));
    }
    res.shadow = std::move(summary);
    return res;
}

// strchr: return the address of the first occurrence of c (0 if absent).
// The summary guards each scanned position on s[i]==c, selecting s+i.
ModelResult model_strchr(std::span<const uint32_t> args, std::span<const SymExprPtr> shadow_args,
                         const std::vector<uint8_t>& memory,
                         const std::unordered_map<uint32_t, SymExprPtr>& shadow_memory) {
    ModelResult res;
    uint32_t s = args[0];
    uint8_t c = static_cast<uint8_t>(args[1]);
    uint32_t end = s;
    while (end < memory.size() && memory[end] != 0)
        ++end;
    if (end >= memory.size()) {
        uint32_t found = 0;
        for (uint32_t i = s; i < memory.size(); ++i)
            if (memory[i] == c) {
                found = i;
                break;
            }
        res.ret = found;
        res.warning = "strchr scan ran off the end of memory; returning concrete-only";
        return res;
    }
    res.ret = 0;
    for (uint32_t i = s; i <= end; ++i) { // the terminator itself is findable (c == 0)
        if (memory[i] == c) {
            res.ret = i;
            break;
        }
    }
    bool symbolic = any_shadow(s, end + 1, shadow_memory) || shadow_args[1] != nullptr;
    if (!symbolic)
        return res;
    SymExprPtr want =
        shadow_args[1] ? sym_extract(shadow_args[1], 7, 0) : sym_const(c, 8);
    SymExprPtr summary = sym_const(0, 32);
    uint32_t len = end - s;
    for (uint32_t i = len + 1; i-- > 0;) {
        SymExprPtr guard = sym_cmp(SymCmp::Eq, byte_shadow(s + i, memory, shadow_memory), want);
        summary = sym_ite(std::move(guard), sym_const(s + i, 32), std::move(summary));
    }
    res.shadow = std::move(summary);
    return res;
}

// memcmp: sign of the first differing byte within n bytes, as 0 / 1 / -1.
ModelResult model_memcmp(std::span<const uint32_t> args, std::span<const SymExprPtr>,
                         const std::vector<uint8_t>& memory,
                         const std::unordered_map<uint32_t, SymExprPtr>& shadow_memory) {
    ModelResult res;
    uint32_t a = args[0], b = args[1], n = args[2];
    if (static_cast<uint64_t>(a) + n > memory.size() || static_cast<uint64_t>(b) + n > memory.size())
        throw Error("memcmp reads past the end of memory", "model");
    uint32_t diff = n;
    for (uint32_t i = 0; i < n; ++i)
        if (memory[a + i] != memory[b + i]) {
            diff = i;
            break;
        }
    if (diff == n)
        res.ret = 0;
    else
        res.ret = memory[a + diff] < memory[b + diff] ? static_cast<uint32_t>(-1) : 1;
    if (!any_shadow(a, a + n, shadow_memory) && !any_shadow(b, b + n, shadow_memory))
        return res;
    SymExprPtr summary = sym_const(0, 32);
    for (uint32_t i = n; i-- > 0;) {
        SymExprPtr av = byte_shadow(a + i, memory, shadow_memory);
        SymExprPtr bv = byte_shadow(b + i, memory, shadow_memory);
        SymExprPtr sign = sym_ite(sym_cmp(SymCmp::Ult, av, bv),
                                  sym_const(static_cast<uint32_t>(-1), 32), sym_const(1, 32));
        summary = sym_ite(sym_cmp(SymCmp::Ne, av, bv), std::move(sign), std::move(summary));
    }
    res.shadow = std::move(summary);
    return res;
}

} // namespace

ModelResult apply_function_model(const std::string& name, std::span<const uint32_t> args,
                                 std::span<const SymExprPtr> shadow_args,
                                 const std::vector<uint8_t>& memory,
                                 const std::unordered_map<uint32_t, SymExprPtr>& shadow_memory) {
    if (name == "strlen") {
        if (args[0] >= memory.size())
            throw Error("strlen pointer out of range", "model");
        return model_strlen(args, shadow_args, memory, shadow_memory);
    }
    if (name == "strchr") {
        if (args[0] >= memory.size())
            throw Error("strchr pointer out of range", "model");
        return model_strchr(args, shadow_args, memory, shadow_memory);
    }
    if (name == "memcmp")
        return model_memcmp(args, shadow_args, memory, shadow_memory);
    throw Error("no model for function '" + name + "'", "model");
}

} // namespace colorgo

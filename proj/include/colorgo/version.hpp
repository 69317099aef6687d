// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace colorgo {
inline constexpr const char* kToolName = "colorgo-mini";
inline constexpr const char* kToolVersion = "0.1.0";
}

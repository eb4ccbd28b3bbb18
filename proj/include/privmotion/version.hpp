// Copyright (c) 2026 The privmotion authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace privmotion {

inline constexpr const char* kVersion = "0.1.0";

// Bump when the .pkck layout or the parameter naming scheme changes.
inline constexpr const char* kCheckpointFormat = "PKG1";

}  // namespace privmotion

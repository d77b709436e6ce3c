// Copyright (c) 2026 the depropose authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace depropose {

// Toolkit release string, reported by the CLI and stamped into dataset files.
inline constexpr const char* kToolkitVersion = "0.1.0";

// File-format versions. Readers reject files whose version is newer than the
// one they were built against, and refuse older versions explicitly rather
// than guessing at migrations.
inline constexpr int kConfigSchemaVersion = 1;
inline constexpr int kDatasetSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;

}  // namespace depropose

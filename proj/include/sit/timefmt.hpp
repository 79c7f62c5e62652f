//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace sit {

// NTFS timestamps are 100 ns ticks since 1601-01-01T00:00:00Z ("filetime").
// All timestamps in metadata, turtle and reports are rendered from this
// representation so the pipeline has a single canonical time format.

inline constexpr int64_t kTicksPerSecond = 10'000'000;
inline constexpr int64_t kUnixEpochTicks = 116'444'736'000'000'000; // 1601 -> 1970

// Exact conversion, UTC only, 7 fractional digits, suffix "Z".
std::string filetime_to_iso(int64_t filetime);

// ISO-8601 with millisecond precision, used for log lines.
std::string filetime_to_iso_millis(int64_t filetime);

// Accepts "YYYY-MM-DDTHH:MM:SS[.f{1..7}]Z". Returns nullopt on any
// malformed field or out-of-range component.
std::optional<int64_t> iso_to_filetime(const std::string& text);

// Current wall clock as filetime ticks.
int64_t now_filetime();

} // namespace sit

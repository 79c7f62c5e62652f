//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sit/obslog.hpp"
#include "sit/source.hpp"

namespace sit::selection {

// Criteria AND together within a rule; rules OR together in the config.
struct SelectionRule {
    std::optional<std::string> name_glob;
    std::optional<std::string> path_prefix;
    std::optional<uint64_t> size_min;
    std::optional<uint64_t> size_max;
    std::optional<std::string> extension; // no leading dot
    bool case_sensitive = false;
};

struct SelectionConfig {
    std::vector<SelectionRule> rules;
    std::string config_digest; // SHA256 of the exact config bytes
};

// Parses the JSON selection document. Throws BadJson on malformed input,
// EmptySelection when no rules are given, BadRule for a rule without
// criteria, with unknown keys, or with size_min > size_max.
SelectionConfig parse_config(std::span<const uint8_t> bytes);

// Glob with `*`, `?` and character classes (`[abc]`, `[a-z]`, `[!...]`).
bool glob_match(const std::string& pattern, const std::string& text, bool case_sensitive = false);

bool match_entry(const SelectionRule& rule, const source::FileEntry& entry);

// Entries matching any rule, in the source's canonical order, de-duplicated
// by (full_path, record_no). Logs the match count and the config digest on
// the selection log; per-record source events go to the source log.
std::vector<source::FileEntry> enumerate_matches(source::SourceHandle& handle,
                                                 const SelectionConfig& config,
                                                 obslog::LogSink* selection_log = nullptr,
                                                 obslog::LogSink* source_log = nullptr,
                                                 bool include_deleted = false);

} // namespace sit::selection

//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#include "sit/selection.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "sit/errors.hpp"
#include "sit/hashing.hpp"
#include "sit/strutil.hpp"

namespace sit::selection {

namespace {

constexpr size_t kMaxConfigBytes = 1 << 20;

char fold(char c, bool case_sensitive) {
    return case_sensitive ? c : ascii_lower(c);
}

// Character class starting at pattern[pos] == '['; returns npos when the
// class is unterminated (the '[' then matches literally).
size_t match_class(const std::string& pattern, size_t pos, char c, bool case_sensitive,
                   bool& matched) {
    size_t i = pos + 1;
    bool negate = false;
    if (i < pattern.size() && (pattern[i] == '!' || pattern[i] == '^')) {
        negate = true;
        ++i;
    }
    bool found = false;
    bool first = true;
    while (i < pattern.size() && (pattern[i] != ']' || first)) {
        char lo = pattern[i];
        if (i + 2 < pattern.size() && pattern[i + 1] == '-' && pattern[i + 2] != ']') {
            char hi = pattern[i + 2];
            if (fold(lo, case_sensitive) <= fold(c, case_sensitive) &&
                fold(c, case_sensitive) <= fold(hi, case_sensitive))
                found = true;
            i += 3;
        } else {
            if (fold(lo, case_sensitive) == fold(c, case_sensitive))
                found = true;
            ++i;
        }
        first = false;
    }
    if (i >= pattern.size())
        return std::string::npos;
    matched = negate ? !found : found;
    return i + 1;
}

} // namespace

bool glob_match(const std::string& pattern, const std::string& text, bool case_sensitive) {
    // Iterative wildcard match with backtracking over the last '*'.
    size_t p = 0, t = 0;
    size_t star_p = std::string::npos, star_t = 0;

    while (t < text.size()) {
        bool advanced = false;
        if (p < pattern.size()) {
            const char pc = pattern[p];
            if (pc == '*') {
                star_p = p++;
                star_t = t;
                continue;
            }
            if (pc == '?') {
                ++p;
                ++t;
                advanced = true;
            } else if (pc == '[') {
                bool matched = false;
                const size_t next = match_class(pattern, p, text[t], case_sensitive, matched);
                if (next == std::string::npos) {
                    if (fold('[', case_sensitive) == fold(text[t], case_sensitive)) {
                        ++p;
                        ++t;
                        advanced = true;
                    }
                } else if (matched) {
                    p = next;
                    ++t;
                    advanced = true;
                }
            } else if (fold(pc, case_sensitive) == fold(text[t], case_sensitive)) {
                ++p;
                ++t;
                advanced = true;
            }
        }
        if (!advanced) {
            if (star_p == std::string::npos)
                return false;
            p = star_p + 1;
            t = ++star_t;
        }
    }
    while (p < pattern.size() && pattern[p] == '*')
        ++p;
    return p == pattern.size();
}

SelectionConfig parse_config(std::span<const uint8_t> bytes) {
    if (bytes.size() > kMaxConfigBytes)
        raise(ErrorCode::BadJson, "config exceeds 1 MiB");

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::BadJson, e.what());
    }
    if (!doc.is_object() || !doc.contains("rules") || !doc["rules"].is_array())
        raise(ErrorCode::BadJson, "expected an object with a \"rules\" array");

    SelectionConfig config;
    config.config_digest = hashing::sha256_hex(bytes);

    size_t index = 0;
    for (const auto& item : doc["rules"]) {
        if (!item.is_object())
            raise(ErrorCode::BadRule, "rule " + std::to_string(index) + " is not an object");
        SelectionRule rule;
        for (const auto& [key, value] : item.items()) {
            if (key == "name_glob" && value.is_string())
                rule.name_glob = value.get<std::string>();
            else if (key == "path_prefix" && value.is_string())
                rule.path_prefix = value.get<std::string>();
            else if (key == "size_min" && value.is_number_unsigned())
                rule.size_min = value.get<uint64_t>();
            else if (key == "size_max" && value.is_number_unsigned())
                rule.size_max = value.get<uint64_t>();
            else if (key == "extension" && value.is_string())
                rule.extension = value.get<std::string>();
            else if (key == "case_sensitive" && value.is_boolean())
                rule.case_sensitive = value.get<bool>();
            else
                raise(ErrorCode::BadRule, "rule " + std::to_string(index) +
                                              ": unknown or mistyped key \"" + key + "\"");
        }
        if (!rule.name_glob && !rule.path_prefix && !rule.size_min && !rule.size_max &&
            !rule.extension)
            raise(ErrorCode::BadRule, "rule " + std::to_string(index) + " has no criteria");
        if (rule.size_min && rule.size_max && *rule.size_min > *rule.size_max)
            raise(ErrorCode::BadRule,
                  "rule " + std::to_string(index) + ": size_min exceeds size_max");
        config.rules.push_back(std::move(rule));
        ++index;
    }
    if (config.rules.empty())
        raise(ErrorCode::EmptySelection, "refusing to image nothing: no rules configured");
    return config;
}

bool match_entry(const SelectionRule& rule, const source::FileEntry& entry) {
    if (rule.name_glob && !glob_match(*rule.name_glob, entry.name, rule.case_sensitive))
        return false;
    if (rule.path_prefix) {
        if (rule.case_sensitive) {
            if (entry.full_path.rfind(*rule.path_prefix, 0) != 0)
                return false;
        } else if (!istarts_with_ascii(entry.full_path, *rule.path_prefix)) {
            return false;
        }
    }
    if (rule.size_min && entry.size_bytes < *rule.size_min)
        return false;
    if (rule.size_max && entry.size_bytes > *rule.size_max)
        return false;
    if (rule.extension) {
        const auto dot = entry.name.find_last_of('.');
        if (dot == std::string::npos)
            return false;
        const std::string ext = entry.name.substr(dot + 1);
        if (rule.case_sensitive ? ext != *rule.extension : !iequals_ascii(ext, *rule.extension))
            return false;
    }
    return true;
}

std::vector<source::FileEntry> enumerate_matches(source::SourceHandle& handle,
                                                 const SelectionConfig& config,
                                                 obslog::LogSink* selection_log,
                                                 obslog::LogSink* source_log,
                                                 bool include_deleted) {
    auto entries = handle.list_entries(source_log, include_deleted);

    std::vector<source::FileEntry> matches;
    std::set<std::pair<std::string, uint64_t>> seen;
    for (auto& entry : entries) {
        const bool matched = std::any_of(config.rules.begin(), config.rules.end(),
                                         [&](const SelectionRule& r) {
                                             return match_entry(r, entry);
                                         });
        if (!matched)
            continue;
        const auto key = std::make_pair(entry.full_path, entry.record_no.value_or(0));
        if (!seen.insert(key).second)
            continue;
        matches.push_back(std::move(entry));
    }

    if (selection_log) {
        selection_log->info("selection_done",
                            {{"matches", std::to_string(matches.size())},
                             {"entries", std::to_string(entries.size())},
                             {"config_digest", config.config_digest}},
                            true);
        if (matches.empty())
            selection_log->warn("selection_empty", {{"config_digest", config.config_digest}},
                                true);
    }
    return matches;
}

} // namespace sit::selection

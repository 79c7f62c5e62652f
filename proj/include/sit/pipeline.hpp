//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sit/artifact.hpp"
#include "sit/source.hpp"

namespace sit::pipeline {

enum class Stage {
    Acquire,
    Validate,
    Pack,
    Verify,
};

const char* to_string(Stage stage);

// Exit codes of the sit binary.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFindings = 2; // validation findings or verification failure
inline constexpr int kExitPartial = 3;  // resource limit hit, outputs preserved
inline constexpr int kExitFatalIo = 4;

struct RunPlan {
    std::vector<Stage> stages;
    std::optional<std::filesystem::path> source;
    source::SourceKind source_kind = source::SourceKind::Directory;
    std::optional<std::filesystem::path> config;
    std::filesystem::path out_dir;
    std::filesystem::path temp_dir;
    artifact::AcquisitionLimits limits;
    std::optional<std::string> urn;
    std::optional<int64_t> fixed_time; // filetime ticks
    bool include_deleted = false;
    bool quiet = false;
    bool in_stream_verify = false;
};

// Stage inputs/outputs live at fixed names in out_dir; rerunning a later
// stage needs nothing but these files.
std::filesystem::path backup_path(const std::filesystem::path& out_dir);
std::filesystem::path container_path(const std::filesystem::path& out_dir);
std::filesystem::path validation_report_path(const std::filesystem::path& out_dir);
std::filesystem::path verification_report_path(const std::filesystem::path& out_dir);

// Parses `sit <subcommand> [flags]`. Throws Error(Usage) with a message
// naming the offending flag or missing prerequisite. A help request
// returns the help text instead of a plan.
std::variant<RunPlan, std::string> parse_args(const std::vector<std::string>& args);

// Executes the planned stages in order and returns the process exit code.
// Stages after acquire never reopen the source.
int run(const RunPlan& plan);

} // namespace sit::pipeline

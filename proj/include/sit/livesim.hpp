//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sit::livesim {

enum class Trigger {
    AtStart,
    AfterAcquire,  // fires when the artifact log reports the target acquired
    AfterPipeline, // applies to container bytes after the pipeline finished
};

enum class Action {
    Overwrite,
    Append,
    Delete,
};

struct Mutation {
    Trigger trigger = Trigger::AtStart;
    Action action = Action::Overwrite;
    std::string target; // backslash path rooted at "\", as listed by the pipeline
    std::vector<uint8_t> data;
};

struct Scenario {
    std::filesystem::path staging;
    std::vector<Mutation> mutations;
};

// Throws ScenarioInvalid on schema errors or triggers referencing paths
// missing from the staging tree.
Scenario parse_scenario(const std::filesystem::path& json_path);

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct HarnessReport {
    std::map<std::string, std::string> expected_hashes; // path -> initial sha256
    std::map<std::string, std::string> observed;        // urn -> recorded sha256
    std::vector<CheckResult> conclusions;
    int pipeline_exit = -1;
    int verify_exit = -1;

    bool all_passed() const;
};

struct HarnessOptions {
    std::filesystem::path sit_binary;
    std::filesystem::path scenario_path;
    std::filesystem::path config;
    std::filesystem::path out_dir;
    bool quiet_child = true;
};

// Snapshots initial hashes, launches the pipeline as a child process,
// drives mutations off the tailed artifact log, applies post-pipeline
// tampering to the container, reruns verify and evaluates the soundness
// checks. The pipeline itself is only ever driven through its CLI.
HarnessReport run_scenario(const HarnessOptions& options);

std::string report_to_json(const HarnessReport& report);

// base64 (standard alphabet, padded); used by the scenario schema.
std::vector<uint8_t> base64_decode(const std::string& text);

} // namespace sit::livesim

//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sit/aff4.hpp"
#include "sit/obslog.hpp"

namespace sit::verify {

enum class VerdictResult {
    Pass,
    FailMismatch,
    FailMissingHash,
    FailUnreadable,
};

const char* to_string(VerdictResult result);

struct AlgorithmCheck {
    std::string expected; // empty when the metadata triple is missing
    std::string actual;
    bool equal = false;
};

// Per-artifact outcome of re-hashing stored bytes against the
// acquisition-time hashes. pass iff all three hashes are present and equal.
struct VerificationVerdict {
    std::string urn;
    VerdictResult result = VerdictResult::FailUnreadable;
    AlgorithmCheck md5;
    AlgorithmCheck sha1;
    AlgorithmCheck sha256;
};

struct VerificationReport {
    std::string container_urn;
    std::vector<VerificationVerdict> verdicts; // ascending artifact index
    bool all_passed = true;
};

struct ExpectedHashes {
    std::string md5;
    std::string sha1;
    std::string sha256;
};

// Extracts the segment into temp_dir, hashes the copy, compares against
// the recorded hashes and removes the temp file. Extraction problems
// yield a fail_unreadable verdict, never an exception. With in_stream the
// segment is hashed while reading, without a temp copy.
VerificationVerdict verify_artifact(aff4::ContainerReader& reader, const std::string& urn,
                                    const ExpectedHashes& expected,
                                    const std::filesystem::path& temp_dir,
                                    bool in_stream = false);

// Verifies every aff4:Image subject in the container, in ascending URN
// order, one console/log line per verdict.
VerificationReport verify_container(aff4::ContainerReader& reader,
                                    const std::filesystem::path& temp_dir,
                                    obslog::LogSink* log = nullptr, bool in_stream = false);

std::string report_to_json(const VerificationReport& report);
void write_report(const VerificationReport& report, const std::filesystem::path& path);

} // namespace sit::verify

//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#pragma once

#include <stdexcept>
#include <string>

namespace sit {

// One code per distinct failure the pipeline reacts to. Codes are part of
// the module contracts: tests assert on them, and the CLI maps them to
// exit codes and log lines.
enum class ErrorCode {
    NotFound,
    PermissionDenied,
    IoError,
    NotNtfs,
    BadGeometry,
    TornWrite,
    BadSignature,
    TruncatedAttribute,
    Overflow,
    BadJson,
    EmptySelection,
    BadRule,
    ArchiveUnreadable,
    CsvMalformed,
    RecordIncomplete,
    SyntaxError,
    UnknownPrefix,
    LengthMismatch,
    AlreadyFinalized,
    NotAff4,
    UnknownUrn,
    FatalArchiveError,
    ScenarioInvalid,
    PipelineCrashed,
    Usage,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace sit

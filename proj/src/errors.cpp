//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#include "sit/errors.hpp"

namespace sit {

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::PermissionDenied: return "PermissionDenied";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NotNtfs: return "NotNtfs";
    case ErrorCode::BadGeometry: return "BadGeometry";
    case ErrorCode::TornWrite: return "TornWrite";
    case ErrorCode::BadSignature: return "BadSignature";
    case ErrorCode::TruncatedAttribute: return "TruncatedAttribute";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::BadJson: return "BadJson";
    case ErrorCode::EmptySelection: return "EmptySelection";
    case ErrorCode::BadRule: return "BadRule";
    case ErrorCode::ArchiveUnreadable: return "ArchiveUnreadable";
    case ErrorCode::CsvMalformed: return "CsvMalformed";
    case ErrorCode::RecordIncomplete: return "RecordIncomplete";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownPrefix: return "UnknownPrefix";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::AlreadyFinalized: return "AlreadyFinalized";
    case ErrorCode::NotAff4: return "NotAff4";
    case ErrorCode::UnknownUrn: return "UnknownUrn";
    case ErrorCode::FatalArchiveError: return "FatalArchiveError";
    case ErrorCode::ScenarioInvalid: return "ScenarioInvalid";
    case ErrorCode::PipelineCrashed: return "PipelineCrashed";
    case ErrorCode::Usage: return "Usage";
    }
    return "UnknownError";
}

} // namespace sit

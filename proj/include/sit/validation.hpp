//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sit/artifact.hpp"
#include "sit/obslog.hpp"
#include "sit/rdf.hpp"

namespace sit::validation {

enum class FindingClass {
    MissingMetadata, // payload entry without a CSV row
    MissingArtifact, // ok CSV row without a payload entry
    BadFieldType,
    DuplicateId,
    SizeMismatch,
    CsvMalformed, // structural CSV damage; validation stops after reporting it
};

const char* to_string(FindingClass cls);

struct Finding {
    FindingClass cls = FindingClass::BadFieldType;
    std::optional<uint64_t> artifact_id;
    std::string detail;
};

struct ValidationReport {
    std::vector<Finding> findings;
    size_t checked_artifacts = 0;

    bool passed() const { return findings.empty(); }
};

// Cross-checks the backup archive: payload/metadata bijection, field
// types, payload lengths, duplicate ids. Throws ArchiveUnreadable when the
// ZIP itself cannot be read; structural CSV damage comes back as a
// CsvMalformed finding with the remaining checks skipped.
ValidationReport validate(const std::filesystem::path& archive_path,
                          obslog::LogSink* log = nullptr);

std::string report_to_json(const ValidationReport& report);
void write_report(const ValidationReport& report, const std::filesystem::path& path);

// Converts one ok record into its metadata triples, fixed predicate
// order, timestamps only when present. Throws RecordIncomplete for
// status=failed records: they stay documented in CSV and logs only.
std::vector<rdf::Triple> record_to_triples(const artifact::ArtifactRecord& record,
                                           const std::string& container_urn);

} // namespace sit::validation

//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#include "sit/validation.hpp"

#include <fstream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "sit/csv.hpp"
#include "sit/errors.hpp"
#include "sit/strutil.hpp"
#include "sit/timefmt.hpp"
#include "sit/zipio.hpp"

namespace sit::validation {

const char* to_string(FindingClass cls) {
    switch (cls) {
    case FindingClass::MissingMetadata: return "MissingMetadata";
    case FindingClass::MissingArtifact: return "MissingArtifact";
    case FindingClass::BadFieldType: return "BadFieldType";
    case FindingClass::DuplicateId: return "DuplicateId";
    case FindingClass::SizeMismatch: return "SizeMismatch";
    case FindingClass::CsvMalformed: return "CsvMalformed";
    }
    return "?";
}

namespace {

std::optional<uint64_t> payload_id(const std::string& entry_name) {
    const std::string prefix = artifact::kPayloadPrefix;
    if (entry_name.rfind(prefix, 0) != 0)
        return std::nullopt;
    const std::string digits = entry_name.substr(prefix.size());
    if (digits.size() != 6)
        return std::nullopt;
    uint64_t id = 0;
    for (char c : digits) {
        if (c < '0' || c > '9')
            return std::nullopt;
        id = id * 10 + static_cast<uint64_t>(c - '0');
    }
    return id;
}

uint64_t streamed_length(zipio::ZipReader& reader, const zipio::EntryInfo& entry) {
    auto stream = reader.open_stream(entry);
    std::vector<uint8_t> buf(1 << 16);
    uint64_t total = 0;
    while (true) {
        const size_t got = stream.read(buf);
        if (got == 0)
            break;
        total += got;
    }
    return total;
}

void log_finding(obslog::LogSink* log, const Finding& finding) {
    if (!log)
        return;
    obslog::KvList kv;
    kv.emplace_back("class", to_string(finding.cls));
    if (finding.artifact_id)
        kv.emplace_back("id", artifact_id_string(*finding.artifact_id));
    kv.emplace_back("detail", finding.detail);
    log->warn("finding", kv, true);
}

} // namespace

ValidationReport validate(const std::filesystem::path& archive_path, obslog::LogSink* log) {
    ValidationReport report;
    auto add = [&](FindingClass cls, std::optional<uint64_t> id, std::string detail) {
        Finding finding{cls, id, std::move(detail)};
        log_finding(log, finding);
        report.findings.push_back(std::move(finding));
    };

    zipio::ZipReader reader(archive_path); // throws ArchiveUnreadable

    // Payload inventory from the archive directory.
    std::map<uint64_t, const zipio::EntryInfo*> payloads;
    for (const auto& entry : reader.entries())
        if (const auto id = payload_id(entry.name))
            payloads[*id] = &entry;

    const auto* csv_entry = reader.find("metadata.csv");
    if (!csv_entry)
        raise(ErrorCode::ArchiveUnreadable,
              "archive has no metadata.csv: " + archive_path.string());

    std::vector<std::vector<std::string>> rows;
    try {
        const auto bytes = reader.read_all(*csv_entry);
        rows = csv::parse(bytes);
    } catch (const Error& e) {
        add(FindingClass::CsvMalformed, std::nullopt, e.what());
        report.checked_artifacts = payloads.size();
        return report;
    }

    if (rows.empty() || rows.front() != artifact::kCsvHeader) {
        add(FindingClass::CsvMalformed, std::nullopt, "metadata.csv header row mismatch");
        report.checked_artifacts = payloads.size();
        return report;
    }

    std::set<uint64_t> row_ids;
    std::map<uint64_t, artifact::ArtifactRecord> records;
    for (size_t i = 1; i < rows.size(); ++i) {
        auto parsed = artifact::parse_csv_row(rows[i]);
        if (const auto* error = std::get_if<std::string>(&parsed)) {
            // Use the raw id field for attribution when it is parseable.
            std::optional<uint64_t> id;
            try {
                id = std::stoull(rows[i][0]);
            } catch (...) {
            }
            add(FindingClass::BadFieldType, id, "row " + std::to_string(i) + ": " + *error);
            continue;
        }
        auto record = std::get<artifact::ArtifactRecord>(std::move(parsed));
        if (!row_ids.insert(record.artifact_id).second) {
            add(FindingClass::DuplicateId, record.artifact_id,
                "artifact_id appears more than once");
            continue;
        }
        records[record.artifact_id] = std::move(record);
    }

    for (const auto& [id, record] : records) {
        const auto payload = payloads.find(id);
        if (record.status == artifact::RecordStatus::Ok) {
            if (payload == payloads.end()) {
                add(FindingClass::MissingArtifact, id,
                    "no payload entry " + artifact::payload_name(id));
                continue;
            }
            uint64_t actual = 0;
            try {
                actual = streamed_length(reader, *payload->second);
            } catch (const Error& e) {
                raise(ErrorCode::ArchiveUnreadable,
                      "payload " + payload->second->name + " unreadable: " + e.what());
            }
            if (actual != record.size_bytes)
                add(FindingClass::SizeMismatch, id,
                    "payload is " + std::to_string(actual) + " bytes, metadata says " +
                        std::to_string(record.size_bytes));
        } else if (payload != payloads.end()) {
            add(FindingClass::MissingMetadata, id,
                "payload entry present for a failed acquisition");
        }
    }

    for (const auto& [id, entry] : payloads) {
        if (!row_ids.contains(id))
            add(FindingClass::MissingMetadata, id, "payload " + entry->name + " has no CSV row");
    }

    std::set<uint64_t> all_ids = row_ids;
    for (const auto& [id, entry] : payloads)
        all_ids.insert(id);
    report.checked_artifacts = all_ids.size();
    return report;
}

std::string report_to_json(const ValidationReport& report) {
    nlohmann::json doc;
    doc["passed"] = report.passed();
    doc["checked_artifacts"] = report.checked_artifacts;
    doc["findings"] = nlohmann::json::array();
    for (const auto& finding : report.findings) {
        nlohmann::json f;
        f["class"] = to_string(finding.cls);
        if (finding.artifact_id)
            f["artifact_id"] = *finding.artifact_id;
        else
            f["artifact_id"] = nullptr;
        f["detail"] = finding.detail;
        doc["findings"].push_back(std::move(f));
    }
    return doc.dump(2) + "\n";
}

void write_report(const ValidationReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        raise(ErrorCode::IoError, "cannot write " + path.string());
    out << report_to_json(report);
    if (!out.flush())
        raise(ErrorCode::IoError, "write failed: " + path.string());
}

std::vector<rdf::Triple> record_to_triples(const artifact::ArtifactRecord& record,
                                           const std::string& container_urn) {
    if (record.status != artifact::RecordStatus::Ok)
        raise(ErrorCode::RecordIncomplete,
              "failed record " + std::to_string(record.artifact_id) + " produces no triples");

    const std::string subject =
        container_urn + "/artifact/" + artifact_id_string(record.artifact_id);
    const std::string aff4 = rdf::kAff4Ns;

    std::vector<rdf::Triple> triples;
    auto literal = [&](const char* name, std::string lexical, const char* datatype) {
        triples.push_back(rdf::Triple{subject, aff4 + name,
                                      rdf::TypedLiteral{std::move(lexical), datatype}});
    };

    triples.push_back(rdf::Triple{subject, std::string(rdf::kRdfNs) + "type",
                                  rdf::Iri{aff4 + "Image"}});
    literal("originalFileName", record.source_path, rdf::kXsdString);
    literal("size", std::to_string(record.size_bytes), rdf::kXsdLong);
    literal("MD5", record.md5, rdf::kXsdString);
    literal("SHA1", record.sha1, rdf::kXsdString);
    literal("SHA256", record.sha256, rdf::kXsdString);
    if (record.created)
        literal("birthTime", filetime_to_iso(*record.created), rdf::kXsdDateTime);
    if (record.modified)
        literal("lastWritten", filetime_to_iso(*record.modified), rdf::kXsdDateTime);
    if (record.mft_changed)
        literal("mftChanged", filetime_to_iso(*record.mft_changed), rdf::kXsdDateTime);
    if (record.accessed)
        literal("lastAccessed", filetime_to_iso(*record.accessed), rdf::kXsdDateTime);
    literal("acquisitionTime", filetime_to_iso(record.acquired), rdf::kXsdDateTime);
    triples.push_back(
        rdf::Triple{subject, aff4 + "storedIn", rdf::Iri{container_urn}});
    return triples;
}

} // namespace sit::validation

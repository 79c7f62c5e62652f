//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#include "sit/artifact.hpp"

#include <chrono>

#include "sit/csv.hpp"
#include "sit/errors.hpp"
#include "sit/hashing.hpp"
#include "sit/strutil.hpp"
#include "sit/timefmt.hpp"

namespace sit::artifact {

namespace {

std::string format_opt_time(const std::optional<int64_t>& ticks) {
    return ticks ? filetime_to_iso(*ticks) : std::string();
}

bool is_hex_lower(const std::string& s, size_t expected_len) {
    if (s.size() != expected_len)
        return false;
    for (char c : s)
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')))
            return false;
    return true;
}

std::optional<uint64_t> parse_u64(const std::string& s) {
    if (s.empty() || s.size() > 20)
        return std::nullopt;
    uint64_t v = 0;
    for (char c : s) {
        if (c < '0' || c > '9')
            return std::nullopt;
        v = v * 10 + static_cast<uint64_t>(c - '0');
    }
    return v;
}

} // namespace

std::string payload_name(uint64_t artifact_id) {
    return kPayloadPrefix + artifact_id_string(artifact_id);
}

ArtifactRecord acquire_stream(ArtifactRecord record, source::ContentStream& stream,
                              zipio::ZipWriter& archive, const AcquisitionLimits& limits,
                              const Clock& clock, obslog::LogSink* log,
                              MemoryAccounting* accounting) {
    const size_t chunk_size = limits.chunk_size;
    std::vector<uint8_t> chunk(chunk_size);
    if (accounting)
        accounting->add(chunk_size);

    hashing::TripleHasher hasher;
    bool archive_entry_open = false;
    try {
        archive.begin_entry(payload_name(record.artifact_id), zipio::Method::Deflate,
                            record.size_bytes);
        archive_entry_open = true;

        uint64_t total = 0;
        while (true) {
            size_t got = 0;
            try {
                got = stream.read(chunk);
            } catch (const Error& e) {
                // Source failure: drop the payload, keep the record as a
                // documented failed acquisition.
                archive.abort_entry();
                archive_entry_open = false;
                record.status = RecordStatus::Failed;
                record.acquired = clock();
                if (log)
                    log->error("acquire_failed",
                               {{"id", artifact_id_string(record.artifact_id)},
                                {"path", record.source_path},
                                {"at_byte", std::to_string(total)},
                                {"error", e.what()}});
                if (accounting)
                    accounting->release(chunk_size);
                return record;
            }
            if (got == 0)
                break;
            total += got;
            hasher.update({chunk.data(), got});
            archive.write({chunk.data(), got});
        }

        const auto digest = hasher.finish();
        record.md5 = digest.md5;
        record.sha1 = digest.sha1;
        record.sha256 = digest.sha256;
        record.acquired = clock();
        record.size_bytes = total;
        record.status = RecordStatus::Ok;
        archive.end_entry();
        archive_entry_open = false;

        if (log)
            log->info("acquired",
                      {{"id", artifact_id_string(record.artifact_id)},
                       {"size", std::to_string(total)},
                       {"sha256", record.sha256},
                       {"path", record.source_path}},
                      true);
    } catch (const Error& e) {
        if (archive_entry_open)
            archive.abort_entry();
        if (accounting)
            accounting->release(chunk_size);
        throw Error(ErrorCode::FatalArchiveError, e.what());
    }

    if (accounting)
        accounting->release(chunk_size);
    return record;
}

ArtifactRecord acquire_one(source::SourceHandle& handle, const source::FileEntry& entry,
                           uint64_t artifact_id, zipio::ZipWriter& archive,
                           const AcquisitionLimits& limits, const Clock& clock,
                           obslog::LogSink* log, MemoryAccounting* accounting) {
    ArtifactRecord record;
    record.artifact_id = artifact_id;
    record.source_kind = handle.kind();
    record.source_path = entry.full_path;
    record.name = entry.name;
    record.size_bytes = entry.size_bytes;
    record.record_no = entry.record_no;
    record.created = entry.created;
    record.modified = entry.modified;
    record.mft_changed = entry.mft_changed;
    record.accessed = entry.accessed;
    record.attr_flags = entry.attr_flags;

    std::unique_ptr<source::ContentStream> stream;
    try {
        stream = handle.read_file_content(entry, limits.chunk_size);
    } catch (const Error& e) {
        record.status = RecordStatus::Failed;
        record.acquired = clock();
        if (log)
            log->error("acquire_failed", {{"id", artifact_id_string(artifact_id)},
                                          {"path", record.source_path},
                                          {"error", e.what()}});
        return record;
    }
    return acquire_stream(std::move(record), *stream, archive, limits, clock, log, accounting);
}

AcquisitionSummary acquire_all(source::SourceHandle& handle,
                               const std::vector<source::FileEntry>& matches,
                               zipio::ZipWriter& archive, const AcquisitionLimits& limits,
                               const Clock& clock, std::vector<ArtifactRecord>& records,
                               obslog::LogSink* log, MemoryAccounting* accounting) {
    using namespace std::chrono;
    const auto start = steady_clock::now();
    AcquisitionSummary summary;

    uint64_t next_id = 1;
    for (const auto& entry : matches) {
        const double elapsed = duration<double>(steady_clock::now() - start).count();
        if (limits.max_runtime_seconds && elapsed >= *limits.max_runtime_seconds) {
            summary.limit_hit = true;
            summary.skipped = matches.size() - (next_id - 1);
            if (log)
                log->warn("runtime_limit_hit",
                          {{"limit_sec", std::to_string(*limits.max_runtime_seconds)},
                           {"skipped", std::to_string(summary.skipped)}},
                          true);
            break;
        }

        auto record = acquire_one(handle, entry, next_id++, archive, limits, clock, log,
                                  accounting);
        if (record.status == RecordStatus::Ok)
            ++summary.ok;
        else
            ++summary.failed;
        records.push_back(std::move(record));

        // The backup is a valid ZIP after every artifact; a crash loses at
        // most the artifact in flight.
        archive.flush_directory();
    }

    summary.elapsed_seconds = duration<double>(steady_clock::now() - start).count();
    return summary;
}

const std::vector<std::string> kCsvHeader = {
    "artifact_id", "source_kind",  "source_path",     "name",
    "size_bytes",  "record_no",    "created_utc",     "modified_utc",
    "mft_changed_utc", "accessed_utc", "attr_flags_hex", "md5",
    "sha1",        "sha256",       "acquired_utc",    "status",
};

std::string write_metadata_csv(const std::vector<ArtifactRecord>& records) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(records.size() + 1);
    rows.push_back(kCsvHeader);
    for (const auto& r : records) {
        rows.push_back({
            std::to_string(r.artifact_id),
            source::to_string(r.source_kind),
            r.source_path,
            r.name,
            std::to_string(r.size_bytes),
            r.record_no ? std::to_string(*r.record_no) : std::string(),
            format_opt_time(r.created),
            format_opt_time(r.modified),
            format_opt_time(r.mft_changed),
            format_opt_time(r.accessed),
            to_hex_u32(r.attr_flags),
            r.md5,
            r.sha1,
            r.sha256,
            filetime_to_iso(r.acquired),
            r.status == RecordStatus::Ok ? "ok" : "failed",
        });
    }
    return csv::write_rows(rows);
}

std::variant<ArtifactRecord, std::string> parse_csv_row(const std::vector<std::string>& row) {
    if (row.size() != kCsvHeader.size())
        return "row has " + std::to_string(row.size()) + " fields, expected " +
               std::to_string(kCsvHeader.size());

    ArtifactRecord r;
    const auto id = parse_u64(row[0]);
    if (!id || *id == 0)
        return "artifact_id \"" + row[0] + "\" is not a positive integer";
    r.artifact_id = *id;

    if (row[1] == "ntfs_image")
        r.source_kind = source::SourceKind::NtfsImage;
    else if (row[1] == "directory")
        r.source_kind = source::SourceKind::Directory;
    else
        return "source_kind \"" + row[1] + "\" unknown";

    r.source_path = row[2];
    r.name = row[3];

    const auto size = parse_u64(row[4]);
    if (!size)
        return "size_bytes \"" + row[4] + "\" is not an integer";
    r.size_bytes = *size;

    if (!row[5].empty()) {
        const auto record_no = parse_u64(row[5]);
        if (!record_no)
            return "record_no \"" + row[5] + "\" is not an integer";
        r.record_no = *record_no;
    }

    const char* time_fields[4] = {"created_utc", "modified_utc", "mft_changed_utc",
                                  "accessed_utc"};
    std::optional<int64_t>* targets[4] = {&r.created, &r.modified, &r.mft_changed, &r.accessed};
    for (int i = 0; i < 4; ++i) {
        const std::string& value = row[6 + i];
        if (value.empty())
            continue;
        const auto ticks = iso_to_filetime(value);
        if (!ticks)
            return std::string(time_fields[i]) + " \"" + value + "\" is not ISO-8601 UTC";
        *targets[i] = *ticks;
    }

    const std::string& flags = row[10];
    if (flags.size() < 3 || flags[0] != '0' || flags[1] != 'x' ||
        !is_hex_lower(flags.substr(2), flags.size() - 2))
        return "attr_flags_hex \"" + flags + "\" is not 0x-prefixed lowercase hex";
    r.attr_flags = static_cast<uint32_t>(std::stoul(flags.substr(2), nullptr, 16));

    if (row[15] == "ok")
        r.status = RecordStatus::Ok;
    else if (row[15] == "failed")
        r.status = RecordStatus::Failed;
    else
        return "status \"" + row[15] + "\" unknown";

    if (r.status == RecordStatus::Ok) {
        if (!is_hex_lower(row[11], 32))
            return "md5 \"" + row[11] + "\" is not 32 lowercase hex chars";
        if (!is_hex_lower(row[12], 40))
            return "sha1 \"" + row[12] + "\" is not 40 lowercase hex chars";
        if (!is_hex_lower(row[13], 64))
            return "sha256 \"" + row[13] + "\" is not 64 lowercase hex chars";
    }
    r.md5 = row[11];
    r.sha1 = row[12];
    r.sha256 = row[13];

    const auto acquired = iso_to_filetime(row[14]);
    if (!acquired)
        return "acquired_utc \"" + row[14] + "\" is not ISO-8601 UTC";
    r.acquired = *acquired;
    return r;
}

} // namespace sit::artifact

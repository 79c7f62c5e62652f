//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sit/obslog.hpp"
#include "sit/source.hpp"
#include "sit/zipio.hpp"

namespace sit::artifact {

enum class RecordStatus {
    Ok,
    Failed,
};

// One acquisition-time metadata row. Timestamps are filetime ticks and
// render as ISO-8601 UTC in the CSV.
struct ArtifactRecord {
    uint64_t artifact_id = 0; // 1-based, dense
    source::SourceKind source_kind = source::SourceKind::Directory;
    std::string source_path;
    std::string name;
    uint64_t size_bytes = 0;
    std::optional<uint64_t> record_no;
    std::optional<int64_t> created;
    std::optional<int64_t> modified;
    std::optional<int64_t> mft_changed;
    std::optional<int64_t> accessed;
    uint32_t attr_flags = 0;
    std::string md5;
    std::string sha1;
    std::string sha256;
    int64_t acquired = 0;
    RecordStatus status = RecordStatus::Ok;
};

struct AcquisitionLimits {
    std::optional<uint64_t> max_memory_bytes;
    std::optional<double> max_runtime_seconds;
    size_t chunk_size = 1 << 20;
};

struct AcquisitionSummary {
    size_t ok = 0;
    size_t failed = 0;
    size_t skipped = 0;
    double elapsed_seconds = 0.0;
    bool limit_hit = false;
};

// Wall clock injected so acquired_utc is reproducible under --fixed-time.
using Clock = std::function<int64_t()>;

// Tracks buffer bytes attributable to acquisition; tests assert
// peak <= 2 * chunk_size + constant.
struct MemoryAccounting {
    uint64_t current = 0;
    uint64_t peak = 0;

    void add(uint64_t n) {
        current += n;
        peak = std::max(peak, current);
    }
    void release(uint64_t n) { current -= n; }
};

inline constexpr const char* kPayloadPrefix = "artifacts/";
std::string payload_name(uint64_t artifact_id);

// Streams the entry's content once into the archive while hashing; on a
// source read failure the payload entry is dropped and the record comes
// back status=failed. Archive write failures are fatal
// (FatalArchiveError).
ArtifactRecord acquire_one(source::SourceHandle& handle, const source::FileEntry& entry,
                           uint64_t artifact_id, zipio::ZipWriter& archive,
                           const AcquisitionLimits& limits, const Clock& clock,
                           obslog::LogSink* log = nullptr,
                           MemoryAccounting* accounting = nullptr);

// Stream-level core of acquire_one; `record` carries the metadata already
// copied from the entry. Exposed so failure injection can drive it with a
// synthetic stream.
ArtifactRecord acquire_stream(ArtifactRecord record, source::ContentStream& stream,
                              zipio::ZipWriter& archive, const AcquisitionLimits& limits,
                              const Clock& clock, obslog::LogSink* log = nullptr,
                              MemoryAccounting* accounting = nullptr);

// Artifacts processed in match order, archive directory flushed after
// each one. When max_runtime elapses the in-flight artifact finishes,
// the rest are skipped and limit_hit is set.
AcquisitionSummary acquire_all(source::SourceHandle& handle,
                               const std::vector<source::FileEntry>& matches,
                               zipio::ZipWriter& archive, const AcquisitionLimits& limits,
                               const Clock& clock, std::vector<ArtifactRecord>& records,
                               obslog::LogSink* log = nullptr,
                               MemoryAccounting* accounting = nullptr);

// The exact 16-column metadata table. Returned bytes go into the archive
// as `metadata.csv` (stored, for post-mortem readability).
extern const std::vector<std::string> kCsvHeader;
std::string write_metadata_csv(const std::vector<ArtifactRecord>& records);

// Typed parse of one data row; returns a field-level error message
// instead of a record when a value is malformed.
std::variant<ArtifactRecord, std::string> parse_csv_row(const std::vector<std::string>& row);

} // namespace sit::artifact

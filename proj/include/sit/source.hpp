//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sit/ntfs.hpp"
#include "sit/obslog.hpp"

namespace sit::source {

enum class SourceKind {
    NtfsImage,
    Directory,
};

const char* to_string(SourceKind kind);

struct ResidentContent {
    std::vector<uint8_t> bytes;
};
struct RunlistContent {
    std::vector<ntfs::DataRun> runs;
};
struct HostPathContent {
    std::filesystem::path path;
};
using ContentLocator = std::variant<ResidentContent, RunlistContent, HostPathContent>;

// One selectable file-system object. full_path is backslash-separated and
// rooted at "\" for both source kinds.
struct FileEntry {
    std::optional<uint64_t> record_no;
    std::string full_path;
    std::string name;
    uint64_t size_bytes = 0;
    std::optional<int64_t> created;
    std::optional<int64_t> modified;
    std::optional<int64_t> mft_changed;
    std::optional<int64_t> accessed;
    uint32_t attr_flags = 0;
    bool in_use = true;
    ContentLocator content;
};

// Re-readable byte stream of exactly size() bytes. read() returns 0 only
// at end of stream and throws IoError on any underlying failure.
class ContentStream {
public:
    virtual ~ContentStream() = default;
    virtual size_t read(std::span<uint8_t> out) = 0;
    virtual void reset() = 0;
    virtual uint64_t size() const = 0;
};

// Read-only view of an evidence source. Nothing reachable from a handle
// can mutate the underlying bytes: the image is opened read-only and the
// directory walk only ever reads.
class SourceHandle {
public:
    ~SourceHandle();
    SourceHandle(SourceHandle&&) noexcept;
    SourceHandle& operator=(SourceHandle&&) = delete;
    SourceHandle(const SourceHandle&) = delete;
    SourceHandle& operator=(const SourceHandle&) = delete;

    SourceKind kind() const { return kind_; }
    const std::optional<ntfs::VolumeGeometry>& geometry() const { return geometry_; }
    const std::filesystem::path& root() const { return root_; }

    // In-use, non-directory entries: ntfs_image in ascending MFT record
    // order (file-system metadata records excluded), directory trees in
    // lexicographic full-path order. Per-record problems are logged and
    // skipped; iteration never writes.
    std::vector<FileEntry> list_entries(obslog::LogSink* log = nullptr,
                                        bool include_deleted = false);

    std::unique_ptr<ContentStream> read_file_content(const FileEntry& entry,
                                                     size_t chunk_size = 1 << 20);

private:
    friend SourceHandle open_source(const std::filesystem::path&, SourceKind);
    SourceHandle() = default;

    void read_image_at(uint64_t offset, std::span<uint8_t> out);
    void read_mft_bytes(uint64_t offset, std::span<uint8_t> out);
    std::optional<ntfs::MftRecord> load_record(uint64_t record_no, obslog::LogSink* log);
    std::vector<FileEntry> list_ntfs(obslog::LogSink* log, bool include_deleted);
    std::vector<FileEntry> list_directory(obslog::LogSink* log);

    SourceKind kind_ = SourceKind::Directory;
    std::filesystem::path root_;
    std::optional<ntfs::VolumeGeometry> geometry_;
    std::FILE* image_ = nullptr;
    uint64_t image_size_ = 0;
    std::vector<ntfs::DataRun> mft_runs_;
    uint64_t mft_size_ = 0;
};

// Opens an evidence source with a read-only contract. For ntfs_image the
// boot sector is parsed and the MFT located; failures map to
// NotFound / PermissionDenied / NotNtfs.
SourceHandle open_source(const std::filesystem::path& path, SourceKind kind);

} // namespace sit::source

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
#include <vector>

namespace sit::zipio {

enum class Method : uint16_t {
    Stored = 0,
    Deflate = 8,
};

struct EntryInfo {
    std::string name;
    Method method = Method::Stored;
    uint64_t compressed_size = 0;
    uint64_t uncompressed_size = 0;
    uint32_t crc32 = 0;
    uint64_t local_header_offset = 0;
};

// Incremental ZIP writer with a rewritable central directory.
//
// flush_directory() appends the central directory + end record at the
// current data end and flushes, leaving a valid archive on disk; the next
// entry overwrites that directory in place. This is what makes the backup
// archive usable after a crash: the file is a readable ZIP at every flush
// boundary.
//
// Metadata is normalized for reproducible output: fixed DOS timestamps
// (1980-01-01), no extra fields (except ZIP64 when sizes/offsets require
// it), zero external attributes.
class ZipWriter {
public:
    struct Options {
        int deflate_level = 6;
        // Sizes/offsets at or past this get ZIP64 records. Kept below the
        // 4 GiB line so deflate expansion on incompressible data cannot
        // overflow a reserved 32-bit field. Tests lower it to exercise the
        // ZIP64 paths without multi-GiB fixtures.
        uint64_t zip64_threshold = 0xFFFF0000ull;
    };

    ZipWriter(const std::filesystem::path& path, Options options = {});
    ~ZipWriter();
    ZipWriter(const ZipWriter&) = delete;
    ZipWriter& operator=(const ZipWriter&) = delete;

    // expected_size is the caller's upper bound on the entry's uncompressed
    // size; it decides up front whether the local header carries ZIP64
    // fields (they cannot be added after the fact).
    void begin_entry(const std::string& name, Method method, uint64_t expected_size);
    void write(std::span<const uint8_t> chunk);
    EntryInfo end_entry();

    // Drop the in-flight entry; the archive state is as before begin_entry.
    void abort_entry();

    EntryInfo add_entry(const std::string& name, Method method, std::span<const uint8_t> bytes);

    void flush_directory();
    void finalize();
    bool finalized() const { return finalized_; }

    // Archive file size at the last flush_directory()/finalize();
    // truncating the file here yields a valid ZIP.
    uint64_t flush_boundary() const { return flush_boundary_; }

    const std::vector<EntryInfo>& entries() const { return entries_; }

private:
    struct Deflater;

    void write_raw(const void* data, size_t len);
    void seek_to(uint64_t offset);
    void write_directory();

    std::FILE* file_ = nullptr;
    Options options_;
    std::vector<EntryInfo> entries_;
    uint64_t data_end_ = 0;      // where the next local header goes
    uint64_t flush_boundary_ = 0;
    bool finalized_ = false;
    bool any_zip64_ = false;

    // in-flight entry state
    bool in_entry_ = false;
    EntryInfo current_;
    bool current_zip64_ = false;
    uint64_t current_header_size_ = 0;
    std::unique_ptr<Deflater> deflater_;
};

// Central-directory based reader for archives produced by ZipWriter (and
// ordinary single-volume ZIPs). Entry payloads are CRC-checked on read.
class ZipReader {
public:
    explicit ZipReader(const std::filesystem::path& path);
    ~ZipReader();
    ZipReader(const ZipReader&) = delete;
    ZipReader& operator=(const ZipReader&) = delete;

    const std::vector<EntryInfo>& entries() const { return entries_; }
    const EntryInfo* find(const std::string& name) const;

    std::vector<uint8_t> read_all(const EntryInfo& entry);

    // Streaming payload access; read() returns 0 exactly once, at a
    // CRC-verified end of stream.
    class EntryStream {
    public:
        size_t read(std::span<uint8_t> out);
        uint64_t remaining_uncompressed() const { return remaining_out_; }
        ~EntryStream();
        EntryStream(EntryStream&&) noexcept;
        EntryStream& operator=(EntryStream&&) = delete;

    private:
        friend class ZipReader;
        struct Inflater;
        EntryStream(ZipReader& reader, const EntryInfo& entry);

        ZipReader* reader_;
        const EntryInfo* entry_;
        uint64_t file_pos_ = 0;
        uint64_t remaining_in_ = 0;
        uint64_t remaining_out_ = 0;
        uint32_t crc_ = 0;
        bool done_ = false;
        std::unique_ptr<Inflater> inflater_;
        std::vector<uint8_t> in_buf_;
    };

    EntryStream open_stream(const EntryInfo& entry);

private:
    friend class EntryStream;
    uint64_t entry_data_offset(const EntryInfo& entry);
    size_t read_at(uint64_t offset, std::span<uint8_t> out);

    std::FILE* file_ = nullptr;
    uint64_t file_size_ = 0;
    std::vector<EntryInfo> entries_;
};

} // namespace sit::zipio

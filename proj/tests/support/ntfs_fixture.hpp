//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sit/ntfs.hpp"

namespace sit::testsupport {

// Builds a raw NTFS volume image byte-by-byte: boot sector, MFT records
// with update-sequence fixups, data clusters. Test-side counterpart of the
// production parser; it writes the documented on-disk layout directly and
// shares no code with the reader.
class NtfsImageBuilder {
public:
    struct Timestamps {
        int64_t created = 0;
        int64_t modified = 0;
        int64_t mft_changed = 0;
        int64_t accessed = 0;
    };

    struct Options {
        uint32_t bytes_per_sector = 512;
        uint32_t sectors_per_cluster = 8;
        uint64_t total_sectors = 32768; // 16 MiB
        uint32_t mft_record_size = 1024;
        uint64_t mft_lcn = 4;
        uint32_t max_records = 128;
    };

    explicit NtfsImageBuilder(Options options = {});

    uint32_t cluster_size() const { return options_.bytes_per_sector * options_.sectors_per_cluster; }
    const Options& options() const { return options_; }

    // Cluster allocation in the data area (after the MFT).
    uint64_t alloc_clusters(uint64_t count);
    void write_at_lcn(uint64_t lcn, std::span<const uint8_t> bytes);

    static Timestamps default_times();

    uint64_t add_resident_file(const std::string& name, std::span<const uint8_t> content,
                               Timestamps times = default_times(), uint32_t dos_flags = 0x20,
                               uint64_t parent = 5, bool in_use = true);

    // Content split over explicit runs; pass lcn = nullopt for a sparse
    // run. real_size may truncate into the final cluster.
    struct RunSpec {
        uint64_t clusters = 0;
        std::optional<uint64_t> lcn;
    };
    uint64_t add_nonresident_file(const std::string& name, const std::vector<RunSpec>& runs,
                                  std::span<const uint8_t> content, uint64_t real_size,
                                  Timestamps times = default_times(), uint32_t dos_flags = 0x20,
                                  uint16_t data_attr_flags = 0);

    // Content laid out contiguously is boring; this splits it into
    // `fragments` runs with gaps (including one backward jump).
    uint64_t add_fragmented_file(const std::string& name, std::span<const uint8_t> content,
                                 size_t fragments);

    uint64_t add_sparse_file(const std::string& name, uint64_t sparse_clusters,
                             uint64_t real_size);

    uint64_t add_directory(const std::string& name, uint64_t parent = 5);

    // $ATTRIBUTE_LIST base record whose unnamed $DATA lives in extension
    // records (one extent each).
    uint64_t add_attrlist_file(const std::string& name, std::span<const uint8_t> content,
                               uint64_t split_at_vcn);

    // Fault injection.
    void make_torn(uint64_t record_no);              // breaks one sector's USN word
    void set_parent(uint64_t record_no, uint64_t parent, uint16_t parent_seq);
    void set_in_use(uint64_t record_no, bool in_use);
    void set_data_attr_flags(uint64_t record_no, uint16_t flags); // encrypted/compressed bits
    void add_named_data_stream(uint64_t record_no, const std::string& stream_name,
                               std::span<const uint8_t> content);

    uint64_t next_record_no() const { return next_record_; }

    std::vector<uint8_t> build();
    void write_to(const std::filesystem::path& path);

private:
    struct PendingAttr {
        std::vector<uint8_t> bytes;
    };
    struct PendingRecord {
        uint64_t record_no = 0;
        uint16_t sequence = 1;
        uint16_t flags = 0x0001;
        std::vector<PendingAttr> attrs;
        bool torn = false;
    };

    PendingRecord& record(uint64_t record_no);
    uint64_t add_record(const std::string& name, uint64_t parent, uint16_t record_flags,
                        Timestamps times, uint32_t dos_flags);
    void append_std_info(PendingRecord& rec, Timestamps times, uint32_t dos_flags);
    void append_file_name(PendingRecord& rec, const std::string& name, uint64_t parent,
                          uint16_t parent_seq, Timestamps times, uint8_t name_space);
    void append_resident_data(PendingRecord& rec, std::span<const uint8_t> content,
                              const std::string& stream_name = "");
    void append_nonresident_data(PendingRecord& rec, const std::vector<RunSpec>& runs,
                                 uint64_t lowest_vcn, uint64_t real_size, uint64_t allocated,
                                 uint16_t attr_flags);
    std::vector<uint8_t> encode_runlist(const std::vector<RunSpec>& runs) const;
    std::vector<uint8_t> assemble_record(const PendingRecord& rec) const;

    Options options_;
    std::vector<uint8_t> image_;
    uint64_t next_free_lcn_ = 0;
    uint64_t next_record_ = 16; // 0..15 reserved for file-system metadata
    std::vector<PendingRecord> records_;
};

} // namespace sit::testsupport

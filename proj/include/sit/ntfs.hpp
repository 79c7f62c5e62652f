//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sit::ntfs {

// Attribute type codes used by this reader.
inline constexpr uint32_t kAttrStandardInformation = 0x10;
inline constexpr uint32_t kAttrAttributeList = 0x20;
inline constexpr uint32_t kAttrFileName = 0x30;
inline constexpr uint32_t kAttrData = 0x80;
inline constexpr uint32_t kAttrEnd = 0xFFFFFFFF;

// $DATA attribute flags.
inline constexpr uint16_t kAttrFlagCompressed = 0x0001;
inline constexpr uint16_t kAttrFlagEncrypted = 0x4000;
inline constexpr uint16_t kAttrFlagSparse = 0x8000;

// MFT record header flags.
inline constexpr uint16_t kRecordInUse = 0x0001;
inline constexpr uint16_t kRecordIsDirectory = 0x0002;

inline constexpr uint64_t kRootRecord = 5;
inline constexpr uint64_t kFirstUserRecord = 16; // 0..15 reserved for file-system metadata

struct VolumeGeometry {
    uint32_t bytes_per_sector = 0;
    uint32_t sectors_per_cluster = 0;
    uint32_t cluster_size = 0;
    uint64_t mft_lcn = 0;
    uint32_t mft_record_size = 0;
    uint64_t total_sectors = 0;

    uint64_t total_clusters() const { return total_sectors / sectors_per_cluster; }
};

// One extent of a non-resident attribute: cluster_count clusters either at
// an absolute LCN or, for sparse runs, not backed by storage at all.
struct DataRun {
    uint64_t cluster_count = 0;
    std::optional<uint64_t> lcn;

    bool operator==(const DataRun&) const = default;
};

// One non-resident $DATA extent as found in a single attribute header.
// data_size is meaningful only on the extent with lowest_vcn == 0.
struct DataExtent {
    uint64_t lowest_vcn = 0;
    uint64_t data_size = 0;
    uint64_t allocated_size = 0;
    std::vector<DataRun> runs;
};

struct AttrListDataRef {
    uint64_t starting_vcn = 0;
    uint64_t record_no = 0; // extension record holding the $DATA extent
};

struct MftRecord {
    uint64_t record_no = 0;
    uint16_t sequence = 0;
    bool in_use = false;
    bool is_directory = false;

    // $STANDARD_INFORMATION
    std::optional<int64_t> created;
    std::optional<int64_t> modified;
    std::optional<int64_t> mft_changed;
    std::optional<int64_t> accessed;
    uint32_t dos_attr_flags = 0;

    // preferred $FILE_NAME
    bool has_name = false;
    std::string name;
    uint8_t name_space = 0;
    uint64_t parent_record = 0;
    uint16_t parent_sequence = 0;

    // unnamed $DATA
    bool has_data = false;
    bool data_resident = false;
    std::vector<uint8_t> resident_data;
    std::vector<DataExtent> extents;
    uint64_t data_real_size = 0;
    bool data_compressed = false;
    bool data_encrypted = false;

    // stream/attribute situations this reader detects but does not follow
    bool has_ads = false;              // named $DATA stream present
    bool has_attribute_list = false;
    bool unsupported_spanning = false; // $ATTRIBUTE_LIST entries other than $DATA continuation
    std::vector<AttrListDataRef> data_continuations;
};

// Decodes the 512-byte volume boot sector. Throws NotNtfs for a wrong OEM
// id, BadGeometry for zero/implausible values.
VolumeGeometry parse_boot_sector(std::span<const uint8_t> sector);

// Serialization counterpart used by tests and fixtures; writes only the
// fields parse_boot_sector reads (plus the OEM id).
void write_boot_sector(std::span<uint8_t> sector, const VolumeGeometry& geometry);

// Replaces each sector's trailing update-sequence word with the
// corresponding array entry. Throws TornWrite when a trailing word does
// not match the USN, Overflow when the array itself is out of bounds. The
// input is never modified.
std::vector<uint8_t> apply_fixups(std::span<const uint8_t> record, uint32_t bytes_per_sector);

// Runlist decoding: (header nibble pair, unsigned length, signed LCN
// delta) tuples, 0x00-terminated. Offset size 0 means a sparse run.
std::vector<DataRun> decode_data_runs(std::span<const uint8_t> runlist);

// Parses a fixed-up MFT record. Throws BadSignature / TruncatedAttribute.
MftRecord parse_mft_record(std::span<const uint8_t> fixed, uint64_t record_no);

// Inputs to path resolution, one per parsed record.
struct PathNode {
    std::string name;
    uint64_t parent_record = 0;
    uint16_t parent_sequence = 0;
    uint16_t sequence = 0;
    bool is_directory = false;
    bool in_use = false;
    bool has_name = false;
};

// Builds full backslash paths by following parent references to the root
// (record 5). Entries with missing, deleted, stale or cyclic parents land
// under "\$Orphan\". Total: every node with a name gets a path.
std::map<uint64_t, std::string> resolve_paths(const std::map<uint64_t, PathNode>& nodes);

} // namespace sit::ntfs

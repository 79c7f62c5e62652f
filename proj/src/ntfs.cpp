//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#include "sit/ntfs.hpp"

#include <algorithm>
#include <cstring>

#include "sit/errors.hpp"
#include "sit/strutil.hpp"

namespace sit::ntfs {

namespace {

uint16_t read_u16(std::span<const uint8_t> b, size_t off) {
    return static_cast<uint16_t>(b[off] | (b[off + 1] << 8));
}
uint32_t read_u32(std::span<const uint8_t> b, size_t off) {
    return static_cast<uint32_t>(b[off]) | (static_cast<uint32_t>(b[off + 1]) << 8) |
           (static_cast<uint32_t>(b[off + 2]) << 16) | (static_cast<uint32_t>(b[off + 3]) << 24);
}
uint64_t read_u64(std::span<const uint8_t> b, size_t off) {
    return static_cast<uint64_t>(read_u32(b, off)) |
           (static_cast<uint64_t>(read_u32(b, off + 4)) << 32);
}

void write_u16(std::span<uint8_t> b, size_t off, uint16_t v) {
    b[off] = static_cast<uint8_t>(v);
    b[off + 1] = static_cast<uint8_t>(v >> 8);
}
void write_u64(std::span<uint8_t> b, size_t off, uint64_t v) {
    for (int i = 0; i < 8; ++i)
        b[off + i] = static_cast<uint8_t>(v >> (8 * i));
}

bool is_pow2(uint32_t v) {
    return v != 0 && (v & (v - 1)) == 0;
}

// Namespace preference when a record carries several $FILE_NAME
// attributes: Win32 first, DOS-only last.
int name_space_rank(uint8_t ns) {
    switch (ns) {
    case 1: return 0; // Win32
    case 0: return 1; // POSIX
    case 3: return 2; // Win32 + DOS
    case 2: return 3; // DOS
    default: return 4;
    }
}

constexpr uint8_t kOemNtfs[8] = {'N', 'T', 'F', 'S', ' ', ' ', ' ', ' '};

} // namespace

VolumeGeometry parse_boot_sector(std::span<const uint8_t> sector) {
    if (sector.size() < 512)
        raise(ErrorCode::NotNtfs, "boot sector shorter than 512 bytes");
    if (std::memcmp(sector.data() + 3, kOemNtfs, 8) != 0)
        raise(ErrorCode::NotNtfs, "OEM id is not \"NTFS    \"");

    VolumeGeometry g;
    g.bytes_per_sector = read_u16(sector, 0x0B);
    g.sectors_per_cluster = sector[0x0D];
    g.total_sectors = read_u64(sector, 0x28);
    g.mft_lcn = read_u64(sector, 0x30);
    const int8_t record_code = static_cast<int8_t>(sector[0x40]);

    switch (g.bytes_per_sector) {
    case 256: case 512: case 1024: case 2048: case 4096:
        break;
    default:
        raise(ErrorCode::BadGeometry, "bytes per sector " + std::to_string(g.bytes_per_sector));
    }
    if (!is_pow2(g.sectors_per_cluster))
        raise(ErrorCode::BadGeometry,
              "sectors per cluster " + std::to_string(g.sectors_per_cluster));
    g.cluster_size = g.bytes_per_sector * g.sectors_per_cluster;

    if (record_code == 0)
        raise(ErrorCode::BadGeometry, "MFT record size code is zero");
    if (record_code > 0)
        g.mft_record_size = static_cast<uint32_t>(record_code) * g.cluster_size;
    else
        g.mft_record_size = 1u << static_cast<uint32_t>(-record_code);

    if (g.total_sectors == 0)
        raise(ErrorCode::BadGeometry, "zero total sectors");
    if (g.mft_lcn == 0 || g.mft_lcn >= g.total_clusters())
        raise(ErrorCode::BadGeometry, "MFT LCN " + std::to_string(g.mft_lcn) + " out of range");
    if (g.mft_record_size == 0 || g.mft_record_size > (1u << 20) ||
        g.mft_record_size % g.bytes_per_sector != 0)
        raise(ErrorCode::BadGeometry, "MFT record size " + std::to_string(g.mft_record_size));
    return g;
}

void write_boot_sector(std::span<uint8_t> sector, const VolumeGeometry& geometry) {
    std::memcpy(sector.data() + 3, kOemNtfs, 8);
    write_u16(sector, 0x0B, static_cast<uint16_t>(geometry.bytes_per_sector));
    sector[0x0D] = static_cast<uint8_t>(geometry.sectors_per_cluster);
    write_u64(sector, 0x28, geometry.total_sectors);
    write_u64(sector, 0x30, geometry.mft_lcn);
    if (geometry.mft_record_size >= geometry.cluster_size) {
        sector[0x40] = static_cast<uint8_t>(geometry.mft_record_size / geometry.cluster_size);
    } else {
        uint32_t size = geometry.mft_record_size;
        int8_t code = 0;
        while (size > 1) {
            size >>= 1;
            --code;
        }
        sector[0x40] = static_cast<uint8_t>(code);
    }
    sector[510] = 0x55;
    sector[511] = 0xAA;
}

std::vector<uint8_t> apply_fixups(std::span<const uint8_t> record, uint32_t bytes_per_sector) {
    if (bytes_per_sector == 0 || record.size() % bytes_per_sector != 0 || record.empty())
        raise(ErrorCode::Overflow, "record length is not a multiple of the sector size");
    if (record.size() < 8)
        raise(ErrorCode::Overflow, "record too short for an update sequence header");

    const size_t sectors = record.size() / bytes_per_sector;
    const uint16_t usa_offset = read_u16(record, 4);
    const uint16_t usa_count = read_u16(record, 6);

    if (usa_count < sectors + 1)
        raise(ErrorCode::Overflow, "update sequence array does not cover all sectors");
    if (static_cast<size_t>(usa_offset) + 2 * static_cast<size_t>(usa_count) > record.size())
        raise(ErrorCode::Overflow, "update sequence array extends past the record");

    const uint16_t usn = read_u16(record, usa_offset);

    // Validate every sector before writing anything.
    for (size_t i = 0; i < sectors; ++i) {
        const size_t tail = (i + 1) * bytes_per_sector - 2;
        if (read_u16(record, tail) != usn)
            raise(ErrorCode::TornWrite,
                  "sector " + std::to_string(i) + " trailing word does not match the USN");
    }

    std::vector<uint8_t> fixed(record.begin(), record.end());
    for (size_t i = 0; i < sectors; ++i) {
        const size_t tail = (i + 1) * bytes_per_sector - 2;
        const uint16_t replacement = read_u16(record, usa_offset + 2 + 2 * i);
        write_u16(fixed, tail, replacement);
    }
    return fixed;
}

std::vector<DataRun> decode_data_runs(std::span<const uint8_t> runlist) {
    std::vector<DataRun> runs;
    size_t pos = 0;
    int64_t current_lcn = 0;

    while (true) {
        if (pos >= runlist.size())
            raise(ErrorCode::Overflow, "runlist missing terminator");
        const uint8_t header = runlist[pos++];
        if (header == 0x00)
            break;
        const unsigned length_size = header & 0x0F;
        const unsigned offset_size = (header >> 4) & 0x0F;
        if (length_size == 0 || length_size > 8 || offset_size > 8)
            raise(ErrorCode::Overflow, "invalid run header field sizes");
        if (pos + length_size + offset_size > runlist.size())
            raise(ErrorCode::Overflow, "run fields exceed remaining bytes");

        uint64_t count = 0;
        for (unsigned i = 0; i < length_size; ++i)
            count |= static_cast<uint64_t>(runlist[pos + i]) << (8 * i);
        pos += length_size;
        if (count == 0)
            raise(ErrorCode::Overflow, "zero-length run");

        DataRun run;
        run.cluster_count = count;
        if (offset_size > 0) {
            int64_t delta = 0;
            for (unsigned i = 0; i < offset_size; ++i)
                delta |= static_cast<int64_t>(runlist[pos + i]) << (8 * i);
            // sign-extend from the top bit of the last byte
            if (runlist[pos + offset_size - 1] & 0x80)
                delta |= ~((static_cast<int64_t>(1) << (8 * offset_size)) - 1);
            pos += offset_size;
            current_lcn += delta;
            if (current_lcn < 0)
                raise(ErrorCode::Overflow, "runlist walks to a negative LCN");
            run.lcn = static_cast<uint64_t>(current_lcn);
        }
        // offset_size == 0: sparse run; the LCN base is unchanged.
        runs.push_back(run);
    }
    return runs;
}

MftRecord parse_mft_record(std::span<const uint8_t> fixed, uint64_t record_no) {
    if (fixed.size() < 0x18)
        raise(ErrorCode::BadSignature, "record too short");
    if (std::memcmp(fixed.data(), "FILE", 4) != 0) {
        char sig[5] = {0};
        std::memcpy(sig, fixed.data(), 4);
        raise(ErrorCode::BadSignature, "record " + std::to_string(record_no) + " signature \"" +
                                           std::string(sig, 4) + "\"");
    }

    MftRecord rec;
    rec.record_no = record_no;
    rec.sequence = read_u16(fixed, 0x10);
    const uint16_t flags = read_u16(fixed, 0x16);
    rec.in_use = (flags & kRecordInUse) != 0;
    rec.is_directory = (flags & kRecordIsDirectory) != 0;

    const uint16_t attrs_offset = read_u16(fixed, 0x14);
    if (attrs_offset < 0x18 || attrs_offset >= fixed.size())
        raise(ErrorCode::TruncatedAttribute, "attribute offset out of bounds");

    int best_name_rank = 99;
    size_t off = attrs_offset;
    while (true) {
        if (off + 4 > fixed.size())
            raise(ErrorCode::TruncatedAttribute, "attribute list runs past the record");
        const uint32_t type = read_u32(fixed, off);
        if (type == kAttrEnd)
            break;
        if (off + 16 > fixed.size())
            raise(ErrorCode::TruncatedAttribute, "attribute header truncated");
        const uint32_t attr_len = read_u32(fixed, off + 4);
        if (attr_len < 16 || off + attr_len > fixed.size())
            raise(ErrorCode::TruncatedAttribute,
                  "attribute length " + std::to_string(attr_len) + " out of bounds");
        const std::span<const uint8_t> attr = fixed.subspan(off, attr_len);
        const bool non_resident = attr[8] != 0;
        const uint8_t name_length = attr[9];
        const uint16_t name_offset = read_u16(attr, 10);
        const uint16_t attr_flags = read_u16(attr, 12);

        auto resident_value = [&]() -> std::span<const uint8_t> {
            if (non_resident || attr.size() < 0x18)
                raise(ErrorCode::TruncatedAttribute, "expected resident attribute");
            const uint32_t value_length = read_u32(attr, 0x10);
            const uint16_t value_offset = read_u16(attr, 0x14);
            if (static_cast<size_t>(value_offset) + value_length > attr.size())
                raise(ErrorCode::TruncatedAttribute, "resident value out of bounds");
            return attr.subspan(value_offset, value_length);
        };

        switch (type) {
        case kAttrStandardInformation: {
            const auto value = resident_value();
            if (value.size() >= 0x20) {
                rec.created = static_cast<int64_t>(read_u64(value, 0x00));
                rec.modified = static_cast<int64_t>(read_u64(value, 0x08));
                rec.mft_changed = static_cast<int64_t>(read_u64(value, 0x10));
                rec.accessed = static_cast<int64_t>(read_u64(value, 0x18));
            }
            if (value.size() >= 0x24)
                rec.dos_attr_flags = read_u32(value, 0x20);
            break;
        }
        case kAttrFileName: {
            const auto value = resident_value();
            if (value.size() < 0x42)
                raise(ErrorCode::TruncatedAttribute, "$FILE_NAME value truncated");
            const uint8_t chars = value[0x40];
            const uint8_t ns = value[0x41];
            if (0x42 + 2 * static_cast<size_t>(chars) > value.size())
                raise(ErrorCode::TruncatedAttribute, "$FILE_NAME name truncated");
            const int rank = name_space_rank(ns);
            if (rank < best_name_rank) {
                best_name_rank = rank;
                rec.has_name = true;
                rec.name = utf16le_to_utf8(value.subspan(0x42, 2 * static_cast<size_t>(chars)));
                rec.name_space = ns;
                const uint64_t parent_ref = read_u64(value, 0x00);
                rec.parent_record = parent_ref & 0x0000FFFFFFFFFFFFull;
                rec.parent_sequence = static_cast<uint16_t>(parent_ref >> 48);
            }
            break;
        }
        case kAttrData: {
            if (name_length != 0) {
                rec.has_ads = true;
                break;
            }
            if (attr_flags & kAttrFlagCompressed)
                rec.data_compressed = true;
            if (attr_flags & kAttrFlagEncrypted)
                rec.data_encrypted = true;
            if (!non_resident) {
                const auto value = resident_value();
                rec.has_data = true;
                rec.data_resident = true;
                rec.resident_data.assign(value.begin(), value.end());
                rec.data_real_size = value.size();
            } else {
                if (attr.size() < 0x40)
                    raise(ErrorCode::TruncatedAttribute, "non-resident header truncated");
                DataExtent extent;
                extent.lowest_vcn = read_u64(attr, 0x10);
                const uint16_t run_offset = read_u16(attr, 0x20);
                extent.allocated_size = read_u64(attr, 0x28);
                extent.data_size = read_u64(attr, 0x30);
                if (run_offset >= attr.size())
                    raise(ErrorCode::TruncatedAttribute, "runlist offset out of bounds");
                extent.runs = decode_data_runs(attr.subspan(run_offset));
                rec.has_data = true;
                rec.data_resident = false;
                if (extent.lowest_vcn == 0)
                    rec.data_real_size = extent.data_size;
                rec.extents.push_back(std::move(extent));
            }
            break;
        }
        case kAttrAttributeList: {
            rec.has_attribute_list = true;
            if (non_resident) {
                // A non-resident $ATTRIBUTE_LIST would need cluster reads
                // during record parsing; detected and left to the caller.
                rec.unsupported_spanning = true;
                break;
            }
            const auto value = resident_value();
            size_t p = 0;
            while (p + 26 <= value.size()) {
                const uint32_t entry_type = read_u32(value, p);
                const uint16_t entry_len = read_u16(value, p + 4);
                if (entry_len < 26 || p + entry_len > value.size())
                    raise(ErrorCode::TruncatedAttribute, "$ATTRIBUTE_LIST entry truncated");
                const uint8_t entry_name_len = value[p + 6];
                const uint64_t starting_vcn = read_u64(value, p + 8);
                const uint64_t base_ref = read_u64(value, p + 16) & 0x0000FFFFFFFFFFFFull;
                if (base_ref != record_no) {
                    if (entry_type == kAttrData && entry_name_len == 0)
                        rec.data_continuations.push_back(AttrListDataRef{starting_vcn, base_ref});
                    else
                        rec.unsupported_spanning = true;
                }
                p += entry_len;
            }
            break;
        }
        default:
            break;
        }
        off += attr_len;
    }

    std::sort(rec.data_continuations.begin(), rec.data_continuations.end(),
              [](const AttrListDataRef& a, const AttrListDataRef& b) {
                  return a.starting_vcn < b.starting_vcn;
              });
    return rec;
}

std::map<uint64_t, std::string> resolve_paths(const std::map<uint64_t, PathNode>& nodes) {
    std::map<uint64_t, std::string> paths;

    // Recursive walk with memoization; any degenerate parent chain routes
    // the entry under the synthetic orphan directory.
    auto resolve = [&](auto&& self, uint64_t record_no,
                       std::vector<uint64_t>& trail) -> std::string {
        if (record_no == kRootRecord)
            return "\\";
        auto cached = paths.find(record_no);
        if (cached != paths.end())
            return cached->second;

        const auto it = nodes.find(record_no);
        if (it == nodes.end())
            return ""; // caller decides: unknown record
        const PathNode& node = it->second;
        const std::string leaf = node.has_name ? node.name : ("#" + std::to_string(record_no));

        std::string parent_path;
        const bool cyclic =
            std::find(trail.begin(), trail.end(), node.parent_record) != trail.end();
        const auto parent_it = nodes.find(node.parent_record);
        bool parent_ok = !cyclic && node.parent_record != record_no;
        if (parent_ok && node.parent_record != kRootRecord) {
            parent_ok = parent_it != nodes.end() && parent_it->second.is_directory &&
                        parent_it->second.in_use;
            if (parent_ok && node.parent_sequence != 0 &&
                parent_it->second.sequence != node.parent_sequence)
                parent_ok = false; // stale reference: the parent record was reused
        }

        std::string path;
        if (!parent_ok) {
            path = "\\$Orphan\\" + leaf;
        } else if (node.parent_record == kRootRecord) {
            path = "\\" + leaf;
        } else {
            trail.push_back(record_no);
            parent_path = self(self, node.parent_record, trail);
            trail.pop_back();
            if (parent_path.empty())
                path = "\\$Orphan\\" + leaf;
            else if (parent_path.back() == '\\')
                path = parent_path + leaf;
            else
                path = parent_path + "\\" + leaf;
        }
        paths[record_no] = path;
        return path;
    };

    for (const auto& [record_no, node] : nodes) {
        std::vector<uint64_t> trail;
        if (record_no == kRootRecord) {
            paths[record_no] = "\\";
            continue;
        }
        resolve(resolve, record_no, trail);
    }
    return paths;
}

} // namespace sit::ntfs

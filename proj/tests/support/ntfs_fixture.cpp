//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#include "ntfs_fixture.hpp"

#include <cassert>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "sit/timefmt.hpp"

namespace sit::testsupport {

namespace {

void put_u16(std::vector<uint8_t>& b, size_t off, uint16_t v) {
    b[off] = static_cast<uint8_t>(v);
    b[off + 1] = static_cast<uint8_t>(v >> 8);
}
void put_u32(std::vector<uint8_t>& b, size_t off, uint32_t v) {
    for (int i = 0; i < 4; ++i)
        b[off + i] = static_cast<uint8_t>(v >> (8 * i));
}
void put_u64(std::vector<uint8_t>& b, size_t off, uint64_t v) {
    for (int i = 0; i < 8; ++i)
        b[off + i] = static_cast<uint8_t>(v >> (8 * i));
}

size_t align8(size_t n) {
    return (n + 7) & ~size_t{7};
}

std::vector<uint8_t> utf16le(const std::string& ascii) {
    std::vector<uint8_t> out;
    out.reserve(ascii.size() * 2);
    for (char c : ascii) {
        out.push_back(static_cast<uint8_t>(c));
        out.push_back(0);
    }
    return out;
}

// Attribute header skeleton: type, total length, resident flag, name
// length/offset, flags, id.
std::vector<uint8_t> attr_header(uint32_t type, bool non_resident, size_t total_len,
                                 uint16_t attr_flags, uint16_t attr_id) {
    std::vector<uint8_t> h(non_resident ? 0x40 : 0x18, 0);
    put_u32(h, 0x00, type);
    put_u32(h, 0x04, static_cast<uint32_t>(total_len));
    h[0x08] = non_resident ? 1 : 0;
    h[0x09] = 0; // name length, patched by named-stream writer
    put_u16(h, 0x0A, 0);
    put_u16(h, 0x0C, attr_flags);
    put_u16(h, 0x0E, attr_id);
    return h;
}

} // namespace

NtfsImageBuilder::NtfsImageBuilder(Options options) : options_(options) {
    image_.assign(options_.total_sectors * options_.bytes_per_sector, 0);

    const uint64_t mft_bytes = static_cast<uint64_t>(options_.max_records) * options_.mft_record_size;
    const uint64_t mft_clusters = (mft_bytes + cluster_size() - 1) / cluster_size();
    next_free_lcn_ = options_.mft_lcn + mft_clusters;

    // Record 0: the MFT itself, one contiguous run over its own region.
    PendingRecord mft;
    mft.record_no = 0;
    mft.flags = 0x0001;
    append_std_info(mft, default_times(), 0x06);
    append_file_name(mft, "$MFT", 5, 1, default_times(), 3);
    append_nonresident_data(mft, {{mft_clusters, options_.mft_lcn}}, 0, mft_bytes,
                            mft_clusters * cluster_size(), 0);
    records_.push_back(std::move(mft));

    // Reserved metadata records 1..15: parseable in-use placeholders so an
    // enumeration walk sees realistic content there.
    const char* reserved[] = {"$MFTMirr", "$LogFile", "$Volume", "$AttrDef", ".",
                              "$Bitmap",  "$Boot",    "$BadClus", "$Secure", "$UpCase",
                              "$Extend"};
    for (uint64_t no = 1; no <= 11; ++no) {
        PendingRecord rec;
        rec.record_no = no;
        rec.flags = no == 5 || no == 11 ? 0x0003 : 0x0001; // root and $Extend are directories
        append_std_info(rec, default_times(), 0x06);
        append_file_name(rec, reserved[no - 1], 5, 1, default_times(), 3);
        if (rec.flags == 0x0001)
            append_resident_data(rec, {});
        records_.push_back(std::move(rec));
    }
    for (uint64_t no = 12; no <= 15; ++no) {
        PendingRecord rec;
        rec.record_no = no;
        rec.flags = 0x0001;
        append_std_info(rec, default_times(), 0x06);
        append_file_name(rec, "$Reserved" + std::to_string(no), 5, 1, default_times(), 3);
        append_resident_data(rec, {});
        records_.push_back(std::move(rec));
    }
}

NtfsImageBuilder::Timestamps NtfsImageBuilder::default_times() {
    const int64_t base = *iso_to_filetime("2020-06-15T12:00:00Z");
    return Timestamps{base, base + 10'000'000, base + 20'000'000, base + 30'000'000};
}

uint64_t NtfsImageBuilder::alloc_clusters(uint64_t count) {
    const uint64_t lcn = next_free_lcn_;
    next_free_lcn_ += count;
    const uint64_t total_clusters = options_.total_sectors / options_.sectors_per_cluster;
    if (next_free_lcn_ > total_clusters)
        throw std::runtime_error("fixture image out of clusters");
    return lcn;
}

void NtfsImageBuilder::write_at_lcn(uint64_t lcn, std::span<const uint8_t> bytes) {
    const uint64_t offset = lcn * cluster_size();
    assert(offset + bytes.size() <= image_.size());
    std::memcpy(image_.data() + offset, bytes.data(), bytes.size());
}

NtfsImageBuilder::PendingRecord& NtfsImageBuilder::record(uint64_t record_no) {
    for (auto& rec : records_)
        if (rec.record_no == record_no)
            return rec;
    throw std::runtime_error("no such fixture record");
}

void NtfsImageBuilder::append_std_info(PendingRecord& rec, Timestamps times, uint32_t dos_flags) {
    std::vector<uint8_t> value(0x30, 0);
    put_u64(value, 0x00, static_cast<uint64_t>(times.created));
    put_u64(value, 0x08, static_cast<uint64_t>(times.modified));
    put_u64(value, 0x10, static_cast<uint64_t>(times.mft_changed));
    put_u64(value, 0x18, static_cast<uint64_t>(times.accessed));
    put_u32(value, 0x20, dos_flags);

    const size_t total = align8(0x18 + value.size());
    auto attr = attr_header(0x10, false, total, 0, 0);
    put_u32(attr, 0x10, static_cast<uint32_t>(value.size())); // value length
    put_u16(attr, 0x14, 0x18);                                // value offset
    attr.insert(attr.end(), value.begin(), value.end());
    attr.resize(total, 0);
    rec.attrs.push_back(PendingAttr{std::move(attr)});
}

void NtfsImageBuilder::append_file_name(PendingRecord& rec, const std::string& name,
                                        uint64_t parent, uint16_t parent_seq, Timestamps times,
                                        uint8_t name_space) {
    const auto wide = utf16le(name);
    std::vector<uint8_t> value(0x42 + wide.size(), 0);
    put_u64(value, 0x00, parent | (static_cast<uint64_t>(parent_seq) << 48));
    put_u64(value, 0x08, static_cast<uint64_t>(times.created));
    put_u64(value, 0x10, static_cast<uint64_t>(times.modified));
    put_u64(value, 0x18, static_cast<uint64_t>(times.mft_changed));
    put_u64(value, 0x20, static_cast<uint64_t>(times.accessed));
    value[0x40] = static_cast<uint8_t>(name.size());
    value[0x41] = name_space;
    std::memcpy(value.data() + 0x42, wide.data(), wide.size());

    const size_t total = align8(0x18 + value.size());
    auto attr = attr_header(0x30, false, total, 0, 1);
    put_u32(attr, 0x10, static_cast<uint32_t>(value.size()));
    put_u16(attr, 0x14, 0x18);
    attr.insert(attr.end(), value.begin(), value.end());
    attr.resize(total, 0);
    rec.attrs.push_back(PendingAttr{std::move(attr)});
}

void NtfsImageBuilder::append_resident_data(PendingRecord& rec, std::span<const uint8_t> content,
                                            const std::string& stream_name) {
    const auto wide = utf16le(stream_name);
    const size_t name_off = 0x18;
    const size_t value_off = align8(name_off + wide.size());
    const size_t total = align8(value_off + content.size());

    auto attr = attr_header(0x80, false, total, 0, 2);
    attr[0x09] = static_cast<uint8_t>(stream_name.size());
    put_u16(attr, 0x0A, static_cast<uint16_t>(name_off));
    put_u32(attr, 0x10, static_cast<uint32_t>(content.size()));
    put_u16(attr, 0x14, static_cast<uint16_t>(value_off));
    attr.resize(total, 0);
    std::memcpy(attr.data() + name_off, wide.data(), wide.size());
    if (!content.empty())
        std::memcpy(attr.data() + value_off, content.data(), content.size());
    rec.attrs.push_back(PendingAttr{std::move(attr)});
}

std::vector<uint8_t> NtfsImageBuilder::encode_runlist(const std::vector<RunSpec>& runs) const {
    std::vector<uint8_t> out;
    int64_t prev_lcn = 0;
    for (const auto& run : runs) {
        // minimal unsigned length field
        std::vector<uint8_t> len_bytes;
        uint64_t count = run.clusters;
        do {
            len_bytes.push_back(static_cast<uint8_t>(count & 0xFF));
            count >>= 8;
        } while (count != 0);

        std::vector<uint8_t> off_bytes;
        if (run.lcn) {
            int64_t delta = static_cast<int64_t>(*run.lcn) - prev_lcn;
            prev_lcn = static_cast<int64_t>(*run.lcn);
            // minimal signed little-endian encoding
            while (true) {
                off_bytes.push_back(static_cast<uint8_t>(delta & 0xFF));
                const int64_t remaining = delta >> 8;
                const bool sign_ok = (off_bytes.back() & 0x80)
                                         ? remaining == -1
                                         : remaining == 0;
                if (sign_ok)
                    break;
                delta = remaining;
            }
        }
        out.push_back(static_cast<uint8_t>((off_bytes.size() << 4) | len_bytes.size()));
        out.insert(out.end(), len_bytes.begin(), len_bytes.end());
        out.insert(out.end(), off_bytes.begin(), off_bytes.end());
    }
    out.push_back(0x00);
    return out;
}

void NtfsImageBuilder::append_nonresident_data(PendingRecord& rec,
                                               const std::vector<RunSpec>& runs,
                                               uint64_t lowest_vcn, uint64_t real_size,
                                               uint64_t allocated, uint16_t attr_flags) {
    const auto runlist = encode_runlist(runs);
    const size_t total = align8(0x40 + runlist.size());

    auto attr = attr_header(0x80, true, total, attr_flags, 2);
    uint64_t clusters = 0;
    for (const auto& run : runs)
        clusters += run.clusters;
    put_u64(attr, 0x10, lowest_vcn);
    put_u64(attr, 0x18, lowest_vcn + clusters - 1);
    put_u16(attr, 0x20, 0x40); // runlist offset
    put_u64(attr, 0x28, allocated);
    put_u64(attr, 0x30, real_size);
    put_u64(attr, 0x38, real_size);
    attr.resize(total, 0);
    std::memcpy(attr.data() + 0x40, runlist.data(), runlist.size());
    rec.attrs.push_back(PendingAttr{std::move(attr)});
}

uint64_t NtfsImageBuilder::add_record(const std::string& name, uint64_t parent,
                                      uint16_t record_flags, Timestamps times,
                                      uint32_t dos_flags) {
    PendingRecord rec;
    rec.record_no = next_record_++;
    if (rec.record_no >= options_.max_records)
        throw std::runtime_error("fixture MFT full");
    rec.flags = record_flags;
    append_std_info(rec, times, dos_flags);
    append_file_name(rec, name, parent, 1, times, 1);
    records_.push_back(std::move(rec));
    return records_.back().record_no;
}

uint64_t NtfsImageBuilder::add_resident_file(const std::string& name,
                                             std::span<const uint8_t> content, Timestamps times,
                                             uint32_t dos_flags, uint64_t parent, bool in_use) {
    const uint64_t no = add_record(name, parent, in_use ? 0x0001 : 0x0000, times, dos_flags);
    append_resident_data(record(no), content);
    return no;
}

uint64_t NtfsImageBuilder::add_nonresident_file(const std::string& name,
                                                const std::vector<RunSpec>& runs,
                                                std::span<const uint8_t> content,
                                                uint64_t real_size, Timestamps times,
                                                uint32_t dos_flags, uint16_t data_attr_flags) {
    // Lay the content down across the allocated (non-sparse) runs.
    size_t pos = 0;
    for (const auto& run : runs) {
        const uint64_t run_bytes = run.clusters * cluster_size();
        if (!run.lcn) {
            pos += static_cast<size_t>(std::min<uint64_t>(run_bytes, content.size() - pos));
            continue;
        }
        const size_t n = static_cast<size_t>(
            std::min<uint64_t>(run_bytes, content.size() > pos ? content.size() - pos : 0));
        if (n > 0)
            write_at_lcn(*run.lcn, content.subspan(pos, n));
        pos += n;
    }

    uint64_t allocated = 0;
    for (const auto& run : runs)
        allocated += run.clusters * cluster_size();
    const uint64_t no = add_record(name, 5, 0x0001, times, dos_flags);
    append_nonresident_data(record(no), runs, 0, real_size, allocated, data_attr_flags);
    return no;
}

uint64_t NtfsImageBuilder::add_fragmented_file(const std::string& name,
                                               std::span<const uint8_t> content,
                                               size_t fragments) {
    const uint64_t total_clusters =
        (content.size() + cluster_size() - 1) / cluster_size();
    const uint64_t per_fragment = std::max<uint64_t>(1, total_clusters / fragments);

    std::vector<RunSpec> runs;
    uint64_t remaining = total_clusters;
    std::vector<uint64_t> lcns;
    while (remaining > 0) {
        const uint64_t n = std::min(per_fragment, remaining);
        lcns.push_back(alloc_clusters(n + 1)); // +1 leaves a gap after each fragment
        runs.push_back(RunSpec{n, lcns.back()});
        remaining -= n;
    }
    // Swap the first two fragments so at least one runlist delta is
    // negative.
    if (runs.size() >= 2)
        std::swap(runs[0].lcn, runs[1].lcn);
    return add_nonresident_file(name, runs, content, content.size());
}

uint64_t NtfsImageBuilder::add_sparse_file(const std::string& name, uint64_t sparse_clusters,
                                           uint64_t real_size) {
    return add_nonresident_file(name, {{sparse_clusters, std::nullopt}}, {}, real_size,
                                default_times(), 0x220); // archive | sparse DOS flag
}

uint64_t NtfsImageBuilder::add_directory(const std::string& name, uint64_t parent) {
    return add_record(name, parent, 0x0003, default_times(), 0x10);
}

uint64_t NtfsImageBuilder::add_attrlist_file(const std::string& name,
                                             std::span<const uint8_t> content,
                                             uint64_t split_at_vcn) {
    const uint64_t total_clusters = (content.size() + cluster_size() - 1) / cluster_size();
    if (split_at_vcn == 0 || split_at_vcn >= total_clusters)
        throw std::runtime_error("split vcn out of range");

    const uint64_t lcn_a = alloc_clusters(split_at_vcn);
    const uint64_t lcn_b = alloc_clusters(total_clusters - split_at_vcn);
    const size_t split_bytes = static_cast<size_t>(split_at_vcn * cluster_size());
    write_at_lcn(lcn_a, content.subspan(0, split_bytes));
    write_at_lcn(lcn_b, content.subspan(split_bytes));

    // Extension records carry the extents; the base record carries only
    // the $ATTRIBUTE_LIST pointing at them.
    PendingRecord ext_a;
    ext_a.record_no = next_record_++;
    ext_a.flags = 0x0001;
    append_nonresident_data(ext_a, {{split_at_vcn, lcn_a}}, 0, content.size(),
                            total_clusters * cluster_size(), 0);
    PendingRecord ext_b;
    ext_b.record_no = next_record_++;
    ext_b.flags = 0x0001;
    append_nonresident_data(ext_b, {{total_clusters - split_at_vcn, lcn_b}}, split_at_vcn, 0, 0,
                            0);

    const uint64_t base_no = add_record(name, 5, 0x0001, default_times(), 0x20);

    auto entry = [&](uint64_t vcn, uint64_t ref) {
        std::vector<uint8_t> e(0x20, 0); // 26 bytes rounded up to 8
        put_u32(e, 0x00, 0x80);
        put_u16(e, 0x04, static_cast<uint16_t>(e.size()));
        e[0x06] = 0;    // name length
        e[0x07] = 0x1A; // name offset (unused, past the fixed fields)
        put_u64(e, 0x08, vcn);
        put_u64(e, 0x10, ref | (1ull << 48));
        put_u16(e, 0x18, 2);
        return e;
    };
    std::vector<uint8_t> value;
    const auto e1 = entry(0, ext_a.record_no);
    const auto e2 = entry(split_at_vcn, ext_b.record_no);
    value.insert(value.end(), e1.begin(), e1.end());
    value.insert(value.end(), e2.begin(), e2.end());

    const size_t total = align8(0x18 + value.size());
    auto attr = attr_header(0x20, false, total, 0, 3);
    put_u32(attr, 0x10, static_cast<uint32_t>(value.size()));
    put_u16(attr, 0x14, 0x18);
    attr.insert(attr.end(), value.begin(), value.end());
    attr.resize(total, 0);
    record(base_no).attrs.push_back(PendingAttr{std::move(attr)});

    records_.push_back(std::move(ext_a));
    records_.push_back(std::move(ext_b));
    return base_no;
}

void NtfsImageBuilder::make_torn(uint64_t record_no) {
    record(record_no).torn = true;
}

void NtfsImageBuilder::set_parent(uint64_t record_no, uint64_t parent, uint16_t parent_seq) {
    auto& rec = record(record_no);
    for (auto& attr : rec.attrs) {
        if (attr.bytes.size() >= 4 && attr.bytes[0] == 0x30) {
            // $FILE_NAME value starts at 0x18; parent reference at its 0x00
            put_u64(attr.bytes, 0x18, parent | (static_cast<uint64_t>(parent_seq) << 48));
            return;
        }
    }
    throw std::runtime_error("record has no $FILE_NAME");
}

void NtfsImageBuilder::set_in_use(uint64_t record_no, bool in_use) {
    auto& rec = record(record_no);
    rec.flags = static_cast<uint16_t>(in_use ? (rec.flags | 0x0001) : (rec.flags & ~0x0001));
}

void NtfsImageBuilder::set_data_attr_flags(uint64_t record_no, uint16_t flags) {
    auto& rec = record(record_no);
    for (auto& attr : rec.attrs) {
        if (attr.bytes.size() >= 0x0E && attr.bytes[0] == 0x80) {
            put_u16(attr.bytes, 0x0C, flags);
            return;
        }
    }
    throw std::runtime_error("record has no $DATA");
}

void NtfsImageBuilder::add_named_data_stream(uint64_t record_no, const std::string& stream_name,
                                             std::span<const uint8_t> content) {
    append_resident_data(record(record_no), content, stream_name);
}

std::vector<uint8_t> NtfsImageBuilder::assemble_record(const PendingRecord& rec) const {
    const uint32_t record_size = options_.mft_record_size;
    const uint32_t bps = options_.bytes_per_sector;
    const size_t sectors = record_size / bps;
    const uint16_t usa_offset = 0x30;
    const uint16_t usa_count = static_cast<uint16_t>(sectors + 1);
    const size_t attrs_offset = align8(usa_offset + 2 * usa_count);

    std::vector<uint8_t> r(record_size, 0);
    std::memcpy(r.data(), "FILE", 4);
    put_u16(r, 0x04, usa_offset);
    put_u16(r, 0x06, usa_count);
    put_u16(r, 0x10, rec.sequence);
    put_u16(r, 0x12, 1);
    put_u16(r, 0x14, static_cast<uint16_t>(attrs_offset));
    put_u16(r, 0x16, rec.flags);
    put_u32(r, 0x1C, record_size);
    put_u32(r, 0x2C, static_cast<uint32_t>(rec.record_no));

    size_t off = attrs_offset;
    for (const auto& attr : rec.attrs) {
        if (off + attr.bytes.size() + 8 > record_size)
            throw std::runtime_error("fixture record overflow");
        std::memcpy(r.data() + off, attr.bytes.data(), attr.bytes.size());
        off += attr.bytes.size();
    }
    put_u32(r, off, 0xFFFFFFFF);
    put_u32(r, off + 4, 0);
    put_u32(r, 0x18, static_cast<uint32_t>(off + 8)); // bytes in use

    // Fixups: stash each sector's true trailing word in the USA, then
    // stamp the USN over it.
    const uint16_t usn = static_cast<uint16_t>(0x0100 + (rec.record_no & 0xFF));
    put_u16(r, usa_offset, usn);
    for (size_t i = 0; i < sectors; ++i) {
        const size_t tail = (i + 1) * bps - 2;
        const uint16_t original = static_cast<uint16_t>(r[tail] | (r[tail + 1] << 8));
        put_u16(r, usa_offset + 2 + 2 * i, original);
        put_u16(r, tail, usn);
    }
    if (rec.torn)
        put_u16(r, sectors * bps - 2, static_cast<uint16_t>(usn ^ 0xFFFF));
    return r;
}

std::vector<uint8_t> NtfsImageBuilder::build() {
    std::vector<uint8_t> image = image_;

    // Boot sector.
    ntfs::VolumeGeometry geometry;
    geometry.bytes_per_sector = options_.bytes_per_sector;
    geometry.sectors_per_cluster = options_.sectors_per_cluster;
    geometry.cluster_size = cluster_size();
    geometry.total_sectors = options_.total_sectors;
    geometry.mft_lcn = options_.mft_lcn;
    geometry.mft_record_size = options_.mft_record_size;
    ntfs::write_boot_sector({image.data(), 512}, geometry);

    for (const auto& rec : records_) {
        const auto bytes = assemble_record(rec);
        const uint64_t offset =
            options_.mft_lcn * cluster_size() + rec.record_no * options_.mft_record_size;
        std::memcpy(image.data() + offset, bytes.data(), bytes.size());
    }
    return image;
}

void NtfsImageBuilder::write_to(const std::filesystem::path& path) {
    const auto image = build();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(image.data()),
              static_cast<std::streamsize>(image.size()));
    if (!out.flush())
        throw std::runtime_error("cannot write fixture image");
}

} // namespace sit::testsupport

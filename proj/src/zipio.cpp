//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#include "sit/zipio.hpp"

#include <algorithm>
#include <cstring>

#include <unistd.h>
#include <zlib.h>

#include "sit/errors.hpp"

namespace sit::zipio {

namespace {

constexpr uint32_t kLocalSig = 0x04034b50;
constexpr uint32_t kCentralSig = 0x02014b50;
constexpr uint32_t kEocdSig = 0x06054b50;
constexpr uint32_t kZip64EocdSig = 0x06064b50;
constexpr uint32_t kZip64LocatorSig = 0x07064b50;

// Normalized DOS timestamp: 1980-01-01 00:00:00.
constexpr uint16_t kDosTime = 0;
constexpr uint16_t kDosDate = (0 << 9) | (1 << 5) | 1;

struct ByteWriter {
    std::vector<uint8_t> buf;

    void u16(uint16_t v) {
        buf.push_back(static_cast<uint8_t>(v));
        buf.push_back(static_cast<uint8_t>(v >> 8));
    }
    void u32(uint32_t v) {
        u16(static_cast<uint16_t>(v));
        u16(static_cast<uint16_t>(v >> 16));
    }
    void u64(uint64_t v) {
        u32(static_cast<uint32_t>(v));
        u32(static_cast<uint32_t>(v >> 32));
    }
    void bytes(const void* data, size_t len) {
        const auto* p = static_cast<const uint8_t*>(data);
        buf.insert(buf.end(), p, p + len);
    }
};

uint16_t read_u16(const uint8_t* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}
uint32_t read_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}
uint64_t read_u64(const uint8_t* p) {
    return static_cast<uint64_t>(read_u32(p)) | (static_cast<uint64_t>(read_u32(p + 4)) << 32);
}

} // namespace

// ---------------------------------------------------------------- writer

struct ZipWriter::Deflater {
    z_stream zs{};
    bool active = false;
    std::vector<uint8_t> out_buf;

    explicit Deflater(int level) : out_buf(1 << 16) {
        if (deflateInit2(&zs, level, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY) != Z_OK)
            raise(ErrorCode::IoError, "deflateInit2 failed");
        active = true;
    }
    ~Deflater() {
        if (active)
            deflateEnd(&zs);
    }
};

ZipWriter::ZipWriter(const std::filesystem::path& path, Options options) : options_(options) {
    file_ = std::fopen(path.string().c_str(), "wb+");
    if (!file_)
        raise(ErrorCode::IoError, "cannot create archive: " + path.string());
}

ZipWriter::~ZipWriter() {
    if (file_)
        std::fclose(file_);
}

void ZipWriter::write_raw(const void* data, size_t len) {
    if (len > 0 && std::fwrite(data, 1, len, file_) != len)
        raise(ErrorCode::IoError, "archive write failed");
}

void ZipWriter::seek_to(uint64_t offset) {
    if (fseeko(file_, static_cast<off_t>(offset), SEEK_SET) != 0)
        raise(ErrorCode::IoError, "archive seek failed");
}

void ZipWriter::begin_entry(const std::string& name, Method method, uint64_t expected_size) {
    if (finalized_)
        raise(ErrorCode::AlreadyFinalized, "archive already finalized");
    if (in_entry_)
        raise(ErrorCode::IoError, "previous entry still open");
    if (name.empty() || name.size() > 0xFFFF)
        raise(ErrorCode::IoError, "bad entry name");

    current_ = EntryInfo{};
    current_.name = name;
    current_.method = method;
    current_.local_header_offset = data_end_;
    current_.crc32 = static_cast<uint32_t>(crc32(0L, Z_NULL, 0));
    current_zip64_ =
        expected_size >= options_.zip64_threshold || data_end_ >= options_.zip64_threshold;

    ByteWriter header;
    header.u32(kLocalSig);
    header.u16(current_zip64_ ? 45 : 20); // version needed to extract
    header.u16(0);                        // general purpose flags
    header.u16(static_cast<uint16_t>(method));
    header.u16(kDosTime);
    header.u16(kDosDate);
    header.u32(0); // crc, patched in end_entry
    header.u32(current_zip64_ ? 0xFFFFFFFFu : 0); // compressed size
    header.u32(current_zip64_ ? 0xFFFFFFFFu : 0); // uncompressed size
    header.u16(static_cast<uint16_t>(name.size()));
    header.u16(current_zip64_ ? 20 : 0); // extra length
    header.bytes(name.data(), name.size());
    if (current_zip64_) {
        header.u16(0x0001);
        header.u16(16);
        header.u64(0); // uncompressed, patched
        header.u64(0); // compressed, patched
    }

    seek_to(data_end_);
    write_raw(header.buf.data(), header.buf.size());
    current_header_size_ = header.buf.size();

    if (method == Method::Deflate)
        deflater_ = std::make_unique<Deflater>(options_.deflate_level);
    in_entry_ = true;
}

void ZipWriter::write(std::span<const uint8_t> chunk) {
    if (!in_entry_)
        raise(ErrorCode::IoError, "no entry open");
    if (chunk.empty())
        return;
    current_.crc32 = static_cast<uint32_t>(
        crc32(current_.crc32, chunk.data(), static_cast<uInt>(chunk.size())));
    current_.uncompressed_size += chunk.size();

    if (current_.method == Method::Stored) {
        write_raw(chunk.data(), chunk.size());
        current_.compressed_size += chunk.size();
        return;
    }

    z_stream& zs = deflater_->zs;
    zs.next_in = const_cast<Bytef*>(chunk.data());
    zs.avail_in = static_cast<uInt>(chunk.size());
    while (zs.avail_in > 0) {
        zs.next_out = deflater_->out_buf.data();
        zs.avail_out = static_cast<uInt>(deflater_->out_buf.size());
        if (deflate(&zs, Z_NO_FLUSH) != Z_OK)
            raise(ErrorCode::IoError, "deflate failed");
        const size_t produced = deflater_->out_buf.size() - zs.avail_out;
        write_raw(deflater_->out_buf.data(), produced);
        current_.compressed_size += produced;
    }
}

EntryInfo ZipWriter::end_entry() {
    if (!in_entry_)
        raise(ErrorCode::IoError, "no entry open");

    if (current_.method == Method::Deflate) {
        z_stream& zs = deflater_->zs;
        zs.next_in = nullptr;
        zs.avail_in = 0;
        int rc = Z_OK;
        do {
            zs.next_out = deflater_->out_buf.data();
            zs.avail_out = static_cast<uInt>(deflater_->out_buf.size());
            rc = deflate(&zs, Z_FINISH);
            if (rc != Z_OK && rc != Z_STREAM_END)
                raise(ErrorCode::IoError, "deflate finish failed");
            const size_t produced = deflater_->out_buf.size() - zs.avail_out;
            write_raw(deflater_->out_buf.data(), produced);
            current_.compressed_size += produced;
        } while (rc != Z_STREAM_END);
        deflater_.reset();
    }

    if (!current_zip64_ &&
        (current_.compressed_size > 0xFFFFFFFFull || current_.uncompressed_size > 0xFFFFFFFFull))
        raise(ErrorCode::IoError, "entry exceeded 32-bit sizes without ZIP64 reservation");

    // Patch crc and sizes into the local header.
    const uint64_t entry_end =
        current_.local_header_offset + current_header_size_ + current_.compressed_size;
    ByteWriter patch;
    patch.u32(current_.crc32);
    if (current_zip64_) {
        patch.u32(0xFFFFFFFFu);
        patch.u32(0xFFFFFFFFu);
    } else {
        patch.u32(static_cast<uint32_t>(current_.compressed_size));
        patch.u32(static_cast<uint32_t>(current_.uncompressed_size));
    }
    seek_to(current_.local_header_offset + 14);
    write_raw(patch.buf.data(), patch.buf.size());
    if (current_zip64_) {
        ByteWriter sizes;
        sizes.u64(current_.uncompressed_size);
        sizes.u64(current_.compressed_size);
        seek_to(current_.local_header_offset + 30 + current_.name.size() + 4);
        write_raw(sizes.buf.data(), sizes.buf.size());
        any_zip64_ = true;
    }

    data_end_ = entry_end;
    entries_.push_back(current_);
    in_entry_ = false;
    return entries_.back();
}

void ZipWriter::abort_entry() {
    if (!in_entry_)
        return;
    deflater_.reset();
    in_entry_ = false;
    // data_end_ untouched: the next entry or directory overwrites the
    // partial bytes in place.
}

EntryInfo ZipWriter::add_entry(const std::string& name, Method method,
                               std::span<const uint8_t> bytes) {
    begin_entry(name, method, bytes.size());
    write(bytes);
    return end_entry();
}

void ZipWriter::write_directory() {
    seek_to(data_end_);

    ByteWriter cd;
    for (const auto& e : entries_) {
        const bool sizes64 = e.compressed_size > 0xFFFFFFFFull || e.uncompressed_size > 0xFFFFFFFFull ||
                             e.uncompressed_size >= options_.zip64_threshold;
        const bool offset64 = e.local_header_offset >= options_.zip64_threshold;
        ByteWriter extra;
        if (sizes64) {
            extra.u64(e.uncompressed_size);
            extra.u64(e.compressed_size);
        }
        if (offset64)
            extra.u64(e.local_header_offset);

        cd.u32(kCentralSig);
        cd.u16((sizes64 || offset64) ? 45 : 20); // version made by
        cd.u16((sizes64 || offset64) ? 45 : 20); // version needed
        cd.u16(0);
        cd.u16(static_cast<uint16_t>(e.method));
        cd.u16(kDosTime);
        cd.u16(kDosDate);
        cd.u32(e.crc32);
        cd.u32(sizes64 ? 0xFFFFFFFFu : static_cast<uint32_t>(e.compressed_size));
        cd.u32(sizes64 ? 0xFFFFFFFFu : static_cast<uint32_t>(e.uncompressed_size));
        cd.u16(static_cast<uint16_t>(e.name.size()));
        cd.u16(static_cast<uint16_t>(extra.buf.empty() ? 0 : extra.buf.size() + 4));
        cd.u16(0); // comment
        cd.u16(0); // disk start
        cd.u16(0); // internal attrs
        cd.u32(0); // external attrs
        cd.u32(offset64 ? 0xFFFFFFFFu : static_cast<uint32_t>(e.local_header_offset));
        cd.bytes(e.name.data(), e.name.size());
        if (!extra.buf.empty()) {
            cd.u16(0x0001);
            cd.u16(static_cast<uint16_t>(extra.buf.size()));
            cd.bytes(extra.buf.data(), extra.buf.size());
        }
    }

    const uint64_t cd_offset = data_end_;
    const uint64_t cd_size = cd.buf.size();
    write_raw(cd.buf.data(), cd.buf.size());

    const bool need_zip64_eocd = any_zip64_ || entries_.size() > 0xFFFF ||
                                 cd_offset >= options_.zip64_threshold ||
                                 cd_size >= options_.zip64_threshold;
    if (need_zip64_eocd) {
        const uint64_t zip64_eocd_offset = cd_offset + cd_size;
        ByteWriter z;
        z.u32(kZip64EocdSig);
        z.u64(44);
        z.u16(45);
        z.u16(45);
        z.u32(0);
        z.u32(0);
        z.u64(entries_.size());
        z.u64(entries_.size());
        z.u64(cd_size);
        z.u64(cd_offset);
        z.u32(kZip64LocatorSig);
        z.u32(0);
        z.u64(zip64_eocd_offset);
        z.u32(1);
        write_raw(z.buf.data(), z.buf.size());
    }

    ByteWriter eocd;
    eocd.u32(kEocdSig);
    eocd.u16(0);
    eocd.u16(0);
    eocd.u16(static_cast<uint16_t>(std::min<uint64_t>(entries_.size(), 0xFFFF)));
    eocd.u16(static_cast<uint16_t>(std::min<uint64_t>(entries_.size(), 0xFFFF)));
    eocd.u32(cd_size > 0xFFFFFFFFull ? 0xFFFFFFFFu : static_cast<uint32_t>(cd_size));
    eocd.u32(cd_offset > 0xFFFFFFFFull || need_zip64_eocd ? 0xFFFFFFFFu
                                                          : static_cast<uint32_t>(cd_offset));
    eocd.u16(0);
    write_raw(eocd.buf.data(), eocd.buf.size());

    flush_boundary_ = static_cast<uint64_t>(ftello(file_));
    if (std::fflush(file_) != 0)
        raise(ErrorCode::IoError, "archive flush failed");
}

void ZipWriter::flush_directory() {
    if (finalized_)
        raise(ErrorCode::AlreadyFinalized, "archive already finalized");
    if (in_entry_)
        raise(ErrorCode::IoError, "cannot flush with an entry open");
    write_directory();
}

void ZipWriter::finalize() {
    if (finalized_)
        raise(ErrorCode::AlreadyFinalized, "archive already finalized");
    if (in_entry_)
        raise(ErrorCode::IoError, "cannot finalize with an entry open");
    write_directory();
    // Drop stale bytes past the directory left by earlier flushes.
    if (ftruncate(fileno(file_), static_cast<off_t>(flush_boundary_)) != 0)
        raise(ErrorCode::IoError, "archive truncate failed");
    if (std::fflush(file_) != 0)
        raise(ErrorCode::IoError, "archive flush failed");
    finalized_ = true;
}

// ---------------------------------------------------------------- reader

struct ZipReader::EntryStream::Inflater {
    z_stream zs{};
    bool active = false;

    Inflater() {
        if (inflateInit2(&zs, -15) != Z_OK)
            raise(ErrorCode::IoError, "inflateInit2 failed");
        active = true;
    }
    ~Inflater() {
        if (active)
            inflateEnd(&zs);
    }
};

ZipReader::ZipReader(const std::filesystem::path& path) {
    file_ = std::fopen(path.string().c_str(), "rb");
    if (!file_)
        raise(ErrorCode::ArchiveUnreadable, "cannot open archive: " + path.string());
    if (fseeko(file_, 0, SEEK_END) != 0)
        raise(ErrorCode::ArchiveUnreadable, "seek failed: " + path.string());
    file_size_ = static_cast<uint64_t>(ftello(file_));

    // Locate the end-of-central-directory record by scanning backwards.
    const uint64_t max_scan = std::min<uint64_t>(file_size_, 22 + 65535 + 20);
    if (file_size_ < 22)
        raise(ErrorCode::ArchiveUnreadable, "file too small for a ZIP archive");
    std::vector<uint8_t> tail(max_scan);
    read_at(file_size_ - max_scan, tail);

    int64_t eocd_pos = -1;
    for (int64_t i = static_cast<int64_t>(tail.size()) - 22; i >= 0; --i) {
        if (read_u32(tail.data() + i) == kEocdSig) {
            eocd_pos = i;
            break;
        }
    }
    if (eocd_pos < 0)
        raise(ErrorCode::ArchiveUnreadable, "no end-of-central-directory record");
    const uint8_t* eocd = tail.data() + eocd_pos;
    uint64_t entry_count = read_u16(eocd + 10);
    uint64_t cd_size = read_u32(eocd + 12);
    uint64_t cd_offset = read_u32(eocd + 16);

    const uint64_t eocd_file_pos = file_size_ - max_scan + static_cast<uint64_t>(eocd_pos);
    if (eocd_file_pos >= 20) {
        uint8_t locator[20];
        read_at(eocd_file_pos - 20, locator);
        if (read_u32(locator) == kZip64LocatorSig) {
            const uint64_t z64_pos = read_u64(locator + 8);
            uint8_t z64[56];
            if (z64_pos + sizeof(z64) > file_size_)
                raise(ErrorCode::ArchiveUnreadable, "bad ZIP64 end record offset");
            read_at(z64_pos, z64);
            if (read_u32(z64) != kZip64EocdSig)
                raise(ErrorCode::ArchiveUnreadable, "bad ZIP64 end record");
            entry_count = read_u64(z64 + 32);
            cd_size = read_u64(z64 + 40);
            cd_offset = read_u64(z64 + 48);
        }
    }

    if (cd_offset + cd_size > file_size_)
        raise(ErrorCode::ArchiveUnreadable, "central directory out of bounds");
    std::vector<uint8_t> cd(cd_size);
    read_at(cd_offset, cd);

    size_t pos = 0;
    entries_.reserve(entry_count);
    for (uint64_t i = 0; i < entry_count; ++i) {
        if (pos + 46 > cd.size() || read_u32(cd.data() + pos) != kCentralSig)
            raise(ErrorCode::ArchiveUnreadable, "corrupt central directory");
        const uint8_t* h = cd.data() + pos;
        EntryInfo e;
        e.method = static_cast<Method>(read_u16(h + 10));
        e.crc32 = read_u32(h + 16);
        e.compressed_size = read_u32(h + 20);
        e.uncompressed_size = read_u32(h + 24);
        const uint16_t name_len = read_u16(h + 28);
        const uint16_t extra_len = read_u16(h + 30);
        const uint16_t comment_len = read_u16(h + 32);
        e.local_header_offset = read_u32(h + 42);
        if (pos + 46 + name_len + extra_len + comment_len > cd.size())
            raise(ErrorCode::ArchiveUnreadable, "corrupt central directory entry");
        e.name.assign(reinterpret_cast<const char*>(h + 46), name_len);

        // ZIP64 extra: 8-byte fields present only for the 0xFFFFFFFF ones.
        size_t xpos = pos + 46 + name_len;
        const size_t xend = xpos + extra_len;
        while (xpos + 4 <= xend) {
            const uint16_t id = read_u16(cd.data() + xpos);
            const uint16_t len = read_u16(cd.data() + xpos + 2);
            if (xpos + 4 + len > xend)
                break;
            if (id == 0x0001) {
                size_t f = xpos + 4;
                if (e.uncompressed_size == 0xFFFFFFFFu && f + 8 <= xpos + 4 + len) {
                    e.uncompressed_size = read_u64(cd.data() + f);
                    f += 8;
                }
                if (e.compressed_size == 0xFFFFFFFFu && f + 8 <= xpos + 4 + len) {
                    e.compressed_size = read_u64(cd.data() + f);
                    f += 8;
                }
                if (e.local_header_offset == 0xFFFFFFFFu && f + 8 <= xpos + 4 + len)
                    e.local_header_offset = read_u64(cd.data() + f);
            }
            xpos += 4 + len;
        }

        if (e.method != Method::Stored && e.method != Method::Deflate)
            raise(ErrorCode::ArchiveUnreadable, "unsupported compression method in " + e.name);
        entries_.push_back(std::move(e));
        pos += 46 + name_len + extra_len + comment_len;
    }
}

ZipReader::~ZipReader() {
    if (file_)
        std::fclose(file_);
}

const EntryInfo* ZipReader::find(const std::string& name) const {
    for (const auto& e : entries_)
        if (e.name == name)
            return &e;
    return nullptr;
}

size_t ZipReader::read_at(uint64_t offset, std::span<uint8_t> out) {
    if (fseeko(file_, static_cast<off_t>(offset), SEEK_SET) != 0)
        raise(ErrorCode::IoError, "archive seek failed");
    const size_t got = std::fread(out.data(), 1, out.size(), file_);
    if (got != out.size())
        raise(ErrorCode::IoError, "archive short read");
    return got;
}

uint64_t ZipReader::entry_data_offset(const EntryInfo& entry) {
    uint8_t header[30];
    if (entry.local_header_offset + 30 > file_size_)
        raise(ErrorCode::IoError, "local header out of bounds: " + entry.name);
    read_at(entry.local_header_offset, header);
    if (read_u32(header) != kLocalSig)
        raise(ErrorCode::IoError, "bad local header: " + entry.name);
    const uint16_t name_len = read_u16(header + 26);
    const uint16_t extra_len = read_u16(header + 28);
    return entry.local_header_offset + 30 + name_len + extra_len;
}

ZipReader::EntryStream::EntryStream(ZipReader& reader, const EntryInfo& entry)
    : reader_(&reader), entry_(&entry) {
    file_pos_ = reader.entry_data_offset(entry);
    if (file_pos_ + entry.compressed_size > reader.file_size_)
        raise(ErrorCode::IoError, "entry data out of bounds: " + entry.name);
    remaining_in_ = entry.compressed_size;
    remaining_out_ = entry.uncompressed_size;
    crc_ = static_cast<uint32_t>(crc32(0L, Z_NULL, 0));
    if (entry.method == Method::Deflate) {
        inflater_ = std::make_unique<Inflater>();
        in_buf_.resize(1 << 16);
    }
}

ZipReader::EntryStream::~EntryStream() = default;
ZipReader::EntryStream::EntryStream(EntryStream&&) noexcept = default;

size_t ZipReader::EntryStream::read(std::span<uint8_t> out) {
    if (done_ || out.empty())
        return 0;

    size_t produced = 0;
    if (entry_->method == Method::Stored) {
        const size_t want = static_cast<size_t>(std::min<uint64_t>(out.size(), remaining_in_));
        if (want > 0) {
            reader_->read_at(file_pos_, out.subspan(0, want));
            file_pos_ += want;
            remaining_in_ -= want;
            produced = want;
        }
    } else {
        z_stream& zs = inflater_->zs;
        zs.next_out = out.data();
        zs.avail_out = static_cast<uInt>(out.size());
        while (zs.avail_out > 0) {
            if (zs.avail_in == 0 && remaining_in_ > 0) {
                const size_t want =
                    static_cast<size_t>(std::min<uint64_t>(in_buf_.size(), remaining_in_));
                reader_->read_at(file_pos_, {in_buf_.data(), want});
                file_pos_ += want;
                remaining_in_ -= want;
                zs.next_in = in_buf_.data();
                zs.avail_in = static_cast<uInt>(want);
            }
            const int rc = inflate(&zs, Z_NO_FLUSH);
            if (rc == Z_STREAM_END) {
                produced = out.size() - zs.avail_out;
                break;
            }
            if (rc != Z_OK)
                raise(ErrorCode::IoError, "inflate failed in " + entry_->name);
            if (zs.avail_in == 0 && remaining_in_ == 0) {
                // compressed stream ended without Z_STREAM_END
                if (zs.avail_out > 0 && out.size() - zs.avail_out == 0)
                    raise(ErrorCode::IoError, "truncated deflate stream in " + entry_->name);
                break;
            }
        }
        if (produced == 0)
            produced = out.size() - zs.avail_out;
    }

    if (produced > 0) {
        if (produced > remaining_out_)
            raise(ErrorCode::IoError, "entry longer than directory size: " + entry_->name);
        crc_ = static_cast<uint32_t>(crc32(crc_, out.data(), static_cast<uInt>(produced)));
        remaining_out_ -= produced;
        return produced;
    }

    // End of stream: verify totals before reporting EOF.
    if (remaining_out_ != 0)
        raise(ErrorCode::IoError, "entry shorter than directory size: " + entry_->name);
    if (crc_ != entry_->crc32)
        raise(ErrorCode::IoError, "CRC mismatch in " + entry_->name);
    done_ = true;
    return 0;
}

ZipReader::EntryStream ZipReader::open_stream(const EntryInfo& entry) {
    return EntryStream(*this, entry);
}

std::vector<uint8_t> ZipReader::read_all(const EntryInfo& entry) {
    std::vector<uint8_t> out(entry.uncompressed_size);
    auto stream = open_stream(entry);
    size_t pos = 0;
    while (pos < out.size()) {
        const size_t got = stream.read({out.data() + pos, out.size() - pos});
        if (got == 0)
            break;
        pos += got;
    }
    if (pos != out.size())
        raise(ErrorCode::IoError, "short entry read: " + entry.name);
    // Drain to trigger the CRC check for zero-length tails.
    uint8_t sink[1];
    stream.read(sink);
    return out;
}

} // namespace sit::zipio

//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#include "sit/source.hpp"

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <map>

#include "sit/errors.hpp"
#include "sit/strutil.hpp"
#include "sit/timefmt.hpp"

namespace sit::source {

namespace fs = std::filesystem;

const char* to_string(SourceKind kind) {
    return kind == SourceKind::NtfsImage ? "ntfs_image" : "directory";
}

namespace {

void log_event(obslog::LogSink* log, obslog::Level level, const std::string& event,
               const obslog::KvList& kv) {
    if (log)
        log->emit(level, event, kv);
}

// ----------------------------------------------------------- streams

class ResidentStream final : public ContentStream {
public:
    explicit ResidentStream(const std::vector<uint8_t>& bytes) : bytes_(bytes) {}

    size_t read(std::span<uint8_t> out) override {
        const size_t want = std::min(out.size(), bytes_.size() - pos_);
        std::memcpy(out.data(), bytes_.data() + pos_, want);
        pos_ += want;
        return want;
    }
    void reset() override { pos_ = 0; }
    uint64_t size() const override { return bytes_.size(); }

private:
    const std::vector<uint8_t>& bytes_;
    size_t pos_ = 0;
};

class HostFileStream final : public ContentStream {
public:
    HostFileStream(fs::path path, uint64_t size) : path_(std::move(path)), size_(size) {}

    size_t read(std::span<uint8_t> out) override {
        if (!in_.is_open()) {
            in_.open(path_, std::ios::binary);
            if (!in_)
                raise(ErrorCode::IoError, "cannot open " + path_.string());
        }
        if (pos_ >= size_ || out.empty())
            return 0;
        const uint64_t want = std::min<uint64_t>(out.size(), size_ - pos_);
        in_.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(want));
        const auto got = static_cast<uint64_t>(in_.gcount());
        if (got == 0 || in_.bad())
            raise(ErrorCode::IoError, "read failed at offset " + std::to_string(pos_) + " of " +
                                          path_.string());
        pos_ += got;
        return static_cast<size_t>(got);
    }
    void reset() override {
        pos_ = 0;
        if (in_.is_open()) {
            in_.clear();
            in_.seekg(0);
        }
    }
    uint64_t size() const override { return size_; }

private:
    fs::path path_;
    uint64_t size_ = 0;
    uint64_t pos_ = 0;
    std::ifstream in_;
};

} // namespace

// Non-resident content: concatenated cluster runs, sparse runs as zeros,
// truncated to the attribute's real size.
class RunlistStream final : public ContentStream {
public:
    RunlistStream(SourceHandle& handle, std::vector<ntfs::DataRun> runs, uint64_t real_size,
                  uint32_t cluster_size)
        : handle_(handle), runs_(std::move(runs)), real_size_(real_size),
          cluster_size_(cluster_size) {}

    size_t read(std::span<uint8_t> out) override {
        if (pos_ >= real_size_ || out.empty())
            return 0;
        const uint64_t want =
            std::min<uint64_t>(out.size(), real_size_ - pos_);

        // Locate the run containing pos_ and read up to its end.
        uint64_t run_start = 0;
        for (const auto& run : runs_) {
            const uint64_t run_bytes = run.cluster_count * cluster_size_;
            if (pos_ < run_start + run_bytes) {
                const uint64_t within = pos_ - run_start;
                const uint64_t n = std::min(want, run_bytes - within);
                if (run.lcn.has_value()) {
                    handle_.read_image_at(*run.lcn * cluster_size_ + within,
                                          out.subspan(0, static_cast<size_t>(n)));
                } else {
                    std::memset(out.data(), 0, static_cast<size_t>(n));
                }
                pos_ += n;
                return static_cast<size_t>(n);
            }
            run_start += run_bytes;
        }
        raise(ErrorCode::IoError, "runlist shorter than the attribute's real size");
    }
    void reset() override { pos_ = 0; }
    uint64_t size() const override { return real_size_; }

private:
    SourceHandle& handle_;
    std::vector<ntfs::DataRun> runs_;
    uint64_t real_size_ = 0;
    uint32_t cluster_size_ = 0;
    uint64_t pos_ = 0;
};

// ----------------------------------------------------------- handle

SourceHandle::~SourceHandle() {
    if (image_)
        std::fclose(image_);
}

SourceHandle::SourceHandle(SourceHandle&& other) noexcept
    : kind_(other.kind_), root_(std::move(other.root_)), geometry_(other.geometry_),
      image_(other.image_), image_size_(other.image_size_), mft_runs_(std::move(other.mft_runs_)),
      mft_size_(other.mft_size_) {
    other.image_ = nullptr;
}

void SourceHandle::read_image_at(uint64_t offset, std::span<uint8_t> out) {
    if (offset + out.size() > image_size_)
        raise(ErrorCode::IoError, "read past end of image at offset " + std::to_string(offset));
    if (fseeko(image_, static_cast<off_t>(offset), SEEK_SET) != 0)
        raise(ErrorCode::IoError, "image seek failed");
    if (std::fread(out.data(), 1, out.size(), image_) != out.size())
        raise(ErrorCode::IoError, "image short read at offset " + std::to_string(offset));
}

void SourceHandle::read_mft_bytes(uint64_t offset, std::span<uint8_t> out) {
    const uint32_t cluster_size = geometry_->cluster_size;
    uint64_t pos = offset;
    size_t produced = 0;
    while (produced < out.size()) {
        uint64_t run_start = 0;
        bool found = false;
        for (const auto& run : mft_runs_) {
            const uint64_t run_bytes = run.cluster_count * cluster_size;
            if (pos < run_start + run_bytes) {
                const uint64_t within = pos - run_start;
                const uint64_t n =
                    std::min<uint64_t>(out.size() - produced, run_bytes - within);
                if (run.lcn.has_value())
                    read_image_at(*run.lcn * cluster_size + within,
                                  out.subspan(produced, static_cast<size_t>(n)));
                else
                    std::memset(out.data() + produced, 0, static_cast<size_t>(n));
                produced += n;
                pos += n;
                found = true;
                break;
            }
            run_start += run_bytes;
        }
        if (!found)
            raise(ErrorCode::IoError, "MFT byte offset " + std::to_string(pos) + " beyond runs");
    }
}

std::optional<ntfs::MftRecord> SourceHandle::load_record(uint64_t record_no,
                                                         obslog::LogSink* log) {
    const uint32_t record_size = geometry_->mft_record_size;
    std::vector<uint8_t> raw(record_size);
    try {
        read_mft_bytes(record_no * record_size, raw);
    } catch (const Error& e) {
        log_event(log, obslog::Level::Warn, "record_read_failed",
                  {{"record", std::to_string(record_no)}, {"error", e.what()}});
        return std::nullopt;
    }

    // Never-used slots are zero-filled; skip them without noise.
    if (std::all_of(raw.begin(), raw.end(), [](uint8_t b) { return b == 0; }))
        return std::nullopt;
    if (std::memcmp(raw.data(), "FILE", 4) != 0) {
        log_event(log, obslog::Level::Warn, "bad_record_skipped",
                  {{"record", std::to_string(record_no)},
                   {"sig", std::string(reinterpret_cast<const char*>(raw.data()), 4)}});
        return std::nullopt;
    }

    try {
        const auto fixed = ntfs::apply_fixups(raw, geometry_->bytes_per_sector);
        return ntfs::parse_mft_record(fixed, record_no);
    } catch (const Error& e) {
        const auto event =
            e.code() == ErrorCode::TornWrite ? "torn_record_skipped" : "record_parse_skipped";
        log_event(log, obslog::Level::Warn, event,
                  {{"record", std::to_string(record_no)}, {"error", e.what()}});
        return std::nullopt;
    }
}

std::vector<FileEntry> SourceHandle::list_ntfs(obslog::LogSink* log, bool include_deleted) {
    const uint32_t record_size = geometry_->mft_record_size;
    const uint64_t record_count = mft_size_ / record_size;

    std::vector<ntfs::MftRecord> records;
    std::map<uint64_t, ntfs::PathNode> nodes;
    records.reserve(static_cast<size_t>(record_count));
    for (uint64_t no = 0; no < record_count; ++no) {
        auto rec = load_record(no, log);
        if (!rec)
            continue;
        ntfs::PathNode node;
        node.name = rec->name;
        node.has_name = rec->has_name;
        node.parent_record = rec->parent_record;
        node.parent_sequence = rec->parent_sequence;
        node.sequence = rec->sequence;
        node.is_directory = rec->is_directory;
        node.in_use = rec->in_use;
        nodes[no] = std::move(node);
        records.push_back(std::move(*rec));
    }

    const auto paths = ntfs::resolve_paths(nodes);

    std::vector<FileEntry> entries;
    for (auto& rec : records) {
        if (rec.is_directory)
            continue;
        if (!rec.in_use && !include_deleted)
            continue;
        if (rec.record_no < ntfs::kFirstUserRecord)
            continue; // file-system metadata records
        if (!rec.has_name) {
            log_event(log, obslog::Level::Warn, "nameless_record_skipped",
                      {{"record", std::to_string(rec.record_no)}});
            continue;
        }

        auto path_it = paths.find(rec.record_no);
        const std::string full_path =
            path_it != paths.end() ? path_it->second : ("\\$Orphan\\" + rec.name);
        if (istarts_with_ascii(full_path, "\\$extend\\") || full_path == "\\$Extend")
            continue;

        if (rec.data_encrypted || rec.data_compressed) {
            log_event(log, obslog::Level::Warn,
                      rec.data_encrypted ? "encrypted_data_skipped" : "compressed_data_skipped",
                      {{"record", std::to_string(rec.record_no)}, {"path", full_path}});
            continue;
        }

        // $DATA continuation through $ATTRIBUTE_LIST: pull extents from the
        // extension records; anything else that spans records is skipped.
        if (!rec.data_continuations.empty()) {
            for (const auto& ref : rec.data_continuations) {
                auto ext = load_record(ref.record_no, log);
                if (!ext) {
                    rec.unsupported_spanning = true;
                    continue;
                }
                for (auto& extent : ext->extents)
                    rec.extents.push_back(std::move(extent));
                if (ext->data_resident && ext->has_data && rec.resident_data.empty()) {
                    rec.resident_data = std::move(ext->resident_data);
                    rec.data_resident = true;
                    rec.has_data = true;
                    rec.data_real_size = rec.resident_data.size();
                }
                if (ext->data_real_size != 0 && rec.data_real_size == 0)
                    rec.data_real_size = ext->data_real_size;
                rec.has_data = rec.has_data || ext->has_data;
            }
            std::sort(rec.extents.begin(), rec.extents.end(),
                      [](const ntfs::DataExtent& a, const ntfs::DataExtent& b) {
                          return a.lowest_vcn < b.lowest_vcn;
                      });
        }
        if (rec.unsupported_spanning) {
            log_event(log, obslog::Level::Warn, "spanning_attributes_skipped",
                      {{"record", std::to_string(rec.record_no)}, {"path", full_path}});
            if (!rec.has_data)
                continue;
        }
        if (!rec.has_data) {
            log_event(log, obslog::Level::Warn, "no_data_stream_skipped",
                      {{"record", std::to_string(rec.record_no)}, {"path", full_path}});
            continue;
        }
        if (rec.has_ads)
            log_event(log, obslog::Level::Info, "ads_detected_unnamed_stream_only",
                      {{"record", std::to_string(rec.record_no)}, {"path", full_path}});
        if (istarts_with_ascii(full_path, "\\$orphan\\"))
            log_event(log, obslog::Level::Info, "orphan_entry",
                      {{"record", std::to_string(rec.record_no)}, {"path", full_path}});

        FileEntry entry;
        entry.record_no = rec.record_no;
        entry.full_path = full_path;
        entry.name = rec.name;
        entry.size_bytes = rec.data_real_size;
        entry.created = rec.created;
        entry.modified = rec.modified;
        entry.mft_changed = rec.mft_changed;
        entry.accessed = rec.accessed;
        entry.attr_flags = rec.dos_attr_flags;
        entry.in_use = rec.in_use;
        if (rec.data_resident) {
            entry.content = ResidentContent{std::move(rec.resident_data)};
        } else {
            std::vector<ntfs::DataRun> runs;
            for (const auto& extent : rec.extents)
                runs.insert(runs.end(), extent.runs.begin(), extent.runs.end());
            entry.content = RunlistContent{std::move(runs)};
        }
        entries.push_back(std::move(entry));
    }

    std::sort(entries.begin(), entries.end(), [](const FileEntry& a, const FileEntry& b) {
        return a.record_no < b.record_no;
    });
    return entries;
}

std::vector<FileEntry> SourceHandle::list_directory(obslog::LogSink* log) {
    std::vector<FileEntry> entries;
    std::error_code ec;
    fs::recursive_directory_iterator it(root_, fs::directory_options::skip_permission_denied, ec);
    if (ec)
        raise(ErrorCode::IoError, "cannot iterate " + root_.string() + ": " + ec.message());

    for (const auto& dirent : it) {
        std::error_code entry_ec;
        if (!dirent.is_regular_file(entry_ec)) {
            if (entry_ec)
                log_event(log, obslog::Level::Warn, "stat_failed",
                          {{"path", dirent.path().string()}, {"error", entry_ec.message()}});
            continue;
        }

        const fs::path rel = fs::relative(dirent.path(), root_, entry_ec);
        if (entry_ec)
            continue;
        std::string full_path = "\\";
        bool first = true;
        for (const auto& part : rel) {
            if (!first)
                full_path += '\\';
            full_path += part.string();
            first = false;
        }

        FileEntry entry;
        entry.full_path = full_path;
        entry.name = dirent.path().filename().string();
        entry.size_bytes = dirent.file_size(entry_ec);
        if (entry_ec) {
            log_event(log, obslog::Level::Warn, "size_failed",
                      {{"path", full_path}, {"error", entry_ec.message()}});
            continue;
        }

        const auto mtime = fs::last_write_time(dirent.path(), entry_ec);
        if (!entry_ec) {
            using namespace std::chrono;
            const auto sys = clock_cast<system_clock>(mtime);
            entry.modified =
                kUnixEpochTicks +
                duration_cast<duration<int64_t, std::ratio<1, 10'000'000>>>(sys.time_since_epoch())
                    .count();
        }
        entry.content = HostPathContent{dirent.path()};
        entries.push_back(std::move(entry));
    }

    std::sort(entries.begin(), entries.end(),
              [](const FileEntry& a, const FileEntry& b) { return a.full_path < b.full_path; });
    return entries;
}

std::vector<FileEntry> SourceHandle::list_entries(obslog::LogSink* log, bool include_deleted) {
    if (kind_ == SourceKind::NtfsImage)
        return list_ntfs(log, include_deleted);
    return list_directory(log);
}

std::unique_ptr<ContentStream> SourceHandle::read_file_content(const FileEntry& entry,
                                                               size_t chunk_size) {
    if (chunk_size < 4096)
        raise(ErrorCode::IoError, "chunk size below 4096");
    if (const auto* resident = std::get_if<ResidentContent>(&entry.content))
        return std::make_unique<ResidentStream>(resident->bytes);
    if (const auto* host = std::get_if<HostPathContent>(&entry.content))
        return std::make_unique<HostFileStream>(host->path, entry.size_bytes);
    const auto& runlist = std::get<RunlistContent>(entry.content);
    return std::make_unique<RunlistStream>(*this, runlist.runs, entry.size_bytes,
                                           geometry_->cluster_size);
}

SourceHandle open_source(const fs::path& path, SourceKind kind) {
    std::error_code ec;
    const auto status = fs::status(path, ec);
    if (ec || status.type() == fs::file_type::not_found)
        raise(ErrorCode::NotFound, path.string());

    SourceHandle handle;
    handle.kind_ = kind;
    handle.root_ = path;

    if (kind == SourceKind::Directory) {
        if (status.type() != fs::file_type::directory)
            raise(ErrorCode::NotFound, path.string() + " is not a directory");
        return handle;
    }

    handle.image_ = std::fopen(path.string().c_str(), "rb");
    if (!handle.image_) {
        if (errno == EACCES || errno == EPERM)
            raise(ErrorCode::PermissionDenied, path.string());
        raise(ErrorCode::NotFound, path.string());
    }
    if (fseeko(handle.image_, 0, SEEK_END) != 0)
        raise(ErrorCode::IoError, "seek failed: " + path.string());
    handle.image_size_ = static_cast<uint64_t>(ftello(handle.image_));
    if (handle.image_size_ < 512)
        raise(ErrorCode::NotNtfs, "image smaller than one sector");

    uint8_t boot[512];
    handle.read_image_at(0, boot);
    handle.geometry_ = ntfs::parse_boot_sector(boot);

    // Bootstrap the MFT from record 0.
    const auto& g = *handle.geometry_;
    std::vector<uint8_t> raw(g.mft_record_size);
    handle.read_image_at(g.mft_lcn * g.cluster_size, raw);
    try {
        const auto fixed = ntfs::apply_fixups(raw, g.bytes_per_sector);
        const auto mft = ntfs::parse_mft_record(fixed, 0);
        if (!mft.has_data || mft.data_resident || mft.extents.empty())
            raise(ErrorCode::NotNtfs, "MFT record 0 has no usable $DATA runs");
        auto extents = mft.extents;
        std::sort(extents.begin(), extents.end(),
                  [](const ntfs::DataExtent& a, const ntfs::DataExtent& b) {
                      return a.lowest_vcn < b.lowest_vcn;
                  });
        for (const auto& extent : extents)
            handle.mft_runs_.insert(handle.mft_runs_.end(), extent.runs.begin(),
                                    extent.runs.end());
        handle.mft_size_ = mft.data_real_size;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NotNtfs)
            throw;
        raise(ErrorCode::NotNtfs, std::string("cannot parse MFT record 0: ") + e.what());
    }
    return handle;
}

} // namespace sit::source

//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#include "sit/aff4.hpp"

#include <fstream>
#include <random>

#include "sit/errors.hpp"
#include "sit/strutil.hpp"

namespace sit::aff4 {

namespace {

constexpr const char* kScheme = "aff4://";
constexpr const char* kDescriptionEntry = "container.description";
constexpr const char* kTurtleEntry = "information.turtle";

bool is_hex_lower(char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
}

bool is_uuid(const std::string& s) {
    if (s.size() != 36)
        return false;
    for (size_t i = 0; i < s.size(); ++i) {
        if (i == 8 || i == 13 || i == 18 || i == 23) {
            if (s[i] != '-')
                return false;
        } else if (!is_hex_lower(s[i])) {
            return false;
        }
    }
    return true;
}

} // namespace

bool is_container_urn(const std::string& urn) {
    const std::string scheme = kScheme;
    return urn.rfind(scheme, 0) == 0 && is_uuid(urn.substr(scheme.size()));
}

bool is_artifact_urn(const std::string& urn) {
    const std::string scheme = kScheme;
    if (urn.rfind(scheme, 0) != 0)
        return false;
    const std::string rest = urn.substr(scheme.size());
    if (rest.size() != 36 + 10 + 6) // uuid + "/artifact/" + 6 digits
        return false;
    if (!is_uuid(rest.substr(0, 36)))
        return false;
    if (rest.substr(36, 10) != "/artifact/")
        return false;
    for (size_t i = 46; i < rest.size(); ++i)
        if (rest[i] < '0' || rest[i] > '9')
            return false;
    return true;
}

std::string random_container_urn() {
    std::random_device rd;
    std::mt19937_64 gen((static_cast<uint64_t>(rd()) << 32) ^ rd());
    uint8_t bytes[16];
    for (int i = 0; i < 16; i += 8) {
        const uint64_t v = gen();
        for (int j = 0; j < 8; ++j)
            bytes[i + j] = static_cast<uint8_t>(v >> (8 * j));
    }
    bytes[6] = static_cast<uint8_t>((bytes[6] & 0x0F) | 0x40); // version 4
    bytes[8] = static_cast<uint8_t>((bytes[8] & 0x3F) | 0x80); // RFC 4122 variant

    static const char hex[] = "0123456789abcdef";
    std::string uuid;
    uuid.reserve(36);
    for (int i = 0; i < 16; ++i) {
        if (i == 4 || i == 6 || i == 8 || i == 10)
            uuid.push_back('-');
        uuid.push_back(hex[bytes[i] >> 4]);
        uuid.push_back(hex[bytes[i] & 0xF]);
    }
    return kScheme + uuid;
}

std::string artifact_urn(const std::string& container_urn, uint64_t artifact_id) {
    return container_urn + "/artifact/" + artifact_id_string(artifact_id);
}

std::string segment_name(const std::string& urn) {
    const std::string scheme = kScheme;
    if (urn.rfind(scheme, 0) != 0)
        raise(ErrorCode::UnknownUrn, "not an aff4 URN: " + urn);
    return urn.substr(scheme.size());
}

// ---------------------------------------------------------------- writer

ContainerWriter::ContainerWriter(const std::filesystem::path& path,
                                 std::optional<std::string> urn)
    : urn_(urn ? *urn : random_container_urn()), zip_(path) {
    if (!is_container_urn(urn_))
        raise(ErrorCode::UnknownUrn, "bad container URN: " + urn_);
    const auto* bytes = reinterpret_cast<const uint8_t*>(urn_.data());
    zip_.add_entry(kDescriptionEntry, zipio::Method::Stored, {bytes, urn_.size()});
}

std::string ContainerWriter::add_artifact(const artifact::ArtifactRecord& record,
                                          const ByteSource& content) {
    if (record.status != artifact::RecordStatus::Ok)
        raise(ErrorCode::RecordIncomplete,
              "failed record " + std::to_string(record.artifact_id) + " cannot be packed");
    const std::string name = segment_name(artifact_urn(urn_, record.artifact_id));

    zip_.begin_entry(name, zipio::Method::Deflate, record.size_bytes);
    std::vector<uint8_t> buf(1 << 16);
    uint64_t total = 0;
    try {
        while (true) {
            const size_t got = content(buf);
            if (got == 0)
                break;
            total += got;
            if (total > record.size_bytes)
                raise(ErrorCode::LengthMismatch,
                      "segment " + name + " longer than size_bytes " +
                          std::to_string(record.size_bytes));
            zip_.write({buf.data(), got});
        }
        if (total != record.size_bytes)
            raise(ErrorCode::LengthMismatch, "segment " + name + " is " + std::to_string(total) +
                                                 " bytes, expected " +
                                                 std::to_string(record.size_bytes));
    } catch (...) {
        zip_.abort_entry();
        throw;
    }
    zip_.end_entry();
    return name;
}

void ContainerWriter::write_information_turtle(const std::string& turtle) {
    if (zip_.finalized())
        raise(ErrorCode::AlreadyFinalized, "information.turtle already written");
    const auto* bytes = reinterpret_cast<const uint8_t*>(turtle.data());
    zip_.add_entry(kTurtleEntry, zipio::Method::Deflate, {bytes, turtle.size()});
    zip_.finalize();
}

// ---------------------------------------------------------------- reader

ContainerReader::ContainerReader(const std::filesystem::path& path) : zip_(path) {
    const auto* description = zip_.find(kDescriptionEntry);
    if (!description)
        raise(ErrorCode::NotAff4, "missing container.description: " + path.string());
    if (!zip_.find(kTurtleEntry))
        raise(ErrorCode::NotAff4, "missing information.turtle: " + path.string());
    const auto bytes = zip_.read_all(*description);
    urn_.assign(bytes.begin(), bytes.end());
    if (!is_container_urn(urn_))
        raise(ErrorCode::NotAff4, "container.description holds no valid URN");
}

std::vector<rdf::Triple> ContainerReader::read_metadata() {
    const auto bytes = zip_.read_all(*zip_.find(kTurtleEntry));
    return rdf::parse_turtle(std::string(bytes.begin(), bytes.end()));
}

const zipio::EntryInfo& ContainerReader::segment_for(const std::string& urn) {
    const auto* entry = zip_.find(segment_name(urn));
    if (!entry)
        raise(ErrorCode::UnknownUrn, urn);
    return *entry;
}

uint64_t ContainerReader::extract_artifact(const std::string& urn,
                                           const std::filesystem::path& dest) {
    auto stream = zip_.open_stream(segment_for(urn));
    std::ofstream out(dest, std::ios::binary | std::ios::trunc);
    if (!out)
        raise(ErrorCode::IoError, "cannot write " + dest.string());
    std::vector<uint8_t> buf(1 << 16);
    uint64_t total = 0;
    while (true) {
        const size_t got = stream.read(buf);
        if (got == 0)
            break;
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(got));
        if (!out)
            raise(ErrorCode::IoError, "write failed: " + dest.string());
        total += got;
    }
    if (!out.flush())
        raise(ErrorCode::IoError, "flush failed: " + dest.string());
    return total;
}

zipio::ZipReader::EntryStream ContainerReader::open_segment(const std::string& urn) {
    return zip_.open_stream(segment_for(urn));
}

} // namespace sit::aff4

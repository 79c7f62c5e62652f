//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sit/artifact.hpp"
#include "sit/rdf.hpp"
#include "sit/zipio.hpp"

namespace sit::aff4 {

// Container URNs are `aff4://<lowercase uuid4>`; artifact URNs append
// `/artifact/<6-digit id>`.
bool is_container_urn(const std::string& urn);
bool is_artifact_urn(const std::string& urn);
std::string random_container_urn();
std::string artifact_urn(const std::string& container_urn, uint64_t artifact_id);

// Mapping rule between URNs and ZIP entry names: strip the scheme, keep
// the path ("<uuid>/artifact/<id>").
std::string segment_name(const std::string& urn);

// read()-style source feeding segment content; returns 0 at end.
using ByteSource = std::function<size_t(std::span<uint8_t>)>;

// Evidence container writer. Entry order is fixed: container.description
// first (stored), payload segments (deflate), information.turtle last.
// With a fixed URN and identical inputs the output is byte-identical.
class ContainerWriter {
public:
    ContainerWriter(const std::filesystem::path& path, std::optional<std::string> urn);
    const std::string& urn() const { return urn_; }

    // Copies exactly record.size_bytes from the source into the segment;
    // a short or long stream raises LengthMismatch with the partial entry
    // dropped.
    std::string add_artifact(const artifact::ArtifactRecord& record, const ByteSource& content);

    // Writes the final entry and closes the container. A second call
    // raises AlreadyFinalized.
    void write_information_turtle(const std::string& turtle);
    bool finalized() const { return zip_.finalized(); }

private:
    std::string urn_;
    zipio::ZipWriter zip_;
};

class ContainerReader {
public:
    explicit ContainerReader(const std::filesystem::path& path);

    const std::string& urn() const { return urn_; }
    std::vector<rdf::Triple> read_metadata();

    // Writes the exact payload bytes to dest, returns the byte count.
    uint64_t extract_artifact(const std::string& urn, const std::filesystem::path& dest);

    // Streaming access for in-stream verification.
    zipio::ZipReader::EntryStream open_segment(const std::string& urn);

    zipio::ZipReader& zip() { return zip_; }

private:
    const zipio::EntryInfo& segment_for(const std::string& urn);

    zipio::ZipReader zip_;
    std::string urn_;
};

} // namespace sit::aff4

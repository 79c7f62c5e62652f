//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>

namespace sit::hashing {

// Acquisition-time digests, lowercase hex. Lengths are fixed by algorithm:
// 32 / 40 / 64 characters.
struct TripleDigest {
    std::string md5;
    std::string sha1;
    std::string sha256;
};

// Feeds one byte stream to MD5, SHA1 and SHA256 at once, so content is
// read exactly once from the source.
class TripleHasher {
public:
    TripleHasher();
    ~TripleHasher();
    TripleHasher(const TripleHasher&) = delete;
    TripleHasher& operator=(const TripleHasher&) = delete;

    void update(std::span<const uint8_t> chunk);
    TripleDigest finish();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

TripleDigest hash_bytes(std::span<const uint8_t> bytes);

std::string sha256_hex(std::span<const uint8_t> bytes);
std::string sha256_file(const std::filesystem::path& path);

} // namespace sit::hashing

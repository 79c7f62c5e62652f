//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#include "sit/hashing.hpp"

#include <fstream>
#include <vector>

#include <openssl/evp.h>

#include "sit/errors.hpp"

namespace sit::hashing {

namespace {

std::string to_hex(const unsigned char* digest, size_t len) {
    static const char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (size_t i = 0; i < len; ++i) {
        out.push_back(hex[(digest[i] >> 4) & 0xF]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

struct Ctx {
    EVP_MD_CTX* ctx = nullptr;

    explicit Ctx(const EVP_MD* md) {
        ctx = EVP_MD_CTX_new();
        if (!ctx || EVP_DigestInit_ex(ctx, md, nullptr) != 1)
            raise(ErrorCode::IoError, "hash context initialization failed");
    }
    ~Ctx() { EVP_MD_CTX_free(ctx); }

    void update(std::span<const uint8_t> chunk) {
        if (EVP_DigestUpdate(ctx, chunk.data(), chunk.size()) != 1)
            raise(ErrorCode::IoError, "hash update failed");
    }
    std::string finish() {
        unsigned char digest[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx, digest, &len) != 1)
            raise(ErrorCode::IoError, "hash finalization failed");
        return to_hex(digest, len);
    }
};

} // namespace

struct TripleHasher::Impl {
    Ctx md5{EVP_md5()};
    Ctx sha1{EVP_sha1()};
    Ctx sha256{EVP_sha256()};
};

TripleHasher::TripleHasher() : impl_(std::make_unique<Impl>()) {}
TripleHasher::~TripleHasher() = default;

void TripleHasher::update(std::span<const uint8_t> chunk) {
    impl_->md5.update(chunk);
    impl_->sha1.update(chunk);
    impl_->sha256.update(chunk);
}

TripleDigest TripleHasher::finish() {
    return TripleDigest{impl_->md5.finish(), impl_->sha1.finish(), impl_->sha256.finish()};
}

TripleDigest hash_bytes(std::span<const uint8_t> bytes) {
    TripleHasher hasher;
    hasher.update(bytes);
    return hasher.finish();
}

std::string sha256_hex(std::span<const uint8_t> bytes) {
    Ctx ctx(EVP_sha256());
    ctx.update(bytes);
    return ctx.finish();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        raise(ErrorCode::IoError, "cannot open for hashing: " + path.string());
    Ctx ctx(EVP_sha256());
    std::vector<uint8_t> buf(1 << 16);
    while (in) {
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        const auto got = static_cast<size_t>(in.gcount());
        if (got > 0)
            ctx.update({buf.data(), got});
    }
    if (in.bad())
        raise(ErrorCode::IoError, "read failed while hashing: " + path.string());
    return ctx.finish();
}

} // namespace sit::hashing

//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#include "runlist_oracle.hpp"

namespace sit::testsupport {

std::optional<std::vector<OracleRun>> oracle_decode_runlist(const std::vector<uint8_t>& bytes) {
    std::vector<OracleRun> runs;
    unsigned long long i = 0;
    long long current = 0;

    while (true) {
        if (i >= bytes.size())
            return std::nullopt; // ran off the end before the terminator
        const unsigned header = bytes[i];
        i = i + 1;
        if (header == 0)
            return runs;

        const unsigned nlen = header % 16;
        const unsigned noff = header / 16;
        if (nlen == 0 || nlen > 8 || noff > 8)
            return std::nullopt;
        if (i + nlen + noff > bytes.size())
            return std::nullopt;

        unsigned long long count = 0;
        for (unsigned k = 0; k < nlen; ++k) {
            unsigned long long byte = bytes[i + k];
            for (unsigned shift = 0; shift < k; ++shift)
                byte = byte * 256;
            count = count + byte;
        }
        i = i + nlen;
        if (count == 0)
            return std::nullopt;

        OracleRun run;
        run.count = count;
        if (noff == 0) {
            run.sparse = true;
            run.lcn = 0;
        } else {
            // two's complement little-endian of width noff
            unsigned long long magnitude = 0;
            for (unsigned k = 0; k < noff; ++k) {
                unsigned long long byte = bytes[i + k];
                for (unsigned shift = 0; shift < k; ++shift)
                    byte = byte * 256;
                magnitude = magnitude + byte;
            }
            i = i + noff;
            long long delta;
            const bool negative = (bytes[i - 1] & 0x80) != 0;
            if (negative && noff < 8) {
                unsigned long long wrap = 1;
                for (unsigned shift = 0; shift < noff; ++shift)
                    wrap = wrap * 256;
                delta = static_cast<long long>(magnitude) - static_cast<long long>(wrap);
            } else {
                delta = static_cast<long long>(magnitude);
            }
            current = current + delta;
            if (current < 0)
                return std::nullopt;
            run.sparse = false;
            run.lcn = current;
        }
        runs.push_back(run);
    }
}

std::vector<uint8_t> random_runlist(std::mt19937_64& gen) {
    std::uniform_int_distribution<int> run_count_dist(0, 8);
    std::uniform_int_distribution<int> kind_dist(0, 9);
    std::uniform_int_distribution<int> count_bits_dist(1, 24);
    std::uniform_int_distribution<int> jump_dist(-5000, 5000);

    std::vector<uint8_t> out;
    const int n = run_count_dist(gen);
    long long lcn = 0;
    for (int r = 0; r < n; ++r) {
        const uint64_t count =
            (std::uniform_int_distribution<uint64_t>(1, (1ull << count_bits_dist(gen))))(gen);
        const bool sparse = kind_dist(gen) == 0;

        std::vector<uint8_t> len_bytes;
        uint64_t c = count;
        do {
            len_bytes.push_back(static_cast<uint8_t>(c & 0xFF));
            c >>= 8;
        } while (c != 0);

        std::vector<uint8_t> off_bytes;
        if (!sparse) {
            long long next = lcn + jump_dist(gen);
            if (next < 0)
                next = lcn + 5000; // keep the walk non-negative
            long long delta = next - lcn;
            lcn = next;
            while (true) {
                off_bytes.push_back(static_cast<uint8_t>(delta & 0xFF));
                const long long rest = delta >> 8;
                const bool done = (off_bytes.back() & 0x80) ? rest == -1 : rest == 0;
                if (done)
                    break;
                delta = rest;
            }
        }
        out.push_back(static_cast<uint8_t>((off_bytes.size() << 4) | len_bytes.size()));
        out.insert(out.end(), len_bytes.begin(), len_bytes.end());
        out.insert(out.end(), off_bytes.begin(), off_bytes.end());
    }
    out.push_back(0x00);
    return out;
}

} // namespace sit::testsupport

//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace sit::testsupport {

struct OracleRun {
    unsigned long long count = 0;
    bool sparse = true;
    long long lcn = 0;
};

// Independent brute-force runlist decoder: walks the bytes with plain
// loops and explicit two's-complement arithmetic, sharing nothing with
// the production decoder. Returns nullopt on any malformed input.
std::optional<std::vector<OracleRun>> oracle_decode_runlist(const std::vector<uint8_t>& bytes);

// Random well-formed runlist with its own encoder (minimal little-endian
// fields, signed deltas, occasional sparse runs). Returns the encoded
// bytes; the decoded truth is what the oracle and the implementation must
// both produce.
std::vector<uint8_t> random_runlist(std::mt19937_64& gen);

} // namespace sit::testsupport

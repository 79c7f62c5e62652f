//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace sit {

// UTF-16LE to UTF-8, surrogate pairs handled; unpaired surrogates become
// U+FFFD. NTFS names are uninterpreted UTF-16 code units, so this must
// never fail.
std::string utf16le_to_utf8(std::span<const uint8_t> bytes);

// ASCII-only case folding; NTFS name matching in this toolkit is
// case-insensitive on the ASCII range and bytewise elsewhere.
char ascii_lower(char c);
std::string ascii_lower_copy(const std::string& s);
bool iequals_ascii(const std::string& a, const std::string& b);
bool istarts_with_ascii(const std::string& text, const std::string& prefix);

std::string to_hex_u32(uint32_t value); // "0x" + 8 lowercase digits

// Zero-padded decimal, width 6: artifact ids in payload names, segment
// names and URNs.
std::string artifact_id_string(uint64_t id);

} // namespace sit

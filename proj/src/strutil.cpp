//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#include "sit/strutil.hpp"

#include <cstdio>

namespace sit {

namespace {

void append_codepoint(std::string& out, uint32_t cp) {
    if (cp <= 0x7F) {
        out.push_back(static_cast<char>(cp));
    } else if (cp <= 0x7FF) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp <= 0xFFFF) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

} // namespace

std::string utf16le_to_utf8(std::span<const uint8_t> bytes) {
    std::string out;
    out.reserve(bytes.size() / 2);
    size_t i = 0;
    const size_t units = bytes.size() / 2;
    while (i < units) {
        const uint32_t u = static_cast<uint32_t>(bytes[2 * i]) | (static_cast<uint32_t>(bytes[2 * i + 1]) << 8);
        ++i;
        if (u >= 0xD800 && u <= 0xDBFF) {
            if (i < units) {
                const uint32_t lo = static_cast<uint32_t>(bytes[2 * i]) |
                                    (static_cast<uint32_t>(bytes[2 * i + 1]) << 8);
                if (lo >= 0xDC00 && lo <= 0xDFFF) {
                    ++i;
                    append_codepoint(out, 0x10000 + ((u - 0xD800) << 10) + (lo - 0xDC00));
                    continue;
                }
            }
            append_codepoint(out, 0xFFFD);
        } else if (u >= 0xDC00 && u <= 0xDFFF) {
            append_codepoint(out, 0xFFFD);
        } else {
            append_codepoint(out, u);
        }
    }
    return out;
}

char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::string ascii_lower_copy(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        c = ascii_lower(c);
    return out;
}

bool iequals_ascii(const std::string& a, const std::string& b) {
    if (a.size() != b.size())
        return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (ascii_lower(a[i]) != ascii_lower(b[i]))
            return false;
    return true;
}

bool istarts_with_ascii(const std::string& text, const std::string& prefix) {
    if (prefix.size() > text.size())
        return false;
    for (size_t i = 0; i < prefix.size(); ++i)
        if (ascii_lower(text[i]) != ascii_lower(prefix[i]))
            return false;
    return true;
}

std::string to_hex_u32(uint32_t value) {
    char buf[12];
    std::snprintf(buf, sizeof(buf), "0x%08x", value);
    return buf;
}

std::string artifact_id_string(uint64_t id) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%06llu", static_cast<unsigned long long>(id));
    return buf;
}

} // namespace sit

//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#include "sit/timefmt.hpp"

#include <chrono>
#include <cstdio>

namespace sit {

namespace {

// Civil-calendar conversions on a proleptic Gregorian calendar,
// era-based so they stay exact over the whole filetime range.
int64_t days_from_civil(int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468; // days since 1970-01-01
}

void civil_from_days(int64_t z, int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

const int64_t kDaysTo1601 = days_from_civil(1601, 1, 1); // negative: before unix epoch

bool parse_fixed_uint(const std::string& s, size_t pos, size_t len, unsigned& out) {
    unsigned value = 0;
    for (size_t i = 0; i < len; ++i) {
        char c = s[pos + i];
        if (c < '0' || c > '9')
            return false;
        value = value * 10 + static_cast<unsigned>(c - '0');
    }
    out = value;
    return true;
}

} // namespace

std::string filetime_to_iso(int64_t filetime) {
    const int64_t seconds_since_1601 = filetime / kTicksPerSecond;
    const int64_t fraction = filetime % kTicksPerSecond;
    const int64_t days = seconds_since_1601 / 86400 + kDaysTo1601;
    const int64_t sod = seconds_since_1601 % 86400;

    int64_t year = 0;
    unsigned month = 0, day = 0;
    civil_from_days(days, year, month, day);

    char buf[40];
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lld.%07lldZ",
                  static_cast<long long>(year), month, day,
                  static_cast<long long>(sod / 3600),
                  static_cast<long long>((sod / 60) % 60),
                  static_cast<long long>(sod % 60),
                  static_cast<long long>(fraction));
    return buf;
}

std::string filetime_to_iso_millis(int64_t filetime) {
    std::string full = filetime_to_iso(filetime);
    // ...SS.fffffffZ -> ...SS.fffZ
    return full.substr(0, full.size() - 5) + "Z";
}

std::optional<int64_t> iso_to_filetime(const std::string& text) {
    // YYYY-MM-DDTHH:MM:SS[.fraction]Z
    if (text.size() < 20)
        return std::nullopt;
    unsigned y, mo, d, h, mi, s;
    if (!parse_fixed_uint(text, 0, 4, y) || text[4] != '-' ||
        !parse_fixed_uint(text, 5, 2, mo) || text[7] != '-' ||
        !parse_fixed_uint(text, 8, 2, d) || text[10] != 'T' ||
        !parse_fixed_uint(text, 11, 2, h) || text[13] != ':' ||
        !parse_fixed_uint(text, 14, 2, mi) || text[16] != ':' ||
        !parse_fixed_uint(text, 17, 2, s))
        return std::nullopt;
    if (y < 1601 || mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 59)
        return std::nullopt;

    size_t pos = 19;
    int64_t fraction = 0;
    if (text[pos] == '.') {
        ++pos;
        size_t digits = 0;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            if (digits < 7)
                fraction = fraction * 10 + (text[pos] - '0');
            ++digits;
            ++pos;
        }
        if (digits == 0 || digits > 7)
            return std::nullopt;
        for (size_t i = digits; i < 7; ++i)
            fraction *= 10;
    }
    if (pos + 1 != text.size() || text[pos] != 'Z')
        return std::nullopt;

    const int64_t days = days_from_civil(y, mo, d) - kDaysTo1601;
    if (days < 0)
        return std::nullopt;
    const int64_t seconds = days * 86400 + h * 3600 + mi * 60 + s;
    return seconds * kTicksPerSecond + fraction;
}

int64_t now_filetime() {
    using namespace std::chrono;
    const auto since_epoch = system_clock::now().time_since_epoch();
    return kUnixEpochTicks + duration_cast<duration<int64_t, std::ratio<1, 10'000'000>>>(since_epoch).count();
}

} // namespace sit

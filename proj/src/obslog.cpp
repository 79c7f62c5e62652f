//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#include "sit/obslog.hpp"

#include <algorithm>

#include "sit/errors.hpp"
#include "sit/timefmt.hpp"

namespace sit::obslog {

const char* to_string(Level level) {
    switch (level) {
    case Level::Info: return "INFO";
    case Level::Warn: return "WARN";
    case Level::Error: return "ERROR";
    }
    return "?";
}

std::string quote_value(const std::string& value) {
    const bool needs_quoting =
        value.empty() || value.find_first_of(" \t\"=") != std::string::npos;
    if (!needs_quoting)
        return value;
    std::string out = "\"";
    for (char c : value) {
        if (c == '"' || c == '\\')
            out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_line(int64_t ticks, Level level, const std::string& module,
                        const std::string& event, const KvList& kv) {
    std::string line = filetime_to_iso_millis(ticks);
    line += ' ';
    line += to_string(level);
    line += ' ';
    line += module;
    line += ' ';
    line += event;
    for (const auto& [k, v] : kv) {
        line += ' ';
        line += k;
        line += '=';
        line += quote_value(v);
    }
    return line;
}

LogSink::LogSink(const std::filesystem::path& out_dir, const std::string& module, bool quiet)
    : path_(out_dir / ("sit_" + module + ".log")), module_(module), quiet_(quiet) {
    file_ = std::fopen(path_.string().c_str(), "ab");
    if (!file_)
        raise(ErrorCode::IoError, "cannot open log file: " + path_.string());
}

LogSink::~LogSink() {
    if (file_)
        std::fclose(file_);
}

void LogSink::emit(Level level, const std::string& event, const KvList& kv, bool key_step) {
    // Timestamps within one file never go backwards, even if the wall
    // clock does.
    const int64_t ticks = std::max(now_filetime(), last_ticks_);
    last_ticks_ = ticks;
    const std::string line = format_line(ticks, level, module_, event, kv);

    bool file_ok = true;
    if (std::fputs(line.c_str(), file_) < 0 || std::fputc('\n', file_) == EOF ||
        std::fflush(file_) != 0)
        file_ok = false;

    if (!file_ok) {
        // Console is the fallback channel; the run continues.
        std::fprintf(stderr, "[log write failed: %s] %s\n", path_.string().c_str(), line.c_str());
        return;
    }

    if (level == Level::Error) {
        std::fprintf(stderr, "%s\n", line.c_str());
    } else if (key_step && !quiet_) {
        std::fprintf(stdout, "%s\n", line.c_str());
        std::fflush(stdout);
    }
}

} // namespace sit::obslog

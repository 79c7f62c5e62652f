//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace sit::obslog {

enum class Level {
    Info,
    Warn,
    Error,
};

const char* to_string(Level level);

using KvList = std::vector<std::pair<std::string, std::string>>;

// Append-only per-module log file `sit_<module>.log`, flushed after every
// line so a crash loses at most the event in flight. Key steps are
// mirrored to the console (stdout; errors to stderr) unless quiet.
class LogSink {
public:
    LogSink(const std::filesystem::path& out_dir, const std::string& module, bool quiet = false);
    ~LogSink();
    LogSink(const LogSink&) = delete;
    LogSink& operator=(const LogSink&) = delete;

    // key_step: module start/end, per-artifact acquired/failed, findings,
    // verdict summaries, limit hits — the console-visible events.
    void emit(Level level, const std::string& event, const KvList& kv = {}, bool key_step = false);

    void info(const std::string& event, const KvList& kv = {}, bool key_step = false) {
        emit(Level::Info, event, kv, key_step);
    }
    void warn(const std::string& event, const KvList& kv = {}, bool key_step = false) {
        emit(Level::Warn, event, kv, key_step);
    }
    void error(const std::string& event, const KvList& kv = {}) {
        emit(Level::Error, event, kv, true);
    }

    const std::filesystem::path& path() const { return path_; }
    const std::string& module() const { return module_; }

private:
    std::filesystem::path path_;
    std::string module_;
    bool quiet_ = false;
    std::FILE* file_ = nullptr;
    int64_t last_ticks_ = 0;
};

// One formatted line, without the trailing newline. Exposed for tests and
// for the livesim log tailer, which parses these lines.
std::string format_line(int64_t ticks, Level level, const std::string& module,
                        const std::string& event, const KvList& kv);

std::string quote_value(const std::string& value);

} // namespace sit::obslog

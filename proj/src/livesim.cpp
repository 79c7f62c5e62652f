//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#include "sit/livesim.hpp"

#include <chrono>
#include <fstream>
#include <set>
#include <thread>

#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "sit/errors.hpp"
#include "sit/hashing.hpp"
#include "sit/strutil.hpp"
#include "sit/zipio.hpp"

namespace sit::livesim {

namespace fs = std::filesystem;

bool HarnessReport::all_passed() const {
    for (const auto& check : conclusions)
        if (!check.passed)
            return false;
    return true;
}

std::vector<uint8_t> base64_decode(const std::string& text) {
    auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<uint8_t> out;
    int acc = 0, bits = 0;
    for (char c : text) {
        if (c == '=' || c == '\n' || c == '\r')
            continue;
        const int v = value_of(c);
        if (v < 0)
            raise(ErrorCode::ScenarioInvalid, std::string("bad base64 character '") + c + "'");
        acc = (acc << 6) | v;
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<uint8_t>((acc >> bits) & 0xFF));
        }
    }
    return out;
}

namespace {

std::string normalize_target(std::string path) {
    for (char& c : path)
        if (c == '/')
            c = '\\';
    if (path.empty() || path[0] != '\\')
        path = "\\" + path;
    return path;
}

fs::path host_path(const fs::path& staging, const std::string& target) {
    fs::path p = staging;
    std::string part;
    for (size_t i = 1; i <= target.size(); ++i) {
        if (i == target.size() || target[i] == '\\') {
            if (!part.empty())
                p /= part;
            part.clear();
        } else {
            part.push_back(target[i]);
        }
    }
    return p;
}

// `k=v` pairs from a log line, honoring the quoting rules of the log
// format.
std::map<std::string, std::string> parse_kv(const std::string& line) {
    std::map<std::string, std::string> kv;
    size_t i = 0;
    while (i < line.size()) {
        const size_t eq = line.find('=', i);
        if (eq == std::string::npos)
            break;
        size_t key_start = line.rfind(' ', eq);
        key_start = key_start == std::string::npos ? 0 : key_start + 1;
        const std::string key = line.substr(key_start, eq - key_start);
        std::string value;
        size_t j = eq + 1;
        if (j < line.size() && line[j] == '"') {
            ++j;
            while (j < line.size() && line[j] != '"') {
                if (line[j] == '\\' && j + 1 < line.size())
                    ++j;
                value.push_back(line[j]);
                ++j;
            }
            ++j;
        } else {
            while (j < line.size() && line[j] != ' ') {
                value.push_back(line[j]);
                ++j;
            }
        }
        kv[key] = value;
        i = j + 1;
    }
    return kv;
}

class ChildProcess {
public:
    ChildProcess(const std::vector<std::string>& argv, bool quiet) {
        std::vector<char*> args;
        args.reserve(argv.size() + 1);
        for (const auto& a : argv)
            args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);

        pid_ = fork();
        if (pid_ < 0)
            raise(ErrorCode::PipelineCrashed, "fork failed");
        if (pid_ == 0) {
            if (quiet) {
                std::freopen("/dev/null", "w", stdout);
            }
            execv(args[0], args.data());
            _exit(127);
        }
    }

    bool running() {
        if (exit_code_)
            return false;
        int status = 0;
        const pid_t r = waitpid(pid_, &status, WNOHANG);
        if (r == 0)
            return true;
        finish(status);
        return false;
    }

    int wait() {
        if (!exit_code_) {
            int status = 0;
            waitpid(pid_, &status, 0);
            finish(status);
        }
        return *exit_code_;
    }

    bool crashed() const { return crashed_; }

private:
    void finish(int status) {
        if (WIFEXITED(status)) {
            exit_code_ = WEXITSTATUS(status);
            crashed_ = *exit_code_ == 127;
        } else {
            exit_code_ = -1;
            crashed_ = true;
        }
    }

    pid_t pid_ = -1;
    std::optional<int> exit_code_;
    bool crashed_ = false;
};

// Incremental reader of the flushed artifact log; yields complete lines.
class LogTail {
public:
    explicit LogTail(fs::path path) : path_(std::move(path)) {}

    std::vector<std::string> poll() {
        std::vector<std::string> lines;
        std::ifstream in(path_, std::ios::binary);
        if (!in)
            return lines;
        in.seekg(0, std::ios::end);
        const auto size = static_cast<uint64_t>(in.tellg());
        if (size <= offset_)
            return lines;
        in.seekg(static_cast<std::streamoff>(offset_));
        std::string chunk(static_cast<size_t>(size - offset_), '\0');
        in.read(chunk.data(), static_cast<std::streamsize>(chunk.size()));
        offset_ = size;
        buffer_ += chunk;
        size_t start = 0;
        while (true) {
            const size_t nl = buffer_.find('\n', start);
            if (nl == std::string::npos)
                break;
            lines.push_back(buffer_.substr(start, nl - start));
            start = nl + 1;
        }
        buffer_.erase(0, start);
        return lines;
    }

private:
    fs::path path_;
    uint64_t offset_ = 0;
    std::string buffer_;
};

void apply_file_mutation(const fs::path& staging, const Mutation& mutation) {
    const fs::path target = host_path(staging, mutation.target);
    switch (mutation.action) {
    case Action::Overwrite: {
        std::ofstream out(target, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(mutation.data.data()),
                  static_cast<std::streamsize>(mutation.data.size()));
        break;
    }
    case Action::Append: {
        std::ofstream out(target, std::ios::binary | std::ios::app);
        out.write(reinterpret_cast<const char*>(mutation.data.data()),
                  static_cast<std::streamsize>(mutation.data.size()));
        break;
    }
    case Action::Delete: {
        std::error_code ec;
        fs::remove(target, ec);
        break;
    }
    }
}

// Rewrites the container with one segment's content replaced/extended/
// removed — the "attacker edits the evidence file" step. CRCs and sizes
// stay consistent so only the hash comparison can catch it.
void tamper_container(const fs::path& container, const std::string& segment,
                      const Mutation& mutation) {
    struct Entry {
        std::string name;
        zipio::Method method;
        std::vector<uint8_t> bytes;
    };
    std::vector<Entry> entries;
    {
        zipio::ZipReader reader(container);
        for (const auto& info : reader.entries())
            entries.push_back(Entry{info.name, info.method, reader.read_all(info)});
    }

    const fs::path rewritten = container.string() + ".tampered";
    {
        zipio::ZipWriter writer(rewritten);
        for (auto& entry : entries) {
            if (entry.name == segment) {
                if (mutation.action == Action::Delete)
                    continue;
                if (mutation.action == Action::Overwrite)
                    entry.bytes = mutation.data;
                else
                    entry.bytes.insert(entry.bytes.end(), mutation.data.begin(),
                                       mutation.data.end());
            }
            writer.add_entry(entry.name, entry.method, entry.bytes);
        }
        writer.finalize();
    }
    fs::rename(rewritten, container);
}

void snapshot_tree(const fs::path& staging, std::map<std::string, std::string>& hashes) {
    for (const auto& dirent : fs::recursive_directory_iterator(staging)) {
        if (!dirent.is_regular_file())
            continue;
        const fs::path rel = fs::relative(dirent.path(), staging);
        std::string path = "\\";
        bool first = true;
        for (const auto& part : rel) {
            if (!first)
                path += '\\';
            path += part.string();
            first = false;
        }
        hashes[path] = hashing::sha256_file(dirent.path());
    }
}

} // namespace

Scenario parse_scenario(const fs::path& json_path) {
    std::ifstream in(json_path);
    if (!in)
        raise(ErrorCode::ScenarioInvalid, "cannot read " + json_path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ScenarioInvalid, e.what());
    }
    if (!doc.is_object() || !doc.contains("staging") || !doc["staging"].is_string() ||
        !doc.contains("mutations") || !doc["mutations"].is_array())
        raise(ErrorCode::ScenarioInvalid, "expected {\"staging\", \"mutations\": []}");

    Scenario scenario;
    scenario.staging = fs::path(doc["staging"].get<std::string>());
    if (!fs::is_directory(scenario.staging))
        raise(ErrorCode::ScenarioInvalid,
              "staging tree missing: " + scenario.staging.string());

    for (const auto& m : doc["mutations"]) {
        Mutation mutation;
        const std::string trigger = m.value("trigger", "");
        if (trigger == "at_start")
            mutation.trigger = Trigger::AtStart;
        else if (trigger == "after_acquire")
            mutation.trigger = Trigger::AfterAcquire;
        else if (trigger == "after_pipeline")
            mutation.trigger = Trigger::AfterPipeline;
        else
            raise(ErrorCode::ScenarioInvalid, "unknown trigger \"" + trigger + "\"");

        const std::string action = m.value("action", "");
        if (action == "overwrite")
            mutation.action = Action::Overwrite;
        else if (action == "append")
            mutation.action = Action::Append;
        else if (action == "delete")
            mutation.action = Action::Delete;
        else
            raise(ErrorCode::ScenarioInvalid, "unknown action \"" + action + "\"");

        if (!m.contains("target") || !m["target"].is_string())
            raise(ErrorCode::ScenarioInvalid, "mutation without target");
        mutation.target = normalize_target(m["target"].get<std::string>());
        if (m.contains("data_b64"))
            mutation.data = base64_decode(m["data_b64"].get<std::string>());
        if (mutation.action != Action::Delete && mutation.data.empty())
            raise(ErrorCode::ScenarioInvalid,
                  action + " mutation of " + mutation.target + " needs data_b64");

        if (mutation.trigger != Trigger::AfterPipeline &&
            !fs::exists(host_path(scenario.staging, mutation.target)))
            raise(ErrorCode::ScenarioInvalid,
                  "trigger target not in staging tree: " + mutation.target);
        scenario.mutations.push_back(std::move(mutation));
    }
    return scenario;
}

HarnessReport run_scenario(const HarnessOptions& options) {
    const Scenario scenario = parse_scenario(options.scenario_path);
    HarnessReport report;

    snapshot_tree(scenario.staging, report.expected_hashes);

    for (const auto& mutation : scenario.mutations)
        if (mutation.trigger == Trigger::AtStart)
            apply_file_mutation(scenario.staging, mutation);

    fs::create_directories(options.out_dir);
    const fs::path artifact_log = options.out_dir / "sit_artifact.log";
    {
        // A previous run's log would satisfy triggers prematurely.
        std::error_code ec;
        fs::remove(artifact_log, ec);
    }

    std::vector<std::string> argv = {
        options.sit_binary.string(), "all",
        "--source", scenario.staging.string(),
        "--source-kind", "dir",
        "--config", options.config.string(),
        "--out-dir", options.out_dir.string(),
    };
    ChildProcess pipeline(argv, options.quiet_child);

    // Log-driven triggers: fire each after_acquire mutation only once its
    // artifact's `acquired` event is on disk.
    std::vector<const Mutation*> pending;
    for (const auto& mutation : scenario.mutations)
        if (mutation.trigger == Trigger::AfterAcquire)
            pending.push_back(&mutation);

    LogTail tail(artifact_log);
    std::map<std::string, std::pair<std::string, std::string>> acquired; // path -> (id, sha256)
    auto consume_lines = [&]() {
        for (const auto& line : tail.poll()) {
            if (line.find(" acquired ") == std::string::npos)
                continue;
            const auto kv = parse_kv(line);
            const auto path = kv.find("path");
            if (path == kv.end())
                continue;
            acquired[path->second] = {kv.count("id") ? kv.at("id") : "",
                                      kv.count("sha256") ? kv.at("sha256") : ""};
            for (auto it = pending.begin(); it != pending.end();) {
                if ((*it)->target == path->second) {
                    apply_file_mutation(scenario.staging, **it);
                    it = pending.erase(it);
                } else {
                    ++it;
                }
            }
        }
    };

    while (pipeline.running()) {
        consume_lines();
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    report.pipeline_exit = pipeline.wait();
    consume_lines();

    if (pipeline.crashed())
        raise(ErrorCode::PipelineCrashed, "pipeline child did not exit normally");

    report.conclusions.push_back(CheckResult{
        "pipeline_exit_ok", report.pipeline_exit == 0,
        "exit=" + std::to_string(report.pipeline_exit)});

    for (const auto* mutation : pending)
        report.conclusions.push_back(CheckResult{
            "after_acquire_event_seen:" + mutation->target, false,
            "no acquired event for this path appeared in the artifact log"});

    // Container URN and the path -> URN mapping, all from public surfaces.
    const fs::path container = options.out_dir / "evidence.aff4";
    std::string container_urn;
    {
        zipio::ZipReader reader(container);
        if (const auto* description = reader.find("container.description")) {
            const auto bytes = reader.read_all(*description);
            container_urn.assign(bytes.begin(), bytes.end());
        }
    }
    for (const auto& [path, id_hash] : acquired) {
        if (!id_hash.first.empty())
            report.observed[container_urn + "/artifact/" + id_hash.first] = id_hash.second;
    }

    // Acquisition-time semantics: recorded hashes match the content from
    // *before* the mutation fired.
    for (const auto& mutation : scenario.mutations) {
        if (mutation.trigger != Trigger::AfterAcquire)
            continue;
        const auto initial = report.expected_hashes.find(mutation.target);
        const auto recorded = acquired.find(mutation.target);
        const bool ok = initial != report.expected_hashes.end() &&
                        recorded != acquired.end() &&
                        recorded->second.second == initial->second;
        report.conclusions.push_back(CheckResult{
            "recorded_hash_is_initial:" + mutation.target, ok,
            ok ? "recorded sha256 equals pre-mutation content hash"
               : "recorded sha256 does not equal the pre-mutation content hash"});
    }

    // Post-pipeline tampering on container bytes.
    size_t tampered = 0;
    std::set<std::string> tampered_urns;
    for (const auto& mutation : scenario.mutations) {
        if (mutation.trigger != Trigger::AfterPipeline)
            continue;
        const auto recorded = acquired.find(mutation.target);
        if (recorded == acquired.end()) {
            report.conclusions.push_back(CheckResult{
                "tamper_target_known:" + mutation.target, false,
                "target was never acquired; cannot locate its segment"});
            continue;
        }
        const std::string urn = container_urn + "/artifact/" + recorded->second.first;
        const std::string segment = urn.substr(std::string("aff4://").size());
        tamper_container(container, segment, mutation);
        tampered_urns.insert(urn);
        ++tampered;
    }

    std::vector<std::string> verify_argv = {
        options.sit_binary.string(), "verify", "--out-dir", options.out_dir.string()};
    ChildProcess verify(verify_argv, options.quiet_child);
    report.verify_exit = verify.wait();

    // Evaluate verdicts from the public report.
    std::map<std::string, std::string> verdicts;
    try {
        std::ifstream in(options.out_dir / "verification_report.json");
        nlohmann::json doc;
        in >> doc;
        for (const auto& v : doc["verdicts"])
            verdicts[v["urn"].get<std::string>()] = v["result"].get<std::string>();
    } catch (...) {
    }

    if (tampered > 0) {
        size_t non_pass = 0;
        bool tampered_flagged = true;
        for (const auto& [urn, result] : verdicts) {
            if (result != "pass")
                ++non_pass;
            if (tampered_urns.contains(urn) && result == "pass")
                tampered_flagged = false;
        }
        const bool ok = report.verify_exit == 2 && non_pass == tampered && tampered_flagged;
        report.conclusions.push_back(CheckResult{
            "tamper_detected", ok,
            "verify exit=" + std::to_string(report.verify_exit) + ", non-pass verdicts=" +
                std::to_string(non_pass) + " of " + std::to_string(tampered) + " tampered"});
    } else {
        report.conclusions.push_back(CheckResult{
            "verify_clean", report.verify_exit == 0,
            "verify exit=" + std::to_string(report.verify_exit)});
    }

    // Deleted-after-acquire files must remain fully present in the
    // container: their verdicts pass and their recorded hash is initial.
    for (const auto& mutation : scenario.mutations) {
        if (mutation.trigger != Trigger::AfterAcquire || mutation.action != Action::Delete)
            continue;
        const auto recorded = acquired.find(mutation.target);
        bool ok = false;
        std::string detail = "no acquired event";
        if (recorded != acquired.end()) {
            const std::string urn = container_urn + "/artifact/" + recorded->second.first;
            const auto verdict = verdicts.find(urn);
            ok = verdict != verdicts.end() && verdict->second == "pass";
            detail = verdict == verdicts.end() ? "no verdict for " + urn
                                               : "verdict=" + verdict->second;
        }
        report.conclusions.push_back(
            CheckResult{"deleted_file_retained:" + mutation.target, ok, detail});
    }
    return report;
}

std::string report_to_json(const HarnessReport& report) {
    nlohmann::json doc;
    doc["expected_hashes"] = report.expected_hashes;
    doc["observed"] = report.observed;
    doc["pipeline_exit"] = report.pipeline_exit;
    doc["verify_exit"] = report.verify_exit;
    doc["all_passed"] = report.all_passed();
    doc["conclusions"] = nlohmann::json::array();
    for (const auto& check : report.conclusions)
        doc["conclusions"].push_back(
            {{"name", check.name}, {"passed", check.passed}, {"detail", check.detail}});
    return doc.dump(2) + "\n";
}

} // namespace sit::livesim

//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#include "sit/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "sit/aff4.hpp"
#include "sit/csv.hpp"
#include "sit/errors.hpp"
#include "sit/obslog.hpp"
#include "sit/selection.hpp"
#include "sit/strutil.hpp"
#include "sit/timefmt.hpp"
#include "sit/validation.hpp"
#include "sit/verify.hpp"
#include "sit/zipio.hpp"

namespace sit::pipeline {

namespace fs = std::filesystem;

const char* to_string(Stage stage) {
    switch (stage) {
    case Stage::Acquire: return "acquire";
    case Stage::Validate: return "validate";
    case Stage::Pack: return "pack";
    case Stage::Verify: return "verify";
    }
    return "?";
}

fs::path backup_path(const fs::path& out_dir) {
    return out_dir / "backup.zip";
}
fs::path container_path(const fs::path& out_dir) {
    return out_dir / "evidence.aff4";
}
fs::path validation_report_path(const fs::path& out_dir) {
    return out_dir / "validation_report.json";
}
fs::path verification_report_path(const fs::path& out_dir) {
    return out_dir / "verification_report.json";
}

namespace {

std::vector<uint8_t> read_file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        raise(ErrorCode::IoError, "cannot read " + path.string());
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    if (in.bad())
        raise(ErrorCode::IoError, "read failed: " + path.string());
    return bytes;
}

struct StageOutcome {
    bool limit_hit = false;
    size_t inconsistencies = 0; // findings, failed verdicts, pack errors
};

artifact::Clock make_clock(const RunPlan& plan) {
    if (plan.fixed_time) {
        const int64_t fixed = *plan.fixed_time;
        return [fixed]() { return fixed; };
    }
    return []() { return now_filetime(); };
}

// ------------------------------------------------------------- stages

StageOutcome run_acquire(const RunPlan& plan) {
    obslog::LogSink source_log(plan.out_dir, "source", plan.quiet);
    obslog::LogSink selection_log(plan.out_dir, "selection", plan.quiet);
    obslog::LogSink artifact_log(plan.out_dir, "artifact", plan.quiet);
    for (auto* log : {&source_log, &selection_log, &artifact_log})
        log->info("module_start", {}, true);

    auto handle = source::open_source(*plan.source, plan.source_kind);
    source_log.info("source_opened",
                    {{"path", plan.source->string()},
                     {"kind", source::to_string(plan.source_kind)}});

    const auto config_bytes = read_file_bytes(*plan.config);
    const auto config = selection::parse_config(config_bytes);
    selection_log.info("config_parsed", {{"rules", std::to_string(config.rules.size())},
                                         {"config_digest", config.config_digest}});

    const auto matches = selection::enumerate_matches(handle, config, &selection_log,
                                                      &source_log, plan.include_deleted);

    zipio::ZipWriter archive(backup_path(plan.out_dir));
    std::vector<artifact::ArtifactRecord> records;
    artifact::MemoryAccounting accounting;
    const auto summary = artifact::acquire_all(handle, matches, archive, plan.limits,
                                               make_clock(plan), records, &artifact_log,
                                               &accounting);

    const std::string csv = artifact::write_metadata_csv(records);
    archive.add_entry("metadata.csv", zipio::Method::Stored,
                      {reinterpret_cast<const uint8_t*>(csv.data()), csv.size()});

    // The log so far rides along in the archive as a second copy.
    const auto log_bytes = read_file_bytes(artifact_log.path());
    archive.add_entry("artifact.log", zipio::Method::Deflate, log_bytes);
    archive.finalize();

    artifact_log.info("acquire_done",
                      {{"ok", std::to_string(summary.ok)},
                       {"failed", std::to_string(summary.failed)},
                       {"skipped", std::to_string(summary.skipped)},
                       {"elapsed_sec", std::to_string(summary.elapsed_seconds)},
                       {"limit_hit", summary.limit_hit ? "true" : "false"},
                       {"peak_buffer_bytes", std::to_string(accounting.peak)}},
                      true);
    for (auto* log : {&source_log, &selection_log, &artifact_log})
        log->info("module_end", {}, true);

    StageOutcome outcome;
    outcome.limit_hit = summary.limit_hit;
    return outcome;
}

StageOutcome run_validate(const RunPlan& plan) {
    obslog::LogSink log(plan.out_dir, "validation", plan.quiet);
    log.info("module_start", {}, true);

    const auto report = validation::validate(backup_path(plan.out_dir), &log);
    validation::write_report(report, validation_report_path(plan.out_dir));
    log.info("validation_done",
             {{"passed", report.passed() ? "true" : "false"},
              {"findings", std::to_string(report.findings.size())},
              {"checked_artifacts", std::to_string(report.checked_artifacts)}},
             true);
    log.info("module_end", {}, true);

    StageOutcome outcome;
    outcome.inconsistencies = report.findings.size();
    return outcome;
}

StageOutcome run_pack(const RunPlan& plan) {
    obslog::LogSink log(plan.out_dir, "aff4", plan.quiet);
    log.info("module_start", {}, true);

    zipio::ZipReader backup(backup_path(plan.out_dir));
    const auto* csv_entry = backup.find("metadata.csv");
    if (!csv_entry)
        raise(ErrorCode::ArchiveUnreadable, "backup archive has no metadata.csv");
    const auto rows = csv::parse(backup.read_all(*csv_entry));
    if (rows.empty() || rows.front() != artifact::kCsvHeader)
        raise(ErrorCode::ArchiveUnreadable, "backup metadata.csv header mismatch");

    StageOutcome outcome;
    std::map<uint64_t, artifact::ArtifactRecord> records;
    for (size_t i = 1; i < rows.size(); ++i) {
        auto parsed = artifact::parse_csv_row(rows[i]);
        if (const auto* error = std::get_if<std::string>(&parsed)) {
            log.error("metadata_row_rejected",
                      {{"row", std::to_string(i)}, {"error", *error}});
            ++outcome.inconsistencies;
            continue;
        }
        auto record = std::get<artifact::ArtifactRecord>(std::move(parsed));
        if (!records.emplace(record.artifact_id, std::move(record)).second) {
            log.error("duplicate_id_rejected", {{"row", std::to_string(i)}});
            ++outcome.inconsistencies;
        }
    }

    aff4::ContainerWriter container(container_path(plan.out_dir), plan.urn);
    log.info("container_created", {{"urn", container.urn()}}, true);

    std::vector<rdf::Triple> triples;
    size_t packed = 0;
    for (const auto& [id, record] : records) {
        if (record.status != artifact::RecordStatus::Ok) {
            log.info("failed_record_not_packed", {{"id", artifact_id_string(id)}});
            continue;
        }
        const auto* payload = backup.find(artifact::payload_name(id));
        if (!payload) {
            log.error("payload_missing", {{"id", artifact_id_string(id)}});
            ++outcome.inconsistencies;
            continue;
        }
        try {
            auto stream = backup.open_stream(*payload);
            const auto segment = container.add_artifact(
                record, [&stream](std::span<uint8_t> out) { return stream.read(out); });
            log.info("packed", {{"id", artifact_id_string(id)}, {"segment", segment}}, true);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::LengthMismatch && e.code() != ErrorCode::IoError)
                throw;
            log.error("segment_rejected",
                      {{"id", artifact_id_string(id)}, {"error", e.what()}});
            ++outcome.inconsistencies;
            continue;
        }
        const auto record_triples = validation::record_to_triples(record, container.urn());
        triples.insert(triples.end(), record_triples.begin(), record_triples.end());
        ++packed;
    }

    container.write_information_turtle(rdf::serialize_turtle(triples));
    log.info("pack_done",
             {{"urn", container.urn()}, {"segments", std::to_string(packed)}}, true);
    log.info("module_end", {}, true);
    return outcome;
}

StageOutcome run_verify(const RunPlan& plan) {
    obslog::LogSink log(plan.out_dir, "verify", plan.quiet);
    log.info("module_start", {}, true);

    aff4::ContainerReader reader(container_path(plan.out_dir));
    const auto report =
        verify::verify_container(reader, plan.temp_dir, &log, plan.in_stream_verify);
    verify::write_report(report, verification_report_path(plan.out_dir));
    log.info("module_end", {}, true);

    StageOutcome outcome;
    for (const auto& verdict : report.verdicts)
        if (verdict.result != verify::VerdictResult::Pass)
            ++outcome.inconsistencies;
    return outcome;
}

bool is_fatal_io(ErrorCode code) {
    switch (code) {
    case ErrorCode::IoError:
    case ErrorCode::FatalArchiveError:
    case ErrorCode::ArchiveUnreadable:
    case ErrorCode::NotAff4:
    case ErrorCode::NotFound:
    case ErrorCode::PermissionDenied:
    case ErrorCode::NotNtfs:
        return true;
    default:
        return false;
    }
}

bool is_config_error(ErrorCode code) {
    switch (code) {
    case ErrorCode::BadJson:
    case ErrorCode::EmptySelection:
    case ErrorCode::BadRule:
    case ErrorCode::Usage:
        return true;
    default:
        return false;
    }
}

} // namespace

int run(const RunPlan& plan) {
    std::error_code ec;
    fs::create_directories(plan.out_dir, ec);
    if (ec) {
        std::fprintf(stderr, "ERROR cannot create output directory %s: %s\n",
                     plan.out_dir.string().c_str(), ec.message().c_str());
        return kExitFatalIo;
    }

    obslog::LogSink cli_log(plan.out_dir, "cli", plan.quiet);
    cli_log.info("module_start", {}, true);

    bool limit_hit = false;
    size_t inconsistencies = 0;
    int exit_code = kExitOk;
    std::string failure_reason;

    for (const auto stage : plan.stages) {
        cli_log.info("stage_start", {{"stage", to_string(stage)}}, true);
        try {
            StageOutcome outcome;
            switch (stage) {
            case Stage::Acquire: outcome = run_acquire(plan); break;
            case Stage::Validate: outcome = run_validate(plan); break;
            case Stage::Pack: outcome = run_pack(plan); break;
            case Stage::Verify: outcome = run_verify(plan); break;
            }
            limit_hit = limit_hit || outcome.limit_hit;
            inconsistencies += outcome.inconsistencies;
            cli_log.info("stage_end", {{"stage", to_string(stage)}}, true);
        } catch (const Error& e) {
            failure_reason = e.what();
            exit_code = is_config_error(e.code()) ? kExitUsage : kExitFatalIo;
            cli_log.error("stage_failed",
                          {{"stage", to_string(stage)}, {"error", failure_reason}});
            break;
        } catch (const std::exception& e) {
            failure_reason = e.what();
            exit_code = kExitFatalIo;
            cli_log.error("stage_failed",
                          {{"stage", to_string(stage)}, {"error", failure_reason}});
            break;
        }
    }

    if (exit_code == kExitOk) {
        if (inconsistencies > 0)
            exit_code = kExitFindings;
        else if (limit_hit)
            exit_code = kExitPartial;
    }

    if (exit_code != kExitOk && failure_reason.empty()) {
        cli_log.error("pipeline_failed",
                      {{"exit", std::to_string(exit_code)},
                       {"inconsistencies", std::to_string(inconsistencies)},
                       {"limit_hit", limit_hit ? "true" : "false"}});
    }
    cli_log.info("pipeline_done", {{"exit", std::to_string(exit_code)}}, true);
    return exit_code;
}

// ------------------------------------------------------------- CLI

std::variant<RunPlan, std::string> parse_args(const std::vector<std::string>& args) {
    CLI::App app{"sit - selective imaging toolkit"};
    app.require_subcommand(1);

    RunPlan plan;
    std::string source, source_kind, config, out_dir, temp_dir, urn, fixed_time;
    uint64_t max_memory_mb = 0;
    double max_runtime_sec = -1.0;
    bool skip_validation = false, skip_verification = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--source", source, "evidence source: image file or directory");
        sub->add_option("--source-kind", source_kind, "ntfs-image | dir")
            ->check(CLI::IsMember({"ntfs-image", "dir"}));
        sub->add_option("--config", config, "selection config (JSON)");
        sub->add_option("--out-dir", out_dir, "output directory on the evidence drive");
        sub->add_option("--temp-dir", temp_dir, "temporary directory (default <out-dir>/tmp)");
        sub->add_option("--max-memory-mb", max_memory_mb, "acquisition memory ceiling")
            ->check(CLI::Range(static_cast<uint64_t>(1), static_cast<uint64_t>(1 << 20)));
        sub->add_option("--max-runtime-sec", max_runtime_sec, "acquisition runtime ceiling")
            ->check(CLI::NonNegativeNumber);
        sub->add_flag("--skip-validation", skip_validation, "drop the validate stage");
        sub->add_flag("--skip-verification", skip_verification, "drop the verify stage");
        sub->add_option("--urn", urn, "fixed container URN (reproducible packing)");
        sub->add_option("--fixed-time", fixed_time,
                        "fixed acquisition timestamp, ISO-8601 UTC (reproducible runs)");
        sub->add_flag("--include-deleted", plan.include_deleted,
                      "also list not-in-use MFT records");
        sub->add_flag("--quiet", plan.quiet, "suppress console progress output");
        sub->add_flag("--in-stream", plan.in_stream_verify,
                      "verify hashes while reading instead of extracting to temp");
    };

    const char* names[] = {"all", "acquire", "validate", "pack", "verify"};
    const char* descriptions[] = {
        "run acquire, validate, pack, verify in order",
        "collect matching artifacts into the backup archive",
        "cross-check the backup archive and emit the validation report",
        "build the evidence container from the backup archive",
        "re-hash every stored artifact against its recorded hashes",
    };
    for (size_t i = 0; i < 5; ++i)
        add_common(app.add_subcommand(names[i], descriptions[i]));

    std::vector<const char*> argv;
    argv.push_back("sit");
    for (const auto& a : args)
        argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        std::ostringstream help;
        help << app.help();
        return help.str();
    } catch (const CLI::ParseError& e) {
        raise(ErrorCode::Usage, e.what());
    }

    const std::string command = app.get_subcommands().front()->get_name();
    if (command == "all") {
        plan.stages = {Stage::Acquire};
        if (!skip_validation)
            plan.stages.push_back(Stage::Validate);
        plan.stages.push_back(Stage::Pack);
        if (!skip_verification)
            plan.stages.push_back(Stage::Verify);
    } else if (command == "acquire") {
        plan.stages = {Stage::Acquire};
    } else if (command == "validate") {
        plan.stages = {Stage::Validate};
    } else if (command == "pack") {
        plan.stages = {Stage::Pack};
    } else {
        plan.stages = {Stage::Verify};
    }

    if (out_dir.empty())
        raise(ErrorCode::Usage, "--out-dir is required");
    plan.out_dir = out_dir;
    plan.temp_dir = temp_dir.empty() ? plan.out_dir / "tmp" : fs::path(temp_dir);

    const bool needs_source = plan.stages.front() == Stage::Acquire;
    if (needs_source) {
        if (source.empty())
            raise(ErrorCode::Usage, "--source is required for " + command);
        if (source_kind.empty())
            raise(ErrorCode::Usage, "--source-kind is required for " + command);
        if (config.empty())
            raise(ErrorCode::Usage, "--config is required for " + command);
        plan.source = fs::path(source);
        plan.source_kind = source_kind == "ntfs-image" ? source::SourceKind::NtfsImage
                                                       : source::SourceKind::Directory;
        plan.config = fs::path(config);
        if (!fs::exists(*plan.source))
            raise(ErrorCode::Usage, "--source path does not exist: " + source);
        if (!fs::exists(*plan.config))
            raise(ErrorCode::Usage, "--config path does not exist: " + config);
    }

    // Prerequisites for stages that resume from intermediate results.
    for (const auto stage : plan.stages) {
        if ((stage == Stage::Validate || stage == Stage::Pack) && !needs_source &&
            !fs::exists(backup_path(plan.out_dir)))
            raise(ErrorCode::Usage, command + " needs the backup archive " +
                                        backup_path(plan.out_dir).string() +
                                        " (run acquire first)");
        if (stage == Stage::Verify && plan.stages.size() == 1 &&
            !fs::exists(container_path(plan.out_dir)))
            raise(ErrorCode::Usage, command + " needs the evidence container " +
                                        container_path(plan.out_dir).string() +
                                        " (run pack first)");
    }

    if (max_memory_mb > 0) {
        plan.limits.max_memory_bytes = max_memory_mb << 20;
        plan.limits.chunk_size = static_cast<size_t>(
            std::clamp<uint64_t>(*plan.limits.max_memory_bytes / 2, 4096, 1 << 20));
    }
    if (max_runtime_sec >= 0.0)
        plan.limits.max_runtime_seconds = max_runtime_sec;

    if (!urn.empty()) {
        if (!aff4::is_container_urn(urn))
            raise(ErrorCode::Usage,
                  "--urn must look like aff4://<lowercase uuid>, got: " + urn);
        plan.urn = urn;
    }
    if (!fixed_time.empty()) {
        const auto ticks = iso_to_filetime(fixed_time);
        if (!ticks)
            raise(ErrorCode::Usage,
                  "--fixed-time must be ISO-8601 UTC like 2026-01-01T00:00:00Z, got: " +
                      fixed_time);
        plan.fixed_time = *ticks;
    }
    return plan;
}

} // namespace sit::pipeline

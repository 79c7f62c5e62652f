//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#include "sit/verify.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sit/errors.hpp"
#include "sit/hashing.hpp"
#include "sit/strutil.hpp"

namespace sit::verify {

namespace fs = std::filesystem;

const char* to_string(VerdictResult result) {
    switch (result) {
    case VerdictResult::Pass: return "pass";
    case VerdictResult::FailMismatch: return "fail_mismatch";
    case VerdictResult::FailMissingHash: return "fail_missing_hash";
    case VerdictResult::FailUnreadable: return "fail_unreadable";
    }
    return "?";
}

namespace {

AlgorithmCheck check(const std::string& expected, const std::string& actual) {
    AlgorithmCheck c;
    c.expected = expected;
    c.actual = actual;
    // Stored hashes are canonical lowercase; compare case-insensitively
    // anyway.
    c.equal = !expected.empty() && iequals_ascii(expected, actual);
    return c;
}

std::string temp_name_for(const std::string& urn) {
    // "<uuid>/artifact/<id>" -> unique flat file name
    std::string name = "verify_";
    for (char c : urn)
        name.push_back((c == '/' || c == ':') ? '_' : c);
    return name + ".tmp";
}

hashing::TripleDigest hash_segment_stream(aff4::ContainerReader& reader, const std::string& urn) {
    auto stream = reader.open_segment(urn);
    hashing::TripleHasher hasher;
    std::vector<uint8_t> buf(1 << 16);
    while (true) {
        const size_t got = stream.read(buf);
        if (got == 0)
            break;
        hasher.update({buf.data(), got});
    }
    return hasher.finish();
}

} // namespace

VerificationVerdict verify_artifact(aff4::ContainerReader& reader, const std::string& urn,
                                    const ExpectedHashes& expected, const fs::path& temp_dir,
                                    bool in_stream) {
    VerificationVerdict verdict;
    verdict.urn = urn;

    hashing::TripleDigest actual;
    if (in_stream) {
        try {
            actual = hash_segment_stream(reader, urn);
        } catch (const Error&) {
            verdict.result = VerdictResult::FailUnreadable;
            verdict.md5 = check(expected.md5, "");
            verdict.sha1 = check(expected.sha1, "");
            verdict.sha256 = check(expected.sha256, "");
            return verdict;
        }
    } else {
        const fs::path temp_file = temp_dir / temp_name_for(urn);
        try {
            reader.extract_artifact(urn, temp_file);
            hashing::TripleHasher hasher;
            std::ifstream in(temp_file, std::ios::binary);
            if (!in)
                raise(ErrorCode::IoError, "cannot reopen " + temp_file.string());
            std::vector<uint8_t> buf(1 << 16);
            while (in) {
                in.read(reinterpret_cast<char*>(buf.data()),
                        static_cast<std::streamsize>(buf.size()));
                const auto got = static_cast<size_t>(in.gcount());
                if (got > 0)
                    hasher.update({buf.data(), got});
            }
            if (in.bad())
                raise(ErrorCode::IoError, "read failed: " + temp_file.string());
            actual = hasher.finish();
        } catch (const Error&) {
            std::error_code ec;
            fs::remove(temp_file, ec);
            verdict.result = VerdictResult::FailUnreadable;
            verdict.md5 = check(expected.md5, "");
            verdict.sha1 = check(expected.sha1, "");
            verdict.sha256 = check(expected.sha256, "");
            return verdict;
        }
        std::error_code ec;
        fs::remove(temp_file, ec);
    }

    verdict.md5 = check(expected.md5, actual.md5);
    verdict.sha1 = check(expected.sha1, actual.sha1);
    verdict.sha256 = check(expected.sha256, actual.sha256);

    if (expected.md5.empty() || expected.sha1.empty() || expected.sha256.empty())
        verdict.result = VerdictResult::FailMissingHash;
    else if (verdict.md5.equal && verdict.sha1.equal && verdict.sha256.equal)
        verdict.result = VerdictResult::Pass;
    else
        verdict.result = VerdictResult::FailMismatch;
    return verdict;
}

VerificationReport verify_container(aff4::ContainerReader& reader, const fs::path& temp_dir,
                                    obslog::LogSink* log, bool in_stream) {
    VerificationReport report;
    report.container_urn = reader.urn();

    if (!in_stream)
        fs::create_directories(temp_dir);

    const auto triples = reader.read_metadata();
    std::map<std::string, ExpectedHashes> subjects;
    const std::string type_pred = std::string(rdf::kRdfNs) + "type";
    const std::string image_iri = std::string(rdf::kAff4Ns) + "Image";
    for (const auto& t : triples) {
        if (t.predicate == type_pred) {
            const auto* iri = std::get_if<rdf::Iri>(&t.object);
            if (iri && iri->value == image_iri)
                subjects.try_emplace(t.subject);
        }
    }
    for (const auto& t : triples) {
        auto it = subjects.find(t.subject);
        if (it == subjects.end())
            continue;
        const auto* literal = std::get_if<rdf::TypedLiteral>(&t.object);
        if (!literal)
            continue;
        const std::string aff4 = rdf::kAff4Ns;
        if (t.predicate == aff4 + "MD5")
            it->second.md5 = literal->lexical;
        else if (t.predicate == aff4 + "SHA1")
            it->second.sha1 = literal->lexical;
        else if (t.predicate == aff4 + "SHA256")
            it->second.sha256 = literal->lexical;
    }

    if (subjects.empty() && log)
        log->warn("container_empty", {{"urn", report.container_urn}}, true);

    // std::map iterates ascending by URN == ascending artifact index.
    for (const auto& [urn, expected] : subjects) {
        auto verdict = verify_artifact(reader, urn, expected, temp_dir, in_stream);
        if (verdict.result != VerdictResult::Pass)
            report.all_passed = false;
        if (log)
            log->emit(verdict.result == VerdictResult::Pass ? obslog::Level::Info
                                                            : obslog::Level::Warn,
                      "verdict", {{"urn", verdict.urn}, {"result", to_string(verdict.result)}},
                      true);
        report.verdicts.push_back(std::move(verdict));
    }

    if (log)
        log->info("verification_done",
                  {{"all_passed", report.all_passed ? "true" : "false"},
                   {"verdicts", std::to_string(report.verdicts.size())}},
                  true);
    return report;
}

std::string report_to_json(const VerificationReport& report) {
    nlohmann::json doc;
    doc["container_urn"] = report.container_urn;
    doc["all_passed"] = report.all_passed;
    doc["verdicts"] = nlohmann::json::array();
    for (const auto& v : report.verdicts) {
        nlohmann::json item;
        item["urn"] = v.urn;
        item["result"] = to_string(v.result);
        for (const auto& [name, c] :
             {std::pair<const char*, const AlgorithmCheck*>{"md5", &v.md5},
              {"sha1", &v.sha1},
              {"sha256", &v.sha256}}) {
            item[name] = {{"expected", c->expected}, {"actual", c->actual}};
        }
        doc["verdicts"].push_back(std::move(item));
    }
    return doc.dump(2) + "\n";
}

void write_report(const VerificationReport& report, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        raise(ErrorCode::IoError, "cannot write " + path.string());
    out << report_to_json(report);
    if (!out.flush())
        raise(ErrorCode::IoError, "write failed: " + path.string());
}

} // namespace sit::verify

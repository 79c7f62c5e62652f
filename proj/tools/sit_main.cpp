//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#include <cstdio>
#include <string>
#include <vector>

#include "sit/errors.hpp"
#include "sit/pipeline.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        auto parsed = sit::pipeline::parse_args(args);
        if (const auto* help = std::get_if<std::string>(&parsed)) {
            std::fputs(help->c_str(), stdout);
            return sit::pipeline::kExitOk;
        }
        return sit::pipeline::run(std::get<sit::pipeline::RunPlan>(parsed));
    } catch (const sit::Error& e) {
        std::fprintf(stderr, "ERROR %s\n", e.what());
        return e.code() == sit::ErrorCode::Usage ? sit::pipeline::kExitUsage
                                                 : sit::pipeline::kExitFatalIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "ERROR %s\n", e.what());
        return sit::pipeline::kExitFatalIo;
    }
}

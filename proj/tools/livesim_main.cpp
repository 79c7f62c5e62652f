//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#include <cstdio>
#include <fstream>

#include <CLI11.hpp>

#include "sit/errors.hpp"
#include "sit/livesim.hpp"

int main(int argc, char** argv) {
    CLI::App app{"sit-livesim - live-mutation test harness for the sit pipeline"};
    sit::livesim::HarnessOptions options;
    std::string sit_binary, scenario, config, out_dir;
    bool show_child = false;
    app.add_option("--sit", sit_binary, "path to the sit binary")->required();
    app.add_option("--scenario", scenario, "scenario JSON file")->required();
    app.add_option("--config", config, "selection config forwarded to the pipeline")->required();
    app.add_option("--out-dir", out_dir, "pipeline output directory")->required();
    app.add_flag("--show-child", show_child, "pass the child's console output through");
    CLI11_PARSE(app, argc, argv);

    options.sit_binary = sit_binary;
    options.scenario_path = scenario;
    options.config = config;
    options.out_dir = out_dir;
    options.quiet_child = !show_child;

    try {
        const auto report = sit::livesim::run_scenario(options);
        const auto json = sit::livesim::report_to_json(report);
        std::ofstream out(options.out_dir / "livesim_report.json");
        out << json;
        for (const auto& check : report.conclusions)
            std::printf("%s %s: %s\n", check.passed ? "PASS" : "FAIL", check.name.c_str(),
                        check.detail.c_str());
        return report.all_passed() ? 0 : 1;
    } catch (const sit::Error& e) {
        std::fprintf(stderr, "ERROR %s\n", e.what());
        return 2;
    }
}

/// @file sdbench.cpp
/// @brief Benchmark CLI: transient solver comparisons, fill-in tables, and
/// the cross-method verification suite.

#include <CLI11.hpp>

#include <iostream>

#include "sdc/bench.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Coupled Stokes-Darcy solver benchmarks"};
    app.require_subcommand(1);

    // run --config <file> --plan <file> --out <dir>
    auto* run = app.add_subcommand("run", "execute a benchmark plan");
    std::string config_path, plan_path, out_dir = ".";
    run->add_option("--config", config_path, "scenario file")->required();
    run->add_option("--plan", plan_path, "plan file")->required();
    run->add_option("--out", out_dir, "output directory for the CSV reports");

    // fill-in --sizes 6,16,50 --out <file>
    auto* fillin = app.add_subcommand("fill-in", "matrix and factor density table");
    std::string sizes_arg = "6,16,50";
    std::string fillin_out = "fillin.csv";
    fillin->add_option("--sizes", sizes_arg, "comma-separated grid sizes");
    fillin->add_option("--out", fillin_out, "output CSV path");

    // verify --size 6
    auto* verify = app.add_subcommand("verify", "cross-method equivalence suite");
    int verify_size = 6;
    verify->add_option("--size", verify_size, "cells per unit square");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            auto cfg = sdc::parse_scenario_file(config_path);
            auto plan = sdc::parse_plan_file(plan_path);
            plan.out_dir = out_dir;
            std::cout << "running " << plan.resolved_configs().size() << " configuration(s) on "
                      << plan.sizes.size() << " size(s), " << plan.repetitions
                      << " repetition(s) each\n";
            auto out = sdc::run_plan(plan, cfg, &std::cout);
            std::cout << "wrote " << out.runtime_csv_path << "\n";
            std::cout << "wrote " << out.fillin_csv_path << "\n";
            for (const auto& row : out.rows)
                if (!row.converged) {
                    std::cerr << "warning: " << row.config << " at size " << row.size
                              << " did not converge\n";
                }
        } else if (*fillin) {
            std::vector<int> sizes;
            std::string tok;
            std::istringstream ss(sizes_arg);
            while (std::getline(ss, tok, ',')) sizes.push_back(std::stoi(tok));
            sdc::write_fillin_csv(sizes, sdc::ScenarioConfig{}, fillin_out);
            std::cout << "wrote " << fillin_out << "\n";
        } else if (*verify) {
            auto outcome = sdc::verify_equivalence(verify_size);
            for (const auto& line : outcome.lines) std::cout << line << "\n";
            std::cout << (outcome.pass ? "VERIFY PASS" : "VERIFY FAIL") << "\n";
            return outcome.pass ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

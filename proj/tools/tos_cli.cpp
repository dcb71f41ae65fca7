// Config-driven runner for the splitting solvers: `tos run <config.json>`
// executes one experiment and writes a CSV trace plus a JSON summary;
// `tos validate <config.json>` reports constraint violations without running.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "runner.hpp"

namespace {

int load(const std::string& path, nlohmann::json& out, std::ostream& err) {
    std::ifstream f(path);
    if (!f) {
        err << "config: cannot open '" << path << "'\n";
        return 1;
    }
    try {
        f >> out;
    } catch (const std::exception& e) {
        err << "config: parse error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"three-operator splitting solver runner"};
    app.require_subcommand(1);

    std::string config_path;
    tos::runner::CliOverrides overrides;
    std::uint64_t seed = 0;
    int max_iter = 0;
    double tol = 0.0;

    auto* run = app.add_subcommand("run", "execute a run described by a config file");
    run->add_option("config", config_path, "path to the JSON config")->required();
    run->add_option("--out", overrides.out_dir, "directory for output files");
    auto* seed_opt = run->add_option("--seed", seed, "override config seed");
    auto* iter_opt = run->add_option("--max-iter", max_iter, "override solver.max_iter");
    auto* tol_opt = run->add_option("--tol", tol, "override solver.tol");

    std::string vconfig_path;
    auto* validate = app.add_subcommand("validate", "check a config without running");
    validate->add_option("config", vconfig_path, "path to the JSON config")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        nlohmann::json config;
        if (load(config_path, config, std::cerr) != 0) return tos::runner::kConfigError;
        if (*seed_opt) overrides.seed = seed;
        if (*iter_opt) overrides.max_iter = max_iter;
        if (*tol_opt) overrides.tol = tol;
        return tos::runner::run_config(config, overrides, std::cerr);
    }

    nlohmann::json config;
    if (load(vconfig_path, config, std::cerr) != 0) return tos::runner::kConfigError;
    const auto findings = tos::runner::validate_config(config);
    for (const auto& f : findings) std::cout << f << "\n";
    if (findings.empty()) std::cout << "ok\n";
    return findings.empty() ? 0 : tos::runner::kConfigError;
}

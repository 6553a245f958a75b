#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "levikal/cli/config.hpp"
#include "levikal/cli/scenarios.hpp"
#include "levikal/error.hpp"

namespace {

enum Exit { Ok = 0, BadInput = 2, Numeric = 3, Io = 4 };

}  // namespace

int main(int argc, char** argv) {
    using namespace levikal;

    CLI::App app{"levikal: optimal-control toolkit for a levitated particle"};
    std::string scenario_arg;
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool strict = false;
    std::string names;
    for (const auto& n : cli::scenario_names()) names += (names.empty() ? "" : ", ") + n;
    app.add_option("scenario", scenario_arg, "one of: " + names)->required();
    app.add_option("--config", config_path, "JSON configuration file")->required();
    auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
    auto* out_opt = app.add_option("--out", out_dir, "override the output directory");
    app.add_flag("--strict", strict, "treat unknown config keys as errors");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? Ok : BadInput;
    }

    const auto scenario = cli::parse_scenario(scenario_arg);
    if (!scenario) {
        std::cerr << "error: unknown scenario '" << scenario_arg << "' (expected " << names << ")\n";
        return BadInput;
    }

    try {
        cli::ValidationResult v = cli::validate_config(config_path, strict, *scenario);
        for (const auto& w : v.warnings) std::cerr << "warning: " << w << '\n';
        cli::ScenarioConfig& cfg = v.config;
        if (*seed_opt) cfg.seed = seed;
        if (*out_opt) cfg.output_dir = out_dir;
        const cli::RunResult r = cli::run_scenario(cfg, config_path, &std::cout);
        std::cout << r.manifest_path << '\n';
        bool all_pass = true;
        for (const auto& s : r.suites) {
            std::cerr << (s.pass ? "PASS " : "FAIL ") << s.name << ": " << s.detail << '\n';
            all_pass = all_pass && s.pass;
        }
        return all_pass ? Ok : Numeric;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return BadInput;
    } catch (const InvalidParameter& e) {
        std::cerr << "invalid parameter: " << e.what() << '\n';
        return BadInput;
    } catch (const ProtocolError& e) {
        std::cerr << "protocol error: " << e.what() << '\n';
        return BadInput;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return Io;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return Numeric;
    }
}

#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "levikal/cli/config.hpp"
#include "levikal/lqg.hpp"
#include "levikal/statespace.hpp"

namespace levikal::cli {

inline constexpr const char* kToolkitVersion = "1.0.0";

struct Artifact {
    std::string name;  // file name inside the output directory
    std::string sha256;
    std::uintmax_t bytes = 0;
};

struct SuiteResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RunResult {
    std::vector<Artifact> artifacts;
    std::string manifest_path;
    std::vector<SuiteResult> suites;  // verify scenario only
};

struct ControlModel {
    NoiseBudget budget;
    ContinuousModel continuous;
    DiscreteModel discrete;
};

// Noise budget and control model selected by the model block.
NoiseBudget scenario_budget(const ScenarioConfig& cfg);
ControlModel scenario_model(const ScenarioConfig& cfg);

// Runs one scenario and writes <scenario>_<name>.csv|json plus manifest.json
// into cfg.output_dir. On failure every file written so far is removed and
// the exception is rethrown.
RunResult run_scenario(const ScenarioConfig& cfg, const std::string& config_path = "",
                       std::ostream* log = nullptr);

std::string sha256_file(const std::string& path);

const std::vector<std::string>& verify_suite_names();
// Quick property suites; empty names runs all. Unknown names throw ConfigError.
std::vector<SuiteResult> run_verify_suites(const std::vector<std::string>& names,
                                           std::uint64_t seed);

Json budget_to_json(const NoiseBudget& b);

}  // namespace levikal::cli

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "levikal/fixed_point.hpp"
#include "levikal/io.hpp"
#include "levikal/params.hpp"
#include "levikal/sim.hpp"
#include "levikal/thermometry.hpp"

namespace levikal::cli {

enum class Scenario { Budget, Gains, Sweep, Simulate, Reheat, Thermometry, Sql, Optics, Calibrate, Verify };

std::string scenario_name(Scenario s);
std::optional<Scenario> parse_scenario(const std::string& name);
const std::vector<std::string>& scenario_names();

struct ModelConfig {
    double t_s = 32e-9;
    // "identified": force and imprecision from measured variances;
    // "first_principles": optics-derived imprecision and computed backaction.
    std::string noise_model = "identified";
    MeasuredNoise measured = reference_measured_noise();
    double colored_cutoff = -1.0;  // < 0 disables the colored measurement-noise state
    double colored_gain = 0.0;
};

struct SimulateConfig {
    SimConfig sim;
    bool fixed_point = false;
    FixedPointConfig fixed_point_cfg;  // full scales <= 0 take the model defaults
    bool open_loop = false;
    double whiteness_band_lo = 25e3;
    double whiteness_band_hi = 225e3;
    double highpass_cutoff = 10e3;
    int psd_segment = 1 << 14;
};

struct ReheatConfig {
    double pressure = 1.6e-6;  // Pa
    double n0 = 1.0;
    double duration = 2e-3;
    int ensemble = 1000;
    int steps_per_period = 8;
};

struct ThermometryConfig {
    std::vector<double> occupations{0.3, 0.56, 8.3};
    double ensemble_occupation = 0.56;
    int ensemble = 60;
    SynthOptions synth{400e3, 500.0, 1000, 1, 0};
    FloorModel floors;
};

struct SqlConfig {
    double low_occupation = 8.3;
    double high_occupation = 0.71;
    double span = 60e3;  // Hz on each side of resonance
    int points = 6001;
};

struct OpticsConfig {
    std::vector<double> magnifications;  // empty: 50 points on [2, 20]
    double fiber_waist = 3.1e-6;
};

struct CalibrateConfig {
    double c_mv = 8.0e-9;
    double c_nv = 1.98e-15;
    std::vector<double> position_gains;  // rad/s; empty: 2 pi x {2, 4, 8, 16} kHz
    std::int64_t position_steps = 4'000'000;
    double drive_gain = 0.0;             // rad/s; 0: 2 pi x 1 kHz
    std::vector<double> drive_frequencies;  // rad/s; empty: 2 pi x {89, 119} kHz
    std::vector<double> drive_voltages{2e-3, 4e-3, 6e-3, 8e-3};  // amplitudes, V
    std::int64_t drive_steps = 4'000'000;
    int psd_segment = 1 << 16;
};

struct VerifyConfig {
    std::vector<std::string> suites;  // empty: all
};

struct ScenarioConfig {
    Scenario scenario = Scenario::Budget;
    ExperimentParams params = reference_parameters();
    ModelConfig model;
    std::vector<double> gain_grid;
    double g_fb = 0.0;  // rad/s; 0 means 2 pi x 110 kHz
    SimulateConfig simulate;
    ReheatConfig reheat;
    ThermometryConfig thermometry;
    SqlConfig sql;
    OpticsConfig optics;
    CalibrateConfig calibrate;
    VerifyConfig verify;
    std::string output_dir = ".";
    std::uint64_t seed = 1;

    Json echo;  // the input document as parsed
};

struct ValidationResult {
    ScenarioConfig config;
    std::vector<std::string> warnings;
};

// Parses and validates a JSON config. Errors name the first offending field
// path (e.g. "params.pressure"); parse errors carry line and column. Unknown
// keys are warnings, or errors in strict mode. expected_scenario, when given,
// fills or must match the "scenario" field.
ValidationResult validate_config(const std::string& path, bool strict = false,
                                 std::optional<Scenario> expected_scenario = std::nullopt);
ValidationResult validate_config_text(const std::string& text, bool strict = false,
                                      std::optional<Scenario> expected_scenario = std::nullopt);

}  // namespace levikal::cli

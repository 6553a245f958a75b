#pragma once

#include <string>
#include <vector>

namespace levikal {

struct EfficiencyEntry {
    std::string name;
    double eta_photon = 1.0;  // photon survival fraction
    double eta_info = 1.0;    // information survival fraction
};

struct ExperimentParams {
    double radius = 0.0;          // m
    double mass = 0.0;            // kg
    double omega_z = 0.0;         // rad/s
    double wavelength = 0.0;      // m
    double p_scatt = 0.0;         // W
    double pressure = 0.0;        // Pa
    double temperature = 0.0;     // K
    double gas_molar_mass = 0.0;  // kg/mol
    double gas_viscosity = 0.0;   // Pa s
    double na = 0.0;
    double gouy_a = 0.0;
    double s_z_imp = 0.0;         // one-sided position imprecision, m^2/Hz
    std::vector<EfficiencyEntry> detection_efficiencies;

    // Throws InvalidParameter naming the first offending field.
    void validate() const;
};

// Measured noise variances per sample, as reported by a system identification.
struct MeasuredNoise {
    double force_variance = 0.0;        // <w^2>, N^2
    double measurement_variance = 0.0;  // <nu^2>, m^2
    double sample_rate = 0.0;           // Hz
};

struct EfficiencyTotals {
    double eta_photon = 1.0;
    double eta_info = 1.0;
};

struct ThermalForce {
    double s_f = 0.0;       // N^2/Hz
    double gamma = 0.0;     // rad/s
    double knudsen = 0.0;
    bool full_formula = false;  // Knudsen branch used
};

struct NoiseBudget {
    double s_f_ba = 0.0;
    double s_f_th = 0.0;
    double s_f_tot = 0.0;
    double s_z_imp = 0.0;
    double gamma_th = 0.0;
    double gamma_meas = 0.0;
    double gamma_ba_rate = 0.0;
    double gamma_th_rate = 0.0;
    double eta_d = 0.0;
    double eta_e = 0.0;
    double eta = 0.0;
    double c_q = 0.0;
    double z_zpf = 0.0;
    double p_zpf = 0.0;
    double n_imp = 0.0;  // at gamma = gamma_th
    double n_tot = 0.0;  // at gamma = gamma_th
    double n_min = 0.0;
    // Equivalent occupations of each force-noise source against gas damping.
    double n_ba_equiv = 0.0;
    double n_th_equiv = 0.0;

    double mass = 0.0;
    double omega_z = 0.0;
    double temperature = 0.0;

    // Rate ratio before clamping; eta_d_clamped flags a ratio above one.
    double eta_d_raw = 0.0;
    bool eta_d_clamped = false;
    std::vector<std::string> warnings;

    // Product over the detection efficiency list.
    EfficiencyTotals efficiency_totals;
};

struct OccupationBounds {
    double n_imp = 0.0;
    double n_tot = 0.0;
    double n_min = 0.0;
};

// Values of the reference levitated-particle setup. The imprecision PSD is
// derived from the optics with the detection-chain information efficiency.
ExperimentParams reference_parameters();
std::vector<EfficiencyEntry> reference_efficiency_table();
MeasuredNoise reference_measured_noise();

// Entries whose name carries the "environment" tag are not detection losses.
bool is_environment_entry(const EfficiencyEntry& entry);
EfficiencyTotals efficiency_totals(const std::vector<EfficiencyEntry>& entries);
EfficiencyTotals detection_totals(const std::vector<EfficiencyEntry>& entries);

double position_zpf(double mass, double omega_z);
double momentum_zpf(double mass, double omega_z);

double backaction_force_psd(const ExperimentParams& params);
double mean_gas_speed(const ExperimentParams& params);
double mean_free_path(const ExperimentParams& params);
ThermalForce thermal_force_psd(const ExperimentParams& params);

NoiseBudget decoherence_rates(const ExperimentParams& params);

// Budget whose total force noise and imprecision come from measured per-sample
// variances. Backaction is attributed as total minus the computed gas term.
NoiseBudget identified_budget(const ExperimentParams& params, const MeasuredNoise& measured);

// Same backaction and imprecision with the gas term recomputed at another pressure (Pa).
NoiseBudget with_pressure(const NoiseBudget& budget, const ExperimentParams& params,
                          double pressure);

OccupationBounds occupation_bounds(const NoiseBudget& budget, double gamma);
double n_min_from_eta(double eta);

}  // namespace levikal

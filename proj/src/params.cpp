#include "levikal/params.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "levikal/constants.hpp"
#include "levikal/error.hpp"
#include "levikal/optics.hpp"

namespace levikal {

namespace {

using constants::hbar;

void require_finite(double value, const char* field) {
    if (!std::isfinite(value)) {
        throw InvalidParameter(std::string(field) + " must be finite");
    }
}

void require_nonnegative(double value, const char* field) {
    require_finite(value, field);
    if (value < 0.0) {
        throw InvalidParameter(std::string(field) + " must be >= 0");
    }
}

// Dimensionless Knudsen correction factors of the gas damping formula.
constexpr double kKnudsenA = 0.619;
constexpr double kKnudsenB = 0.31;
constexpr double kKnudsenC = 0.785;
constexpr double kKnudsenD = 1.152;
constexpr double kKnudsenThreshold = 10.0;

double low_pressure_damping(const ExperimentParams& p) {
    return 64.0 * p.radius * p.radius * p.pressure / (3.0 * p.mass * mean_gas_speed(p));
}

void fill_rates(NoiseBudget& b) {
    const double z2 = b.z_zpf * b.z_zpf;
    const double p2 = b.p_zpf * b.p_zpf;
    if (!(b.s_z_imp > 0.0)) {
        throw NumericError("s_z_imp: division by zero imprecision PSD");
    }
    b.s_f_tot = b.s_f_ba + b.s_f_th;
    b.gamma_meas = z2 / (2.0 * b.s_z_imp);
    b.gamma_ba_rate = b.s_f_ba / (8.0 * p2);
    b.gamma_th_rate = b.s_f_th / (8.0 * p2);

    // Rate ratio Gamma_meas / Gamma_ba written as hbar^2/(S_imp S_ba) so that
    // the imprecision-backaction identity below holds to rounding.
    const double product = b.s_z_imp * b.s_f_ba;
    b.eta_d_raw = product > 0.0 ? hbar * hbar / product : 0.0;
    b.eta_d = b.eta_d_raw;
    b.eta_d_clamped = false;
    if (b.eta_d_raw > 1.0) {
        b.eta_d = 1.0;
        b.eta_d_clamped = true;
        b.warnings.push_back("eta_d above one: measured rates inconsistent, clamped");
    }
    b.eta_e = b.s_f_tot > 0.0 ? b.s_f_ba / b.s_f_tot : 0.0;
    b.eta = b.eta_d * b.eta_e;
    b.c_q = b.gamma_th_rate > 0.0 ? b.gamma_ba_rate / b.gamma_th_rate
                                  : std::numeric_limits<double>::infinity();

    if (b.gamma_th > 0.0) {
        b.n_imp = b.s_z_imp * b.gamma_th / (8.0 * z2);
        b.n_tot = b.s_f_tot / (8.0 * p2 * b.gamma_th);
        b.n_ba_equiv = b.gamma_ba_rate / b.gamma_th;
        b.n_th_equiv = b.gamma_th_rate / b.gamma_th;
    } else {
        b.n_imp = 0.0;
        b.n_tot = std::numeric_limits<double>::infinity();
        b.n_ba_equiv = std::numeric_limits<double>::infinity();
        b.n_th_equiv = 0.0;
    }
    b.n_min = b.eta > 0.0 ? n_min_from_eta(b.eta) : std::numeric_limits<double>::infinity();
}

NoiseBudget base_budget(const ExperimentParams& params) {
    params.validate();
    NoiseBudget b;
    b.mass = params.mass;
    b.omega_z = params.omega_z;
    b.temperature = params.temperature;
    b.z_zpf = position_zpf(params.mass, params.omega_z);
    b.p_zpf = momentum_zpf(params.mass, params.omega_z);
    const ThermalForce th = thermal_force_psd(params);
    b.s_f_th = th.s_f;
    b.gamma_th = th.gamma;
    b.efficiency_totals = efficiency_totals(params.detection_efficiencies);
    return b;
}

}  // namespace

void ExperimentParams::validate() const {
    require_nonnegative(mass, "mass");
    require_nonnegative(omega_z, "omega_z");
    require_nonnegative(wavelength, "wavelength");
    require_nonnegative(p_scatt, "p_scatt");
    require_nonnegative(radius, "radius");
    require_nonnegative(pressure, "pressure");
    require_nonnegative(temperature, "temperature");
    require_nonnegative(gas_molar_mass, "gas_molar_mass");
    require_nonnegative(gas_viscosity, "gas_viscosity");
    require_nonnegative(s_z_imp, "s_z_imp");
    require_finite(na, "na");
    if (!(na > 0.0 && na <= 1.0)) {
        throw InvalidParameter("na must lie in (0, 1]");
    }
    require_finite(gouy_a, "gouy_a");
    if (gouy_a < 0.0 || gouy_a > 1.0) {
        throw InvalidParameter("gouy_a must lie in [0, 1]");
    }
    for (const auto& e : detection_efficiencies) {
        if (!(e.eta_photon > 0.0 && e.eta_photon <= 1.0) ||
            !(e.eta_info > 0.0 && e.eta_info <= 1.0)) {
            throw InvalidParameter("detection_efficiencies[" + e.name +
                                   "] must lie in (0, 1]");
        }
    }
}

std::vector<EfficiencyEntry> reference_efficiency_table() {
    return {
        {"microscope collection", 0.375, 0.84},
        {"microscope transmissivity", 0.84, 0.84},
        {"confocal mode-matching", 0.71, 0.71},
        {"heterodyne split", 0.95, 0.95},
        {"homodyne balancing", 0.99, 0.99},
        {"detector efficiency", 0.85, 0.85},
        {"detector dark noise", 1.0, 0.92},
        {"kalman digital noise", 1.0, 0.98},
        {"environment information loss", 1.0, 0.96},
    };
}

ExperimentParams reference_parameters() {
    ExperimentParams p;
    p.radius = 71.5e-9;
    p.mass = 2.8e-18;
    p.omega_z = constants::two_pi * 104e3;
    p.wavelength = 1064e-9;
    p.p_scatt = 22.4e-6;
    p.pressure = constants::mbar_to_pa(9.2e-9);
    p.temperature = 292.0;
    // Residual gas taken as nitrogen, the reference gas of ionization gauges.
    p.gas_molar_mass = 0.0280134;
    p.gas_viscosity = 1.76e-5;
    p.na = 0.95;
    p.gouy_a = 0.71;
    p.detection_efficiencies = reference_efficiency_table();
    p.s_z_imp = imprecision_psd(p.p_scatt, p.gouy_a, p.wavelength,
                                detection_totals(p.detection_efficiencies).eta_info);
    return p;
}

MeasuredNoise reference_measured_noise() {
    return {1.5e-33, 5.4e-21, 31.25e6};
}

bool is_environment_entry(const EfficiencyEntry& entry) {
    return entry.name.find("environment") != std::string::npos;
}

EfficiencyTotals efficiency_totals(const std::vector<EfficiencyEntry>& entries) {
    EfficiencyTotals t;
    for (const auto& e : entries) {
        t.eta_photon *= e.eta_photon;
        t.eta_info *= e.eta_info;
    }
    return t;
}

EfficiencyTotals detection_totals(const std::vector<EfficiencyEntry>& entries) {
    EfficiencyTotals t;
    for (const auto& e : entries) {
        if (is_environment_entry(e)) continue;
        t.eta_photon *= e.eta_photon;
        t.eta_info *= e.eta_info;
    }
    return t;
}

double position_zpf(double mass, double omega_z) {
    return std::sqrt(hbar / (2.0 * mass * omega_z));
}

double momentum_zpf(double mass, double omega_z) {
    return std::sqrt(hbar * mass * omega_z / 2.0);
}

double backaction_force_psd(const ExperimentParams& params) {
    require_finite(params.p_scatt, "p_scatt");
    require_finite(params.wavelength, "wavelength");
    require_finite(params.gouy_a, "gouy_a");
    if (params.p_scatt < 0.0) throw InvalidParameter("p_scatt must be >= 0");
    if (!(params.wavelength > 0.0)) throw InvalidParameter("wavelength must be > 0");
    const double k = constants::two_pi / params.wavelength;
    const double a = params.gouy_a;
    return 2.0 * (a * a + 0.4) * hbar * k * params.p_scatt / constants::c;
}

double mean_gas_speed(const ExperimentParams& params) {
    return std::sqrt(8.0 * constants::r_gas * params.temperature /
                     (constants::pi * params.gas_molar_mass));
}

double mean_free_path(const ExperimentParams& params) {
    // Normalization chosen so that the Knudsen formula reduces exactly to the
    // free-molecular damping for Kn >> 1 (characteristic length 4r/3).
    constexpr double kScale = 6.0 * constants::pi * kKnudsenA * 4.0 / 64.0;
    return kScale * params.gas_viscosity * mean_gas_speed(params) / params.pressure;
}

ThermalForce thermal_force_psd(const ExperimentParams& params) {
    require_finite(params.pressure, "pressure");
    require_finite(params.temperature, "temperature");
    require_finite(params.mass, "mass");
    if (params.pressure < 0.0) throw InvalidParameter("pressure must be >= 0");
    if (!(params.temperature > 0.0)) throw InvalidParameter("temperature must be > 0");
    if (!(params.mass > 0.0)) throw InvalidParameter("mass must be > 0");

    ThermalForce out;
    if (params.pressure == 0.0) {
        out.knudsen = std::numeric_limits<double>::infinity();
        return out;
    }
    if (!(params.gas_molar_mass > 0.0)) throw InvalidParameter("gas_molar_mass must be > 0");
    if (!(params.radius > 0.0)) throw InvalidParameter("radius must be > 0");

    const double length = 4.0 * params.radius / 3.0;
    const double kn = mean_free_path(params) / length;
    out.knudsen = kn;
    if (kn <= kKnudsenThreshold) {
        if (!(params.gas_viscosity > 0.0)) throw InvalidParameter("gas_viscosity must be > 0");
        const double stokes = 6.0 * constants::pi * params.gas_viscosity * params.radius / params.mass;
        const double correction = 1.0 + kKnudsenB * kn / (kKnudsenC + kKnudsenD * kn + kn * kn);
        out.gamma = stokes * kKnudsenA / (kKnudsenA + kn) * correction;
        out.full_formula = true;
    } else {
        out.gamma = low_pressure_damping(params);
    }
    out.s_f = 4.0 * constants::k_b * params.temperature * out.gamma * params.mass;
    return out;
}

NoiseBudget decoherence_rates(const ExperimentParams& params) {
    NoiseBudget b = base_budget(params);
    if (!(params.s_z_imp > 0.0)) {
        throw NumericError("s_z_imp: division by zero imprecision PSD");
    }
    b.s_z_imp = params.s_z_imp;
    b.s_f_ba = backaction_force_psd(params);
    fill_rates(b);
    return b;
}

NoiseBudget identified_budget(const ExperimentParams& params, const MeasuredNoise& measured) {
    if (!(measured.sample_rate > 0.0)) throw InvalidParameter("sample_rate must be > 0");
    if (!(measured.force_variance >= 0.0)) throw InvalidParameter("force_variance must be >= 0");
    if (!(measured.measurement_variance > 0.0)) {
        throw NumericError("measurement_variance: division by zero imprecision PSD");
    }
    NoiseBudget b = base_budget(params);
    const double half_rate = measured.sample_rate / 2.0;
    b.s_z_imp = measured.measurement_variance / half_rate;
    const double s_f_total = measured.force_variance / half_rate;
    b.s_f_ba = s_f_total - b.s_f_th;
    if (b.s_f_ba < 0.0) {
        b.warnings.push_back("measured force noise below gas contribution; backaction set to zero");
        b.s_f_ba = 0.0;
    }
    fill_rates(b);
    return b;
}

NoiseBudget with_pressure(const NoiseBudget& budget, const ExperimentParams& params,
                          double pressure) {
    ExperimentParams p = params;
    p.pressure = pressure;
    p.validate();
    NoiseBudget b = budget;
    const ThermalForce th = thermal_force_psd(p);
    b.s_f_th = th.s_f;
    b.gamma_th = th.gamma;
    b.warnings.clear();
    fill_rates(b);
    return b;
}

OccupationBounds occupation_bounds(const NoiseBudget& budget, double gamma) {
    if (!(budget.eta > 0.0)) throw InvalidParameter("eta must be > 0");
    if (!(gamma > 0.0)) throw InvalidParameter("gamma must be > 0");
    OccupationBounds o;
    o.n_imp = budget.s_z_imp * gamma / (8.0 * budget.z_zpf * budget.z_zpf);
    o.n_tot = budget.s_f_tot / (8.0 * budget.p_zpf * budget.p_zpf * gamma);
    o.n_min = 2.0 * std::sqrt(o.n_imp * o.n_tot) - 0.5;
    return o;
}

double n_min_from_eta(double eta) {
    if (!(eta > 0.0)) throw InvalidParameter("eta must be > 0");
    return 1.0 / (2.0 * std::sqrt(eta)) - 0.5;
}

}  // namespace levikal

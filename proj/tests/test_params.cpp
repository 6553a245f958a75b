#include <gtest/gtest.h>

#include <cmath>

#include "levikal/constants.hpp"
#include "levikal/error.hpp"
#include "levikal/params.hpp"

using namespace levikal;

namespace {

// Independent oracle: free-molecular gas damping and force noise written out
// from kinetic theory without the library helpers.
double oracle_thermal_psd(double pressure_pa) {
    const double r = 71.5e-9, m = 2.8e-18, t = 292.0, molar = 0.0280134;
    const double kb = 1.380649e-23, na = 6.02214076e23;
    const double v = std::sqrt(8.0 * kb * na * t / (M_PI * molar));
    const double gamma = 64.0 * r * r * pressure_pa / (3.0 * m * v);
    return 4.0 * kb * t * gamma * m;
}

}  // namespace

TEST(Params, ZeroPointProductIsHalfHbar) {
    const ExperimentParams p = reference_parameters();
    const double z = position_zpf(p.mass, p.omega_z);
    const double q = momentum_zpf(p.mass, p.omega_z);
    EXPECT_NEAR(z * q / (constants::hbar / 2.0), 1.0, 1e-14);
    EXPECT_NEAR(q / (p.mass * p.omega_z * z), 1.0, 1e-14);
}

TEST(Params, BackactionForcePsdMatchesReference) {
    // Reference value 8.4e-41 N^2/Hz, tolerance 2%.
    EXPECT_NEAR(backaction_force_psd(reference_parameters()) / 8.4e-41, 1.0, 0.02);
}

TEST(Params, ThermalForcePsdAtOneE8Mbar) {
    ExperimentParams p = reference_parameters();
    p.pressure = constants::mbar_to_pa(1e-8);
    const ThermalForce th = thermal_force_psd(p);
    EXPECT_FALSE(th.full_formula);
    EXPECT_NEAR(th.s_f / oracle_thermal_psd(p.pressure), 1.0, 1e-10);
    EXPECT_NEAR(th.s_f / 3.9e-42, 1.0, 0.05);
}

TEST(Params, ThermalForceLinearInPressureWhenRarefied) {
    ExperimentParams p = reference_parameters();
    const double s1 = thermal_force_psd(p).s_f;
    p.pressure *= 3.0;
    EXPECT_NEAR(thermal_force_psd(p).s_f / s1, 3.0, 1e-12);
}

TEST(Params, ZeroPressureHasNoGasNoise) {
    ExperimentParams p = reference_parameters();
    p.pressure = 0.0;
    const ThermalForce th = thermal_force_psd(p);
    EXPECT_EQ(th.s_f, 0.0);
    EXPECT_EQ(th.gamma, 0.0);
    EXPECT_TRUE(std::isinf(th.knudsen));
}

TEST(Params, DenseGasUsesFullDragFormula) {
    ExperimentParams p = reference_parameters();
    p.pressure = 1e5;
    const ThermalForce th = thermal_force_psd(p);
    EXPECT_TRUE(th.full_formula);
    EXPECT_LT(th.knudsen, 10.0);
    // Slip-corrected drag lies between the continuum and the free-molecular limits.
    const double stokes = 6.0 * M_PI * p.gas_viscosity * p.radius / p.mass;
    EXPECT_GT(th.gamma, 0.0);
    EXPECT_LT(th.gamma, stokes);
}

TEST(Params, EfficiencyTableTotals) {
    const EfficiencyTotals t = efficiency_totals(reference_efficiency_table());
    EXPECT_NEAR(t.eta_photon, 0.178, 0.002);
    EXPECT_NEAR(t.eta_info, 0.347, 0.002);
    double product = 1.0;
    for (const auto& e : reference_efficiency_table()) product *= e.eta_info;
    EXPECT_DOUBLE_EQ(t.eta_info, product);
}

TEST(Params, DetectionTotalsExcludeEnvironment) {
    const auto table = reference_efficiency_table();
    const EfficiencyTotals all = efficiency_totals(table);
    const EfficiencyTotals det = detection_totals(table);
    int environment = 0;
    for (const auto& e : table) environment += is_environment_entry(e);
    EXPECT_EQ(environment, 1);
    EXPECT_NEAR(all.eta_info / det.eta_info, 0.96, 1e-12);
}

TEST(Params, MinimumOccupationFromFirstPrinciples) {
    const NoiseBudget b = decoherence_rates(reference_parameters());
    EXPECT_NEAR(b.n_min, 0.34, 0.02);
    EXPECT_NEAR(n_min_from_eta(1.0), 0.0, 1e-15);
    EXPECT_NEAR(n_min_from_eta(0.25), 0.5, 1e-15);
}

TEST(Params, IdentifiedBudgetFromMeasuredVariances) {
    const NoiseBudget b = identified_budget(reference_parameters(), reference_measured_noise());
    EXPECT_FALSE(b.eta_d_clamped);
    const double half_rate = reference_measured_noise().sample_rate / 2.0;
    EXPECT_NEAR((b.s_f_ba + b.s_f_th) / (1.5e-33 / half_rate), 1.0, 1e-12);
    EXPECT_NEAR(b.s_z_imp / (5.4e-21 / half_rate), 1.0, 1e-12);
}

TEST(Params, ImprecisionBackactionIdentity) {
    for (const NoiseBudget& b : {decoherence_rates(reference_parameters()),
                                 identified_budget(reference_parameters(), reference_measured_noise())}) {
        EXPECT_NEAR(b.gamma_meas / b.gamma_ba_rate, b.eta_d_raw, 1e-12 * b.eta_d_raw);
        EXPECT_NEAR(b.eta, b.eta_d * b.eta_e, 1e-15);
        EXPECT_NEAR(b.n_min, 1.0 / (2.0 * std::sqrt(b.eta)) - 0.5, 1e-12);
    }
}

TEST(Params, OccupationBoundProductIndependentOfDamping) {
    const NoiseBudget b = identified_budget(reference_parameters(), reference_measured_noise());
    for (double gamma : {1e3, 1e5, 1e7}) {
        const OccupationBounds o = occupation_bounds(b, gamma);
        EXPECT_NEAR(o.n_min, b.n_min, 1e-10);
        EXPECT_NEAR(o.n_imp * o.n_tot * 16.0 * b.eta, 1.0, 1e-10);
    }
}

TEST(Params, WithPressureKeepsBackaction) {
    const ExperimentParams p = reference_parameters();
    const NoiseBudget b = identified_budget(p, reference_measured_noise());
    const NoiseBudget hi = with_pressure(b, p, 2.0 * p.pressure);
    EXPECT_DOUBLE_EQ(hi.s_f_ba, b.s_f_ba);
    EXPECT_DOUBLE_EQ(hi.s_z_imp, b.s_z_imp);
    EXPECT_NEAR(hi.s_f_th / b.s_f_th, 2.0, 1e-12);
    EXPECT_NEAR(hi.gamma_th_rate / b.gamma_th_rate, 2.0, 1e-12);
}

TEST(Params, TotalDecoherenceRateAtReheatPressure) {
    const ExperimentParams p = reference_parameters();
    const NoiseBudget b = with_pressure(identified_budget(p, reference_measured_noise()), p,
                                        constants::mbar_to_pa(1.6e-8));
    const double rate = (b.gamma_ba_rate + b.gamma_th_rate) / constants::two_pi;
    EXPECT_NEAR(rate / 19.7e3, 1.0, 0.05);
}

TEST(Params, ValidationNamesField) {
    ExperimentParams p = reference_parameters();
    p.mass = -1.0;
    try {
        p.validate();
        FAIL() << "expected InvalidParameter";
    } catch (const InvalidParameter& e) {
        EXPECT_NE(std::string(e.what()).find("mass"), std::string::npos);
    }
    p = reference_parameters();
    p.na = 1.2;
    EXPECT_THROW(p.validate(), InvalidParameter);
    p = reference_parameters();
    p.detection_efficiencies[0].eta_info = 1.5;
    EXPECT_THROW(p.validate(), InvalidParameter);
    p = reference_parameters();
    p.pressure = std::nan("");
    EXPECT_THROW(p.validate(), InvalidParameter);
}

TEST(Params, ZeroImprecisionIsNumericError) {
    ExperimentParams p = reference_parameters();
    p.s_z_imp = 0.0;
    EXPECT_THROW(decoherence_rates(p), NumericError);
    MeasuredNoise m = reference_measured_noise();
    m.measurement_variance = 0.0;
    EXPECT_THROW(identified_budget(reference_parameters(), m), NumericError);
}

TEST(Params, InconsistentRatesClampEfficiency) {
    MeasuredNoise m = reference_measured_noise();
    m.measurement_variance *= 1e-3;
    const NoiseBudget b = identified_budget(reference_parameters(), m);
    EXPECT_TRUE(b.eta_d_clamped);
    EXPECT_DOUBLE_EQ(b.eta_d, 1.0);
    EXPECT_GT(b.eta_d_raw, 1.0);
    EXPECT_FALSE(b.warnings.empty());
}

TEST(Params, ForceBelowGasFloorZeroesBackaction) {
    ExperimentParams p = reference_parameters();
    p.pressure = 1.0;
    const NoiseBudget b = identified_budget(p, reference_measured_noise());
    EXPECT_EQ(b.s_f_ba, 0.0);
    EXPECT_FALSE(b.warnings.empty());
}

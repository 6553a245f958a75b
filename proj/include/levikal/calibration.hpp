#pragma once

#include <vector>

#include "levikal/spectral.hpp"

namespace levikal {

struct PositionPair {
    double voltage_variance = 0.0;  // V^2
    double n_het = 0.0;             // occupation from the out-of-loop thermometer
};

struct PositionCalibration {
    double c_mv = 0.0;          // m/V
    double c_mv_error = 0.0;
    double noise_offset = 0.0;  // measurement-noise variance, m^2
    double noise_offset_error = 0.0;
    double slope = 0.0;         // V^2 / m^2
    double intercept = 0.0;     // V^2
    double r_squared = 0.0;
};

// Regression of <V^2> against z_zpf^2 (2 n + 1): slope = C^-2, intercept = <nu^2> C^-2.
PositionCalibration calibrate_position(const std::vector<PositionPair>& pairs, double z_zpf);

struct DrivePoint {
    double omega_d = 0.0;        // rad/s
    double voltage_std = 0.0;    // V
    double force_std = 0.0;      // N, recovered from the displacement response
};

struct FrequencySlope {
    double omega_d = 0.0;
    double slope = 0.0;  // N/V
    double standard_error = 0.0;
    int points = 0;
};

struct ForceCalibration {
    double c_nv = 0.0;  // N/V, pooled fit through the origin
    double c_nv_error = 0.0;
    std::vector<FrequencySlope> per_frequency;
    double max_discrepancy_sigma = 0.0;  // largest pairwise slope difference over its error
};

// Pooled and per-frequency fits of force_std = C_NV voltage_std. Requires at
// least two distinct frequencies; throws ConsistencyError when two
// per-frequency slopes differ by more than 3 combined standard errors. When
// omega_z > 0 every drive must satisfy |omega_d - omega_z| > 10 gamma_eff.
ForceCalibration calibrate_force(const std::vector<DrivePoint>& drives, double omega_z = 0.0,
                                 double gamma_eff = 0.0);

// Force amplitude std m |omega_z^2 - omega_d^2| sqrt(<z_d^2>) from the line
// power of a displacement spectrum in m^2/Hz.
double recovered_force_std(const SpectrumRecord& displacement_psd, double omega_d,
                           double omega_z, double mass);

}  // namespace levikal

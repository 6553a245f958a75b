#pragma once

#include <vector>

#include "levikal/params.hpp"
#include "levikal/spectral.hpp"

namespace levikal {

struct SqlResult {
    // psd is the total measured displacement noise; components imp, ba, zpf,
    // total, sql, all one-sided in m^2/Hz.
    SpectrumRecord record;
    double min_ratio = 0.0;  // global minimum of total/sql over the grid
    double min_freq = 0.0;   // Hz
    double min_ratio_upper = 0.0;  // minimum above resonance
    double min_offset_upper = 0.0;  // Hz above resonance
    double min_ratio_lower = 0.0;
    double min_offset_lower = 0.0;  // Hz below resonance, positive
    double ratio_on_resonance = 0.0;
};

// Displacement noise contributions with the susceptibility damping gamma_eff:
//   imp = S_imp, ba = S_F^tot |chi|^2, zpf = z_zpf^2 gamma / ((w - w_z)^2 + gamma^2/4),
//   sql = 2 hbar |chi|.
SqlResult sql_curves(const NoiseBudget& budget, double omega_z, double gamma_eff,
                     const std::vector<double>& freq_hz);

// Energy damping that keeps occupation n against the total heating rate.
double damping_for_occupation(const NoiseBudget& budget, double n);

std::vector<double> linear_grid(double lo, double hi, int count);

}  // namespace levikal

#include "levikal/sql.hpp"

#include <cmath>
#include <complex>
#include <limits>

#include "levikal/constants.hpp"
#include "levikal/error.hpp"

namespace levikal {

std::vector<double> linear_grid(double lo, double hi, int count) {
    if (count < 2 || !(hi > lo)) throw InvalidParameter("linear_grid: need count >= 2 and hi > lo");
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i) g[i] = lo + (hi - lo) * i / (count - 1);
    return g;
}

double damping_for_occupation(const NoiseBudget& budget, double n) {
    if (!(n > 0.0)) throw InvalidParameter("occupation must be > 0");
    return (budget.gamma_ba_rate + budget.gamma_th_rate) / n;
}

SqlResult sql_curves(const NoiseBudget& budget, double omega_z, double gamma_eff,
                     const std::vector<double>& freq_hz) {
    if (!(gamma_eff > 0.0)) throw InvalidParameter("gamma_eff must be > 0");
    if (!(omega_z > 0.0)) throw InvalidParameter("omega_z must be > 0");
    if (freq_hz.empty()) throw InvalidParameter("frequency grid is empty");
    const double m = budget.mass;
    const double z2 = budget.z_zpf * budget.z_zpf;
    const double f_z = omega_z / constants::two_pi;

    SqlResult out;
    SpectrumRecord& rec = out.record;
    rec.unit = "m^2/Hz";
    rec.window = "analytic";
    rec.freq = freq_hz;
    std::vector<double> imp, ba, zpf, sql;
    const double inf = std::numeric_limits<double>::infinity();
    out.min_ratio = out.min_ratio_upper = out.min_ratio_lower = inf;
    for (double f : freq_hz) {
        const double w = constants::two_pi * f;
        const std::complex<double> inv_chi(m * (omega_z * omega_z - w * w), m * gamma_eff * w);
        const double chi_abs = 1.0 / std::abs(inv_chi);
        const double d = w - omega_z;
        imp.push_back(budget.s_z_imp);
        ba.push_back(budget.s_f_tot * chi_abs * chi_abs);
        zpf.push_back(z2 * gamma_eff / (d * d + 0.25 * gamma_eff * gamma_eff));
        sql.push_back(2.0 * constants::hbar * chi_abs);
        const double total = imp.back() + ba.back() + zpf.back();
        rec.psd.push_back(total);
        const double ratio = total / sql.back();
        if (ratio < out.min_ratio) {
            out.min_ratio = ratio;
            out.min_freq = f;
        }
        if (f > f_z && ratio < out.min_ratio_upper) {
            out.min_ratio_upper = ratio;
            out.min_offset_upper = f - f_z;
        }
        if (f < f_z && ratio < out.min_ratio_lower) {
            out.min_ratio_lower = ratio;
            out.min_offset_lower = f_z - f;
        }
    }
    const double chi_res = 1.0 / (m * gamma_eff * omega_z);
    out.ratio_on_resonance = (budget.s_z_imp + budget.s_f_tot * chi_res * chi_res + 4.0 * z2 / gamma_eff) /
                             (2.0 * constants::hbar * chi_res);
    rec.components = {{"imp", imp}, {"ba", ba}, {"zpf", zpf}, {"total", rec.psd}, {"sql", sql}};
    return out;
}

}  // namespace levikal

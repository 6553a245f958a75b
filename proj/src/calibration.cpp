#include "levikal/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "levikal/constants.hpp"
#include "levikal/error.hpp"
#include "levikal/statistics.hpp"

namespace levikal {

PositionCalibration calibrate_position(const std::vector<PositionPair>& pairs, double z_zpf) {
    if (pairs.size() < 3) throw FitError("calibrate_position: need at least 3 pairs", {});
    if (!(z_zpf > 0.0)) throw InvalidParameter("z_zpf must be > 0");
    double n_lo = pairs.front().n_het, n_hi = pairs.front().n_het;
    std::vector<double> x, y;
    for (const auto& p : pairs) {
        if (!(p.n_het >= 0.0) || !std::isfinite(p.voltage_variance)) {
            throw InvalidParameter("calibrate_position: invalid pair");
        }
        n_lo = std::min(n_lo, p.n_het);
        n_hi = std::max(n_hi, p.n_het);
        x.push_back(z_zpf * z_zpf * (2.0 * p.n_het + 1.0));
        y.push_back(p.voltage_variance);
    }
    if (!(n_hi >= 3.0 * n_lo) || !(n_hi > n_lo)) {
        throw FitError("calibrate_position: n_het must span a factor of at least 3", {});
    }
    const LinearFit fit = fit_line(x, y);
    if (!(fit.slope > 0.0)) throw FitError("calibrate_position: non-positive slope", {fit.slope, fit.intercept});
    PositionCalibration c;
    c.slope = fit.slope;
    c.intercept = fit.intercept;
    c.r_squared = fit.r_squared;
    c.c_mv = 1.0 / std::sqrt(fit.slope);
    c.c_mv_error = 0.5 * c.c_mv * fit.slope_standard_error / fit.slope;
    c.noise_offset = fit.intercept / fit.slope;
    c.noise_offset_error = std::hypot(fit.intercept_standard_error / fit.slope,
                                      c.noise_offset * fit.slope_standard_error / fit.slope);
    return c;
}

ForceCalibration calibrate_force(const std::vector<DrivePoint>& drives, double omega_z,
                                 double gamma_eff) {
    std::map<double, std::pair<std::vector<double>, std::vector<double>>> groups;
    std::vector<double> x, y;
    for (const auto& d : drives) {
        if (omega_z > 0.0 && !(std::abs(d.omega_d - omega_z) > 10.0 * gamma_eff)) {
            throw ProtocolError("calibrate_force: drive is not off-resonant");
        }
        groups[d.omega_d].first.push_back(d.voltage_std);
        groups[d.omega_d].second.push_back(d.force_std);
        x.push_back(d.voltage_std);
        y.push_back(d.force_std);
    }
    if (groups.size() < 2) throw FitError("calibrate_force: need at least two drive frequencies", {});
    ForceCalibration out;
    const OriginFit pooled = fit_through_origin(x, y);
    out.c_nv = pooled.slope;
    out.c_nv_error = pooled.standard_error;
    for (const auto& [omega, data] : groups) {
        const OriginFit f = fit_through_origin(data.first, data.second);
        out.per_frequency.push_back({omega, f.slope, f.standard_error,
                                     static_cast<int>(data.first.size())});
    }
    for (std::size_t i = 0; i < out.per_frequency.size(); ++i) {
        for (std::size_t j = i + 1; j < out.per_frequency.size(); ++j) {
            const auto& a = out.per_frequency[i];
            const auto& b = out.per_frequency[j];
            const double se = std::hypot(a.standard_error, b.standard_error);
            const double diff = std::abs(a.slope - b.slope);
            const double sigma = se > 0.0 ? diff / se : (diff > 0.0 ? INFINITY : 0.0);
            out.max_discrepancy_sigma = std::max(out.max_discrepancy_sigma, sigma);
        }
    }
    if (out.max_discrepancy_sigma > 3.0) {
        throw ConsistencyError("calibrate_force: per-frequency slopes differ by more than 3 sigma");
    }
    return out;
}

double recovered_force_std(const SpectrumRecord& displacement_psd, double omega_d,
                           double omega_z, double mass) {
    const double power = std::max(0.0, tone_power(displacement_psd, omega_d / constants::two_pi));
    return mass * std::abs(omega_z * omega_z - omega_d * omega_d) * std::sqrt(power);
}

}  // namespace levikal

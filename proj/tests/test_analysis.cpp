#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "levikal/calibration.hpp"
#include "levikal/constants.hpp"
#include "levikal/error.hpp"
#include "levikal/params.hpp"
#include "levikal/rng.hpp"
#include "levikal/spectral.hpp"
#include "levikal/sql.hpp"
#include "levikal/statistics.hpp"
#include "levikal/thermometry.hpp"

using namespace levikal;
using constants::two_pi;

namespace {

std::vector<double> white(std::size_t n, std::uint64_t stream, double sigma = 1.0) {
    Philox4x32 rng(21, stream);
    std::vector<double> x(n);
    for (auto& v : x) v = sigma * rng.normal();
    return x;
}

const NoiseBudget& budget() {
    static const NoiseBudget b = identified_budget(reference_parameters(), reference_measured_noise());
    return b;
}

}  // namespace

TEST(Spectral, FftMatchesNaiveDft) {
    const std::vector<double> x = white(64, 1);
    const auto f = real_fft(x);
    ASSERT_EQ(f.size(), 33u);
    for (std::size_t k = 0; k < f.size(); ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t n = 0; n < x.size(); ++n) {
            acc += x[n] * std::polar(1.0, -two_pi * static_cast<double>(k * n) / 64.0);
        }
        EXPECT_LT(std::abs(acc - f[k]), 1e-12);
    }
}

TEST(Spectral, WhiteNoiseLevelAndParseval) {
    const double fs = 1e6;
    const std::vector<double> x = white(1 << 18, 2, 3.0);
    for (WindowKind w : {WindowKind::Hann, WindowKind::Rectangular}) {
        const SpectrumRecord r = welch_psd(x, fs, 4096, 0.5, w);
        double mean = 0.0;
        for (std::size_t i = 1; i + 1 < r.size(); ++i) mean += r.psd[i];
        mean /= static_cast<double>(r.size() - 2);
        EXPECT_NEAR(mean / (2.0 * 9.0 / fs), 1.0, 0.01);
        EXPECT_NEAR(band_power(r, 0.0, fs / 2.0) / 9.0, 1.0, 0.01);
    }
}

TEST(Spectral, TonePowerOfSinusoid) {
    const double fs = 1e6, f0 = 123.4e3, amp = 0.2;
    std::vector<double> x = white(1 << 18, 3);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += amp * std::sin(two_pi * f0 * i / fs);
    const SpectrumRecord r = welch_psd(x, fs, 1 << 14);
    EXPECT_NEAR(tone_power(r, f0) / (amp * amp / 2.0), 1.0, 0.02);
}

TEST(Spectral, InputContract) {
    const std::vector<double> x = white(100, 4);
    EXPECT_THROW(welch_psd(x, 1.0, 512), ContractError);
    EXPECT_THROW(welch_psd(x, 1.0, 32, 1.0), ContractError);
    EXPECT_THROW(welch_psd(x, 0.0, 32), ContractError);
    const auto hann = make_window(WindowKind::Hann, 8);
    EXPECT_DOUBLE_EQ(hann[0], 0.0);
    EXPECT_DOUBLE_EQ(hann[4], 1.0);
}

TEST(Statistics, LineFitExactAndErrors) {
    const std::vector<double> x{0, 1, 2, 3, 4};
    const LinearFit f = fit_line(x, {1, 3, 5, 7, 9});
    EXPECT_NEAR(f.slope, 2.0, 1e-14);
    EXPECT_NEAR(f.intercept, 1.0, 1e-14);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-14);
    EXPECT_NEAR(f.slope_standard_error, 0.0, 1e-14);
    EXPECT_THROW(fit_line({1, 1, 1}, {1, 2, 3}), FitError);
    // Textbook: residuals (0.1, -0.2, 0.1) around y = x.
    const LinearFit g = fit_line({0, 1, 2}, {0.1, 0.8, 2.1});
    EXPECT_NEAR(g.slope, 1.0, 1e-14);
    EXPECT_NEAR(g.slope_standard_error, std::sqrt(0.06 / 1.0 / 2.0), 1e-12);
}

TEST(Statistics, OriginFit) {
    const OriginFit f = fit_through_origin({1, 2, 3}, {2, 4, 6});
    EXPECT_DOUBLE_EQ(f.slope, 2.0);
    EXPECT_NEAR(f.standard_error, 0.0, 1e-15);
}

TEST(Statistics, MomentsOfKnownDistributions) {
    const Moments g = sample_moments(white(400000, 5));
    EXPECT_NEAR(g.excess_kurtosis, 0.0, 0.03);
    EXPECT_NEAR(g.stddev, 1.0, 0.01);
    Philox4x32 rng(3, 3);
    std::vector<double> u(400000);
    for (auto& v : u) v = rng.uniform();
    EXPECT_NEAR(sample_moments(u).excess_kurtosis, -1.2, 0.02);
}

TEST(Statistics, WhitenessDetectsCorrelation) {
    std::vector<double> x = white(1 << 17, 6);
    WhitenessOptions o;
    const WhitenessResult w = innovation_whiteness(x, o);
    EXPECT_TRUE(w.pass);
    EXPECT_NEAR(w.fraction_inside, 0.95, 0.02);
    EXPECT_NEAR(w.lower, exponential_quantile(0.025), 1e-15);
    EXPECT_NEAR(w.upper, exponential_quantile(0.975), 1e-15);
    for (std::size_t i = 1; i < x.size(); ++i) x[i] += 0.6 * x[i - 1];
    EXPECT_FALSE(innovation_whiteness(x, o).pass);
    const WhitenessResult z = innovation_whiteness(std::vector<double>(1 << 15, 0.0), o);
    EXPECT_TRUE(z.zero_variance);
    EXPECT_FALSE(z.pass);
    EXPECT_THROW(innovation_whiteness(white(100, 7), o), ContractError);
}

TEST(Statistics, HighpassResponse) {
    const double fs = 1e6;
    std::vector<double> lo(200000), hi(200000);
    for (std::size_t i = 0; i < lo.size(); ++i) {
        lo[i] = std::sin(two_pi * 1e3 * i / fs);
        hi[i] = std::sin(two_pi * 100e3 * i / fs);
    }
    const auto ylo = butterworth_highpass(lo, 10e3, fs);
    const auto yhi = butterworth_highpass(hi, 10e3, fs);
    double plo = 0.0, phi = 0.0;
    for (double v : ylo) plo += v * v;
    for (double v : yhi) phi += v * v;
    plo /= ylo.size();
    phi /= yhi.size();
    // Fourth order: 80 dB per decade below the corner in amplitude squared.
    EXPECT_LT(plo / 0.5, 1.5e-8);
    EXPECT_NEAR(phi / 0.5, 1.0, 1e-3);
}

TEST(Statistics, GaussianityOfNormals) {
    const GaussianityResult g = gaussianity_check(white(1'000'000, 8), 0.0, 1.0);
    EXPECT_LT(std::abs(g.excess_kurtosis), 0.05);
    EXPECT_LT(g.ks_statistic, 1.63 / std::sqrt(1e6));
    EXPECT_EQ(g.bin_centers.size(), 101u);
    EXPECT_NEAR(normal_cdf(0.0), 0.5, 1e-16);
    EXPECT_NEAR(normal_cdf(1.96), 0.9750021048517795, 1e-12);
}

TEST(Sql, CurvesMatchSusceptibilityOracle) {
    const double omega = reference_parameters().omega_z;
    const double gamma = damping_for_occupation(budget(), 8.3);
    const std::vector<double> f = linear_grid(omega / two_pi - 60e3, omega / two_pi + 60e3, 1201);
    const SqlResult s = sql_curves(budget(), omega, gamma, f);
    const auto& sql = *s.record.component("sql");
    const auto& total = *s.record.component("total");
    for (std::size_t i = 0; i < f.size(); i += 100) {
        const double w = two_pi * f[i];
        const std::complex<double> chi =
            1.0 / (budget().mass * std::complex<double>(omega * omega - w * w, gamma * w));
        EXPECT_NEAR(sql[i] / (2.0 * constants::hbar * std::abs(chi)), 1.0, 1e-12);
        EXPECT_GE(total[i], sql[i]);
    }
    EXPECT_NEAR(damping_for_occupation(budget(), 2.0) * 2.0,
                budget().gamma_ba_rate + budget().gamma_th_rate, 1e-6);
}

TEST(Sql, LowAndHighGainFeatures) {
    const double omega = reference_parameters().omega_z;
    const double f_z = omega / two_pi;
    const std::vector<double> f = linear_grid(f_z - 60e3, f_z + 60e3, 6001);
    const SqlResult low = sql_curves(budget(), omega, damping_for_occupation(budget(), 8.3), f);
    EXPECT_NEAR(low.min_ratio_upper / 1.76, 1.0, 0.1);
    EXPECT_NEAR(low.min_offset_upper / 22e3, 1.0, 0.1);
    const SqlResult high = sql_curves(budget(), omega, damping_for_occupation(budget(), 0.71), f);
    EXPECT_NEAR(high.ratio_on_resonance / 2.7, 1.0, 0.1);
}

TEST(Thermometry, DetailedBalanceMaps) {
    EXPECT_DOUBLE_EQ(sideband_ratio(0.0), 0.0);
    EXPECT_DOUBLE_EQ(sideband_ratio(1.0), 0.5);
    for (double n : {0.01, 0.56, 8.3}) EXPECT_NEAR(occupation_from_ratio(sideband_ratio(n)), n, 1e-12 * (1 + n));
}

TEST(Thermometry, NoiselessRoundTrip) {
    const double omega = reference_parameters().omega_z;
    const FloorModel floors;
    for (double n : {0.3, 0.56, 8.3}) {
        const double gamma = damping_for_occupation(budget(), n);
        const SpectrumRecord rec = synth_heterodyne_psd(n, omega, gamma, floors);
        const SidebandFit fit = fit_sidebands(rec, floors, omega);
        ASSERT_TRUE(fit.n_defined);
        EXPECT_NEAR(fit.n_est / n, 1.0, 0.01) << "n = " << n;
        EXPECT_NEAR(fit.difference / floors.signal_area, 1.0, 0.01);
        EXPECT_NEAR(fit.gamma_eff / gamma, 1.0, 0.02);
        EXPECT_NEAR(fit.one_over_f_amp / floors.one_over_f, 1.0, 0.02);
    }
}

TEST(Thermometry, NoisyFitWithinFivePercent) {
    const double omega = reference_parameters().omega_z;
    const FloorModel floors;
    SynthOptions o;
    o.averages = 1000;
    o.seed = 1;
    const double n = 0.56;
    const SpectrumRecord rec = synth_heterodyne_psd(n, omega, damping_for_occupation(budget(), n), floors, o);
    const SidebandFit fit = fit_sidebands(rec, floors, omega, o.averages);
    EXPECT_NEAR(fit.n_est / n, 1.0, 0.05);
    EXPECT_NEAR(fit.reduced_chi2, 1.0, 0.1);
    EXPECT_LT(std::abs(fit.residual_gaussianity), 0.3);
}

TEST(Thermometry, FloorsOnlyLeaveOccupationUndefined) {
    const double omega = reference_parameters().omega_z;
    const FloorModel floors;
    SynthOptions o;
    o.averages = 1000;
    o.particle = false;
    const SpectrumRecord rec = synth_heterodyne_psd(0.0, omega, damping_for_occupation(budget(), 1.0), floors, o);
    try {
        EXPECT_FALSE(fit_sidebands(rec, floors, omega, o.averages).n_defined);
    } catch (const FitError&) {
        SUCCEED();
    }
}

TEST(Thermometry, FloorValidation) {
    FloorModel f;
    f.detector_cutoff = 0.0;
    EXPECT_THROW(f.validate(), InvalidParameter);
    FloorModel g;
    EXPECT_NEAR(g.detector_transfer(0.0), 1.0, 1e-15);
    EXPECT_NEAR(g.detector_transfer(g.detector_cutoff), 0.5, 1e-15);
}

TEST(Calibration, PositionFromExactPairs) {
    const double c = 8e-9, offset = 5.4e-21, z = budget().z_zpf;
    std::vector<PositionPair> pairs;
    for (double n : {0.7, 2.0, 5.0, 12.0}) pairs.push_back({(z * z * (2 * n + 1) + offset) / (c * c), n});
    const PositionCalibration p = calibrate_position(pairs, z);
    EXPECT_NEAR(p.c_mv / c, 1.0, 1e-10);
    EXPECT_NEAR(p.noise_offset / offset, 1.0, 1e-8);
    pairs.resize(2);
    EXPECT_THROW(calibrate_position(pairs, z), FitError);
    std::vector<PositionPair> narrow{{1.0, 1.0}, {1.1, 1.2}, {1.2, 1.5}};
    EXPECT_THROW(calibrate_position(narrow, z), FitError);
}

TEST(Calibration, ForceConsistencyAndProtocol) {
    const double c = 1.98e-15;
    std::vector<DrivePoint> d;
    for (double w : {two_pi * 89e3, two_pi * 119e3})
        for (double v : {1e-3, 2e-3, 3e-3}) d.push_back({w, v, c * v * (1.0 + 1e-4 * (v * 1e3 - 2.0))});
    const ForceCalibration f = calibrate_force(d, two_pi * 104e3, 100.0);
    EXPECT_NEAR(f.c_nv / c, 1.0, 1e-3);
    EXPECT_EQ(f.per_frequency.size(), 2u);

    std::vector<DrivePoint> bad = d;
    for (auto& p : bad)
        if (p.omega_d > two_pi * 100e3) p.force_std *= 1.5;
    EXPECT_THROW(calibrate_force(bad, 0.0, 0.0), ConsistencyError);
    EXPECT_THROW(calibrate_force(d, two_pi * 104e3, two_pi * 2e3), ProtocolError);
    std::vector<DrivePoint> one(d.begin(), d.begin() + 3);
    EXPECT_THROW(calibrate_force(one), FitError);
}

TEST(Calibration, RecoveredForceFromLine) {
    const double fs = 1e6, fd = 50e3, m = 2.8e-18, wz = two_pi * 104e3;
    const double f0 = 1e-17, wd = two_pi * fd;
    const double amp = f0 / (m * std::abs(wz * wz - wd * wd));
    std::vector<double> z(1 << 18);
    Philox4x32 rng(2, 2);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = amp * std::sin(wd * i / fs) + 1e-3 * amp * rng.normal();
    const SpectrumRecord r = welch_psd(z, fs, 1 << 14);
    EXPECT_NEAR(recovered_force_std(r, wd, wz, m) / (f0 / std::sqrt(2.0)), 1.0, 0.01);
}

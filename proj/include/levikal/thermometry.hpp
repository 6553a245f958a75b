#pragma once

#include <cstdint>
#include <vector>

#include "levikal/spectral.hpp"

namespace levikal {

// Independently measured noise floors of the heterodyne channel. Levels other
// than the dark noises are in shot-noise units before the detector response.
struct FloorModel {
    double f_het = 9.2e6;              // heterodyne carrier, Hz
    double shot_noise = 1.0;           // raw units per Hz
    double detector_dark = 0.3;        // raw units per Hz, after the detector
    double analyzer_dark = 0.1;        // raw units per Hz
    double detector_cutoff = 75e6;     // first-order lowpass corner, Hz
    double phase_noise_level = 0.5;    // carrier shoulder peak, shot-noise units
    double phase_noise_width = 20e3;   // shoulder half width, Hz
    double one_over_f = 2.0e3;         // a in a / |f - f_het|, shot-noise units x Hz
    // Area of one motional quantum in each sideband, shot-noise units x Hz.
    // Stokes area = signal_area (n + 1), anti-Stokes area = signal_area n.
    double signal_area = 1.41e5;

    double detector_transfer(double f) const;  // power transfer, 1 at DC
    double phase_noise(double f) const;        // shot-noise units
    double dark(double f) const;               // raw units
    void validate() const;
};

struct SynthOptions {
    double span = 400e3;       // Hz on each side of the carrier
    double bin_width = 500.0;  // Hz; the carrier sits half a bin off the grid
    int averages = 0;          // traces averaged per spectrum, 0 = noiseless
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;
    bool particle = true;      // false leaves only the floors
};

// Heterodyne spectrum of an oscillator with occupation n: Lorentzians of full
// width gamma_eff at f_het -/+ f_z (Stokes below, anti-Stokes above the carrier)
// embedded in the floors. With averages > 0 each bin is multiplied by a
// Gamma(K, 1/K) variate. Components: stokes, anti_stokes, floor (raw units).
SpectrumRecord synth_heterodyne_psd(double n, double omega_z, double gamma_eff,
                                    const FloorModel& floors, const SynthOptions& options = {});

struct SidebandFit {
    double gamma_s = 0.0;    // Stokes power within +-5 linewidths, shot-noise units x Hz
    double gamma_as = 0.0;
    double area_s = 0.0;     // full Lorentzian areas
    double area_as = 0.0;
    double area_s_error = 0.0;
    double area_as_error = 0.0;
    double difference = 0.0;  // area_s - area_as
    double difference_error = 0.0;
    double ratio = 0.0;
    double n_est = 0.0;
    bool n_defined = false;  // false when the Stokes area is below 3 standard errors
    double gamma_eff = 0.0;  // rad/s
    double one_over_f_amp = 0.0;
    double residual_gaussianity = 0.0;  // excess kurtosis of normalized residuals
    double reduced_chi2 = 0.0;
    int evaluations = 0;
};

// Whitens the spectrum with the known floors and fits
//   1 + A_S L(f; f_het - f_z, w) + A_aS L(f; f_het + f_z, w) + a / |f - f_het|
// with the offset fixed to one. averages sets the residual weights (0: unit).
SidebandFit fit_sidebands(const SpectrumRecord& psd, const FloorModel& floors, double omega_z,
                          int averages = 0);

// Detailed balance maps.
double sideband_ratio(double n);
double occupation_from_ratio(double r);

struct ThermometryEnsemble {
    std::vector<SidebandFit> fits;
    double n_mean = 0.0;
    double n_std = 0.0;
    double ratio_mean = 0.0;
    double ratio_std = 0.0;
};

// count noisy spectra with streams 0..count-1, fitted in parallel.
ThermometryEnsemble thermometry_ensemble(double n, double omega_z, double gamma_eff,
                                         const FloorModel& floors, SynthOptions options,
                                         int count);

}  // namespace levikal

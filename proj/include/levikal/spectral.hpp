#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace levikal {

struct SpectrumComponent {
    std::string name;
    std::vector<double> values;
};

struct SpectrumRecord {
    std::vector<double> freq;  // Hz, strictly increasing
    std::vector<double> psd;   // one-sided density
    std::string unit;
    std::string window;
    int n_segments = 0;
    std::vector<SpectrumComponent> components;

    std::size_t size() const { return freq.size(); }
    // Bin width for uniform grids (0 for fewer than two bins).
    double bin_width() const;
    const std::vector<double>* component(const std::string& name) const;
    void validate() const;
};

enum class WindowKind { Hann, Rectangular };

std::string window_name(WindowKind w);
std::vector<double> make_window(WindowKind w, std::size_t n);

// Welch estimate. White noise of variance s2 has level 2 s2 / f_s; the DC and
// Nyquist bins are not doubled, so sum(psd) * df equals the mean power.
SpectrumRecord welch_psd(const std::vector<double>& series, double sample_rate,
                         std::size_t segment_len, double overlap_fraction = 0.5,
                         WindowKind window = WindowKind::Hann, const std::string& unit = "");

// Integral of the density over [f_lo, f_hi] by bin sums.
double band_power(const SpectrumRecord& rec, double f_lo, double f_hi);

// Power of a spectral line at f: bins within +-half_width of the peak bin,
// minus the median level of the flanking bins [guard, guard + 20) away.
double tone_power(const SpectrumRecord& rec, double f, int half_width = 3, int guard = 10);

// Forward real FFT, n/2 + 1 bins.
std::vector<std::complex<double>> real_fft(const std::vector<double>& x);

// Long-format CSV: freq_hz, psd, component. The main trace uses component "total".
void write_spectrum_csv(const SpectrumRecord& rec, const std::string& path);

}  // namespace levikal

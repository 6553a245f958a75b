#pragma once

#include <cstddef>
#include <vector>

namespace levikal {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_standard_error = 0.0;
    double intercept_standard_error = 0.0;
    double r_squared = 0.0;
};

// Ordinary least squares y = intercept + slope x. Throws FitError when x has no spread.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct OriginFit {
    double slope = 0.0;
    double standard_error = 0.0;
};

// Least squares y = slope x.
OriginFit fit_through_origin(const std::vector<double>& x, const std::vector<double>& y);

struct Moments {
    double mean = 0.0;
    double stddev = 0.0;
    double excess_kurtosis = 0.0;
    double skewness = 0.0;
};

Moments sample_moments(const std::vector<double>& x);

struct WhitenessOptions {
    double confidence = 0.95;
    double sample_rate = 1.0;  // Hz, only used to map the band limits to bins
    // Band limits in Hz; band_hi <= 0 means up to Nyquist.
    double band_lo = 0.0;
    double band_hi = 0.0;
    // Normalizing variance; <= 0 uses the sample variance of the series.
    double reference_variance = 0.0;
};

struct WhitenessResult {
    std::vector<double> freq;             // Hz, bins inside the tested band
    std::vector<double> normalized_power;  // periodogram / variance, exponential(1) if white
    double lower = 0.0;
    double upper = 0.0;
    double fraction_inside = 0.0;
    std::size_t bins = 0;
    bool zero_variance = false;
    bool pass = false;
};

// Raw periodogram of the full series. Each bin of a white Gaussian sequence is
// exponentially distributed (chi-squared with 2 degrees of freedom over 2);
// the band covers the central `confidence` mass. Passes when the in-band
// fraction is within 0.02 of the confidence.
WhitenessResult innovation_whiteness(const std::vector<double>& epsilon,
                                     const WhitenessOptions& options = {});

struct GaussianityResult {
    std::vector<double> bin_centers;
    std::vector<double> pdf;          // histogram density
    std::vector<double> pdf_fit;      // fitted normal density
    std::vector<double> cdf;          // empirical cdf at bin upper edges
    std::vector<double> cdf_fit;
    double mean = 0.0;
    double sigma = 0.0;
    double excess_kurtosis = 0.0;
    double ks_statistic = 0.0;
    std::size_t samples = 0;
};

// 4th-order Butterworth highpass (two cascaded biquads from the bilinear
// transform); cutoff <= 0 disables the filter. The first 20 filter time
// constants are discarded as transient.
std::vector<double> butterworth_highpass(const std::vector<double>& x, double cutoff,
                                         double sample_rate, bool drop_transient = true);

GaussianityResult gaussianity_check(const std::vector<double>& epsilon, double highpass_cutoff,
                                    double sample_rate, int bins = 101);

double normal_cdf(double x);
// Inverse of the exponential(1) cdf.
double exponential_quantile(double p);

}  // namespace levikal

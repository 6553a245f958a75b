#include "levikal/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "levikal/error.hpp"
#include "levikal/spectral.hpp"

namespace levikal {

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) throw FitError("fit_line: need at least two paired points", {});
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw FitError("fit_line: rank-deficient abscissa", {});
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        sse += r * r;
    }
    f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    if (n > 2) {
        const double s2 = sse / static_cast<double>(n - 2);
        f.slope_standard_error = std::sqrt(s2 / sxx);
        f.intercept_standard_error = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
    }
    return f;
}

OriginFit fit_through_origin(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 1) throw FitError("fit_through_origin: no paired points", {});
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    if (!(sxx > 0.0)) throw FitError("fit_through_origin: rank-deficient abscissa", {});
    OriginFit f;
    f.slope = sxy / sxx;
    if (n > 1) {
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - f.slope * x[i];
            sse += r * r;
        }
        f.standard_error = std::sqrt(sse / static_cast<double>(n - 1) / sxx);
    }
    return f;
}

Moments sample_moments(const std::vector<double>& x) {
    if (x.empty()) throw ContractError("sample_moments: empty series");
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    Moments m;
    m.mean = mean;
    m.stddev = std::sqrt(m2);
    if (m2 > 0.0) {
        m.skewness = m3 / std::pow(m2, 1.5);
        m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }
    return m;
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double exponential_quantile(double p) {
    return -std::log1p(-p);
}

WhitenessResult innovation_whiteness(const std::vector<double>& epsilon,
                                     const WhitenessOptions& options) {
    if (epsilon.size() < (1u << 14)) throw ContractError("innovation_whiteness: need >= 2^14 samples");
    if (!(options.confidence > 0.0 && options.confidence < 1.0)) {
        throw InvalidParameter("innovation_whiteness: confidence must be in (0, 1)");
    }
    WhitenessResult res;
    const double tail = 0.5 * (1.0 - options.confidence);
    res.lower = exponential_quantile(tail);
    res.upper = exponential_quantile(1.0 - tail);

    const std::size_t n = epsilon.size();
    double mean = 0.0;
    for (double v : epsilon) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : epsilon) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    if (options.reference_variance > 0.0) var = options.reference_variance;
    if (!(var > 0.0)) {
        res.zero_variance = true;
        return res;
    }

    std::vector<double> centered(n);
    for (std::size_t i = 0; i < n; ++i) centered[i] = epsilon[i] - mean;
    const auto spec = real_fft(centered);
    const double fs = options.sample_rate;
    const double hi = options.band_hi > 0.0 ? options.band_hi : 0.5 * fs;
    std::size_t inside = 0;
    // DC is removed by centering and Nyquist has one degree of freedom; both are skipped.
    const std::size_t last = n % 2 == 0 ? spec.size() - 1 : spec.size();
    for (std::size_t k = 1; k < last; ++k) {
        const double f = static_cast<double>(k) * fs / static_cast<double>(n);
        if (f < options.band_lo || f > hi) continue;
        const double p = std::norm(spec[k]) / (static_cast<double>(n) * var);
        res.freq.push_back(f);
        res.normalized_power.push_back(p);
        if (p >= res.lower && p <= res.upper) ++inside;
    }
    res.bins = res.freq.size();
    if (res.bins == 0) throw InvalidParameter("innovation_whiteness: no bins in band");
    res.fraction_inside = static_cast<double>(inside) / static_cast<double>(res.bins);
    res.pass = std::abs(res.fraction_inside - options.confidence) <= 0.02;
    return res;
}

std::vector<double> butterworth_highpass(const std::vector<double>& x, double cutoff,
                                         double sample_rate, bool drop_transient) {
    if (!(cutoff > 0.0)) return x;
    if (!(cutoff < 0.5 * sample_rate)) throw InvalidParameter("highpass cutoff above Nyquist");
    const double w0 = 2.0 * std::numbers::pi * cutoff / sample_rate;
    const double cw = std::cos(w0);
    const double sw = std::sin(w0);
    std::vector<double> y = x;
    for (double q : {1.0 / (2.0 * std::cos(std::numbers::pi / 8.0)),
                     1.0 / (2.0 * std::cos(3.0 * std::numbers::pi / 8.0))}) {
        const double alpha = sw / (2.0 * q);
        const double a0 = 1.0 + alpha;
        const double b0 = 0.5 * (1.0 + cw) / a0;
        const double b1 = -(1.0 + cw) / a0;
        const double b2 = b0;
        const double a1 = -2.0 * cw / a0;
        const double a2 = (1.0 - alpha) / a0;
        double s1 = 0.0, s2 = 0.0;  // transposed direct form II
        for (double& v : y) {
            const double in = v;
            const double out = b0 * in + s1;
            s1 = b1 * in - a1 * out + s2;
            s2 = b2 * in - a2 * out;
            v = out;
        }
    }
    if (drop_transient) {
        const auto skip = static_cast<std::size_t>(std::ceil(20.0 * sample_rate / (2.0 * std::numbers::pi * cutoff)));
        if (skip >= y.size()) throw InvalidParameter("series shorter than the highpass transient");
        y.erase(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(skip));
    }
    return y;
}

GaussianityResult gaussianity_check(const std::vector<double>& epsilon, double highpass_cutoff,
                                    double sample_rate, int bins) {
    for (double v : epsilon) {
        if (!std::isfinite(v)) throw ContractError("gaussianity_check: non-finite sample");
    }
    if (bins < 3) throw InvalidParameter("gaussianity_check: bins must be >= 3");
    std::vector<double> y = butterworth_highpass(epsilon, highpass_cutoff, sample_rate);
    const Moments m = sample_moments(y);
    GaussianityResult res;
    res.samples = y.size();
    res.mean = m.mean;
    res.sigma = m.stddev;
    res.excess_kurtosis = m.excess_kurtosis;
    if (!(m.stddev > 0.0)) return res;

    const double lo = m.mean - 5.0 * m.stddev;
    const double width = 10.0 * m.stddev / bins;
    std::vector<double> counts(bins, 0.0);
    for (double v : y) {
        const long b = static_cast<long>(std::floor((v - lo) / width));
        if (b >= 0 && b < bins) counts[b] += 1.0;
    }
    const double n = static_cast<double>(y.size());
    double cum = 0.0;
    for (double v : y) cum += v < lo ? 1.0 : 0.0;
    const double inv_norm = 1.0 / (m.stddev * std::sqrt(2.0 * std::numbers::pi));
    for (int b = 0; b < bins; ++b) {
        const double center = lo + (b + 0.5) * width;
        const double z = (center - m.mean) / m.stddev;
        res.bin_centers.push_back(center);
        res.pdf.push_back(counts[b] / (n * width));
        res.pdf_fit.push_back(inv_norm * std::exp(-0.5 * z * z));
        cum += counts[b];
        res.cdf.push_back(cum / n);
        res.cdf_fit.push_back(normal_cdf((lo + (b + 1) * width - m.mean) / m.stddev));
    }
    // Kolmogorov-Smirnov distance against the fitted normal.
    std::vector<double> sorted = y;
    std::sort(sorted.begin(), sorted.end());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = normal_cdf((sorted[i] - m.mean) / m.stddev);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    res.ks_statistic = d;
    return res;
}

}  // namespace levikal

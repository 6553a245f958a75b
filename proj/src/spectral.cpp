#include "levikal/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "levikal/error.hpp"
#include "levikal/io.hpp"

namespace levikal {

namespace {

// FFTW planning is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

class RealFft {
public:
    explicit RealFft(std::size_t n) : n_(n) {
        in_ = fftw_alloc_real(n);
        out_ = fftw_alloc_complex(n / 2 + 1);
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
        if (!plan_) throw NumericError("fftw plan creation failed");
    }
    ~RealFft() {
        {
            std::lock_guard<std::mutex> lock(planner_mutex());
            fftw_destroy_plan(plan_);
        }
        fftw_free(in_);
        fftw_free(out_);
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    double* input() { return in_; }
    void execute() { fftw_execute(plan_); }
    std::complex<double> bin(std::size_t k) const { return {out_[k][0], out_[k][1]}; }
    double power(std::size_t k) const { return out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1]; }

private:
    std::size_t n_;
    double* in_ = nullptr;
    fftw_complex* out_ = nullptr;
    fftw_plan plan_ = nullptr;
};

}  // namespace

double SpectrumRecord::bin_width() const {
    return freq.size() < 2 ? 0.0 : freq[1] - freq[0];
}

const std::vector<double>* SpectrumRecord::component(const std::string& name) const {
    for (const auto& c : components) {
        if (c.name == name) return &c.values;
    }
    return nullptr;
}

void SpectrumRecord::validate() const {
    if (psd.size() != freq.size()) throw ContractError("spectrum length mismatch");
    for (std::size_t i = 0; i < freq.size(); ++i) {
        if (!(psd[i] >= 0.0) || !std::isfinite(psd[i])) {
            throw ContractError("spectrum density must be finite and nonnegative");
        }
        if (i && !(freq[i] > freq[i - 1])) throw ContractError("spectrum grid not increasing");
    }
    for (const auto& c : components) {
        if (c.values.size() != freq.size()) throw ContractError("component length mismatch");
    }
}

std::string window_name(WindowKind w) {
    return w == WindowKind::Hann ? "hann" : "rectangular";
}

std::vector<double> make_window(WindowKind w, std::size_t n) {
    std::vector<double> out(n, 1.0);
    if (w == WindowKind::Hann) {
        // Periodic Hann, which tiles exactly at 50% overlap.
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                          static_cast<double>(n));
        }
    }
    return out;
}

SpectrumRecord welch_psd(const std::vector<double>& series, double sample_rate,
                         std::size_t segment_len, double overlap_fraction, WindowKind window,
                         const std::string& unit) {
    if (series.empty()) throw ContractError("welch_psd: empty series");
    if (segment_len < 2 || segment_len > series.size()) {
        throw ContractError("welch_psd: segment_len must be in [2, series length]");
    }
    if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0)) {
        throw ContractError("welch_psd: overlap must be in [0, 1)");
    }
    if (!(sample_rate > 0.0)) throw ContractError("welch_psd: sample rate must be > 0");

    const std::size_t hop =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(segment_len * (1.0 - overlap_fraction))));
    const std::vector<double> w = make_window(window, segment_len);
    double w2 = 0.0;
    for (double v : w) w2 += v * v;

    const std::size_t bins = segment_len / 2 + 1;
    std::vector<double> acc(bins, 0.0);
    RealFft fft(segment_len);
    int segments = 0;
    for (std::size_t start = 0; start + segment_len <= series.size(); start += hop) {
        double* in = fft.input();
        for (std::size_t i = 0; i < segment_len; ++i) in[i] = series[start + i] * w[i];
        fft.execute();
        for (std::size_t k = 0; k < bins; ++k) acc[k] += fft.power(k);
        ++segments;
    }

    SpectrumRecord rec;
    rec.unit = unit;
    rec.window = window_name(window);
    rec.n_segments = segments;
    rec.freq.resize(bins);
    rec.psd.resize(bins);
    const double scale = 1.0 / (sample_rate * w2 * segments);
    for (std::size_t k = 0; k < bins; ++k) {
        rec.freq[k] = static_cast<double>(k) * sample_rate / static_cast<double>(segment_len);
        const bool edge = k == 0 || (segment_len % 2 == 0 && k == bins - 1);
        rec.psd[k] = acc[k] * scale * (edge ? 1.0 : 2.0);
    }
    return rec;
}

double band_power(const SpectrumRecord& rec, double f_lo, double f_hi) {
    const double df = rec.bin_width();
    double sum = 0.0;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        if (rec.freq[i] >= f_lo && rec.freq[i] <= f_hi) sum += rec.psd[i];
    }
    return sum * df;
}

double tone_power(const SpectrumRecord& rec, double f, int half_width, int guard) {
    const double df = rec.bin_width();
    if (!(df > 0.0)) throw ContractError("tone_power: spectrum needs a uniform grid");
    const long n = static_cast<long>(rec.size());
    const long k0 = std::lround((f - rec.freq.front()) / df);
    if (k0 - guard - 20 < 0 || k0 + guard + 20 >= n) {
        throw ContractError("tone_power: line too close to the spectrum edge");
    }
    std::vector<double> flank;
    for (long k = guard; k < guard + 20; ++k) {
        flank.push_back(rec.psd[k0 - k]);
        flank.push_back(rec.psd[k0 + k]);
    }
    std::nth_element(flank.begin(), flank.begin() + flank.size() / 2, flank.end());
    const double background = flank[flank.size() / 2];
    double sum = 0.0;
    for (long k = k0 - half_width; k <= k0 + half_width; ++k) sum += rec.psd[k] - background;
    return sum * df;
}

std::vector<std::complex<double>> real_fft(const std::vector<double>& x) {
    if (x.empty()) throw ContractError("real_fft: empty input");
    RealFft fft(x.size());
    std::copy(x.begin(), x.end(), fft.input());
    fft.execute();
    std::vector<std::complex<double>> out(x.size() / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = fft.bin(k);
    return out;
}

void write_spectrum_csv(const SpectrumRecord& rec, const std::string& path) {
    CsvWriter csv(path, {"freq_hz", "psd", "component"});
    auto emit = [&](const std::string& name, const std::vector<double>& values) {
        for (std::size_t i = 0; i < rec.size(); ++i) {
            csv.row_cells({format_double(rec.freq[i]), format_double(values[i]), name});
        }
    };
    emit("total", rec.psd);
    for (const auto& c : rec.components) {
        if (c.name != "total") emit(c.name, c.values);
    }
    csv.close();
}

}  // namespace levikal

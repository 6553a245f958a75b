#include "levikal/fixed_point.hpp"

#include <cmath>

#include "levikal/constants.hpp"
#include "levikal/error.hpp"

namespace levikal {

namespace {

double state_scale(const DigitalFilter& filter) {
    const double m = filter.b.cwiseAbs().maxCoeff();
    return m > 0.0 ? m : 1.0;
}

// Round-half-up arithmetic right shift.
__int128 round_shift(__int128 v, int shift) {
    if (shift <= 0) return v << (-shift);
    return (v + (static_cast<__int128>(1) << (shift - 1))) >> shift;
}

}  // namespace

void FixedPointConfig::validate() const {
    if (word_bits < 8 || word_bits > 48) throw InvalidParameter("word_bits must lie in [8, 48]");
    if (frac_bits < 1 || frac_bits >= word_bits) {
        throw InvalidParameter("frac_bits must lie in [1, word_bits)");
    }
    if (io_bits < 2 || io_bits > 32) throw InvalidParameter("io_bits must lie in [2, 32]");
    if (!(input_full_scale > 0.0) || !std::isfinite(input_full_scale)) {
        throw InvalidParameter("input_full_scale must be > 0");
    }
    if (!(output_full_scale > 0.0) || !std::isfinite(output_full_scale)) {
        throw InvalidParameter("output_full_scale must be > 0");
    }
}

FixedPointConfig default_fixed_point_config(const DiscreteModel& disc) {
    FixedPointConfig cfg;
    const GainSet low = synthesize(disc, constants::two_pi * 10e3);
    const GainSet high = synthesize(disc, constants::two_pi * 110e3);
    cfg.input_full_scale = 8.0 * low.measurement_std;
    cfg.output_full_scale = 6.0 * high.control_std;
    return cfg;
}

FixedPointLqg::FixedPointLqg(const DigitalFilter& filter, const FixedPointConfig& cfg)
    : cfg_(cfg), n_(filter.order()) {
    cfg_.validate();
    word_max_ = (static_cast<std::int64_t>(1) << (cfg_.word_bits - 1)) - 1;
    word_min_ = -(static_cast<std::int64_t>(1) << (cfg_.word_bits - 1));
    const double one = std::ldexp(1.0, cfg_.frac_bits);
    const double beta = state_scale(filter);
    auto quantize_coefficient = [&](double v, const char* what) {
        const double scaled = std::nearbyint(v * one);
        if (scaled > static_cast<double>(word_max_) || scaled < static_cast<double>(word_min_)) {
            throw InvalidParameter(std::string("fixed-point coefficient out of word range: ") + what);
        }
        return static_cast<std::int64_t>(scaled);
    };
    a_.resize(n_ * n_);
    b_.resize(n_);
    c_.resize(n_);
    const double c_scale = cfg_.input_full_scale * beta / cfg_.output_full_scale;
    for (Eigen::Index i = 0; i < n_; ++i) {
        for (Eigen::Index j = 0; j < n_; ++j) {
            a_[i * n_ + j] = quantize_coefficient(filter.a(i, j), "a");
        }
        b_[i] = quantize_coefficient(filter.b(i) / beta, "b");
        c_[i] = quantize_coefficient(filter.c(i) * c_scale, "c");
    }
    state_.assign(n_, 0);
    next_.assign(n_, 0);
}

std::int64_t FixedPointLqg::saturate(__int128 v, bool& flag) const {
    if (v > word_max_) {
        flag = true;
        return word_max_;
    }
    if (v < word_min_) {
        flag = true;
        return word_min_;
    }
    return static_cast<std::int64_t>(v);
}

std::int64_t FixedPointLqg::quantize_input(double zeta, bool* saturated) const {
    const double levels = std::ldexp(1.0, cfg_.io_bits - 1);
    const double code = std::nearbyint(zeta / cfg_.input_full_scale * levels);
    const double hi = levels - 1.0;
    const double lo = -levels;
    bool sat = false;
    double clamped = code;
    if (!(code <= hi)) {
        clamped = hi;
        sat = true;
    } else if (code < lo) {
        clamped = lo;
        sat = true;
    }
    if (saturated) *saturated = sat;
    return static_cast<std::int64_t>(clamped);
}

FixedPointStep FixedPointLqg::step(std::int64_t zeta_code) {
    FixedPointStep out;
    bool flag = false;
    const int f = cfg_.frac_bits;
    const int io_frac = cfg_.io_bits - 1;

    // Output register from the current state.
    __int128 acc = 0;
    for (Eigen::Index j = 0; j < n_; ++j) acc += static_cast<__int128>(c_[j]) * state_[j];
    const std::int64_t y = saturate(round_shift(acc, f), flag);
    out.internal = std::ldexp(static_cast<double>(y), -f) * cfg_.output_full_scale;

    // DAC quantization.
    const __int128 code = round_shift(y, f - io_frac);
    const std::int64_t code_max = (static_cast<std::int64_t>(1) << io_frac) - 1;
    const std::int64_t code_min = -(static_cast<std::int64_t>(1) << io_frac);
    if (code > code_max) {
        out.code = code_max;
        flag = true;
    } else if (code < code_min) {
        out.code = code_min;
        flag = true;
    } else {
        out.code = static_cast<std::int64_t>(code);
    }
    out.value = std::ldexp(static_cast<double>(out.code), -io_frac) * cfg_.output_full_scale;

    // State update with the ADC sample converted to the internal format.
    const __int128 x = round_shift(zeta_code, io_frac - f);
    for (Eigen::Index i = 0; i < n_; ++i) {
        __int128 s = static_cast<__int128>(b_[i]) * x;
        for (Eigen::Index j = 0; j < n_; ++j) {
            s += static_cast<__int128>(a_[i * n_ + j]) * state_[j];
        }
        next_[i] = saturate(round_shift(s, f), flag);
    }
    state_.swap(next_);

    out.overflow = flag;
    if (flag) ++overflow_count_;
    return out;
}

FixedPointStep FixedPointLqg::step_value(double zeta) {
    bool sat = false;
    const std::int64_t code = quantize_input(zeta, &sat);
    FixedPointStep out = step(code);
    if (sat) {
        if (!out.overflow) ++overflow_count_;
        out.overflow = true;
    }
    return out;
}

void FixedPointLqg::reset() {
    state_.assign(n_, 0);
    overflow_count_ = 0;
}

std::vector<double> float_reference_normalized(const DigitalFilter& filter,
                                               const FixedPointConfig& cfg,
                                               const std::vector<double>& zeta) {
    const double beta = state_scale(filter);
    const Eigen::VectorXd b = filter.b / beta;
    const Eigen::RowVectorXd c = filter.c * (cfg.input_full_scale * beta / cfg.output_full_scale);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(filter.order());
    std::vector<double> out(zeta.size());
    for (std::size_t k = 0; k < zeta.size(); ++k) {
        out[k] = c.dot(s);
        s = filter.a * s + b * zeta[k];
    }
    return out;
}

FixedPointRun run_fixed_point(const DigitalFilter& filter, const FixedPointConfig& cfg,
                              const std::vector<double>& zeta) {
    FixedPointLqg fx(filter, cfg);
    FixedPointRun run;
    run.output.resize(zeta.size());
    run.internal.resize(zeta.size());
    std::vector<double> quantized(zeta.size());
    std::vector<double> normalized(zeta.size());
    const double levels = std::ldexp(1.0, cfg.io_bits - 1);
    for (std::size_t k = 0; k < zeta.size(); ++k) {
        const std::int64_t code = fx.quantize_input(zeta[k]);
        quantized[k] = static_cast<double>(code) / levels;
        normalized[k] = zeta[k] / cfg.input_full_scale;
        const FixedPointStep st = fx.step_value(zeta[k]);
        run.output[k] = st.value;
        run.internal[k] = st.internal;
    }
    run.reference = float_reference_normalized(filter, cfg, quantized);
    run.reference_exact = float_reference_normalized(filter, cfg, normalized);
    for (auto& v : run.reference) v *= cfg.output_full_scale;
    for (auto& v : run.reference_exact) v *= cfg.output_full_scale;
    run.overflow_count = fx.overflow_count();
    run.overflow = run.overflow_count > 0;
    return run;
}

}  // namespace levikal

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "levikal/lqg.hpp"

namespace levikal {

struct FixedPointConfig {
    int word_bits = 32;
    int frac_bits = 24;
    int io_bits = 14;
    double input_full_scale = 1.0;   // zeta value mapped to the ADC full scale (zpf units)
    double output_full_scale = 1.0;  // u value mapped to the DAC full scale (p_zpf / s)

    void validate() const;
};

// Defaults for a model: input range of 8 standard deviations of the measurement
// under the 2 pi x 10 kHz loop, output range of 6 standard deviations of the
// control signal under the 2 pi x 110 kHz loop.
FixedPointConfig default_fixed_point_config(const DiscreteModel& disc);

struct FixedPointStep {
    std::int64_t code = 0;   // DAC code in [-2^(io-1), 2^(io-1) - 1]
    double value = 0.0;      // dequantized output, control units
    double internal = 0.0;   // output before DAC quantization, control units
    bool overflow = false;   // any saturation during this step
};

// Two's-complement emulation of the LQG state-space realization. The state is
// stored scaled by the largest observer-gain entry so that all coefficients
// use the word range evenly. Products are accumulated exactly and rounded once
// per state update; every store saturates.
class FixedPointLqg {
public:
    FixedPointLqg(const DigitalFilter& filter, const FixedPointConfig& cfg);

    // ADC: saturating quantization of a measurement to io_bits.
    std::int64_t quantize_input(double zeta, bool* saturated = nullptr) const;
    FixedPointStep step(std::int64_t zeta_code);
    FixedPointStep step_value(double zeta);

    void reset();
    std::uint64_t overflow_count() const { return overflow_count_; }
    const FixedPointConfig& config() const { return cfg_; }

private:
    std::int64_t saturate(__int128 v, bool& flag) const;

    FixedPointConfig cfg_;
    Eigen::Index n_ = 0;
    std::vector<std::int64_t> a_;  // row-major n x n
    std::vector<std::int64_t> b_;
    std::vector<std::int64_t> c_;
    std::vector<std::int64_t> state_;
    std::vector<std::int64_t> next_;
    std::int64_t word_max_ = 0;
    std::int64_t word_min_ = 0;
    std::uint64_t overflow_count_ = 0;
};

// Floating-point run of the same scaled realization on normalized input,
// producing normalized output (units of the output full scale).
std::vector<double> float_reference_normalized(const DigitalFilter& filter,
                                               const FixedPointConfig& cfg,
                                               const std::vector<double>& zeta);

struct FixedPointRun {
    std::vector<double> output;           // dequantized, control units
    std::vector<double> internal;         // pre-DAC, control units
    std::vector<double> reference;        // floating realization on the quantized input
    std::vector<double> reference_exact;  // floating realization on the raw input
    std::uint64_t overflow_count = 0;
    bool overflow = false;
};

FixedPointRun run_fixed_point(const DigitalFilter& filter, const FixedPointConfig& cfg,
                              const std::vector<double>& zeta);

}  // namespace levikal

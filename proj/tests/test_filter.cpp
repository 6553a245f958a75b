#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "levikal/constants.hpp"
#include "levikal/error.hpp"
#include "levikal/filter.hpp"
#include "levikal/fixed_point.hpp"
#include "levikal/lqg.hpp"
#include "levikal/params.hpp"
#include "levikal/rng.hpp"
#include "levikal/sim.hpp"

using namespace levikal;
using constants::two_pi;

namespace {

std::shared_ptr<const DiscreteModel> model() {
    static const auto m = [] {
        const ExperimentParams p = reference_parameters();
        const NoiseBudget b = identified_budget(p, reference_measured_noise());
        return std::make_shared<const DiscreteModel>(
            discretize(build_continuous(b, p.omega_z, b.gamma_th), 32e-9));
    }();
    return m;
}

std::shared_ptr<const GainSet> gains(double g) {
    return std::make_shared<const GainSet>(synthesize(*model(), g));
}

std::vector<double> measurement(double g, std::int64_t steps, std::uint64_t stream) {
    const GainSet gs = synthesize(*model(), g);
    SimConfig s;
    s.seed = 11;
    s.stream = stream;
    s.steps = steps;
    s.initial = InitialState::stationary();
    return simulate_measurement(*model(), &gs, s);
}

double normalized_rms(const FixedPointRun& r, const FixedPointConfig& c) {
    double acc = 0.0;
    for (std::size_t i = 0; i < r.internal.size(); ++i) {
        const double e = (r.internal[i] - r.reference[i]) / c.output_full_scale;
        acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(r.internal.size()));
}

}  // namespace

TEST(Filter, StepMatchesPredictorFormula) {
    FilterState s = make_filter_state(model(), gains(two_pi * 40e3));
    s.z_hat << 0.3, -1.2;
    const Eigen::VectorXd before = s.z_hat;
    const KalmanStep k = kalman_step(s, 0.7, 2.5);
    const DiscreteModel& m = *model();
    const double eps = 0.7 - before(0);
    const Eigen::VectorXd expect = m.a_d * before + m.b_d * 2.5 + s.gains->k_kal * eps;
    EXPECT_DOUBLE_EQ(k.innovation, eps);
    EXPECT_LT((k.state.z_hat - expect).norm(), 1e-15 * expect.norm());
    EXPECT_EQ(k.state.step_index, 1);
    EXPECT_EQ(s.step_index, 0);  // input state untouched

    FilterState t = s;
    EXPECT_DOUBLE_EQ(kalman_step_inplace(t, 0.7, 2.5), eps);
    EXPECT_EQ(t.z_hat, k.state.z_hat);
}

TEST(Filter, ControlIsCertaintyEquivalent) {
    FilterState s = make_filter_state(model(), gains(two_pi * 40e3));
    s.z_hat << 2.0, 1.0;
    EXPECT_DOUBLE_EQ(lqr_control(s), -s.gains->k_lqr.dot(s.z_hat));
    FixedPointConfig fx;
    fx.output_full_scale = 1e-3;
    FilterState c = make_filter_state(model(), gains(two_pi * 40e3), fx);
    c.z_hat = s.z_hat;
    EXPECT_DOUBLE_EQ(std::abs(lqr_control(c)), 1e-3);
}

TEST(Filter, EstimateConvergesWithoutNoise) {
    const auto g = gains(two_pi * 40e3);
    FilterState s = make_filter_state(model(), g);
    const DiscreteModel& m = *model();
    Eigen::VectorXd x(2);
    x << 40.0, -25.0;
    for (int k = 0; k < 20000; ++k) {
        const double u = lqr_control(s);
        kalman_step_inplace(s, m.c.dot(x), u);
        x = m.a_d * x + m.b_d * u;
    }
    EXPECT_LT((s.z_hat - x).norm(), 1e-6);
}

TEST(Filter, ContractViolations) {
    FilterState s = make_filter_state(model(), gains(two_pi * 40e3));
    s.z_hat = Eigen::VectorXd::Zero(3);
    EXPECT_THROW(kalman_step(s, 0.0, 0.0), ContractError);
    FilterState empty;
    EXPECT_THROW(lqr_control(empty), ContractError);
    FilterState no_fx = make_filter_state(model(), gains(two_pi * 40e3));
    EXPECT_THROW(make_fixed_point_filter(no_fx), ContractError);
}

TEST(FixedPoint, ConfigValidation) {
    FixedPointConfig c;
    EXPECT_NO_THROW(c.validate());
    c.frac_bits = c.word_bits;
    EXPECT_THROW(c.validate(), InvalidParameter);
    c = FixedPointConfig{};
    c.io_bits = 1;
    EXPECT_THROW(c.validate(), InvalidParameter);
    c = FixedPointConfig{};
    c.input_full_scale = 0.0;
    EXPECT_THROW(c.validate(), InvalidParameter);
}

TEST(FixedPoint, InputQuantizationSaturates) {
    const auto g = gains(two_pi * 40e3);
    FixedPointConfig c = default_fixed_point_config(*model());
    FixedPointLqg f(lqg_transfer_function(*model(), *g), c);
    bool sat = false;
    const std::int64_t top = (std::int64_t{1} << (c.io_bits - 1)) - 1;
    EXPECT_EQ(f.quantize_input(100.0 * c.input_full_scale, &sat), top);
    EXPECT_TRUE(sat);
    EXPECT_EQ(f.quantize_input(-100.0 * c.input_full_scale, &sat), -top - 1);
    EXPECT_TRUE(sat);
    EXPECT_EQ(f.quantize_input(0.0, &sat), 0);
    EXPECT_FALSE(sat);
}

TEST(FixedPoint, ConvergesToFloatingReference) {
    const double g = two_pi * 40e3;
    const DigitalFilter filt = lqg_transfer_function(*model(), *gains(g));
    const std::vector<double> zeta = measurement(g, 200000, 1);
    const FixedPointConfig base = default_fixed_point_config(*model());
    double previous = 1.0;
    for (int frac : {12, 16, 20, 24}) {
        FixedPointConfig c = base;
        c.word_bits = frac + 6;
        c.frac_bits = frac;
        const FixedPointRun r = run_fixed_point(filt, c, zeta);
        const double rms = normalized_rms(r, c);
        EXPECT_LT(rms, previous) << "frac " << frac;
        previous = rms;
        EXPECT_EQ(r.overflow_count, 0u);
    }
    EXPECT_LT(previous, 1e-6);
}

TEST(FixedPoint, StepValueMatchesBatchRun) {
    const double g = two_pi * 40e3;
    const DigitalFilter filt = lqg_transfer_function(*model(), *gains(g));
    const FixedPointConfig c = default_fixed_point_config(*model());
    const std::vector<double> zeta = measurement(g, 5000, 2);
    const FixedPointRun r = run_fixed_point(filt, c, zeta);
    FixedPointLqg f(filt, c);
    for (std::size_t i = 0; i < zeta.size(); ++i) {
        const FixedPointStep s = f.step_value(zeta[i]);
        ASSERT_DOUBLE_EQ(s.value, r.output[i]);
    }
    f.reset();
    EXPECT_EQ(f.overflow_count(), 0u);
    EXPECT_DOUBLE_EQ(f.step_value(zeta[0]).value, r.output[0]);
}

TEST(FixedPoint, QuantizedReferenceCloserThanRaw) {
    const double g = two_pi * 40e3;
    const DigitalFilter filt = lqg_transfer_function(*model(), *gains(g));
    const FixedPointConfig c = default_fixed_point_config(*model());
    const std::vector<double> zeta = measurement(g, 50000, 3);
    const FixedPointRun r = run_fixed_point(filt, c, zeta);
    double d_q = 0.0, d_raw = 0.0;
    for (std::size_t i = 0; i < zeta.size(); ++i) {
        d_q += std::pow(r.internal[i] - r.reference[i], 2);
        d_raw += std::pow(r.internal[i] - r.reference_exact[i], 2);
    }
    EXPECT_LT(d_q, d_raw);
}

TEST(FixedPoint, OverflowFlagUnderStress) {
    const double g = two_pi * 40e3;
    const DigitalFilter filt = lqg_transfer_function(*model(), *gains(g));
    FixedPointConfig c = default_fixed_point_config(*model());
    c.output_full_scale *= 1e-3;
    const FixedPointRun r = run_fixed_point(filt, c, measurement(g, 20000, 4));
    EXPECT_TRUE(r.overflow);
    EXPECT_GT(r.overflow_count, 0u);
}

TEST(FixedPoint, DefaultsMatchLoopStatistics) {
    const FixedPointConfig c = default_fixed_point_config(*model());
    EXPECT_NEAR(c.input_full_scale, 8.0 * synthesize(*model(), two_pi * 10e3).measurement_std, 1e-9 * c.input_full_scale);
    EXPECT_NEAR(c.output_full_scale, 6.0 * synthesize(*model(), two_pi * 110e3).control_std,
                1e-9 * c.output_full_scale);
}

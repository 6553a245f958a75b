#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>

#include "levikal/constants.hpp"
#include "levikal/error.hpp"
#include "levikal/lqg.hpp"
#include "levikal/params.hpp"
#include "levikal/rng.hpp"
#include "levikal/sim.hpp"

using namespace levikal;
using constants::two_pi;

namespace {

const NoiseBudget& budget() {
    static const NoiseBudget b = identified_budget(reference_parameters(), reference_measured_noise());
    return b;
}

const DiscreteModel& model() {
    static const DiscreteModel d =
        discretize(build_continuous(budget(), reference_parameters().omega_z, budget().gamma_th), 32e-9);
    return d;
}

SimConfig config(std::int64_t steps, std::uint64_t stream = 0) {
    SimConfig s;
    s.seed = 3;
    s.stream = stream;
    s.steps = steps;
    s.initial = InitialState::stationary();
    return s;
}

}  // namespace

TEST(Rng, PhiloxKnownAnswers) {
    using B = Philox4x32::Block;
    EXPECT_EQ(Philox4x32::encrypt(B{0, 0, 0, 0}, {0, 0}),
              (B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(Philox4x32::encrypt(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                                  {0xffffffff, 0xffffffff}),
              (B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(Philox4x32::encrypt(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                                  {0xa4093822, 0x299f31d0}),
              (B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Rng, NormalMoments) {
    Philox4x32 rng(9, 4);
    const int n = 400000;
    double s1 = 0.0, s2 = 0.0, s4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        s1 += x;
        s2 += x * x;
        s4 += x * x * x * x;
    }
    EXPECT_NEAR(s1 / n, 0.0, 5.0 / std::sqrt(n));
    EXPECT_NEAR(s2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(s4 / n, 3.0, 5.0 * std::sqrt(96.0 / n));
}

TEST(Rng, UniformOpenInterval) {
    Philox4x32 rng(1, 0);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(Sim, OccupationSampleConvention) {
    EXPECT_DOUBLE_EQ(occupation_sample(1.0, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(occupation_sample(3.0, 1.0), 2.0);
}

TEST(Sim, DeterministicPerSeedAndStream) {
    const GainSet g = synthesize(model(), two_pi * 40e3);
    const Trajectory a = simulate_closed_loop(model(), g, config(5000));
    const Trajectory b = simulate_closed_loop(model(), g, config(5000));
    const Trajectory c = simulate_closed_loop(model(), g, config(5000, 1));
    EXPECT_EQ(a.zeta, b.zeta);
    EXPECT_EQ(a.epsilon, b.epsilon);
    EXPECT_NE(a.zeta, c.zeta);
}

TEST(Sim, CovarianceMatchesLyapunov) {
    for (double gain : {two_pi * 2e3, two_pi * 110e3}) {
        const GainSet g = synthesize(model(), gain);
        const ClosedLoopMoments m = closed_loop_moments(model(), g, config(2'000'000, 7), 100);
        for (int i = 0; i < 2; ++i) {
            const double z = (m.covariance(i, i) - g.sigma_closed_ss(i, i)) / m.standard_error(i, i);
            EXPECT_LT(std::abs(z), 4.0) << "gain " << gain << " entry " << i;
        }
        const double inn = g.measurement_std * g.measurement_std;
        EXPECT_NEAR(m.measurement_variance / inn, 1.0, 4.0 * m.measurement_standard_error / inn);
    }
}

TEST(Sim, InnovationVarianceMatchesPrediction) {
    const GainSet g = synthesize(model(), two_pi * 40e3);
    const ClosedLoopMoments m = closed_loop_moments(model(), g, config(1'000'000, 8), 50);
    const double predicted = model().c.dot(g.sigma_cond_ss * model().c.transpose()) + model().r_hat;
    EXPECT_NEAR(m.innovation_variance / predicted, 1.0, 4.0 * m.innovation_standard_error / predicted);
}

TEST(Sim, NoiseFreeMeasurementIsPosition) {
    SimConfig s = config(1000);
    s.initial = InitialState::vector((Eigen::VectorXd(2) << 5.0, 0.0).finished());
    s.measurement_noise = false;
    s.process_noise = false;
    const Trajectory t = simulate_closed_loop(model(), nullptr, s);
    for (std::size_t i = 0; i < t.size(); ++i) {
        ASSERT_DOUBLE_EQ(t.zeta[i], t.z_true[i]);
        ASSERT_EQ(t.u[i], 0.0);
    }
    // Free oscillation: z(t) = 5 cos(Omega t) up to gas damping.
    const double w = model().omega_z;
    EXPECT_NEAR(t.z_true[999], 5.0 * std::cos(w * t.time[999]), 1e-6);
}

TEST(Sim, FeedbackScheduleGatesControl) {
    const GainSet g = synthesize(model(), two_pi * 40e3);
    SimConfig s = config(3000);
    s.feedback = {{0, false}, {1000, true}, {2000, false}};
    const Trajectory t = simulate_closed_loop(model(), g, s);
    for (int k = 0; k < 1000; ++k) ASSERT_EQ(t.u[k], 0.0);
    int nonzero = 0;
    for (int k = 1000; k < 2000; ++k) nonzero += t.u[k] != 0.0;
    EXPECT_EQ(nonzero, 1000);
    for (int k = 2000; k < 3000; ++k) ASSERT_EQ(t.u[k], 0.0);
}

TEST(Sim, RecordStride) {
    const GainSet g = synthesize(model(), two_pi * 40e3);
    SimConfig s = config(1000);
    const Trajectory full = simulate_closed_loop(model(), g, s);
    s.record_stride = 10;
    const Trajectory sub = simulate_closed_loop(model(), g, s);
    ASSERT_EQ(sub.size(), 100u);
    for (std::size_t i = 0; i < sub.size(); ++i) EXPECT_DOUBLE_EQ(sub.zeta[i], full.zeta[10 * i]);
}

TEST(Sim, MismatchWithIdenticalModelsIsClosedLoop) {
    const GainSet g = synthesize(model(), two_pi * 40e3);
    const Trajectory a = simulate_closed_loop(model(), g, config(2000));
    const Trajectory b = simulate_mismatched(model(), model(), g, config(2000));
    EXPECT_EQ(a.zeta, b.zeta);
    EXPECT_EQ(a.u, b.u);
}

TEST(Sim, ThermalInitialOccupation) {
    // Reheating from n0 with negligible duration recovers the initial mean.
    const ExperimentParams p = reference_parameters();
    const double period = two_pi / p.omega_z;
    const DiscreteModel coarse =
        discretize(build_continuous(budget(), p.omega_z, budget().gamma_th), period / 8.0);
    SimConfig s;
    s.seed = 4;
    const ReheatingResult r = simulate_reheating(coarse, 5.0, 20.0 * period, 4000, s);
    EXPECT_NEAR(r.n0_fit / 5.0, 1.0, 0.05);
}

TEST(Sim, ReheatingRateMatchesDecoherence) {
    const ExperimentParams p = reference_parameters();
    const double period = two_pi / p.omega_z;
    const DiscreteModel coarse =
        discretize(build_continuous(budget(), p.omega_z, budget().gamma_th), period / 8.0);
    SimConfig s;
    s.seed = 5;
    const ReheatingResult r = simulate_reheating(coarse, 1.0, 1e-3, 400, s);
    const double model_rate = budget().gamma_ba_rate + budget().gamma_th_rate;
    EXPECT_NEAR(r.rate / model_rate, 1.0, 0.15);
    EXPECT_GT(r.r_squared, 0.99);
    EXPECT_THROW(simulate_reheating(coarse, 1.0, 2.0 * period, 10, s), ProtocolError);
}

TEST(Sim, EffectiveLinewidthTracksGain) {
    for (double g : {two_pi * 2e3, two_pi * 10e3}) {
        const GainSet gs = synthesize(model(), g);
        EXPECT_NEAR(effective_linewidth(model(), &gs) / g, 1.0, 0.05);
    }
    EXPECT_NEAR(effective_linewidth(model(), nullptr) / budget().gamma_th, 1.0, 1e-3);
}

TEST(Sim, DrivenResponseMatchesSusceptibility) {
    const ExperimentParams p = reference_parameters();
    const double gamma = two_pi * 10e3;
    const DiscreteModel d = discretize(build_continuous(budget(), p.omega_z, gamma), 32e-9);
    const double wd = two_pi * 250e3;
    const double f0 = 1e-18;
    SimConfig s;
    s.steps = 400000;
    s.process_noise = false;
    s.measurement_noise = false;
    const Trajectory t = simulate_drive_response(d, nullptr, wd, f0, s);
    // Amplitude from the last 100000 samples.
    double peak = 0.0;
    for (std::size_t i = t.size() - 100000; i < t.size(); ++i) peak = std::max(peak, std::abs(t.z_true[i]));
    const std::complex<double> chi =
        1.0 / (p.mass * std::complex<double>(p.omega_z * p.omega_z - wd * wd, gamma * wd));
    EXPECT_NEAR(peak * budget().z_zpf / (std::abs(chi) * f0), 1.0, 1e-3);
    EXPECT_THROW(simulate_drive_response(d, nullptr, p.omega_z + 2.0 * gamma, f0, s), ProtocolError);
}

TEST(Sim, ConfigErrors) {
    SimConfig s;
    s.steps = 0;
    EXPECT_THROW(s.validate(), InvalidParameter);
    s.steps = 10;
    s.record_stride = 0;
    EXPECT_THROW(s.validate(), InvalidParameter);
    s.record_stride = 1;
    s.feedback = {{10, true}, {5, false}};
    EXPECT_THROW(s.validate(), InvalidParameter);
    SimConfig st = config(10);
    EXPECT_THROW(simulate_closed_loop(model(), nullptr, st), ContractError);
    SimConfig v = config(10);
    v.initial = InitialState::vector(Eigen::VectorXd::Zero(3));
    EXPECT_THROW(simulate_closed_loop(model(), nullptr, v), ContractError);
    SimConfig ts = config(10);
    ts.t_s = 1e-6;
    EXPECT_THROW(simulate_closed_loop(model(), nullptr, ts), ContractError);
}

TEST(Sim, TrajectoryWriters) {
    const GainSet g = synthesize(model(), two_pi * 40e3);
    const Trajectory t = simulate_closed_loop(model(), g, config(50));
    const auto dir = std::filesystem::temp_directory_path() / "levikal_test_sim";
    std::filesystem::create_directories(dir);
    const std::string csv = (dir / "t.csv").string();
    const std::string bin = (dir / "t.bin").string();
    write_trajectory_csv(t, csv);
    write_trajectory_binary(t, bin);
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "time_s,z_true_zpf,p_true_zpf,zeta_zpf,z_hat_zpf,p_hat_zpf,u_pzpf_per_s,epsilon_zpf");
    EXPECT_EQ(std::filesystem::file_size(bin), 50u * 8u * 8u);
    std::ifstream b(bin, std::ios::binary);
    double first[8];
    b.read(reinterpret_cast<char*>(first), sizeof first);
    EXPECT_EQ(first[3], t.zeta[0]);
    EXPECT_EQ(first[6], t.u[0]);
    std::filesystem::remove_all(dir);
}

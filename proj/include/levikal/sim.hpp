#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "levikal/fixed_point.hpp"
#include "levikal/lqg.hpp"
#include "levikal/statespace.hpp"

namespace levikal {

struct InitialState {
    enum class Kind { Vector, Thermal, Stationary };
    Kind kind = Kind::Thermal;
    Eigen::VectorXd x;  // Vector: true state; estimate starts at zero
    double n0 = 0.0;    // Thermal: occupation of the mechanical states

    static InitialState vector(Eigen::VectorXd x0);
    static InitialState thermal(double n0);
    // Joint (state, estimate) draw from the closed-loop steady state.
    static InitialState stationary();
};

struct FeedbackEvent {
    std::int64_t step = 0;
    bool on = true;
};

struct SimConfig {
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;
    std::int64_t steps = 1;
    double t_s = 0.0;  // 0 means take the model's sample period
    std::int64_t record_stride = 1;
    InitialState initial = InitialState::thermal(0.0);
    // Feedback schedule; empty means on for the whole run when gains are given.
    std::vector<FeedbackEvent> feedback;
    std::optional<FixedPointConfig> fixed_point;
    bool process_noise = true;
    bool measurement_noise = true;

    void validate() const;
};

struct Trajectory {
    std::vector<double> time;
    std::vector<double> z_true;
    std::vector<double> p_true;
    std::vector<double> zeta;
    std::vector<double> z_hat;
    std::vector<double> p_hat;
    std::vector<double> u;
    std::vector<double> epsilon;
    std::uint64_t overflow_count = 0;

    std::size_t size() const { return time.size(); }
};

// Closed-loop run. gains may be null for open-loop runs (no filter, u = 0).
Trajectory simulate_closed_loop(const DiscreteModel& disc, const GainSet* gains,
                                const SimConfig& cfg);
inline Trajectory simulate_closed_loop(const DiscreteModel& disc, const GainSet& gains,
                                       const SimConfig& cfg) {
    return simulate_closed_loop(disc, &gains, cfg);
}

// Plant simulated with one model while the filter and controller use another
// (same dimension and sample period), for model-mismatch studies.
Trajectory simulate_mismatched(const DiscreteModel& plant, const DiscreteModel& filter_model,
                               const GainSet& gains, const SimConfig& cfg);

struct ClosedLoopMoments {
    Eigen::MatrixXd covariance;      // mean of x x^T over the run
    Eigen::MatrixXd standard_error;  // batch-means standard error per entry
    double innovation_variance = 0.0;
    double innovation_standard_error = 0.0;
    double measurement_variance = 0.0;  // mean zeta^2
    double measurement_standard_error = 0.0;
    double occupation = 0.0;             // mean of (z^2 + p^2)/4 - 1/2
    std::int64_t steps = 0;
    int batches = 0;
};

// Streaming second moments of the true state without storing the trajectory.
ClosedLoopMoments closed_loop_moments(const DiscreteModel& disc, const GainSet& gains,
                                      const SimConfig& cfg, int batches = 100);

struct ReheatingResult {
    std::vector<double> time;    // window centers, s
    std::vector<double> mean_n;  // ensemble mean occupation per window
    std::vector<std::vector<double>> per_run;
    double rate = 0.0;           // fitted slope, quanta per second
    double rate_standard_error = 0.0;
    double n0_fit = 0.0;
    double r_squared = 0.0;
    int window_steps = 0;
};

// Feedback-off heating from thermal states of occupation n0. The model may be
// discretized at a coarse step; the energy window spans one oscillation period.
ReheatingResult simulate_reheating(const DiscreteModel& disc, double n0, double duration,
                                   int ensemble, const SimConfig& cfg);

// Adds the force f_d0 sin(omega_d t) in newtons to the momentum update.
// gains may be null (open loop).
Trajectory simulate_drive_response(const DiscreteModel& disc, const GainSet* gains,
                                   double omega_d, double f_d0, const SimConfig& cfg);

// Measurement record zeta only (zpf units) at record_stride, optionally with
// the drive of simulate_drive_response (f_d0 = 0 disables it).
std::vector<double> simulate_measurement(const DiscreteModel& disc, const GainSet* gains,
                                         const SimConfig& cfg, double omega_d = 0.0,
                                         double f_d0 = 0.0);

// Effective energy damping rate of the dominant mechanical pole pair, rad/s.
double effective_linewidth(const DiscreteModel& disc, const GainSet* gains);

// Energy estimate per sample in quanta: (z^2 + p^2)/4 - 1/2.
double occupation_sample(double z, double p);

void write_trajectory_csv(const Trajectory& traj, const std::string& path);
// Little-endian float64, row-major, 8 columns in the CSV order, no header.
void write_trajectory_binary(const Trajectory& traj, const std::string& path);

}  // namespace levikal

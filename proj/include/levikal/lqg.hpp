#pragma once

#include <vector>

#include <Eigen/Dense>

#include "levikal/params.hpp"
#include "levikal/statespace.hpp"

namespace levikal {

struct LqrResult {
    Eigen::RowVectorXd k;
    Eigen::MatrixXd p;
};

struct KalmanResult {
    Eigen::VectorXd k;      // predictor-form observer gain
    Eigen::MatrixXd sigma;  // a priori steady-state covariance
};

struct GainSet {
    Eigen::RowVectorXd k_lqr;
    Eigen::VectorXd k_kal;
    Eigen::MatrixXd sigma_lqr_ss;
    Eigen::MatrixXd sigma_cond_ss;
    Eigen::MatrixXd sigma_closed_ss;
    Eigen::MatrixXd sigma_joint;  // (true state, estimate) joint covariance
    double g_fb = 0.0;
    double n_predicted = 0.0;
    double n_conditional = 0.0;  // occupation of the conditional covariance alone
    double delta_p = 0.0;
    double control_std = 0.0;    // steady-state std of u, p_zpf per second
    double measurement_std = 0.0;
    double closed_loop_radius = 0.0;
};

// LQR weights Q = diag(omega_z / 2) on the mechanical states, r = omega_z / g_fb^2.
Eigen::MatrixXd lqr_state_weight(const DiscreteModel& disc);
double lqr_control_weight(const DiscreteModel& disc, double g_fb);

LqrResult lqr_gain(const DiscreteModel& disc, double g_fb);
LqrResult lqr_gain_weights(const DiscreteModel& disc, const Eigen::MatrixXd& q, double r);
KalmanResult kalman_gain(const DiscreteModel& disc);

// Joint closed-loop dynamics [[A, -b k], [k_kal c, A - b k - k_kal c]].
Eigen::MatrixXd closed_loop_dynamics(const DiscreteModel& disc, const GainSet& gains);

// Fills sigma_joint, sigma_closed_ss, n_predicted, delta_p, control_std and
// returns sigma_closed_ss. Throws StabilityError for an unstable loop.
Eigen::MatrixXd closed_loop_covariance(const DiscreteModel& disc, GainSet& gains);

// LQR + Kalman + closed-loop covariance for one gain.
GainSet synthesize(const DiscreteModel& disc, double g_fb);

// Occupation of a covariance in zero-point units: tr(mechanical block)/4 - 1/2.
double occupation_from_covariance(const Eigen::MatrixXd& sigma, int mechanical_states = 2);

struct DigitalFilter {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    Eigen::RowVectorXd c;
    // Strictly proper rational form in z^-1:
    //   u_k = sum_{i=1..n} num[i] zeta_{k-i} - sum_{i=1..n} den[i] u_{k-i},  den[0] = 1.
    Eigen::VectorXd num;
    Eigen::VectorXd den;

    Eigen::Index order() const { return a.rows(); }
};

DigitalFilter lqg_transfer_function(const DiscreteModel& disc, const GainSet& gains);
Eigen::VectorXd apply_state_space(const DigitalFilter& filter, const Eigen::VectorXd& input);
Eigen::VectorXd apply_rational(const DigitalFilter& filter, const Eigen::VectorXd& input);
double dc_gain(const DigitalFilter& filter);

struct SweepPoint {
    double g_fb = 0.0;
    double n_predicted = 0.0;
    double n_conditional = 0.0;
    double delta_p = 0.0;
    double sigma_z = 0.0;
    double sigma_p = 0.0;
    double control_std = 0.0;
};

std::vector<double> log_gain_grid(double lo, double hi, int count);
// Default grid: 2 pi (1 ... 300) kHz, 60 logarithmic points.
std::vector<double> default_gain_grid();
std::vector<SweepPoint> occupation_sweep(const DiscreteModel& disc, const std::vector<double>& grid);

struct DerivativeBaseline {
    double z_variance = 0.0;   // m^2
    double n_equivalent = 0.0;
};

// Velocity-damping feedback with dimensionless gain g_fb (damping multiplied by 1 + g_fb).
DerivativeBaseline derivative_feedback_baseline(const NoiseBudget& budget, double omega_z,
                                                double gamma, double g_fb);

}  // namespace levikal

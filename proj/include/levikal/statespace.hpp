#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "levikal/params.hpp"

namespace levikal {

struct StateLabel {
    std::string name;
    std::string unit;
};

// Continuous linear-Gaussian model in zero-point units:
//   dx = (a x + b u) dt + g dW,  E[dW dW^T] = q dt   (q: two-sided intensity)
//   zeta = c x + nu,             nu one-sided PSD r (per Hz)
// For the mechanical model x = (z / z_zpf, p / p_zpf) so that the ground state
// covariance is the identity.
struct ContinuousModel {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    Eigen::MatrixXd g;
    Eigen::RowVectorXd c;
    Eigen::MatrixXd q;
    double r = 0.0;
    Eigen::VectorXd cross;  // process/measurement cross-correlation, zero here
    std::vector<StateLabel> labels;
    int mechanical_states = 2;  // leading states that carry oscillator energy
    double omega_z = 0.0;
    double z_zpf = 1.0;
    double p_zpf = 1.0;

    Eigen::Index states() const { return a.rows(); }
    void validate() const;
};

struct DiscreteModel {
    Eigen::MatrixXd a_d;
    Eigen::VectorXd b_d;
    Eigen::MatrixXd g_d;
    Eigen::RowVectorXd c;
    Eigen::MatrixXd q_hat;  // per-sample process covariance
    double r_hat = 0.0;     // per-sample measurement variance
    double t_s = 0.0;
    int mechanical_states = 2;
    double omega_z = 0.0;
    double z_zpf = 1.0;
    double p_zpf = 1.0;
    std::vector<StateLabel> labels;

    Eigen::Index states() const { return a_d.rows(); }
    void validate() const;
};

ContinuousModel build_continuous(const NoiseBudget& budget, double omega_z, double gamma);

DiscreteModel discretize(const ContinuousModel& model, double t_s);

// Integral of expm(a tau) over [0, t] by the augmented exponential.
Eigen::MatrixXd expm_integral(const Eigen::MatrixXd& a, double t);

// Van Loan construction for int_0^t expm(a s) w expm(a^T s) ds.
Eigen::MatrixXd van_loan_covariance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& w, double t);

// Adds one measurement-noise state xi with d xi = -cutoff xi dt + g_n dmu and
// zeta += noise_gain * xi. The driving intensity equals the white floor r, so
// noise_gain^2 is the ratio of the colored low-frequency level to the floor.
// cutoff = 0 selects the Brownian model with g_n = 1.
ContinuousModel augment_colored_noise(const ContinuousModel& model, double cutoff,
                                      double noise_gain);

// One-sided measurement PSD of zeta (without the oscillator response) at
// angular frequency omega, for the noise states of an augmented model.
double colored_measurement_psd(const ContinuousModel& model, double omega);

double spectral_radius(const Eigen::MatrixXd& a);

}  // namespace levikal

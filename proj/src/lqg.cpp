#include "levikal/lqg.hpp"

#include <cmath>
#include <sstream>

#include "levikal/constants.hpp"
#include "levikal/error.hpp"
#include "levikal/parallel.hpp"
#include "levikal/riccati.hpp"

namespace levikal {

Eigen::MatrixXd lqr_state_weight(const DiscreteModel& disc) {
    const Eigen::Index n = disc.states();
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < disc.mechanical_states && i < n; ++i) q(i, i) = disc.omega_z / 2.0;
    return q;
}

double lqr_control_weight(const DiscreteModel& disc, double g_fb) {
    return disc.omega_z / (g_fb * g_fb);
}

LqrResult lqr_gain_weights(const DiscreteModel& disc, const Eigen::MatrixXd& q, double r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidParameter("control weight must be > 0");
    LqrResult out;
    out.p = solve_dare(disc.a_d, disc.b_d, q, r);
    const Eigen::RowVectorXd bp = disc.b_d.transpose() * out.p;
    const double s = r + bp.dot(disc.b_d);
    out.k = (bp * disc.a_d) / s;
    return out;
}

LqrResult lqr_gain(const DiscreteModel& disc, double g_fb) {
    if (!(g_fb > 0.0) || !std::isfinite(g_fb)) throw InvalidParameter("g_fb must be > 0");
    disc.validate();
    return lqr_gain_weights(disc, lqr_state_weight(disc), lqr_control_weight(disc, g_fb));
}

KalmanResult kalman_gain(const DiscreteModel& disc) {
    disc.validate();
    KalmanResult out;
    const Eigen::VectorXd ct = disc.c.transpose();
    out.sigma = solve_dare(disc.a_d.transpose(), ct, disc.q_hat, disc.r_hat);
    const double s = disc.c.dot(out.sigma * ct) + disc.r_hat;
    out.k = disc.a_d * out.sigma * ct / s;
    return out;
}

Eigen::MatrixXd closed_loop_dynamics(const DiscreteModel& disc, const GainSet& gains) {
    const Eigen::Index n = disc.states();
    if (gains.k_lqr.size() != n || gains.k_kal.size() != n) {
        throw ContractError("gain dimensions do not match the model");
    }
    const Eigen::MatrixXd bk = disc.b_d * gains.k_lqr;
    const Eigen::MatrixXd lc = gains.k_kal * disc.c;
    Eigen::MatrixXd f(2 * n, 2 * n);
    f.topLeftCorner(n, n) = disc.a_d;
    f.topRightCorner(n, n) = -bk;
    f.bottomLeftCorner(n, n) = lc;
    f.bottomRightCorner(n, n) = disc.a_d - bk - lc;
    return f;
}

double occupation_from_covariance(const Eigen::MatrixXd& sigma, int mechanical_states) {
    return sigma.topLeftCorner(mechanical_states, mechanical_states).trace() / 4.0 - 0.5;
}

Eigen::MatrixXd closed_loop_covariance(const DiscreteModel& disc, GainSet& gains) {
    const Eigen::Index n = disc.states();
    const Eigen::MatrixXd f = closed_loop_dynamics(disc, gains);
    Eigen::EigenSolver<Eigen::MatrixXd> es(f, false);
    const Eigen::VectorXd moduli = es.eigenvalues().cwiseAbs();
    Eigen::Index worst = 0;
    const double radius = moduli.maxCoeff(&worst);
    gains.closed_loop_radius = radius;
    if (!(radius < 1.0)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "closed loop unstable: eigenvalue " << es.eigenvalues()(worst) << " has modulus "
            << radius;
        throw StabilityError(msg.str(), radius);
    }
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    w.topLeftCorner(n, n) = disc.q_hat;
    w.bottomRightCorner(n, n) = gains.k_kal * disc.r_hat * gains.k_kal.transpose();
    gains.sigma_joint = solve_discrete_lyapunov(f, w);
    gains.sigma_closed_ss = gains.sigma_joint.topLeftCorner(n, n);
    const int mech = disc.mechanical_states;
    gains.n_predicted = occupation_from_covariance(gains.sigma_closed_ss, mech);
    gains.n_conditional = occupation_from_covariance(gains.sigma_cond_ss, mech);
    gains.delta_p = std::sqrt(gains.sigma_cond_ss(1, 1) + 1.0);
    const Eigen::MatrixXd est = gains.sigma_joint.bottomRightCorner(n, n);
    gains.control_std = std::sqrt(std::max(0.0, gains.k_lqr.dot(est * gains.k_lqr.transpose())));
    gains.measurement_std = std::sqrt(
        std::max(0.0, disc.c.dot(gains.sigma_closed_ss * disc.c.transpose())) + disc.r_hat);
    return gains.sigma_closed_ss;
}

GainSet synthesize(const DiscreteModel& disc, double g_fb) {
    GainSet gains;
    gains.g_fb = g_fb;
    const LqrResult lqr = lqr_gain(disc, g_fb);
    gains.k_lqr = lqr.k;
    gains.sigma_lqr_ss = lqr.p;
    const KalmanResult kal = kalman_gain(disc);
    gains.k_kal = kal.k;
    gains.sigma_cond_ss = kal.sigma;
    closed_loop_covariance(disc, gains);
    return gains;
}

DigitalFilter lqg_transfer_function(const DiscreteModel& disc, const GainSet& gains) {
    const Eigen::Index n = disc.states();
    DigitalFilter filt;
    filt.a = disc.a_d - disc.b_d * gains.k_lqr - gains.k_kal * disc.c;
    filt.b = gains.k_kal;
    filt.c = -gains.k_lqr;

    // Faddeev-LeVerrier: adj(zI - A) = sum_i B_i z^{n-1-i}, det = z^n + sum_i c_i z^{n-i}.
    filt.num = Eigen::VectorXd::Zero(n + 1);
    filt.den = Eigen::VectorXd::Zero(n + 1);
    filt.den(0) = 1.0;
    Eigen::MatrixXd bi = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 1; i <= n; ++i) {
        filt.num(i) = filt.c.dot(bi * filt.b);
        const Eigen::MatrixXd abi = filt.a * bi;
        const double ci = -abi.trace() / static_cast<double>(i);
        filt.den(i) = ci;
        bi = abi + ci * Eigen::MatrixXd::Identity(n, n);
    }
    return filt;
}

Eigen::VectorXd apply_state_space(const DigitalFilter& filter, const Eigen::VectorXd& input) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(filter.order());
    Eigen::VectorXd out(input.size());
    for (Eigen::Index k = 0; k < input.size(); ++k) {
        out(k) = filter.c.dot(s);
        s = filter.a * s + filter.b * input(k);
    }
    return out;
}

Eigen::VectorXd apply_rational(const DigitalFilter& filter, const Eigen::VectorXd& input) {
    const Eigen::Index n = filter.order();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(input.size());
    for (Eigen::Index k = 0; k < input.size(); ++k) {
        double acc = 0.0;
        for (Eigen::Index i = 1; i <= n && i <= k; ++i) {
            acc += filter.num(i) * input(k - i) - filter.den(i) * out(k - i);
        }
        out(k) = acc;
    }
    return out;
}

double dc_gain(const DigitalFilter& filter) {
    const Eigen::Index n = filter.order();
    const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) - filter.a;
    return filter.c.dot(m.partialPivLu().solve(filter.b));
}

std::vector<double> log_gain_grid(double lo, double hi, int count) {
    if (!(lo > 0.0) || !(hi >= lo) || count < 1) throw InvalidParameter("invalid gain grid");
    std::vector<double> grid(count);
    if (count == 1) {
        grid[0] = lo;
        return grid;
    }
    const double step = std::log(hi / lo) / (count - 1);
    for (int i = 0; i < count; ++i) grid[i] = lo * std::exp(step * i);
    grid.back() = hi;
    return grid;
}

std::vector<double> default_gain_grid() {
    return log_gain_grid(constants::two_pi * 1e3, constants::two_pi * 300e3, 60);
}

std::vector<SweepPoint> occupation_sweep(const DiscreteModel& disc,
                                         const std::vector<double>& grid) {
    std::vector<SweepPoint> out(grid.size());
    const KalmanResult kal = kalman_gain(disc);
    parallel_for(grid.size(), [&](std::size_t i) {
        GainSet gains;
        gains.g_fb = grid[i];
        const LqrResult lqr = lqr_gain(disc, grid[i]);
        gains.k_lqr = lqr.k;
        gains.sigma_lqr_ss = lqr.p;
        gains.k_kal = kal.k;
        gains.sigma_cond_ss = kal.sigma;
        closed_loop_covariance(disc, gains);
        SweepPoint& pt = out[i];
        pt.g_fb = grid[i];
        pt.n_predicted = gains.n_predicted;
        pt.n_conditional = gains.n_conditional;
        pt.delta_p = gains.delta_p;
        pt.sigma_z = std::sqrt(gains.sigma_closed_ss(0, 0));
        pt.sigma_p = std::sqrt(gains.sigma_closed_ss(1, 1));
        pt.control_std = gains.control_std;
    });
    return out;
}

DerivativeBaseline derivative_feedback_baseline(const NoiseBudget& budget, double omega_z,
                                                double gamma, double g_fb) {
    if (!(g_fb >= 0.0)) throw InvalidParameter("g_fb must be >= 0");
    if (!(omega_z > 0.0)) throw InvalidParameter("omega_z must be > 0");
    DerivativeBaseline out;
    const double thermal = constants::k_b * budget.temperature /
                           (budget.mass * omega_z * omega_z);
    out.z_variance = thermal / (1.0 + g_fb) +
                     g_fb * g_fb / (1.0 + g_fb) * (gamma / 2.0) * (budget.s_z_imp / 2.0);
    const double z2 = position_zpf(budget.mass, omega_z);
    out.n_equivalent = out.z_variance / (2.0 * z2 * z2) - 0.5;
    return out;
}

}  // namespace levikal

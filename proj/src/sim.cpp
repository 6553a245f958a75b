#include "levikal/sim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>

#include "levikal/error.hpp"
#include "levikal/io.hpp"
#include "levikal/parallel.hpp"
#include "levikal/rng.hpp"
#include "levikal/statistics.hpp"

namespace levikal {

InitialState InitialState::vector(Eigen::VectorXd x0) {
    InitialState s;
    s.kind = Kind::Vector;
    s.x = std::move(x0);
    return s;
}

InitialState InitialState::thermal(double n0) {
    InitialState s;
    s.kind = Kind::Thermal;
    s.n0 = n0;
    return s;
}

InitialState InitialState::stationary() {
    InitialState s;
    s.kind = Kind::Stationary;
    return s;
}

void SimConfig::validate() const {
    if (steps < 1) throw InvalidParameter("sim.steps must be >= 1");
    if (record_stride < 1) throw InvalidParameter("sim.record_stride must be >= 1");
    if (t_s < 0.0 || !std::isfinite(t_s)) throw InvalidParameter("sim.t_s must be >= 0");
    if (initial.kind == InitialState::Kind::Thermal && !(initial.n0 >= 0.0)) {
        throw InvalidParameter("sim.initial_state n0 must be >= 0");
    }
    for (std::size_t i = 1; i < feedback.size(); ++i) {
        if (feedback[i].step < feedback[i - 1].step) {
            throw InvalidParameter("sim.feedback schedule must be sorted by step");
        }
    }
    if (fixed_point) fixed_point->validate();
}

double occupation_sample(double z, double p) {
    return (z * z + p * p) / 4.0 - 0.5;
}

namespace {

// Symmetric square root factor L with L L^T = m for a PSD matrix.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& m, const char* what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
    const double tol = 1e-12 * (1.0 + m.norm());
    if (es.eigenvalues().minCoeff() < -tol) {
        throw NumericError(std::string(what) + " is not positive semidefinite");
    }
    const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal();
}

void check_config(const DiscreteModel& disc, const SimConfig& cfg) {
    cfg.validate();
    disc.validate();
    if (cfg.t_s > 0.0 && std::abs(cfg.t_s - disc.t_s) > 1e-12 * disc.t_s) {
        throw ContractError("sim.t_s differs from the model sample period");
    }
}

template <int N>
struct Kernel {
    using Vec = Eigen::Matrix<double, N, 1>;
    using Mat = Eigen::Matrix<double, N, N>;
    using Row = Eigen::Matrix<double, 1, N>;

    Mat a;
    Vec b;
    Row c;
    Mat af;  // filter model
    Vec bf;
    Row cf;
    Mat noise;
    double r_std = 0.0;
    Row k;
    Vec l;
    bool filter = false;
};

struct NoDrive {
    double operator()(std::int64_t) const { return 0.0; }
};

// Runs the loop and calls sink(k, x, x_hat, zeta, u, eps) before each update.
template <int N, class Drive, class Sink>
std::uint64_t run_loop(const DiscreteModel& disc, const DiscreteModel& filt, const GainSet* gains,
                       const SimConfig& cfg, Drive&& drive, Sink&& sink) {
    using K = Kernel<N>;
    K ker;
    ker.a = disc.a_d;
    ker.b = disc.b_d;
    ker.c = disc.c;
    ker.af = filt.a_d;
    ker.bf = filt.b_d;
    ker.cf = filt.c;
    ker.noise = psd_factor(disc.q_hat, "q_hat");
    ker.r_std = std::sqrt(disc.r_hat);
    ker.filter = gains != nullptr;
    if (gains) {
        ker.k = gains->k_lqr;
        ker.l = gains->k_kal;
    } else {
        ker.k.setZero();
        ker.l.setZero();
    }
    const double w_scale = cfg.process_noise ? 1.0 : 0.0;
    const double v_scale = cfg.measurement_noise ? 1.0 : 0.0;

    Philox4x32 rng(cfg.seed, cfg.stream);
    typename K::Vec x = K::Vec::Zero();
    typename K::Vec xh = K::Vec::Zero();
    switch (cfg.initial.kind) {
        case InitialState::Kind::Vector:
            if (cfg.initial.x.size() != N) throw ContractError("initial_state length mismatch");
            x = cfg.initial.x;
            break;
        case InitialState::Kind::Thermal: {
            const double s = std::sqrt(2.0 * cfg.initial.n0 + 1.0);
            for (int i = 0; i < disc.mechanical_states && i < N; ++i) x(i) = s * rng.normal();
            break;
        }
        case InitialState::Kind::Stationary: {
            if (!gains || gains->sigma_joint.rows() != 2 * N) {
                throw ContractError("stationary initial state requires closed-loop gains");
            }
            const Eigen::MatrixXd f = psd_factor(gains->sigma_joint, "sigma_joint");
            Eigen::VectorXd g(2 * N);
            for (int i = 0; i < 2 * N; ++i) g(i) = rng.normal();
            const Eigen::VectorXd joint = f * g;
            x = joint.head(N);
            xh = joint.tail(N);
            break;
        }
    }

    std::optional<FixedPointLqg> fixed;
    if (cfg.fixed_point && gains) {
        fixed.emplace(lqg_transfer_function(filt, *gains), *cfg.fixed_point);
    }

    bool on = gains != nullptr;
    std::size_t next_event = 0;
    typename K::Vec w;
    for (std::int64_t step = 0; step < cfg.steps; ++step) {
        while (next_event < cfg.feedback.size() && cfg.feedback[next_event].step <= step) {
            on = gains != nullptr && cfg.feedback[next_event].on;
            ++next_event;
        }
        for (int i = 0; i < N; ++i) w(i) = rng.normal();
        const double nu = rng.normal();
        const double zeta = ker.c.dot(x) + v_scale * ker.r_std * nu;
        double u = 0.0;
        double eps = 0.0;
        if (ker.filter) {
            if (fixed) {
                const FixedPointStep st = fixed->step_value(zeta);
                if (on) u = st.value;
            } else if (on) {
                u = -ker.k.dot(xh);
            }
            eps = zeta - ker.cf.dot(xh);
        }
        sink(step, x, xh, zeta, u, eps);
        if (ker.filter) xh = ker.af * xh + ker.bf * u + ker.l * eps;
        x = ker.a * x + ker.b * (u + drive(step)) + w_scale * (ker.noise * w);
    }
    return fixed ? fixed->overflow_count() : 0;
}

template <class Drive, class SinkFactory>
std::uint64_t dispatch(const DiscreteModel& disc, const DiscreteModel& filt, const GainSet* gains,
                       const SimConfig& cfg, Drive&& drive, SinkFactory&& sink) {
    if (filt.states() != disc.states()) throw ContractError("filter model dimension mismatch");
    switch (disc.states()) {
        case 2: return run_loop<2>(disc, filt, gains, cfg, drive, sink);
        case 3: return run_loop<3>(disc, filt, gains, cfg, drive, sink);
        case 4: return run_loop<4>(disc, filt, gains, cfg, drive, sink);
        default: throw ContractError("simulation supports 2 to 4 states");
    }
}

Trajectory record(const DiscreteModel& disc, const DiscreteModel& filt, const GainSet* gains,
                  const SimConfig& cfg, const std::function<double(std::int64_t)>* drive) {
    check_config(disc, cfg);
    Trajectory traj;
    const std::size_t n = static_cast<std::size_t>((cfg.steps - 1) / cfg.record_stride + 1);
    for (auto* v : {&traj.time, &traj.z_true, &traj.p_true, &traj.zeta, &traj.z_hat, &traj.p_hat,
                    &traj.u, &traj.epsilon}) {
        v->reserve(n);
    }
    const double t_s = disc.t_s;
    const std::int64_t stride = cfg.record_stride;
    auto rec = [&traj, t_s, stride](std::int64_t k, const auto& x, const auto& xh, double zeta,
                                    double u, double eps) {
        if (k % stride != 0) return;
        traj.time.push_back(static_cast<double>(k) * t_s);
        traj.z_true.push_back(x(0));
        traj.p_true.push_back(x(1));
        traj.zeta.push_back(zeta);
        traj.z_hat.push_back(xh(0));
        traj.p_hat.push_back(xh(1));
        traj.u.push_back(u);
        traj.epsilon.push_back(eps);
    };
    if (drive) {
        traj.overflow_count =
            dispatch(disc, filt, gains, cfg, [drive](std::int64_t k) { return (*drive)(k); }, rec);
    } else {
        traj.overflow_count = dispatch(disc, filt, gains, cfg, NoDrive{}, rec);
    }
    return traj;
}

}  // namespace

Trajectory simulate_closed_loop(const DiscreteModel& disc, const GainSet* gains,
                                const SimConfig& cfg) {
    return record(disc, disc, gains, cfg, nullptr);
}

Trajectory simulate_mismatched(const DiscreteModel& plant, const DiscreteModel& filter_model,
                               const GainSet& gains, const SimConfig& cfg) {
    if (std::abs(plant.t_s - filter_model.t_s) > 1e-12 * plant.t_s) {
        throw ContractError("plant and filter model sample periods differ");
    }
    return record(plant, filter_model, &gains, cfg, nullptr);
}

ClosedLoopMoments closed_loop_moments(const DiscreteModel& disc, const GainSet& gains,
                                      const SimConfig& cfg, int batches) {
    check_config(disc, cfg);
    if (batches < 2) throw InvalidParameter("batches must be >= 2");
    const Eigen::Index n = disc.states();
    const std::int64_t batch_len = cfg.steps / batches;
    if (batch_len < 1) throw InvalidParameter("fewer steps than batches");

    std::vector<Eigen::MatrixXd> batch_cov(batches, Eigen::MatrixXd::Zero(n, n));
    std::vector<double> batch_eps(batches, 0.0);
    std::vector<double> batch_zeta(batches, 0.0);

    auto sink = [&batch_cov, &batch_eps, &batch_zeta, batch_len, batches](
                    std::int64_t k, const auto& x, const auto&, double zeta, double, double e) {
        const std::int64_t b = k / batch_len;
        if (b >= batches) return;
        batch_cov[b].noalias() += x * x.transpose();
        batch_eps[b] += e * e;
        batch_zeta[b] += zeta * zeta;
    };
    dispatch(disc, disc, &gains, cfg, NoDrive{}, sink);

    ClosedLoopMoments out;
    out.batches = batches;
    out.steps = batch_len * batches;
    out.covariance = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(n, n);
    double eps_mean = 0.0, eps_sq = 0.0, zeta_mean = 0.0, zeta_sq = 0.0;
    for (int b = 0; b < batches; ++b) {
        const double zv = batch_zeta[b] / static_cast<double>(batch_len);
        zeta_mean += zv;
        zeta_sq += zv * zv;
        const Eigen::MatrixXd m = batch_cov[b] / static_cast<double>(batch_len);
        out.covariance += m;
        sq += m.cwiseProduct(m);
        const double e = batch_eps[b] / static_cast<double>(batch_len);
        eps_mean += e;
        eps_sq += e * e;
    }
    const double nb = static_cast<double>(batches);
    out.covariance /= nb;
    const Eigen::MatrixXd var = (sq / nb - out.covariance.cwiseProduct(out.covariance)) *
                                (nb / (nb - 1.0));
    out.standard_error = (var.cwiseMax(0.0) / nb).cwiseSqrt();
    eps_mean /= nb;
    zeta_mean /= nb;
    out.measurement_variance = zeta_mean;
    out.measurement_standard_error =
        std::sqrt(std::max(0.0, (zeta_sq / nb - zeta_mean * zeta_mean) * nb / (nb - 1.0)) / nb);
    out.occupation = occupation_from_covariance(out.covariance, disc.mechanical_states);
    out.innovation_variance = eps_mean;
    out.innovation_standard_error =
        std::sqrt(std::max(0.0, (eps_sq / nb - eps_mean * eps_mean) * nb / (nb - 1.0)) / nb);
    return out;
}

ReheatingResult simulate_reheating(const DiscreteModel& disc, double n0, double duration,
                                   int ensemble, const SimConfig& cfg) {
    disc.validate();
    if (!(n0 >= 0.0)) throw InvalidParameter("n0 must be >= 0");
    if (ensemble < 1) throw InvalidParameter("ensemble must be >= 1");
    if (!(duration > 0.0)) throw InvalidParameter("duration must be > 0");
    const double period = 2.0 * std::numbers::pi / disc.omega_z;
    const int window = std::max(1, static_cast<int>(std::lround(period / disc.t_s)));
    const auto windows = static_cast<std::int64_t>(duration / (window * disc.t_s));
    if (windows < 10) {
        throw ProtocolError("reheating duration shorter than 10 energy windows");
    }

    ReheatingResult out;
    out.window_steps = window;
    out.per_run.assign(ensemble, std::vector<double>(windows, 0.0));
    out.time.resize(windows);
    for (std::int64_t j = 0; j < windows; ++j) {
        out.time[j] = (static_cast<double>(j) + 0.5) * window * disc.t_s;
    }

    parallel_for(static_cast<std::size_t>(ensemble), [&](std::size_t run) {
        SimConfig rc = cfg;
        rc.t_s = 0.0;
        rc.stream = cfg.stream + run;
        rc.steps = windows * window;
        rc.record_stride = 1;
        rc.initial = InitialState::thermal(n0);
        rc.feedback.clear();
        rc.fixed_point.reset();
        std::vector<double>& acc = out.per_run[run];
        auto sink = [&acc, window](std::int64_t k, const auto& x, const auto&, double, double,
                                   double) { acc[k / window] += occupation_sample(x(0), x(1)); };
        check_config(disc, rc);
        dispatch(disc, disc, nullptr, rc, NoDrive{}, sink);
        for (auto& v : acc) v /= window;
    });

    out.mean_n.assign(windows, 0.0);
    for (const auto& run : out.per_run) {
        for (std::int64_t j = 0; j < windows; ++j) out.mean_n[j] += run[j];
    }
    for (auto& v : out.mean_n) v /= ensemble;

    const LinearFit fit = fit_line(out.time, out.mean_n);
    out.rate = fit.slope;
    out.rate_standard_error = fit.slope_standard_error;
    out.n0_fit = fit.intercept;
    out.r_squared = fit.r_squared;
    return out;
}

double effective_linewidth(const DiscreteModel& disc, const GainSet* gains) {
    Eigen::MatrixXd a = disc.a_d;
    if (gains) a -= disc.b_d * gains->k_lqr;
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
    const double target = disc.omega_z * disc.t_s;
    double best = std::numeric_limits<double>::infinity();
    double modulus = 1.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const std::complex<double> ev = es.eigenvalues()(i);
        const double d = std::abs(std::abs(std::arg(ev)) - target);
        if (d < best) {
            best = d;
            modulus = std::abs(ev);
        }
    }
    return -2.0 * std::log(modulus) / disc.t_s;
}

Trajectory simulate_drive_response(const DiscreteModel& disc, const GainSet* gains,
                                   double omega_d, double f_d0, const SimConfig& cfg) {
    if (!std::isfinite(omega_d) || !std::isfinite(f_d0)) {
        throw InvalidParameter("drive parameters must be finite");
    }
    const double gamma_eff = effective_linewidth(disc, gains);
    if (!(std::abs(omega_d - disc.omega_z) > 10.0 * gamma_eff)) {
        throw ProtocolError("drive is not off-resonant: |omega_d - omega_z| <= 10 gamma_eff");
    }
    const double amplitude = f_d0 / disc.p_zpf;
    const double t_s = disc.t_s;
    const std::function<double(std::int64_t)> drive = [=](std::int64_t k) {
        return amplitude * std::sin(omega_d * static_cast<double>(k) * t_s);
    };
    return record(disc, disc, gains, cfg, &drive);
}

std::vector<double> simulate_measurement(const DiscreteModel& disc, const GainSet* gains,
                                         const SimConfig& cfg, double omega_d, double f_d0) {
    check_config(disc, cfg);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>((cfg.steps - 1) / cfg.record_stride + 1));
    const std::int64_t stride = cfg.record_stride;
    auto sink = [&out, stride](std::int64_t k, const auto&, const auto&, double zeta, double,
                               double) {
        if (k % stride == 0) out.push_back(zeta);
    };
    if (f_d0 != 0.0) {
        if (!std::isfinite(omega_d) || !std::isfinite(f_d0)) {
            throw InvalidParameter("drive parameters must be finite");
        }
        const double gamma_eff = effective_linewidth(disc, gains);
        if (!(std::abs(omega_d - disc.omega_z) > 10.0 * gamma_eff)) {
            throw ProtocolError("drive is not off-resonant: |omega_d - omega_z| <= 10 gamma_eff");
        }
        const double amplitude = f_d0 / disc.p_zpf;
        const double t_s = disc.t_s;
        dispatch(disc, disc, gains, cfg,
                 [=](std::int64_t k) {
                     return amplitude * std::sin(omega_d * static_cast<double>(k) * t_s);
                 },
                 sink);
    } else {
        dispatch(disc, disc, gains, cfg, NoDrive{}, sink);
    }
    return out;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    CsvWriter csv(path, {"time_s", "z_true_zpf", "p_true_zpf", "zeta_zpf", "z_hat_zpf",
                         "p_hat_zpf", "u_pzpf_per_s", "epsilon_zpf"});
    for (std::size_t i = 0; i < traj.size(); ++i) {
        csv.row({traj.time[i], traj.z_true[i], traj.p_true[i], traj.zeta[i], traj.z_hat[i],
                 traj.p_hat[i], traj.u[i], traj.epsilon[i]});
    }
    csv.close();
}

void write_trajectory_binary(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double row[8] = {traj.time[i], traj.z_true[i], traj.p_true[i], traj.zeta[i],
                               traj.z_hat[i], traj.p_hat[i], traj.u[i], traj.epsilon[i]};
        for (double v : row) write_le_double(out, v);
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace levikal

#include "levikal/statespace.hpp"

#include <cmath>
#include <complex>

#include "levikal/error.hpp"
#include "levikal/expm.hpp"

namespace levikal {

namespace {

void require_dims(bool ok, const char* what) {
    if (!ok) throw ContractError(std::string("model dimensions inconsistent: ") + what);
}

}  // namespace

void ContinuousModel::validate() const {
    const Eigen::Index n = a.rows();
    require_dims(a.cols() == n, "a must be square");
    require_dims(b.size() == n, "b length");
    require_dims(c.size() == n, "c length");
    require_dims(g.rows() == n, "g rows");
    require_dims(q.rows() == g.cols() && q.cols() == g.cols(), "q size");
    require_dims(cross.size() == 0 || cross.size() == n, "cross length");
    if (!a.allFinite() || !b.allFinite() || !g.allFinite() || !c.allFinite() || !q.allFinite() ||
        !std::isfinite(r)) {
        throw NumericError("continuous model has non-finite entries");
    }
    if ((q - q.transpose()).norm() > 1e-12 * (1.0 + q.norm())) {
        throw InvalidParameter("q must be symmetric");
    }
    if (q.rows() > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q);
        if (es.eigenvalues().minCoeff() < -1e-12 * (1.0 + q.norm())) {
            throw InvalidParameter("q must be positive semidefinite");
        }
    }
    if (!(r > 0.0)) throw InvalidParameter("r must be > 0");
}

void DiscreteModel::validate() const {
    const Eigen::Index n = a_d.rows();
    require_dims(a_d.cols() == n, "a_d must be square");
    require_dims(b_d.size() == n, "b_d length");
    require_dims(c.size() == n, "c length");
    require_dims(q_hat.rows() == n && q_hat.cols() == n, "q_hat size");
    if (!a_d.allFinite() || !b_d.allFinite() || !c.allFinite() || !q_hat.allFinite() ||
        !std::isfinite(r_hat)) {
        throw NumericError("discrete model has non-finite entries");
    }
    if (!(r_hat > 0.0)) throw InvalidParameter("r_hat must be > 0");
    if (!(t_s > 0.0)) throw InvalidParameter("t_s must be > 0");
}

ContinuousModel build_continuous(const NoiseBudget& budget, double omega_z, double gamma) {
    if (!(omega_z > 0.0) || !std::isfinite(omega_z)) throw InvalidParameter("omega_z must be > 0");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidParameter("gamma must be >= 0");
    if (!(budget.z_zpf > 0.0) || !(budget.p_zpf > 0.0)) {
        throw InvalidParameter("budget zero-point scales must be > 0");
    }
    ContinuousModel m;
    m.a.resize(2, 2);
    m.a << 0.0, omega_z, -omega_z, -gamma;
    m.b = Eigen::Vector2d(0.0, 1.0);
    m.g = Eigen::MatrixXd(2, 1);
    m.g << 0.0, 1.0;
    m.c = Eigen::RowVector2d(1.0, 0.0);
    const double p2 = budget.p_zpf * budget.p_zpf;
    const double z2 = budget.z_zpf * budget.z_zpf;
    m.q = Eigen::MatrixXd::Constant(1, 1, budget.s_f_tot / (2.0 * p2));
    m.r = budget.s_z_imp / z2;
    m.cross = Eigen::VectorXd::Zero(2);
    m.labels = {{"z", "z_zpf"}, {"p", "p_zpf"}};
    m.mechanical_states = 2;
    m.omega_z = omega_z;
    m.z_zpf = budget.z_zpf;
    m.p_zpf = budget.p_zpf;
    m.validate();
    return m;
}

Eigen::MatrixXd expm_integral(const Eigen::MatrixXd& a, double t) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    m.topLeftCorner(n, n) = a * t;
    m.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n) * t;
    return expm(m).topRightCorner(n, n);
}

Eigen::MatrixXd van_loan_covariance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& w,
                                    double t) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    m.topLeftCorner(n, n) = -a * t;
    m.topRightCorner(n, n) = w * t;
    m.bottomRightCorner(n, n) = a.transpose() * t;
    const Eigen::MatrixXd e = expm(m);
    const Eigen::MatrixXd phi = e.bottomRightCorner(n, n).transpose();
    Eigen::MatrixXd cov = phi * e.topRightCorner(n, n);
    return 0.5 * (cov + cov.transpose());
}

DiscreteModel discretize(const ContinuousModel& model, double t_s) {
    if (!(t_s > 0.0) || !std::isfinite(t_s)) throw InvalidParameter("t_s must be > 0");
    model.validate();
    DiscreteModel d;
    d.t_s = t_s;
    d.a_d = expm(model.a * t_s);
    const Eigen::MatrixXd integral = expm_integral(model.a, t_s);
    d.b_d = integral * model.b;
    d.g_d = integral * model.g;
    d.c = model.c;
    const Eigen::MatrixXd w = model.g * model.q * model.g.transpose();
    d.q_hat = van_loan_covariance(model.a, w, t_s);
    d.r_hat = model.r * (1.0 / t_s) / 2.0;
    d.mechanical_states = model.mechanical_states;
    d.omega_z = model.omega_z;
    d.z_zpf = model.z_zpf;
    d.p_zpf = model.p_zpf;
    d.labels = model.labels;
    if (!d.a_d.allFinite() || !d.q_hat.allFinite()) {
        throw NumericError("discretize produced non-finite entries");
    }
    return d;
}

ContinuousModel augment_colored_noise(const ContinuousModel& model, double cutoff,
                                      double noise_gain) {
    model.validate();
    if (!(cutoff >= 0.0) || !std::isfinite(cutoff)) throw InvalidParameter("cutoff must be >= 0");
    if (!std::isfinite(noise_gain)) throw InvalidParameter("noise_gain must be finite");
    const Eigen::Index n = model.states();
    const Eigen::Index m = model.g.cols();
    const double drive = cutoff > 0.0 ? cutoff : 1.0;

    ContinuousModel out = model;
    out.a = Eigen::MatrixXd::Zero(n + 1, n + 1);
    out.a.topLeftCorner(n, n) = model.a;
    out.a(n, n) = -cutoff;
    out.b = Eigen::VectorXd::Zero(n + 1);
    out.b.head(n) = model.b;
    out.g = Eigen::MatrixXd::Zero(n + 1, m + 1);
    out.g.topLeftCorner(n, m) = model.g;
    out.g(n, m) = drive;
    out.q = Eigen::MatrixXd::Zero(m + 1, m + 1);
    out.q.topLeftCorner(m, m) = model.q;
    out.q(m, m) = model.r / 2.0;
    out.c = Eigen::RowVectorXd::Zero(n + 1);
    out.c.head(n) = model.c;
    out.c(n) = noise_gain;
    out.cross = Eigen::VectorXd::Zero(n + 1);
    if (model.cross.size() == n) out.cross.head(n) = model.cross;
    out.labels.push_back({cutoff > 0.0 ? "xi_lowpass" : "xi_brownian", "z_zpf"});
    out.validate();
    return out;
}

double colored_measurement_psd(const ContinuousModel& model, double omega) {
    const Eigen::Index n = model.states();
    const Eigen::Index k = model.mechanical_states;
    const Eigen::Index extra = n - k;
    double psd = model.r;
    if (extra <= 0) return psd;
    using Complex = std::complex<double>;
    const Eigen::MatrixXcd an = model.a.bottomRightCorner(extra, extra).cast<Complex>();
    const Eigen::MatrixXcd gn = model.g.bottomRows(extra).cast<Complex>();
    const Eigen::RowVectorXcd cn = model.c.tail(extra).cast<Complex>();
    const Eigen::MatrixXcd resolvent =
        (Complex(0.0, omega) * Eigen::MatrixXcd::Identity(extra, extra) - an).inverse();
    const Eigen::RowVectorXcd h = cn * resolvent * gn;
    const Complex s = (h * model.q.cast<Complex>() * h.adjoint())(0, 0);
    return psd + 2.0 * s.real();
}

double spectral_radius(const Eigen::MatrixXd& a) {
    if (a.size() == 0) return 0.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace levikal

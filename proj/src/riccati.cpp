#include "levikal/riccati.hpp"

#include <cmath>
#include <string>

#include "levikal/error.hpp"

namespace levikal {

namespace {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
    return 0.5 * (m + m.transpose());
}

void check_inputs(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& q,
                  const Eigen::MatrixXd& r) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n ||
        r.rows() != b.cols() || r.cols() != b.cols()) {
        throw ContractError("solve_dare: inconsistent dimensions");
    }
    if (!a.allFinite() || !b.allFinite() || !q.allFinite() || !r.allFinite()) {
        throw NumericError("solve_dare: non-finite input");
    }
}

}  // namespace

Eigen::MatrixXd dare_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                              const Eigen::MatrixXd& p) {
    const Eigen::MatrixXd pa = p * a;
    const Eigen::MatrixXd bpa = b.transpose() * pa;
    const Eigen::MatrixXd s = r + b.transpose() * p * b;
    return a.transpose() * pa - p - bpa.transpose() * s.ldlt().solve(bpa) + q;
}

Eigen::MatrixXd solve_dare(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                           const DareOptions& options) {
    check_inputs(a, b, q, r);
    const Eigen::Index n = a.rows();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);

    Eigen::MatrixXd ak = a;
    Eigen::MatrixXd gk = symmetrize(b * r.ldlt().solve(b.transpose()));
    Eigen::MatrixXd hk = symmetrize(q);
    double change = std::numeric_limits<double>::infinity();
    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        const Eigen::PartialPivLU<Eigen::MatrixXd> w(id + gk * hk);
        const Eigen::MatrixXd w_a = w.solve(ak);
        const Eigen::MatrixXd w_g = w.solve(gk);
        const Eigen::MatrixXd h_next = symmetrize(hk + ak.transpose() * hk * w_a);
        gk = symmetrize(gk + ak * w_g * ak.transpose());
        ak = ak * w_a;
        change = (h_next - hk).norm();
        hk = h_next;
        if (!hk.allFinite()) {
            throw SolverError("solve_dare: doubling iteration diverged", change);
        }
        if (change <= options.tolerance * std::max(1.0, hk.norm())) break;
    }
    const double residual = dare_residual(a, b, q, r, hk).norm();
    if (iter >= options.max_iterations) {
        throw SolverError("solve_dare: no convergence after " +
                              std::to_string(options.max_iterations) + " doubling steps",
                          residual);
    }
    if (!(residual < options.residual_tolerance * (1.0 + hk.norm()))) {
        throw SolverError("solve_dare: residual check failed (" + std::to_string(residual) + ")",
                          residual);
    }
    return hk;
}

Eigen::MatrixXd solve_dare(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                           const Eigen::MatrixXd& q, double r, const DareOptions& options) {
    return solve_dare(a, Eigen::MatrixXd(b), q, Eigen::MatrixXd::Constant(1, 1, r), options);
}

Eigen::MatrixXd riccati_recursion(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                  const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                                  double tolerance, int max_iterations) {
    check_inputs(a, b, q, r);
    Eigen::MatrixXd p = q;
    for (int i = 0; i < max_iterations; ++i) {
        const Eigen::MatrixXd next = symmetrize(dare_residual(a, b, q, r, p) + p);
        const double delta = (next - p).norm();
        p = next;
        if (delta < tolerance * (1.0 + p.norm())) return p;
    }
    throw SolverError("riccati_recursion: no convergence", dare_residual(a, b, q, r, p).norm());
}

Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& f, const Eigen::MatrixXd& w) {
    const Eigen::Index n = f.rows();
    if (f.cols() != n || w.rows() != n || w.cols() != n) {
        throw ContractError("solve_discrete_lyapunov: inconsistent dimensions");
    }
    // vec(F X F^T) = (F kron F) vec(X) for column-major vec.
    const Eigen::Index nn = n * n;
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(nn, nn);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            lhs.block(i * n, j * n, n, n) -= f(i, j) * f;
        }
    }
    const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(w.data(), nn);
    const Eigen::VectorXd x = lhs.partialPivLu().solve(rhs);
    Eigen::MatrixXd out = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n);
    return symmetrize(out);
}

}  // namespace levikal

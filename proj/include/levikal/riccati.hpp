#pragma once

#include <Eigen/Dense>

namespace levikal {

struct DareOptions {
    double tolerance = 1e-12;  // on successive iterates, scaled by max(1, |P|)
    int max_iterations = 200;
    double residual_tolerance = 1e-9;  // on |residual| / (1 + |P|)
};

// Solves  P = a^T P a - a^T P b (r + b^T P b)^{-1} b^T P a + q  by the
// structure-preserving doubling algorithm. Throws SolverError when the
// iteration budget is exhausted or the residual check fails.
Eigen::MatrixXd solve_dare(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                           const DareOptions& options = {});

// Scalar-input convenience overload.
Eigen::MatrixXd solve_dare(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                           const Eigen::MatrixXd& q, double r, const DareOptions& options = {});

Eigen::MatrixXd dare_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                              const Eigen::MatrixXd& p);

// Fixed-point Riccati recursion from P0 = q, used as a reference solution.
Eigen::MatrixXd riccati_recursion(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                  const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                                  double tolerance = 1e-13, int max_iterations = 1000000);

// Solves  X = f X f^T + w  for stable f (Kronecker form).
Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& f, const Eigen::MatrixXd& w);

}  // namespace levikal

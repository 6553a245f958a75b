#pragma once

#include <Eigen/Dense>

namespace levikal {

// Matrix exponential by scaling and squaring with the degree-13 Pade
// approximant (Higham 2005 scaling thresholds). 2x2 inputs use the closed form.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

// Pade path only, for validating the 2x2 closed form.
Eigen::MatrixXd expm_pade13(const Eigen::MatrixXd& a);

// exp(a) for 2x2 a via exp(s)[cosh(q) I + sinh(q)/q (a - s I)], s = tr(a)/2.
Eigen::Matrix2d expm_2x2(const Eigen::Matrix2d& a);

}  // namespace levikal

#pragma once

#include <functional>

namespace levikal::quadrature {

struct Result {
    double value = 0.0;
    double error_estimate = 0.0;
    int cells = 0;
};

// Adaptive Gauss-Legendre on [a, b]: a 10-point rule is compared against a
// 20-point rule per interval and intervals are bisected until the local
// difference is below the tolerance share of that interval.
Result integrate_1d(const std::function<double(double)>& f, double a, double b,
                    double abs_tol = 1e-10, int max_depth = 40);

// Adaptive tensor Gauss-Legendre on [ax, bx] x [ay, by] with quadtree refinement.
Result integrate_2d(const std::function<double(double, double)>& f,
                    double ax, double bx, double ay, double by,
                    double abs_tol = 1e-10, int max_depth = 20);

}  // namespace levikal::quadrature

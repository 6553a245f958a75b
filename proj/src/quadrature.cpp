#include "levikal/quadrature.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "levikal/error.hpp"

namespace levikal::quadrature {

namespace {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Legendre nodes on [-1, 1] by Newton iteration on P_n.
Rule make_rule(int n) {
    Rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

const Rule& low_rule() {
    static const Rule r = make_rule(10);
    return r;
}

const Rule& high_rule() {
    static const Rule r = make_rule(20);
    return r;
}

double apply_1d(const Rule& rule, const std::function<double(double)>& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    return sum * half;
}

double apply_2d(const Rule& rule, const std::function<double(double, double)>& f,
                double ax, double bx, double ay, double by) {
    const double mx = 0.5 * (ax + bx), hx = 0.5 * (bx - ax);
    const double my = 0.5 * (ay + by), hy = 0.5 * (by - ay);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double x = mx + hx * rule.nodes[i];
        double row = 0.0;
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
            row += rule.weights[j] * f(x, my + hy * rule.nodes[j]);
        }
        sum += rule.weights[i] * row;
    }
    return sum * hx * hy;
}

void refine_1d(const std::function<double(double)>& f, double a, double b, double tol,
               int depth, int max_depth, Result& out) {
    const double coarse = apply_1d(low_rule(), f, a, b);
    const double fine = apply_1d(high_rule(), f, a, b);
    const double err = std::abs(fine - coarse);
    if (err <= tol || depth >= max_depth) {
        if (err > tol) {
            throw NumericError("quadrature did not converge on [" + std::to_string(a) + ", " +
                               std::to_string(b) + "]");
        }
        out.value += fine;
        out.error_estimate += err;
        out.cells += 1;
        return;
    }
    const double mid = 0.5 * (a + b);
    refine_1d(f, a, mid, 0.5 * tol, depth + 1, max_depth, out);
    refine_1d(f, mid, b, 0.5 * tol, depth + 1, max_depth, out);
}

void refine_2d(const std::function<double(double, double)>& f, double ax, double bx,
               double ay, double by, double tol, int depth, int max_depth, Result& out) {
    const double coarse = apply_2d(low_rule(), f, ax, bx, ay, by);
    const double fine = apply_2d(high_rule(), f, ax, bx, ay, by);
    const double err = std::abs(fine - coarse);
    if (err <= tol || depth >= max_depth) {
        if (err > tol) {
            throw NumericError("2-D quadrature did not converge");
        }
        out.value += fine;
        out.error_estimate += err;
        out.cells += 1;
        return;
    }
    const double mx = 0.5 * (ax + bx);
    const double my = 0.5 * (ay + by);
    const double t = 0.25 * tol;
    refine_2d(f, ax, mx, ay, my, t, depth + 1, max_depth, out);
    refine_2d(f, mx, bx, ay, my, t, depth + 1, max_depth, out);
    refine_2d(f, ax, mx, my, by, t, depth + 1, max_depth, out);
    refine_2d(f, mx, bx, my, by, t, depth + 1, max_depth, out);
}

}  // namespace

Result integrate_1d(const std::function<double(double)>& f, double a, double b,
                    double abs_tol, int max_depth) {
    Result out;
    if (a == b) return out;
    refine_1d(f, a, b, abs_tol, 0, max_depth, out);
    return out;
}

Result integrate_2d(const std::function<double(double, double)>& f, double ax, double bx,
                    double ay, double by, double abs_tol, int max_depth) {
    Result out;
    if (ax == bx || ay == by) return out;
    refine_2d(f, ax, bx, ay, by, abs_tol, 0, max_depth, out);
    return out;
}

}  // namespace levikal::quadrature

#include "levikal/optics.hpp"

#include <cmath>

#include "levikal/constants.hpp"
#include "levikal/error.hpp"
#include "levikal/quadrature.hpp"

namespace levikal {

namespace {

using constants::pi;

double dipole_image(double rho, double magnification, double theta1, double k) {
    const double a = k * theta1 / magnification;
    const double c0 = theta1 * magnification / k;
    if (rho * a < 1e-8) return c0 * a / 2.0;
    return c0 * std::cyl_bessel_j(1.0, a * rho) / rho;
}

}  // namespace

double dipole_pattern(double theta, double phi) {
    const double s = std::sin(theta);
    const double c = std::cos(phi);
    return 3.0 / (8.0 * pi) * (1.0 - s * s * c * c);
}

CollectionResult collection_cone(double theta_lo, double theta_hi, double gouy_a,
                                 double abs_tol) {
    const double a = gouy_a;
    auto photon = [](double theta, double phi) {
        return dipole_pattern(theta, phi) * std::sin(theta);
    };
    auto info = [a](double theta, double phi) {
        const double d = a - std::cos(theta);
        return dipole_pattern(theta, phi) * d * d * std::sin(theta);
    };
    CollectionResult r;
    r.photon_full = quadrature::integrate_2d(photon, 0.0, pi, 0.0, 2.0 * pi, abs_tol).value;
    r.info_factor_full = quadrature::integrate_2d(info, 0.0, pi, 0.0, 2.0 * pi, abs_tol).value;
    if (theta_hi > theta_lo) {
        r.eta_photon =
            quadrature::integrate_2d(photon, theta_lo, theta_hi, 0.0, 2.0 * pi, abs_tol).value /
            r.photon_full;
        r.info_factor =
            quadrature::integrate_2d(info, theta_lo, theta_hi, 0.0, 2.0 * pi, abs_tol).value;
        r.eta_info = r.info_factor_full > 0.0 ? r.info_factor / r.info_factor_full : 0.0;
    }
    return r;
}

CollectionResult collection_efficiencies(double na, double gouy_a) {
    if (!std::isfinite(na) || !(na > 0.0 && na <= 1.0)) {
        throw InvalidParameter("na must lie in (0, 1]");
    }
    if (!std::isfinite(gouy_a) || gouy_a < 0.0) throw InvalidParameter("gouy_a must be >= 0");
    return collection_cone(pi - std::asin(na), pi, gouy_a);
}

double imprecision_psd(double p_scatt, double gouy_a, double wavelength, double eta_detection) {
    if (!(p_scatt > 0.0)) throw InvalidParameter("p_scatt must be > 0");
    if (!(wavelength > 0.0)) throw InvalidParameter("wavelength must be > 0");
    if (!(eta_detection > 0.0 && eta_detection <= 1.0)) {
        throw InvalidParameter("eta_detection must lie in (0, 1]");
    }
    const double k = constants::two_pi / wavelength;
    const double s_ideal = constants::hbar * constants::c /
                           ((gouy_a * gouy_a + 0.4) * 4.0 * k * p_scatt);
    return 2.0 * s_ideal / eta_detection;
}

double radial_overlap(const std::function<double(double)>& f,
                      const std::function<double(double)>& g, double r_max) {
    auto cross = [&](double r) { return f(r) * g(r) * r; };
    auto ff = [&](double r) { return f(r) * f(r) * r; };
    auto gg = [&](double r) { return g(r) * g(r) * r; };
    // Coarse norms set the absolute tolerance of the refined integrals.
    const double scale_f = std::abs(quadrature::integrate_1d(ff, 0.0, r_max, 1e-3).value);
    const double scale_g = std::abs(quadrature::integrate_1d(gg, 0.0, r_max, 1e-3).value);
    const double tol_f = 1e-13 * scale_f, tol_g = 1e-13 * scale_g;
    const double fg = quadrature::integrate_1d(cross, 0.0, r_max, std::sqrt(tol_f * tol_g)).value;
    const double nf = quadrature::integrate_1d(ff, 0.0, r_max, tol_f).value;
    const double ng = quadrature::integrate_1d(gg, 0.0, r_max, tol_g).value;
    return fg * fg / (nf * ng);
}

double paraxial_overlap(double magnification, double fiber_mode_waist, double na,
                        double wavelength) {
    if (!(magnification > 0.0)) throw InvalidParameter("magnification must be > 0");
    if (!(fiber_mode_waist > 0.0)) throw InvalidParameter("fiber_mode_waist must be > 0");
    const double k = constants::two_pi / wavelength;
    const double theta1 = std::asin(na);
    const double w = fiber_mode_waist;
    // Work in units of the waist so that the quadrature tolerance is scale free.
    auto image = [&](double x) { return dipole_image(x * w, magnification, theta1, k); };
    auto mode = [](double x) { return std::exp(-x * x); };
    const double c0 = theta1 * magnification / k;
    auto cross = [&](double x) { return image(x) * mode(x) * x; };
    const double fg = quadrature::integrate_1d(cross, 0.0, 12.0, 1e-14 * c0 / w).value;
    // Image self-norm over the whole plane: c0^2 * int J1(a r)^2 / r dr = c0^2 / 2,
    // expressed in waist units.
    const double n_image = c0 * c0 / 2.0 / (w * w);
    const double n_mode = 0.25;
    return fg * fg / (n_image * n_mode);
}

double paraxial_overlap_closed_form(double magnification, double fiber_mode_waist, double na,
                                    double wavelength) {
    const double k = constants::two_pi / wavelength;
    const double a = k * std::asin(na) / magnification;
    const double x = a * a * fiber_mode_waist * fiber_mode_waist / 4.0;
    const double d = -std::expm1(-x);
    return 2.0 * d * d / x;
}

OverlapPeak paraxial_overlap_peak(double fiber_mode_waist, double na, double wavelength,
                                  double m_lo, double m_hi) {
    // Golden-section search on the unimodal overlap curve.
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = m_lo, b = m_hi;
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = paraxial_overlap(x1, fiber_mode_waist, na, wavelength);
    double f2 = paraxial_overlap(x2, fiber_mode_waist, na, wavelength);
    while (b - a > 1e-7 * (1.0 + std::abs(a))) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + g * (b - a);
            f2 = paraxial_overlap(x2, fiber_mode_waist, na, wavelength);
        } else {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - g * (b - a);
            f1 = paraxial_overlap(x1, fiber_mode_waist, na, wavelength);
        }
    }
    const double m = 0.5 * (a + b);
    return {m, paraxial_overlap(m, fiber_mode_waist, na, wavelength)};
}

}  // namespace levikal

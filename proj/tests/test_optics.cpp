#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "levikal/constants.hpp"
#include "levikal/error.hpp"
#include "levikal/optics.hpp"
#include "levikal/params.hpp"

using namespace levikal;

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, int n = 4000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// Backward cone of half-angle alpha, reduced to one dimension after the
// azimuthal integral: <cos^2 phi> = 1/2 over [0, 2 pi).
double oracle_photon(double na) {
    const double c = std::sqrt(1.0 - na * na);
    return simpson([](double u) { return 0.75 * (1.0 - 0.5 * (1.0 - u * u)); }, c, 1.0);
}

double oracle_info(double na, double a) {
    const double c = std::sqrt(1.0 - na * na);
    return simpson([a](double u) { return 0.75 * (1.0 - 0.5 * (1.0 - u * u)) * (a + u) * (a + u); }, c,
                   1.0);
}

}  // namespace

TEST(Optics, PatternNormalizedOverSphere) {
    const CollectionResult full = collection_cone(0.0, constants::pi, 0.3);
    EXPECT_NEAR(full.photon_full, 1.0, 1e-12);
    EXPECT_NEAR(full.eta_photon, 1.0, 1e-12);
    EXPECT_NEAR(full.eta_info, 1.0, 1e-12);
}

TEST(Optics, FullSphereInformationIdentity) {
    for (double a : {0.0, 0.71, 1.0, 2.5}) {
        EXPECT_NEAR(collection_cone(0.0, constants::pi, a).info_factor_full, a * a + 0.4, 1e-10);
    }
}

TEST(Optics, CollectionAtHighNumericalAperture) {
    const CollectionResult r = collection_efficiencies(0.95, 0.71);
    EXPECT_NEAR(r.eta_info, 0.84, 0.01);
    EXPECT_NEAR(r.eta_photon, 0.375, 0.01);
}

TEST(Optics, CollectionMatchesOneDimensionalOracle) {
    for (double na : {0.3, 0.7, 0.95}) {
        for (double a : {0.0, 0.71, 1.2}) {
            const CollectionResult r = collection_efficiencies(na, a);
            EXPECT_NEAR(r.eta_photon, oracle_photon(na), 1e-10);
            EXPECT_NEAR(r.info_factor, oracle_info(na, a), 1e-10);
        }
    }
}

TEST(Optics, ConesAreAdditive) {
    const double split = 2.0;
    const CollectionResult lo = collection_cone(0.0, split, 0.71);
    const CollectionResult hi = collection_cone(split, constants::pi, 0.71);
    EXPECT_NEAR(lo.eta_photon + hi.eta_photon, 1.0, 1e-11);
    EXPECT_NEAR(lo.eta_info + hi.eta_info, 1.0, 1e-11);
}

TEST(Optics, BackwardInformationExceedsPhotonFraction) {
    // The backward hemisphere carries the Gouy-shifted phase information.
    const CollectionResult r = collection_efficiencies(1.0, 0.71);
    EXPECT_NEAR(r.eta_photon, 0.5, 1e-12);
    EXPECT_GT(r.eta_info, 0.5);
}

TEST(Optics, NumericalApertureRangeChecked) {
    EXPECT_THROW(collection_efficiencies(0.0, 0.71), InvalidParameter);
    EXPECT_THROW(collection_efficiencies(1.01, 0.71), InvalidParameter);
    EXPECT_THROW(collection_efficiencies(0.5, -1.0), InvalidParameter);
}

TEST(Optics, ImprecisionTimesBackactionIsHbarSquaredOverEta) {
    const ExperimentParams p = reference_parameters();
    for (double eta : {1.0, 0.36, 0.05}) {
        const double s_imp = imprecision_psd(p.p_scatt, p.gouy_a, p.wavelength, eta);
        EXPECT_NEAR(s_imp * backaction_force_psd(p) * eta / (constants::hbar * constants::hbar), 1.0,
                    1e-12);
    }
    const NoiseBudget b = decoherence_rates(p);
    EXPECT_NEAR(b.eta_d, detection_totals(p.detection_efficiencies).eta_info, 1e-12);
}

TEST(Optics, ImprecisionScalesInverselyWithPower) {
    const double s1 = imprecision_psd(1e-5, 0.71, 1064e-9, 0.5);
    const double s2 = imprecision_psd(4e-5, 0.71, 1064e-9, 0.5);
    EXPECT_NEAR(s1 / s2, 4.0, 1e-12);
    EXPECT_THROW(imprecision_psd(1e-5, 0.71, 1064e-9, 0.0), InvalidParameter);
}

TEST(Optics, RadialOverlapOfGaussians) {
    const double w1 = 1.0, w2 = 1.7;
    const double r = radial_overlap([&](double x) { return std::exp(-x * x / (w1 * w1)); },
                                    [&](double x) { return std::exp(-x * x / (w2 * w2)); }, 20.0);
    const double expect = std::pow(2.0 * w1 * w2 / (w1 * w1 + w2 * w2), 2);
    EXPECT_NEAR(r, expect, 1e-12);
    EXPECT_NEAR(radial_overlap([](double x) { return std::exp(-x * x); },
                               [](double x) { return 3.0 * std::exp(-x * x); }, 20.0),
                1.0, 1e-12);
}

TEST(Optics, ParaxialOverlapAgreesWithClosedForm) {
    for (double m = 2.0; m <= 20.0; m += 1.5) {
        EXPECT_NEAR(paraxial_overlap(m, 3.1e-6, 0.95, 1064e-9),
                    paraxial_overlap_closed_form(m, 3.1e-6, 0.95, 1064e-9), 1e-9);
    }
}

TEST(Optics, OverlapPeakValue) {
    // Maximum of 2 (1 - e^-x)^2 / x where 2 x e^-x = 1 - e^-x.
    double lo = 0.5, hi = 3.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (2.0 * mid * std::exp(-mid) > -std::expm1(-mid) ? lo : hi) = mid;
    }
    const double x = 0.5 * (lo + hi);
    const double peak = 2.0 * std::pow(-std::expm1(-x), 2) / x;
    const OverlapPeak p = paraxial_overlap_peak(3.1e-6, 0.95, 1064e-9);
    EXPECT_NEAR(p.eta, peak, 1e-8);
    const double a = constants::two_pi / 1064e-9 * std::asin(0.95) / p.magnification;
    EXPECT_NEAR(a * a * 3.1e-6 * 3.1e-6 / 4.0, x, 1e-5);
}

#pragma once

#include <functional>
#include <vector>

namespace levikal {

struct CollectionResult {
    double eta_info = 0.0;
    double eta_photon = 0.0;
    double info_factor = 0.0;       // integral of P (A - cos)^2 over the collected cone
    double info_factor_full = 0.0;  // same integral over the full sphere
    double photon_full = 0.0;       // integral of P over the full sphere
};

// Normalized dipole emission pattern for a dipole along x, emission angles
// measured from the optical axis z.
double dipole_pattern(double theta, double phi);

// Collection between polar angles [theta_lo, theta_hi].
CollectionResult collection_cone(double theta_lo, double theta_hi, double gouy_a,
                                 double abs_tol = 1e-12);

// Backward-hemisphere cone of half-angle arcsin(na) around theta = pi.
CollectionResult collection_efficiencies(double na, double gouy_a);

// One-sided imprecision PSD (m^2/Hz) at detection information efficiency eta_detection.
double imprecision_psd(double p_scatt, double gouy_a, double wavelength, double eta_detection);

// Normalized overlap |<f,g>|^2 / (<f,f><g,g>) of two radial fields on [0, r_max].
double radial_overlap(const std::function<double(double)>& f,
                      const std::function<double(double)>& g, double r_max);

// Overlap of the paraxial dipole image with a Gaussian fiber mode of waist w.
double paraxial_overlap(double magnification, double fiber_mode_waist, double na,
                        double wavelength);
// Closed-form value of the same overlap.
double paraxial_overlap_closed_form(double magnification, double fiber_mode_waist, double na,
                                    double wavelength);

struct OverlapPeak {
    double magnification = 0.0;
    double eta = 0.0;
};
OverlapPeak paraxial_overlap_peak(double fiber_mode_waist, double na, double wavelength,
                                  double m_lo = 0.5, double m_hi = 100.0);

}  // namespace levikal

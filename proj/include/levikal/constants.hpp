#pragma once

#include <numbers>

// CODATA 2018 exact and recommended values, SI units.
namespace levikal::constants {

inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double k_b = 1.380649e-23;            // J/K
inline constexpr double c = 299792458.0;               // m/s
inline constexpr double n_a = 6.02214076e23;           // 1/mol
inline constexpr double r_gas = k_b * n_a;             // J/(mol K)
inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double pa_per_mbar = 100.0;

inline constexpr double mbar_to_pa(double p_mbar) { return p_mbar * pa_per_mbar; }
inline constexpr double pa_to_mbar(double p_pa) { return p_pa / pa_per_mbar; }

}  // namespace levikal::constants

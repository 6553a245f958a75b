#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "levikal/cli/scenarios.hpp"
#include "levikal/constants.hpp"
#include "levikal/error.hpp"
#include "levikal/expm.hpp"
#include "levikal/fixed_point.hpp"
#include "levikal/optics.hpp"
#include "levikal/quadrature.hpp"
#include "levikal/riccati.hpp"
#include "levikal/rng.hpp"
#include "levikal/sim.hpp"
#include "levikal/spectral.hpp"
#include "levikal/sql.hpp"
#include "levikal/statistics.hpp"
#include "levikal/thermometry.hpp"

namespace levikal::cli {

namespace {

using constants::two_pi;
using Check = std::function<std::string(std::uint64_t, bool&)>;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

Eigen::MatrixXd random_matrix(Philox4x32& rng, int rows, int cols, double scale) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
    return m;
}

const DiscreteModel& reference_model() {
    static const DiscreteModel d = [] {
        const ExperimentParams p = reference_parameters();
        const NoiseBudget b = identified_budget(p, reference_measured_noise());
        return discretize(build_continuous(b, p.omega_z, b.gamma_th), 32e-9);
    }();
    return d;
}

std::string philox_kat(std::uint64_t, bool& pass) {
    using B = Philox4x32::Block;
    struct Case { B ctr; Philox4x32::Key key; B expect; };
    const Case cases[] = {
        {{0, 0, 0, 0}, {0, 0}, {0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}},
        {{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff},
         {0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}},
        {{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0},
         {0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}},
    };
    int ok = 0;
    for (const auto& c : cases) ok += Philox4x32::encrypt(c.ctr, c.key) == c.expect;
    pass = ok == 3;
    return std::to_string(ok) + "/3 vectors match";
}

std::string stream_independence(std::uint64_t seed, bool& pass) {
    Philox4x32 a(seed, 0), b(seed, 1);
    const int n = 200000;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = a.normal(), y = b.normal();
        sab += x * y;
        saa += x * x;
        sbb += y * y;
    }
    const double rho = sab / std::sqrt(saa * sbb);
    pass = std::abs(rho) < 5.0 / std::sqrt(static_cast<double>(n));
    return "correlation " + fmt(rho);
}

std::string dare_vs_recursion(std::uint64_t seed, bool& pass) {
    Philox4x32 rng(seed, 10);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::MatrixXd a = random_matrix(rng, 3, 3, 0.5);
        a /= std::max(1.0, 1.05 * spectral_radius(a));
        const Eigen::MatrixXd b = random_matrix(rng, 3, 1, 1.0);
        const Eigen::MatrixXd g = random_matrix(rng, 3, 3, 1.0);
        const Eigen::MatrixXd q = g * g.transpose() + Eigen::MatrixXd::Identity(3, 3);
        const Eigen::MatrixXd r = Eigen::MatrixXd::Identity(1, 1);
        const Eigen::MatrixXd p = solve_dare(a, b, q, r);
        const Eigen::MatrixXd p_ref = riccati_recursion(a, b, q, r);
        worst = std::max(worst, (p - p_ref).norm() / p_ref.norm());
    }
    pass = worst < 1e-9;
    return "max relative difference " + fmt(worst);
}

std::string expm_closed_form(std::uint64_t seed, bool& pass) {
    Philox4x32 rng(seed, 11);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Matrix2d a = random_matrix(rng, 2, 2, 2.0);
        const Eigen::MatrixXd e1 = expm_pade13(a);
        const Eigen::MatrixXd e2 = expm_2x2(a);
        worst = std::max(worst, (e1 - e2).norm() / e1.norm());
    }
    pass = worst < 1e-12;
    return "max relative difference " + fmt(worst);
}

std::string van_loan_quadrature(std::uint64_t, bool& pass) {
    Eigen::MatrixXd a(2, 2);
    a << 0.0, 1.0, -1.0, -0.1;
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 2);
    w(1, 1) = 0.7;
    const double t = 0.8;
    const Eigen::MatrixXd vl = van_loan_covariance(a, w, t);
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const auto q = quadrature::integrate_1d(
                [&](double s) {
                    const Eigen::MatrixXd e = expm(a * s);
                    return (e * w * e.transpose())(i, j);
                },
                0.0, t, 1e-13);
            worst = std::max(worst, std::abs(q.value - vl(i, j)));
        }
    }
    pass = worst < 1e-10;
    return "max absolute difference " + fmt(worst);
}

std::string lyapunov_residual(std::uint64_t seed, bool& pass) {
    Philox4x32 rng(seed, 12);
    Eigen::MatrixXd f = random_matrix(rng, 4, 4, 0.5);
    f /= 1.1 * spectral_radius(f);
    const Eigen::MatrixXd g = random_matrix(rng, 4, 4, 1.0);
    const Eigen::MatrixXd w = g * g.transpose();
    const Eigen::MatrixXd x = solve_discrete_lyapunov(f, w);
    const double res = (x - f * x * f.transpose() - w).norm() / w.norm();
    pass = res < 1e-10;
    return "relative residual " + fmt(res);
}

std::string welch_parseval(std::uint64_t seed, bool& pass) {
    Philox4x32 rng(seed, 13);
    const std::size_t n = 1 << 18;
    std::vector<double> x(n);
    double var = 0.0;
    for (auto& v : x) {
        v = rng.normal();
        var += v * v;
    }
    var /= static_cast<double>(n);
    const SpectrumRecord rec = welch_psd(x, 1.0, 1 << 12);
    double integral = 0.0;
    for (double p : rec.psd) integral += p * rec.bin_width();
    const double rel = integral / var - 1.0;
    pass = std::abs(rel) < 0.01;
    return "integrated PSD / variance - 1 = " + fmt(rel);
}

std::string whiteness_of_white_noise(std::uint64_t seed, bool& pass) {
    Philox4x32 rng(seed, 14);
    std::vector<double> x(1 << 17);
    for (auto& v : x) v = rng.normal();
    WhitenessOptions o;
    o.sample_rate = 1.0;
    const WhitenessResult w = innovation_whiteness(x, o);
    pass = w.pass;
    return "fraction inside " + fmt(w.fraction_inside);
}

std::string sideband_inverse(std::uint64_t, bool& pass) {
    double worst = 0.0;
    for (double n : {0.0, 0.01, 0.3, 1.0, 8.3, 100.0}) {
        worst = std::max(worst, std::abs(occupation_from_ratio(sideband_ratio(n)) - n) / std::max(1.0, n));
    }
    pass = worst < 1e-12;
    return "max round-trip error " + fmt(worst);
}

std::string optics_full_sphere(std::uint64_t, bool& pass) {
    double worst = 0.0;
    for (double a : {0.0, 0.5, 1.0, 1.5}) {
        const CollectionResult c = collection_cone(0.0, constants::pi, a);
        worst = std::max(worst, std::abs(c.info_factor - (a * a + 0.4)));
        worst = std::max(worst, std::abs(c.photon_full - 1.0));
    }
    pass = worst < 1e-9;
    return "max deviation " + fmt(worst);
}

std::string fixed_point_convergence(std::uint64_t seed, bool& pass) {
    const DiscreteModel& d = reference_model();
    const GainSet g = synthesize(d, two_pi * 40e3);
    const DigitalFilter f = lqg_transfer_function(d, g);
    SimConfig s;
    s.seed = seed;
    s.stream = 15;
    s.steps = 100000;
    s.initial = InitialState::stationary();
    const std::vector<double> zeta = simulate_measurement(d, &g, s);
    const FixedPointConfig base = default_fixed_point_config(d);
    std::vector<double> rms;
    for (int frac : {12, 16, 20, 24}) {
        FixedPointConfig c = base;
        c.frac_bits = frac;
        c.io_bits = 24;
        const FixedPointRun r = run_fixed_point(f, c, zeta);
        double acc = 0.0;
        for (std::size_t i = 0; i < zeta.size(); ++i) {
            const double e = (r.internal[i] - r.reference[i]) / c.output_full_scale;
            acc += e * e;
        }
        rms.push_back(std::sqrt(acc / static_cast<double>(zeta.size())));
    }
    pass = rms[0] > rms[1] && rms[1] > rms[2] && rms[2] > rms[3] && rms[3] < 1e-6;
    return "normalized rms at 12/16/20/24 fraction bits: " + fmt(rms[0]) + " " + fmt(rms[1]) + " " +
           fmt(rms[2]) + " " + fmt(rms[3]);
}

std::string sql_bound(std::uint64_t, bool& pass) {
    const ExperimentParams p = reference_parameters();
    const NoiseBudget b = identified_budget(p, reference_measured_noise());
    const double f_z = p.omega_z / two_pi;
    double worst = 1e300;
    for (double n : {0.5, 0.71, 2.0, 8.3, 30.0}) {
        const SqlResult s = sql_curves(b, p.omega_z, damping_for_occupation(b, n),
                                       linear_grid(f_z - 60e3, f_z + 60e3, 2001));
        worst = std::min(worst, s.min_ratio);
    }
    pass = worst >= 1.0;
    return "smallest total/SQL ratio " + fmt(worst);
}

std::string simulation_determinism(std::uint64_t seed, bool& pass) {
    const DiscreteModel& d = reference_model();
    const GainSet g = synthesize(d, two_pi * 40e3);
    SimConfig s;
    s.seed = seed;
    s.steps = 20000;
    const Trajectory a = simulate_closed_loop(d, g, s);
    const Trajectory b = simulate_closed_loop(d, g, s);
    s.stream = 1;
    const Trajectory c = simulate_closed_loop(d, g, s);
    pass = a.zeta == b.zeta && a.u == b.u && a.z_true == b.z_true && a.zeta != c.zeta;
    return pass ? "repeat identical, other stream differs" : "determinism violated";
}

std::string energy_conservation(std::uint64_t, bool& pass) {
    const ExperimentParams p = reference_parameters();
    const NoiseBudget b = identified_budget(p, reference_measured_noise());
    const DiscreteModel d = discretize(build_continuous(b, p.omega_z, 0.0), 32e-9);
    SimConfig s;
    s.steps = 200000;
    s.process_noise = false;
    s.measurement_noise = false;
    s.initial = InitialState::vector((Eigen::VectorXd(2) << 3.0, -1.0).finished());
    const Trajectory t = simulate_closed_loop(d, nullptr, s);
    const double e0 = t.z_true.front() * t.z_true.front() + t.p_true.front() * t.p_true.front();
    double worst = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double e = t.z_true[i] * t.z_true[i] + t.p_true[i] * t.p_true[i];
        worst = std::max(worst, std::abs(e / e0 - 1.0));
    }
    pass = worst < 1e-8;
    return "max relative energy drift " + fmt(worst);
}

const std::vector<std::pair<std::string, Check>>& registry() {
    static const std::vector<std::pair<std::string, Check>> r = {
        {"philox_kat", philox_kat},
        {"stream_independence", stream_independence},
        {"dare_vs_recursion", dare_vs_recursion},
        {"expm_closed_form", expm_closed_form},
        {"van_loan_quadrature", van_loan_quadrature},
        {"lyapunov_residual", lyapunov_residual},
        {"welch_parseval", welch_parseval},
        {"whiteness_white_noise", whiteness_of_white_noise},
        {"sideband_inverse", sideband_inverse},
        {"optics_full_sphere", optics_full_sphere},
        {"fixed_point_convergence", fixed_point_convergence},
        {"sql_bound", sql_bound},
        {"simulation_determinism", simulation_determinism},
        {"energy_conservation", energy_conservation},
    };
    return r;
}

}  // namespace

const std::vector<std::string>& verify_suite_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [name, fn] : registry()) n.push_back(name);
        return n;
    }();
    return names;
}

std::vector<SuiteResult> run_verify_suites(const std::vector<std::string>& names, std::uint64_t seed) {
    std::vector<std::pair<std::string, Check>> selected;
    if (names.empty()) {
        selected = registry();
    } else {
        for (const auto& n : names) {
            bool found = false;
            for (const auto& entry : registry()) {
                if (entry.first == n) {
                    selected.push_back(entry);
                    found = true;
                }
            }
            if (!found) throw ConfigError("verify.suites", "unknown suite '" + n + "'");
        }
    }
    std::vector<SuiteResult> out;
    for (const auto& [name, fn] : selected) {
        SuiteResult r{name, false, ""};
        try {
            r.detail = fn(seed, r.pass);
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("exception: ") + e.what();
        }
        out.push_back(r);
    }
    return out;
}

}  // namespace levikal::cli

#include "levikal/thermometry.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "levikal/constants.hpp"
#include "levikal/error.hpp"
#include "levikal/parallel.hpp"
#include "levikal/rng.hpp"
#include "levikal/statistics.hpp"

namespace levikal {

namespace {

double lorentzian(double f, double center, double width) {
    const double d = f - center;
    const double h = 0.5 * width;
    return h / (std::numbers::pi * (d * d + h * h));
}

// Fraction of a Lorentzian area within +-5 full widths of its center.
const double kWindowFraction = 2.0 / std::numbers::pi * std::atan(10.0);

}  // namespace

double FloorModel::detector_transfer(double f) const {
    const double x = f / detector_cutoff;
    return 1.0 / (1.0 + x * x);
}

double FloorModel::phase_noise(double f) const {
    const double d = f - f_het;
    const double w2 = phase_noise_width * phase_noise_width;
    return phase_noise_level * w2 / (d * d + w2);
}

double FloorModel::dark(double) const {
    return detector_dark + analyzer_dark;
}

void FloorModel::validate() const {
    if (!(f_het > 0.0)) throw InvalidParameter("floors.f_het must be > 0");
    if (!(shot_noise > 0.0)) throw InvalidParameter("floors.shot_noise must be > 0");
    if (detector_dark < 0.0 || analyzer_dark < 0.0) throw InvalidParameter("floors dark noise must be >= 0");
    if (!(detector_cutoff > 0.0)) throw InvalidParameter("floors.detector_cutoff must be > 0");
    if (phase_noise_level < 0.0 || !(phase_noise_width > 0.0)) {
        throw InvalidParameter("floors phase noise template invalid");
    }
    if (one_over_f < 0.0) throw InvalidParameter("floors.one_over_f must be >= 0");
    if (!(signal_area > 0.0)) throw InvalidParameter("floors.signal_area must be > 0");
}

double sideband_ratio(double n) {
    if (!(n >= 0.0)) throw InvalidParameter("occupation must be >= 0");
    return n / (n + 1.0);
}

double occupation_from_ratio(double r) {
    if (!(r >= 0.0 && r < 1.0)) throw InvalidParameter("sideband ratio must be in [0, 1)");
    return r / (1.0 - r);
}

SpectrumRecord synth_heterodyne_psd(double n, double omega_z, double gamma_eff,
                                    const FloorModel& floors, const SynthOptions& options) {
    if (!(n >= 0.0)) throw InvalidParameter("n must be >= 0");
    if (!(gamma_eff > 0.0)) throw InvalidParameter("gamma_eff must be > 0");
    if (!(options.span > 0.0 && options.bin_width > 0.0)) throw InvalidParameter("synth grid invalid");
    if (options.averages < 0) throw InvalidParameter("averages must be >= 0");
    floors.validate();
    const double f_z = omega_z / constants::two_pi;
    const double width = gamma_eff / constants::two_pi;
    const auto half = static_cast<long>(std::floor(options.span / options.bin_width));

    SpectrumRecord rec;
    rec.unit = "raw/Hz";
    rec.window = "synthetic";
    rec.n_segments = options.averages;
    std::vector<double> stokes, anti, floor;
    Philox4x32 rng(options.seed, options.stream);
    std::gamma_distribution<double> gamma(options.averages > 0 ? options.averages : 1.0,
                                          options.averages > 0 ? 1.0 / options.averages : 1.0);
    for (long i = -half; i < half; ++i) {
        const double f = floors.f_het + (static_cast<double>(i) + 0.5) * options.bin_width;
        const double h = floors.detector_transfer(f) * floors.shot_noise;
        const double area = options.particle ? floors.signal_area : 0.0;
        const double s = area * (n + 1.0) * lorentzian(f, floors.f_het - f_z, width);
        const double a = area * n * lorentzian(f, floors.f_het + f_z, width);
        const double base = floors.dark(f) +
                            h * (1.0 + floors.phase_noise(f) + floors.one_over_f / std::abs(f - floors.f_het));
        double total = base + h * (s + a);
        if (options.averages > 0) total *= gamma(rng);
        rec.freq.push_back(f);
        rec.psd.push_back(total);
        stokes.push_back(h * s);
        anti.push_back(h * a);
        floor.push_back(base);
    }
    rec.components = {{"stokes", stokes}, {"anti_stokes", anti}, {"floor", floor}};
    return rec;
}

namespace {

struct SidebandData {
    std::vector<double> f;
    std::vector<double> y;      // whitened, shot-noise normalized, phase noise removed
    std::vector<double> extra;  // known additive floors in the same units
    double f_s = 0.0;          // Stokes center
    double f_as = 0.0;
    double f_het = 0.0;
    double inv_sqrt_k = 1.0;
    bool weighted = false;
};

double sideband_model(const SidebandData& d, std::size_t i, double a_s, double a_as, double width,
                      double a) {
    return 1.0 + a_s * lorentzian(d.f[i], d.f_s, width) + a_as * lorentzian(d.f[i], d.f_as, width) +
           a / std::abs(d.f[i] - d.f_het);
}

double residual_sigma(const SidebandData& d, std::size_t i, double model) {
    return d.weighted ? (model + d.extra[i]) * d.inv_sqrt_k : 1.0;
}

struct SidebandFunctor {
    using Scalar = double;
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

    const SidebandData* data;

    int inputs() const { return 4; }
    int values() const { return static_cast<int>(data->f.size()); }

    // Parameters: A_S, A_aS, log(width / Hz), a.
    int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r) const {
        const double width = std::exp(p(2));
        for (std::size_t i = 0; i < data->f.size(); ++i) {
            const double m = sideband_model(*data, i, p(0), p(1), width, p(3));
            r(static_cast<Eigen::Index>(i)) = (data->y[i] - m) / residual_sigma(*data, i, m);
        }
        return 0;
    }
};

// Given the width, the model is linear in (A_S, A_aS, a); weighted by the
// known floors at the observed level.
Eigen::Vector3d linear_solve(const SidebandData& d, double width, double* cost) {
    const Eigen::Index n = static_cast<Eigen::Index>(d.f.size());
    Eigen::MatrixXd j(n, 3);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double s = d.weighted ? std::max(d.y[k], 1e-3) + d.extra[k] : 1.0;
        j(i, 0) = lorentzian(d.f[k], d.f_s, width) / s;
        j(i, 1) = lorentzian(d.f[k], d.f_as, width) / s;
        j(i, 2) = 1.0 / std::abs(d.f[k] - d.f_het) / s;
        rhs(i) = (d.y[k] - 1.0) / s;
    }
    const Eigen::Vector3d x = j.colPivHouseholderQr().solve(rhs);
    if (cost) *cost = (j * x - rhs).squaredNorm();
    return x;
}

}  // namespace

SidebandFit fit_sidebands(const SpectrumRecord& psd, const FloorModel& floors, double omega_z,
                          int averages) {
    floors.validate();
    psd.validate();
    if (psd.size() < 16) throw ContractError("fit_sidebands: spectrum too short");
    SidebandData d;
    d.f_het = floors.f_het;
    const double f_z = omega_z / constants::two_pi;
    d.f_s = floors.f_het - f_z;
    d.f_as = floors.f_het + f_z;
    d.weighted = averages > 0;
    d.inv_sqrt_k = averages > 0 ? 1.0 / std::sqrt(static_cast<double>(averages)) : 1.0;
    for (std::size_t i = 0; i < psd.size(); ++i) {
        const double f = psd.freq[i];
        const double h = floors.detector_transfer(f) * floors.shot_noise;
        d.f.push_back(f);
        d.y.push_back((psd.psd[i] - floors.dark(f)) / h - floors.phase_noise(f));
        d.extra.push_back(floors.dark(f) / h + floors.phase_noise(f));
    }

    // Coarse log-width scan seeds the nonlinear fit.
    const double df = psd.bin_width();
    double best_cost = std::numeric_limits<double>::infinity();
    double best_width = 0.0;
    for (int i = 0; i <= 60; ++i) {
        const double width = df * std::pow(10.0, 4.0 * i / 60.0 - 0.5);
        double cost = 0.0;
        linear_solve(d, width, &cost);
        if (cost < best_cost) {
            best_cost = cost;
            best_width = width;
        }
    }
    const Eigen::Vector3d lin = linear_solve(d, best_width, nullptr);
    Eigen::VectorXd p(4);
    p << lin(0), lin(1), std::log(best_width), lin(2);

    SidebandFunctor functor{&d};
    Eigen::NumericalDiff<SidebandFunctor> numdiff(functor);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<SidebandFunctor>> lm(numdiff);
    lm.parameters.maxfev = 4000;
    lm.parameters.xtol = 1e-12;
    lm.parameters.ftol = 1e-12;
    const auto status = lm.minimize(p);
    const std::vector<double> final_params(p.data(), p.data() + p.size());
    if (!p.allFinite() || status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters ||
        status == Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation) {
        throw FitError("fit_sidebands: Levenberg-Marquardt did not converge", final_params);
    }

    SidebandFit out;
    out.evaluations = static_cast<int>(lm.nfev);
    const double width = std::exp(p(2));
    out.area_s = p(0);
    out.area_as = p(1);
    out.one_over_f_amp = p(3);
    out.gamma_eff = constants::two_pi * width;
    out.gamma_s = out.area_s * kWindowFraction;
    out.gamma_as = out.area_as * kWindowFraction;
    out.difference = out.area_s - out.area_as;

    Eigen::VectorXd r(functor.values());
    functor(p, r);
    const double dof = std::max(1, functor.values() - 4);
    out.reduced_chi2 = r.squaredNorm() / dof;
    Eigen::MatrixXd jac(functor.values(), 4);
    numdiff.df(p, jac);
    const Eigen::MatrixXd cov =
        (jac.transpose() * jac).ldlt().solve(Eigen::MatrixXd::Identity(4, 4)) *
        (d.weighted ? 1.0 : out.reduced_chi2);
    out.area_s_error = std::sqrt(std::max(0.0, cov(0, 0)));
    out.area_as_error = std::sqrt(std::max(0.0, cov(1, 1)));
    out.difference_error = std::sqrt(std::max(0.0, cov(0, 0) + cov(1, 1) - 2.0 * cov(0, 1)));

    out.ratio = out.area_s != 0.0 ? out.area_as / out.area_s : 0.0;
    out.n_defined = out.area_s > 3.0 * out.area_s_error && out.ratio >= 0.0 && out.ratio < 1.0;
    out.n_est = out.n_defined ? occupation_from_ratio(out.ratio)
                              : std::numeric_limits<double>::quiet_NaN();
    std::vector<double> normalized(r.data(), r.data() + r.size());
    out.residual_gaussianity = sample_moments(normalized).excess_kurtosis;
    return out;
}

ThermometryEnsemble thermometry_ensemble(double n, double omega_z, double gamma_eff,
                                         const FloorModel& floors, SynthOptions options,
                                         int count) {
    if (count < 2) throw InvalidParameter("ensemble count must be >= 2");
    if (options.averages <= 0) throw InvalidParameter("ensemble spectra need averages > 0");
    ThermometryEnsemble out;
    out.fits.resize(count);
    const std::uint64_t base = options.stream;
    parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
        SynthOptions o = options;
        o.stream = base + i;
        const SpectrumRecord rec = synth_heterodyne_psd(n, omega_z, gamma_eff, floors, o);
        out.fits[i] = fit_sidebands(rec, floors, omega_z, o.averages);
    });
    std::vector<double> ns, rs;
    for (const auto& f : out.fits) {
        ns.push_back(f.n_est);
        rs.push_back(f.ratio);
    }
    const Moments mn = sample_moments(ns);
    const Moments mr = sample_moments(rs);
    const double c = std::sqrt(count / (count - 1.0));
    out.n_mean = mn.mean;
    out.n_std = mn.stddev * c;
    out.ratio_mean = mr.mean;
    out.ratio_std = mr.stddev * c;
    return out;
}

}  // namespace levikal

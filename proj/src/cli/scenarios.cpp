#include "levikal/cli/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "levikal/calibration.hpp"
#include "levikal/constants.hpp"
#include "levikal/error.hpp"
#include "levikal/optics.hpp"
#include "levikal/parallel.hpp"
#include "levikal/sim.hpp"
#include "levikal/spectral.hpp"
#include "levikal/sql.hpp"
#include "levikal/statistics.hpp"
#include "levikal/thermometry.hpp"

namespace levikal::cli {

namespace fs = std::filesystem;
using constants::two_pi;

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw IoError("sha256 initialization failed");
    }
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    }
    return hex.str();
}

namespace {

Json matrix_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

Json vector_json(const Eigen::VectorXd& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

// Tracks files written for one scenario so a failure can remove them.
class ArtifactSet {
public:
    ArtifactSet(const ScenarioConfig& cfg) : cfg_(cfg), dir_(cfg.output_dir) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_)) throw IoError("cannot create output_dir " + dir_.string());
    }

    std::string path(const std::string& name, const std::string& ext) {
        const std::string file = scenario_name(cfg_.scenario) + "_" + name + "." + ext;
        files_.push_back(file);
        return (dir_ / file).string();
    }

    // Every JSON artifact carries the config echo and seed.
    Json document() const {
        Json doc;
        doc["scenario"] = scenario_name(cfg_.scenario);
        doc["seed"] = cfg_.seed;
        doc["config"] = cfg_.echo;
        return doc;
    }

    void json(const std::string& name, Json results) {
        Json doc = document();
        doc["results"] = std::move(results);
        write_json(path(name, "json"), doc);
    }

    std::vector<Artifact> finalize() {
        std::vector<Artifact> out;
        std::vector<std::string> names = files_;
        std::sort(names.begin(), names.end());
        for (const auto& n : names) {
            const std::string p = (dir_ / n).string();
            out.push_back({n, sha256_file(p), fs::file_size(p)});
        }
        return out;
    }

    void remove_all() noexcept {
        std::error_code ec;
        for (const auto& f : files_) fs::remove(dir_ / f, ec);
        fs::remove(dir_ / "manifest.json", ec);
    }

    const fs::path& dir() const { return dir_; }

private:
    const ScenarioConfig& cfg_;
    fs::path dir_;
    std::vector<std::string> files_;
};

SimConfig base_sim(const ScenarioConfig& cfg) {
    SimConfig s = cfg.simulate.sim;
    s.seed = cfg.seed;
    return s;
}

std::vector<double> default_position_gains() {
    return {two_pi * 2e3, two_pi * 4e3, two_pi * 8e3, two_pi * 16e3};
}

// --- budget -----------------------------------------------------------------

void run_budget(const ScenarioConfig& cfg, ArtifactSet& out) {
    const NoiseBudget first = decoherence_rates(cfg.params);
    Json results;
    results["noise_model"] = cfg.model.noise_model;
    const NoiseBudget selected = scenario_budget(cfg);
    results["eta"] = selected.eta;
    results["n_min"] = selected.n_min;
    results["first_principles"] = budget_to_json(first);
    try {
        results["identified"] = budget_to_json(identified_budget(cfg.params, cfg.model.measured));
    } catch (const Error& e) {
        results["identified"] = Json{{"error", e.what()}};
    }
    const EfficiencyTotals all = efficiency_totals(cfg.params.detection_efficiencies);
    const EfficiencyTotals det = detection_totals(cfg.params.detection_efficiencies);
    results["efficiency_totals"] = {{"eta_photon", all.eta_photon}, {"eta_info", all.eta_info}};
    results["detection_totals"] = {{"eta_photon", det.eta_photon}, {"eta_info", det.eta_info}};
    const ThermalForce th = thermal_force_psd(cfg.params);
    results["thermal"] = {{"s_f", th.s_f}, {"gamma", th.gamma}, {"knudsen", th.knudsen},
                          {"full_formula", th.full_formula}};
    out.json("budget", results);

    CsvWriter csv(out.path("efficiency", "csv"), {"name", "eta_photon", "eta_info", "detection"});
    for (const auto& e : cfg.params.detection_efficiencies) {
        csv.row_cells({"\"" + e.name + "\"", format_double(e.eta_photon), format_double(e.eta_info),
                       is_environment_entry(e) ? "0" : "1"});
    }
    csv.close();
}

// --- gains ------------------------------------------------------------------

Json gains_json(const GainSet& g) {
    return {{"g_fb", g.g_fb},
            {"k_lqr", vector_json(g.k_lqr.transpose())},
            {"k_kal", vector_json(g.k_kal)},
            {"sigma_lqr_ss", matrix_json(g.sigma_lqr_ss)},
            {"sigma_cond_ss", matrix_json(g.sigma_cond_ss)},
            {"sigma_closed_ss", matrix_json(g.sigma_closed_ss)},
            {"n_predicted", g.n_predicted},
            {"n_conditional", g.n_conditional},
            {"delta_p", g.delta_p},
            {"sigma_z", std::sqrt(g.sigma_cond_ss(0, 0))},
            {"sigma_p", std::sqrt(g.sigma_cond_ss(1, 1))},
            {"control_std", g.control_std},
            {"measurement_std", g.measurement_std},
            {"closed_loop_radius", g.closed_loop_radius}};
}

void run_gains(const ScenarioConfig& cfg, ArtifactSet& out) {
    const ControlModel m = scenario_model(cfg);
    const GainSet g = synthesize(m.discrete, cfg.g_fb);
    const DigitalFilter f = lqg_transfer_function(m.discrete, g);
    const FixedPointConfig fx = default_fixed_point_config(m.discrete);
    Json results = gains_json(g);
    results["t_s"] = m.discrete.t_s;
    results["a_d"] = matrix_json(m.discrete.a_d);
    results["b_d"] = vector_json(m.discrete.b_d);
    results["q_hat"] = matrix_json(m.discrete.q_hat);
    results["r_hat"] = m.discrete.r_hat;
    results["filter"] = {{"num", vector_json(f.num)}, {"den", vector_json(f.den)}, {"dc_gain", dc_gain(f)}};
    results["fixed_point_defaults"] = {{"word_bits", fx.word_bits},
                                       {"frac_bits", fx.frac_bits},
                                       {"io_bits", fx.io_bits},
                                       {"input_full_scale", fx.input_full_scale},
                                       {"output_full_scale", fx.output_full_scale}};
    out.json("gains", results);

    CsvWriter csv(out.path("filter_coefficients", "csv"), {"lag", "num", "den"});
    for (Eigen::Index i = 0; i < f.num.size(); ++i) {
        csv.row({static_cast<double>(i), f.num(i), f.den(i)});
    }
    csv.close();
}

// --- sweep ------------------------------------------------------------------

void run_sweep(const ScenarioConfig& cfg, ArtifactSet& out) {
    const ControlModel m = scenario_model(cfg);
    std::vector<double> grid = cfg.gain_grid;
    std::sort(grid.begin(), grid.end());
    const std::vector<SweepPoint> pts = occupation_sweep(m.discrete, grid);
    CsvWriter csv(out.path("occupation_vs_gain", "csv"),
                  {"g_fb_rad_s", "g_fb_khz", "n", "n_conditional", "delta_p", "sigma_z", "sigma_p",
                   "control_std"});
    for (const auto& p : pts) {
        csv.row({p.g_fb, p.g_fb / two_pi / 1e3, p.n_predicted, p.n_conditional, p.delta_p, p.sigma_z,
                 p.sigma_p, p.control_std});
    }
    csv.close();

    Json results;
    results["points"] = pts.size();
    Json crossing = nullptr;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double a = pts[i - 1].n_predicted - 1.0;
        const double b = pts[i].n_predicted - 1.0;
        if (a > 0.0 && b <= 0.0) {
            const double t = a / (a - b);
            const double lg = std::log(pts[i - 1].g_fb) + t * (std::log(pts[i].g_fb) - std::log(pts[i - 1].g_fb));
            crossing = std::exp(lg);
            break;
        }
    }
    results["n_equals_one_gain_rad_s"] = crossing;
    const GainSet high = synthesize(m.discrete, two_pi * 110e3);
    results["n_at_110_khz"] = high.n_predicted;
    const GainSet cheap = synthesize(m.discrete, 1e3 * m.discrete.omega_z);
    results["n_at_1000_omega_z"] = cheap.n_predicted;
    results["conditional_bound"] = cheap.n_conditional;
    out.json("summary", results);
}

// --- simulate ---------------------------------------------------------------

void run_simulate(const ScenarioConfig& cfg, ArtifactSet& out) {
    const ControlModel m = scenario_model(cfg);
    const DiscreteModel& d = m.discrete;
    SimConfig sim = base_sim(cfg);
    const bool closed = !cfg.simulate.open_loop;
    GainSet g;
    if (closed) g = synthesize(d, cfg.g_fb);
    if (cfg.simulate.fixed_point) {
        FixedPointConfig fx = cfg.simulate.fixed_point_cfg;
        const FixedPointConfig def = default_fixed_point_config(d);
        if (fx.input_full_scale <= 0.0) fx.input_full_scale = def.input_full_scale;
        if (fx.output_full_scale <= 0.0) fx.output_full_scale = def.output_full_scale;
        sim.fixed_point = fx;
    }
    // Stored CSV stays under about 100 MB unless a stride is given.
    if (!cfg.echo.contains("sim") || !cfg.echo["sim"].contains("record_stride")) {
        const std::int64_t max_rows = 100'000'000 / 180;
        sim.record_stride = std::max<std::int64_t>(1, (sim.steps + max_rows - 1) / max_rows);
    }
    const Trajectory tr = simulate_closed_loop(d, closed ? &g : nullptr, sim);
    write_trajectory_csv(tr, out.path("trajectory", "csv"));

    const double fs = 1.0 / (d.t_s * static_cast<double>(sim.record_stride));
    Json results;
    results["steps"] = sim.steps;
    results["record_stride"] = sim.record_stride;
    results["samples"] = tr.size();
    results["feedback"] = closed;
    results["g_fb"] = closed ? Json(cfg.g_fb) : Json(nullptr);
    results["overflow_count"] = tr.overflow_count;

    // Sample second moments of the mechanical state against the prediction.
    double zz = 0.0, pp = 0.0, zp = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        zz += tr.z_true[i] * tr.z_true[i];
        pp += tr.p_true[i] * tr.p_true[i];
        zp += tr.z_true[i] * tr.p_true[i];
    }
    const double ns = static_cast<double>(tr.size());
    results["sample_covariance"] = matrix_json((Eigen::Matrix2d() << zz / ns, zp / ns, zp / ns, pp / ns).finished());
    results["sample_occupation"] = (zz + pp) / ns / 4.0 - 0.5;
    if (closed) {
        results["predicted_covariance"] = matrix_json(g.sigma_closed_ss.topLeftCorner(2, 2));
        results["predicted_occupation"] = g.n_predicted;
    }

    if (tr.size() >= static_cast<std::size_t>(cfg.simulate.psd_segment)) {
        SpectrumRecord psd = welch_psd(tr.zeta, fs, static_cast<std::size_t>(cfg.simulate.psd_segment),
                                       0.5, WindowKind::Hann, "zpf^2/Hz");
        const SpectrumRecord zt = welch_psd(tr.z_true, fs, static_cast<std::size_t>(cfg.simulate.psd_segment));
        psd.components.push_back({"z_true", zt.psd});
        write_spectrum_csv(psd, out.path("psd", "csv"));
    }

    if (closed && tr.size() >= (1u << 14)) {
        WhitenessOptions wo;
        wo.sample_rate = fs;
        wo.band_lo = cfg.simulate.whiteness_band_lo;
        wo.band_hi = std::min(cfg.simulate.whiteness_band_hi, 0.5 * fs);
        const WhitenessResult w = innovation_whiteness(tr.epsilon, wo);
        CsvWriter wc(out.path("whiteness", "csv"), {"freq_hz", "normalized_power"});
        for (std::size_t i = 0; i < w.bins; ++i) wc.row({w.freq[i], w.normalized_power[i]});
        wc.close();
        const GaussianityResult gr = gaussianity_check(tr.epsilon, cfg.simulate.highpass_cutoff, fs);
        CsvWriter gc(out.path("gaussianity", "csv"), {"bin_center", "pdf", "pdf_fit", "cdf", "cdf_fit"});
        for (std::size_t i = 0; i < gr.bin_centers.size(); ++i) {
            gc.row({gr.bin_centers[i], gr.pdf[i], gr.pdf_fit[i], gr.cdf[i], gr.cdf_fit[i]});
        }
        gc.close();
        results["whiteness"] = {{"fraction_inside", w.fraction_inside}, {"bins", w.bins},
                                {"lower", w.lower}, {"upper", w.upper}, {"pass", w.pass},
                                {"band_hz", {wo.band_lo, wo.band_hi}}};
        results["gaussianity"] = {{"mean", gr.mean}, {"sigma", gr.sigma},
                                  {"excess_kurtosis", gr.excess_kurtosis}, {"ks_statistic", gr.ks_statistic},
                                  {"highpass_cutoff_hz", cfg.simulate.highpass_cutoff}};
    }
    out.json("summary", results);
}

// --- reheat -----------------------------------------------------------------

void run_reheat(const ScenarioConfig& cfg, ArtifactSet& out) {
    const NoiseBudget base = scenario_budget(cfg);
    const NoiseBudget b = with_pressure(base, cfg.params, cfg.reheat.pressure);
    const double period = two_pi / cfg.params.omega_z;
    ContinuousModel cm = build_continuous(b, cfg.params.omega_z, b.gamma_th);
    const DiscreteModel d = discretize(cm, period / cfg.reheat.steps_per_period);
    SimConfig sim;
    sim.seed = cfg.seed;
    const ReheatingResult r = simulate_reheating(d, cfg.reheat.n0, cfg.reheat.duration, cfg.reheat.ensemble, sim);

    CsvWriter csv(out.path("mean_occupation", "csv"), {"time_s", "mean_n"});
    for (std::size_t i = 0; i < r.time.size(); ++i) csv.row({r.time[i], r.mean_n[i]});
    csv.close();
    const std::size_t sample = std::min<std::size_t>(10, r.per_run.size());
    std::vector<std::string> header{"time_s"};
    for (std::size_t k = 0; k < sample; ++k) header.push_back("run_" + std::to_string(k));
    CsvWriter runs(out.path("runs_sample", "csv"), header);
    for (std::size_t i = 0; i < r.time.size(); ++i) {
        std::vector<double> row{r.time[i]};
        for (std::size_t k = 0; k < sample; ++k) row.push_back(r.per_run[k][i]);
        runs.row(row);
    }
    runs.close();

    const double expected = b.gamma_ba_rate + b.gamma_th_rate;
    out.json("summary", {{"rate", r.rate},
                         {"rate_over_2pi_hz", r.rate / two_pi},
                         {"rate_standard_error", r.rate_standard_error},
                         {"n0_fit", r.n0_fit},
                         {"r_squared", r.r_squared},
                         {"window_steps", r.window_steps},
                         {"ensemble", cfg.reheat.ensemble},
                         {"pressure_pa", cfg.reheat.pressure},
                         {"model_rate", expected},
                         {"model_rate_over_2pi_hz", expected / two_pi}});
}

// --- thermometry ------------------------------------------------------------

Json fit_json(const SidebandFit& f) {
    return {{"gamma_s", f.gamma_s},           {"gamma_as", f.gamma_as},
            {"ratio", f.ratio},               {"n_est", f.n_defined ? Json(f.n_est) : Json(nullptr)},
            {"n_defined", f.n_defined},       {"gamma_eff", f.gamma_eff},
            {"one_over_f_amp", f.one_over_f_amp}, {"residual_gaussianity", f.residual_gaussianity},
            {"area_s", f.area_s},             {"area_as", f.area_as},
            {"difference", f.difference},     {"difference_error", f.difference_error},
            {"reduced_chi2", f.reduced_chi2}};
}

void run_thermometry(const ScenarioConfig& cfg, ArtifactSet& out) {
    const NoiseBudget b = scenario_budget(cfg);
    const ThermometryConfig& t = cfg.thermometry;
    const double omega = cfg.params.omega_z;
    CsvWriter spec(out.path("spectra", "csv"), {"n_true", "freq_hz", "psd_raw"});
    CsvWriter fits(out.path("fits", "csv"),
                   {"n_true", "n_est", "ratio", "area_s", "area_as", "difference", "difference_error",
                    "gamma_eff_rad_s", "one_over_f_amp"});
    Json single = Json::array();
    for (std::size_t i = 0; i < t.occupations.size(); ++i) {
        const double n = t.occupations[i];
        SynthOptions o = t.synth;
        o.seed = cfg.seed;
        o.stream = i;
        const double gamma = damping_for_occupation(b, std::max(n, 1e-3));
        const SpectrumRecord rec = synth_heterodyne_psd(n, omega, gamma, t.floors, o);
        for (std::size_t k = 0; k < rec.size(); ++k) spec.row({n, rec.freq[k], rec.psd[k]});
        const SidebandFit f = fit_sidebands(rec, t.floors, omega, o.averages);
        fits.row({n, f.n_defined ? f.n_est : NAN, f.ratio, f.area_s, f.area_as, f.difference,
                  f.difference_error, f.gamma_eff, f.one_over_f_amp});
        Json j = fit_json(f);
        j["n_true"] = n;
        j["gamma_model"] = gamma;
        single.push_back(j);
    }
    spec.close();
    fits.close();

    SynthOptions o = t.synth;
    o.seed = cfg.seed;
    o.stream = 1000;
    const double n_e = t.ensemble_occupation;
    const ThermometryEnsemble ens =
        thermometry_ensemble(n_e, omega, damping_for_occupation(b, std::max(n_e, 1e-3)), t.floors, o, t.ensemble);

    SynthOptions blank = t.synth;
    blank.seed = cfg.seed;
    blank.stream = 5000;
    blank.particle = false;
    const SpectrumRecord floors_only = synth_heterodyne_psd(0.0, omega, damping_for_occupation(b, 1.0), t.floors, blank);
    Json floors_fit;
    try {
        floors_fit = fit_json(fit_sidebands(floors_only, t.floors, omega, blank.averages));
    } catch (const FitError& e) {
        floors_fit = {{"error", e.what()}, {"n_defined", false}};
    }

    out.json("summary", {{"single", single},
                         {"ensemble", {{"n_true", n_e},
                                       {"count", t.ensemble},
                                       {"n_mean", ens.n_mean},
                                       {"n_std", ens.n_std},
                                       {"ratio_mean", ens.ratio_mean},
                                       {"ratio_std", ens.ratio_std}}},
                         {"floors_only", floors_fit}});
}

// --- sql --------------------------------------------------------------------

void run_sql(const ScenarioConfig& cfg, ArtifactSet& out) {
    const NoiseBudget b = scenario_budget(cfg);
    const double f_z = cfg.params.omega_z / two_pi;
    const std::vector<double> grid = linear_grid(f_z - cfg.sql.span, f_z + cfg.sql.span, cfg.sql.points);
    Json results;
    for (const auto& [label, n] : {std::pair<std::string, double>{"low_gain", cfg.sql.low_occupation},
                                   std::pair<std::string, double>{"high_gain", cfg.sql.high_occupation}}) {
        const double gamma = damping_for_occupation(b, n);
        const SqlResult s = sql_curves(b, cfg.params.omega_z, gamma, grid);
        write_spectrum_csv(s.record, out.path(label, "csv"));
        results[label] = {{"occupation", n},
                          {"gamma_eff", gamma},
                          {"min_ratio", s.min_ratio},
                          {"min_freq_hz", s.min_freq},
                          {"min_ratio_upper", s.min_ratio_upper},
                          {"min_offset_upper_hz", s.min_offset_upper},
                          {"min_ratio_lower", s.min_ratio_lower},
                          {"min_offset_lower_hz", s.min_offset_lower},
                          {"ratio_on_resonance", s.ratio_on_resonance}};
    }
    out.json("summary", results);
}

// --- optics -----------------------------------------------------------------

void run_optics(const ScenarioConfig& cfg, ArtifactSet& out) {
    const ExperimentParams& p = cfg.params;
    const CollectionResult c = collection_efficiencies(p.na, p.gouy_a);
    const EfficiencyTotals det = detection_totals(p.detection_efficiencies);
    std::vector<double> mags = cfg.optics.magnifications;
    if (mags.empty()) mags = linear_grid(2.0, 20.0, 50);
    CsvWriter csv(out.path("overlap", "csv"), {"magnification", "eta_quadrature", "eta_closed_form"});
    for (double m : mags) {
        csv.row({m, paraxial_overlap(m, cfg.optics.fiber_waist, p.na, p.wavelength),
                 paraxial_overlap_closed_form(m, cfg.optics.fiber_waist, p.na, p.wavelength)});
    }
    csv.close();
    const OverlapPeak peak = paraxial_overlap_peak(cfg.optics.fiber_waist, p.na, p.wavelength);
    const double s_imp = imprecision_psd(p.p_scatt, p.gouy_a, p.wavelength, det.eta_info);
    out.json("collection", {{"na", p.na},
                            {"gouy_a", p.gouy_a},
                            {"eta_info", c.eta_info},
                            {"eta_photon", c.eta_photon},
                            {"info_factor", c.info_factor},
                            {"info_factor_full_sphere", c.info_factor_full},
                            {"full_sphere_identity", p.gouy_a * p.gouy_a + 0.4},
                            {"s_z_imp", s_imp},
                            {"sqrt_s_z_imp", std::sqrt(s_imp)},
                            {"detection_eta_info", det.eta_info},
                            {"overlap_peak", {{"magnification", peak.magnification}, {"eta", peak.eta}}},
                            {"fiber_waist", cfg.optics.fiber_waist}});
}

// --- calibrate --------------------------------------------------------------

void run_calibrate(const ScenarioConfig& cfg, ArtifactSet& out) {
    const ControlModel m = scenario_model(cfg);
    const DiscreteModel& d = m.discrete;
    const CalibrateConfig& c = cfg.calibrate;
    const double z_zpf = m.budget.z_zpf;

    std::vector<double> gains = c.position_gains.empty() ? default_position_gains() : c.position_gains;
    std::vector<PositionPair> pairs(gains.size());
    std::vector<double> n_pred(gains.size());
    parallel_for(gains.size(), [&](std::size_t i) {
        const GainSet g = synthesize(d, gains[i]);
        SimConfig s;
        s.seed = cfg.seed;
        s.stream = i;
        s.steps = c.position_steps;
        s.initial = InitialState::stationary();
        const ClosedLoopMoments mo = closed_loop_moments(d, g, s, 100);
        const double v_per_zpf = z_zpf / c.c_mv;
        pairs[i] = {mo.measurement_variance * v_per_zpf * v_per_zpf, mo.occupation};
        n_pred[i] = g.n_predicted;
    });
    const PositionCalibration pc = calibrate_position(pairs, z_zpf);
    CsvWriter pcsv(out.path("position", "csv"), {"g_fb_rad_s", "voltage_variance_v2", "n_het", "n_predicted"});
    for (std::size_t i = 0; i < gains.size(); ++i) {
        pcsv.row({gains[i], pairs[i].voltage_variance, pairs[i].n_het, n_pred[i]});
    }
    pcsv.close();

    const double drive_gain = c.drive_gain > 0.0 ? c.drive_gain : two_pi * 1e3;
    std::vector<double> freqs = c.drive_frequencies;
    if (freqs.empty()) freqs = {two_pi * 89e3, two_pi * 119e3};
    const GainSet g = synthesize(d, drive_gain);
    const double gamma_eff = effective_linewidth(d, &g);
    const std::size_t nv = c.drive_voltages.size();
    std::vector<DrivePoint> drives(freqs.size() * nv);
    parallel_for(drives.size(), [&](std::size_t k) {
        const double wd = freqs[k / nv];
        const double v = c.drive_voltages[k % nv];
        SimConfig s;
        s.seed = cfg.seed;
        s.stream = 100 + k;
        s.steps = c.drive_steps;
        s.initial = InitialState::stationary();
        std::vector<double> z = simulate_measurement(d, &g, s, wd, c.c_nv * v);
        for (double& x : z) x *= z_zpf;
        const SpectrumRecord psd = welch_psd(z, 1.0 / d.t_s, static_cast<std::size_t>(c.psd_segment));
        drives[k] = {wd, v / std::sqrt(2.0), recovered_force_std(psd, wd, d.omega_z, m.budget.mass)};
    });
    const ForceCalibration fc = calibrate_force(drives, d.omega_z, gamma_eff);
    CsvWriter fcsv(out.path("force", "csv"), {"omega_d_rad_s", "voltage_std_v", "force_std_n"});
    for (const auto& p : drives) fcsv.row({p.omega_d, p.voltage_std, p.force_std});
    fcsv.close();

    Json per = Json::array();
    for (const auto& s : fc.per_frequency) {
        per.push_back({{"omega_d", s.omega_d}, {"slope", s.slope}, {"standard_error", s.standard_error}});
    }
    out.json("summary", {{"position", {{"c_mv", pc.c_mv},
                                       {"c_mv_error", pc.c_mv_error},
                                       {"c_mv_true", c.c_mv},
                                       {"noise_offset", pc.noise_offset},
                                       {"noise_offset_error", pc.noise_offset_error},
                                       {"noise_offset_true", cfg.model.measured.measurement_variance},
                                       {"r_squared", pc.r_squared}}},
                         {"force", {{"c_nv", fc.c_nv},
                                    {"c_nv_error", fc.c_nv_error},
                                    {"c_nv_true", c.c_nv},
                                    {"drive_gain", drive_gain},
                                    {"gamma_eff", gamma_eff},
                                    {"max_discrepancy_sigma", fc.max_discrepancy_sigma},
                                    {"per_frequency", per}}}});
}

// --- verify -----------------------------------------------------------------

std::vector<SuiteResult> run_verify(const ScenarioConfig& cfg, ArtifactSet& out) {
    std::vector<SuiteResult> suites = run_verify_suites(cfg.verify.suites, cfg.seed);
    Json arr = Json::array();
    bool all = true;
    for (const auto& s : suites) {
        arr.push_back({{"name", s.name}, {"pass", s.pass}, {"detail", s.detail}});
        all = all && s.pass;
    }
    out.json("suites", {{"all_pass", all}, {"suites", arr}});
    return suites;
}

}  // namespace

Json budget_to_json(const NoiseBudget& b) {
    Json warnings = Json::array();
    for (const auto& w : b.warnings) warnings.push_back(w);
    return {{"s_f_ba", b.s_f_ba},
            {"s_f_th", b.s_f_th},
            {"s_f_tot", b.s_f_tot},
            {"s_z_imp", b.s_z_imp},
            {"gamma_th", b.gamma_th},
            {"gamma_meas", b.gamma_meas},
            {"gamma_ba_rate", b.gamma_ba_rate},
            {"gamma_th_rate", b.gamma_th_rate},
            {"eta_d", b.eta_d},
            {"eta_d_raw", b.eta_d_raw},
            {"eta_d_clamped", b.eta_d_clamped},
            {"eta_e", b.eta_e},
            {"eta", b.eta},
            {"c_q", b.c_q},
            {"z_zpf", b.z_zpf},
            {"p_zpf", b.p_zpf},
            {"n_imp", b.n_imp},
            {"n_tot", b.n_tot},
            {"n_min", b.n_min},
            {"n_ba_equiv", b.n_ba_equiv},
            {"n_th_equiv", b.n_th_equiv},
            {"efficiency_totals", {{"eta_photon", b.efficiency_totals.eta_photon},
                                   {"eta_info", b.efficiency_totals.eta_info}}},
            {"warnings", warnings}};
}

NoiseBudget scenario_budget(const ScenarioConfig& cfg) {
    if (cfg.model.noise_model == "first_principles") return decoherence_rates(cfg.params);
    return identified_budget(cfg.params, cfg.model.measured);
}

ControlModel scenario_model(const ScenarioConfig& cfg) {
    ControlModel m;
    m.budget = scenario_budget(cfg);
    m.continuous = build_continuous(m.budget, cfg.params.omega_z, m.budget.gamma_th);
    if (cfg.model.colored_cutoff >= 0.0) {
        m.continuous = augment_colored_noise(m.continuous, cfg.model.colored_cutoff, cfg.model.colored_gain);
    }
    m.discrete = discretize(m.continuous, cfg.model.t_s);
    return m;
}

RunResult run_scenario(const ScenarioConfig& cfg, const std::string& config_path, std::ostream* log) {
    ArtifactSet out(cfg);
    RunResult result;
    try {
        switch (cfg.scenario) {
            case Scenario::Budget: run_budget(cfg, out); break;
            case Scenario::Gains: run_gains(cfg, out); break;
            case Scenario::Sweep: run_sweep(cfg, out); break;
            case Scenario::Simulate: run_simulate(cfg, out); break;
            case Scenario::Reheat: run_reheat(cfg, out); break;
            case Scenario::Thermometry: run_thermometry(cfg, out); break;
            case Scenario::Sql: run_sql(cfg, out); break;
            case Scenario::Optics: run_optics(cfg, out); break;
            case Scenario::Calibrate: run_calibrate(cfg, out); break;
            case Scenario::Verify: result.suites = run_verify(cfg, out); break;
        }
        result.artifacts = out.finalize();

        Json manifest;
        manifest["toolkit"] = "levikal";
        manifest["version"] = kToolkitVersion;
        manifest["scenario"] = scenario_name(cfg.scenario);
        manifest["seed"] = cfg.seed;
        Json inputs;
        if (!config_path.empty()) {
            inputs["config_path"] = fs::path(config_path).filename().string();
            inputs["config_sha256"] = sha256_file(config_path);
        }
        inputs["config"] = cfg.echo;
        manifest["inputs"] = inputs;
        Json arts = Json::array();
        for (const auto& a : result.artifacts) {
            arts.push_back({{"file", a.name}, {"sha256", a.sha256}, {"bytes", a.bytes}});
        }
        manifest["artifacts"] = arts;
        if (cfg.scenario == Scenario::Verify) {
            Json suites = Json::array();
            for (const auto& s : result.suites) suites.push_back({{"name", s.name}, {"pass", s.pass}});
            manifest["suites"] = suites;
        }
        result.manifest_path = (out.dir() / "manifest.json").string();
        write_json(result.manifest_path, manifest);
        if (log) {
            for (const auto& a : result.artifacts) *log << a.name << '\n';
        }
    } catch (...) {
        out.remove_all();
        throw;
    }
    return result;
}

}  // namespace levikal::cli

#include "levikal/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "levikal/constants.hpp"
#include "levikal/error.hpp"

namespace levikal::cli {

namespace {

const std::vector<std::pair<Scenario, std::string>>& scenario_table() {
    static const std::vector<std::pair<Scenario, std::string>> table = {
        {Scenario::Budget, "budget"},         {Scenario::Gains, "gains"},
        {Scenario::Sweep, "sweep"},           {Scenario::Simulate, "simulate"},
        {Scenario::Reheat, "reheat"},         {Scenario::Thermometry, "thermometry"},
        {Scenario::Sql, "sql"},               {Scenario::Optics, "optics"},
        {Scenario::Calibrate, "calibrate"},   {Scenario::Verify, "verify"},
    };
    return table;
}

enum class Range { Any, Positive, NonNegative, Unit };

// Reads one JSON object, tracking consumed keys so the rest can be reported.
class Reader {
public:
    Reader(const Json& obj, std::string path, bool strict, std::vector<std::string>& warnings)
        : obj_(obj), path_(std::move(path)), strict_(strict), warnings_(warnings) {
        if (!obj_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) {
        seen_.insert(key);
        return obj_.contains(key);
    }

    const Json& raw(const std::string& key) {
        seen_.insert(key);
        return obj_.at(key);
    }

    void number(const std::string& key, double& out, Range range = Range::Any) {
        if (!has(key)) return;
        const Json& v = obj_.at(key);
        if (!v.is_number()) throw ConfigError(field(key), "expected a number");
        out = v.get<double>();
        check(key, out, range);
    }

    template <class Int>
    void integer(const std::string& key, Int& out, long long min_value) {
        if (!has(key)) return;
        const Json& v = obj_.at(key);
        if (!v.is_number_integer() && !(v.is_number() && std::floor(v.get<double>()) == v.get<double>())) {
            throw ConfigError(field(key), "expected an integer");
        }
        const long long x = v.is_number_unsigned() ? static_cast<long long>(v.get<unsigned long long>())
                                                   : v.get<long long>();
        if (x < min_value) throw ConfigError(field(key), "must be >= " + std::to_string(min_value));
        out = static_cast<Int>(x);
    }

    void boolean(const std::string& key, bool& out) {
        if (!has(key)) return;
        const Json& v = obj_.at(key);
        if (!v.is_boolean()) throw ConfigError(field(key), "expected true or false");
        out = v.get<bool>();
    }

    void string(const std::string& key, std::string& out) {
        if (!has(key)) return;
        const Json& v = obj_.at(key);
        if (!v.is_string()) throw ConfigError(field(key), "expected a string");
        out = v.get<std::string>();
    }

    void numbers(const std::string& key, std::vector<double>& out, Range range = Range::Any) {
        if (!has(key)) return;
        const Json& v = obj_.at(key);
        if (!v.is_array()) throw ConfigError(field(key), "expected an array of numbers");
        out.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::string f = key + "[" + std::to_string(i) + "]";
            if (!v[i].is_number()) throw ConfigError(field(f), "expected a number");
            out.push_back(v[i].get<double>());
            check(f, out.back(), range);
        }
    }

    void object(const std::string& key, const std::function<void(Reader&)>& body) {
        if (!has(key)) return;
        Reader sub(obj_.at(key), field(key), strict_, warnings_);
        body(sub);
        sub.finish();
    }

    void finish() {
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (seen_.count(it.key())) continue;
            const std::string f = field(it.key());
            if (strict_) throw ConfigError(f, "unknown key");
            warnings_.push_back(f + ": unknown key ignored");
        }
    }

private:
    void check(const std::string& key, double v, Range range) const {
        if (!std::isfinite(v)) throw ConfigError(field(key), "must be finite");
        switch (range) {
            case Range::Positive:
                if (!(v > 0.0)) throw ConfigError(field(key), "must be > 0");
                break;
            case Range::NonNegative:
                if (v < 0.0) throw ConfigError(field(key), "must be >= 0");
                break;
            case Range::Unit:
                if (!(v > 0.0 && v <= 1.0)) throw ConfigError(field(key), "must lie in (0, 1]");
                break;
            case Range::Any:
                break;
        }
    }

    const Json& obj_;
    std::string path_;
    bool strict_;
    std::vector<std::string>& warnings_;
    std::set<std::string> seen_;
};

void read_params(Reader& r, ExperimentParams& p) {
    r.number("radius", p.radius, Range::Positive);
    r.number("mass", p.mass, Range::Positive);
    r.number("omega_z", p.omega_z, Range::Positive);
    r.number("wavelength", p.wavelength, Range::Positive);
    r.number("p_scatt", p.p_scatt, Range::Positive);
    r.number("pressure", p.pressure, Range::NonNegative);
    r.number("temperature", p.temperature, Range::Positive);
    r.number("gas_molar_mass", p.gas_molar_mass, Range::Positive);
    r.number("gas_viscosity", p.gas_viscosity, Range::Positive);
    r.number("na", p.na, Range::Unit);
    r.number("gouy_a", p.gouy_a, Range::NonNegative);
    if (p.gouy_a > 1.0) throw ConfigError(r.field("gouy_a"), "must lie in [0, 1]");
    r.number("s_z_imp", p.s_z_imp, Range::Positive);
    if (r.has("detection_efficiencies")) {
        const Json& arr = r.raw("detection_efficiencies");
        const std::string base = r.field("detection_efficiencies");
        if (!arr.is_array()) throw ConfigError(base, "expected an array");
        p.detection_efficiencies.clear();
        for (std::size_t i = 0; i < arr.size(); ++i) {
            std::vector<std::string> dummy;
            EfficiencyEntry e;
            Reader er(arr[i], base + "[" + std::to_string(i) + "]", true, dummy);
            er.string("name", e.name);
            er.number("eta_photon", e.eta_photon, Range::Unit);
            er.number("eta_info", e.eta_info, Range::Unit);
            er.finish();
            p.detection_efficiencies.push_back(e);
        }
    }
}

void read_model(Reader& r, ModelConfig& m) {
    r.number("t_s", m.t_s, Range::Positive);
    r.string("noise_model", m.noise_model);
    if (m.noise_model != "identified" && m.noise_model != "first_principles") {
        throw ConfigError(r.field("noise_model"), "must be \"identified\" or \"first_principles\"");
    }
    r.object("measured_noise", [&](Reader& s) {
        s.number("force_variance", m.measured.force_variance, Range::NonNegative);
        s.number("measurement_variance", m.measured.measurement_variance, Range::Positive);
        s.number("sample_rate", m.measured.sample_rate, Range::Positive);
    });
    r.object("colored_noise", [&](Reader& s) {
        m.colored_cutoff = 0.0;
        s.number("cutoff", m.colored_cutoff, Range::NonNegative);
        s.number("noise_gain", m.colored_gain, Range::NonNegative);
    });
}

InitialState parse_initial(const Json& v, const std::string& field) {
    if (v.is_array()) {
        Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) throw ConfigError(field, "initial state vector must be numeric");
            x(static_cast<Eigen::Index>(i)) = v[i].get<double>();
        }
        return InitialState::vector(x);
    }
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "stationary") return InitialState::stationary();
        if (s.rfind("thermal(", 0) == 0 && s.back() == ')') {
            try {
                std::size_t used = 0;
                const std::string inner = s.substr(8, s.size() - 9);
                const double n0 = std::stod(inner, &used);
                if (used != inner.size() || !(n0 >= 0.0)) throw std::invalid_argument("n0");
                return InitialState::thermal(n0);
            } catch (const std::exception&) {
                throw ConfigError(field, "thermal(n0) needs a number n0 >= 0");
            }
        }
    }
    throw ConfigError(field, "expected a vector, \"thermal(n0)\" or \"stationary\"");
}

void read_simulate(Reader& r, SimulateConfig& s) {
    r.integer("steps", s.sim.steps, 1);
    r.integer("record_stride", s.sim.record_stride, 1);
    r.number("t_s", s.sim.t_s, Range::NonNegative);
    if (r.has("initial_state")) s.sim.initial = parse_initial(r.raw("initial_state"), r.field("initial_state"));
    if (r.has("feedback")) {
        const Json& arr = r.raw("feedback");
        const std::string base = r.field("feedback");
        if (!arr.is_array()) throw ConfigError(base, "expected a list of [step, \"on\"|\"off\"]");
        s.sim.feedback.clear();
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const Json& e = arr[i];
            const std::string f = base + "[" + std::to_string(i) + "]";
            if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_string()) {
                throw ConfigError(f, "expected [step, \"on\"|\"off\"]");
            }
            const std::string state = e[1].get<std::string>();
            if (state != "on" && state != "off") throw ConfigError(f, "state must be \"on\" or \"off\"");
            const long long step = e[0].get<long long>();
            if (step < 0) throw ConfigError(f, "step must be >= 0");
            if (!s.sim.feedback.empty() && step < s.sim.feedback.back().step) {
                throw ConfigError(f, "schedule must be sorted by step");
            }
            s.sim.feedback.push_back({step, state == "on"});
        }
    }
    r.boolean("open_loop", s.open_loop);
    r.boolean("process_noise", s.sim.process_noise);
    r.boolean("measurement_noise", s.sim.measurement_noise);
    r.object("fixed_point", [&](Reader& f) {
        s.fixed_point = true;
        s.fixed_point_cfg.input_full_scale = 0.0;
        s.fixed_point_cfg.output_full_scale = 0.0;
        f.integer("word_bits", s.fixed_point_cfg.word_bits, 8);
        f.integer("frac_bits", s.fixed_point_cfg.frac_bits, 1);
        f.integer("io_bits", s.fixed_point_cfg.io_bits, 2);
        f.number("input_full_scale", s.fixed_point_cfg.input_full_scale, Range::NonNegative);
        f.number("output_full_scale", s.fixed_point_cfg.output_full_scale, Range::NonNegative);
        if (s.fixed_point_cfg.word_bits > 48) throw ConfigError(f.field("word_bits"), "must be <= 48");
        if (s.fixed_point_cfg.frac_bits >= s.fixed_point_cfg.word_bits) {
            throw ConfigError(f.field("frac_bits"), "must be < word_bits");
        }
        if (s.fixed_point_cfg.io_bits > 32) throw ConfigError(f.field("io_bits"), "must be <= 32");
    });
    r.number("whiteness_band_lo", s.whiteness_band_lo, Range::NonNegative);
    r.number("whiteness_band_hi", s.whiteness_band_hi, Range::NonNegative);
    r.number("highpass_cutoff", s.highpass_cutoff, Range::NonNegative);
    r.integer("psd_segment", s.psd_segment, 16);
}

void read_floors(Reader& r, FloorModel& f) {
    r.number("f_het", f.f_het, Range::Positive);
    r.number("shot_noise", f.shot_noise, Range::Positive);
    r.number("detector_dark", f.detector_dark, Range::NonNegative);
    r.number("analyzer_dark", f.analyzer_dark, Range::NonNegative);
    r.number("detector_cutoff", f.detector_cutoff, Range::Positive);
    r.number("phase_noise_level", f.phase_noise_level, Range::NonNegative);
    r.number("phase_noise_width", f.phase_noise_width, Range::Positive);
    r.number("one_over_f", f.one_over_f, Range::NonNegative);
    r.number("signal_area", f.signal_area, Range::Positive);
}

ScenarioConfig parse_document(const Json& doc, bool strict, std::optional<Scenario> expected,
                              std::vector<std::string>& warnings) {
    ScenarioConfig c;
    c.echo = doc;
    Reader root(doc, "", strict, warnings);

    std::string name;
    root.string("scenario", name);
    if (!name.empty()) {
        const auto s = parse_scenario(name);
        if (!s) throw ConfigError("scenario", "unknown scenario \"" + name + "\"");
        if (expected && *expected != *s) {
            throw ConfigError("scenario", "config is for \"" + name + "\" but \"" +
                                              scenario_name(*expected) + "\" was requested");
        }
        c.scenario = *s;
    } else if (expected) {
        c.scenario = *expected;
    } else {
        throw ConfigError("scenario", "required");
    }

    root.integer("seed", c.seed, 0);
    root.string("output_dir", c.output_dir);
    root.object("params", [&](Reader& r) { read_params(r, c.params); });
    root.object("model", [&](Reader& r) { read_model(r, c.model); });
    root.numbers("gain_grid", c.gain_grid, Range::Positive);
    root.number("g_fb", c.g_fb, Range::Positive);
    if (c.g_fb == 0.0) c.g_fb = constants::two_pi * 110e3;
    root.object("sim", [&](Reader& r) { read_simulate(r, c.simulate); });
    root.object("reheat", [&](Reader& r) {
        r.number("pressure", c.reheat.pressure, Range::NonNegative);
        r.number("n0", c.reheat.n0, Range::NonNegative);
        r.number("duration", c.reheat.duration, Range::Positive);
        r.integer("ensemble", c.reheat.ensemble, 1);
        r.integer("steps_per_period", c.reheat.steps_per_period, 4);
    });
    root.object("thermometry", [&](Reader& r) {
        r.numbers("occupations", c.thermometry.occupations, Range::NonNegative);
        r.number("ensemble_occupation", c.thermometry.ensemble_occupation, Range::NonNegative);
        r.integer("ensemble", c.thermometry.ensemble, 2);
        r.number("span", c.thermometry.synth.span, Range::Positive);
        r.number("bin_width", c.thermometry.synth.bin_width, Range::Positive);
        r.integer("averages", c.thermometry.synth.averages, 1);
        r.object("floors", [&](Reader& f) { read_floors(f, c.thermometry.floors); });
    });
    root.object("sql", [&](Reader& r) {
        r.number("low_occupation", c.sql.low_occupation, Range::Positive);
        r.number("high_occupation", c.sql.high_occupation, Range::Positive);
        r.number("span", c.sql.span, Range::Positive);
        r.integer("points", c.sql.points, 3);
    });
    root.object("optics", [&](Reader& r) {
        r.numbers("magnifications", c.optics.magnifications, Range::Positive);
        r.number("fiber_waist", c.optics.fiber_waist, Range::Positive);
    });
    root.object("calibrate", [&](Reader& r) {
        r.number("c_mv", c.calibrate.c_mv, Range::Positive);
        r.number("c_nv", c.calibrate.c_nv, Range::Positive);
        r.numbers("position_gains", c.calibrate.position_gains, Range::Positive);
        r.integer("position_steps", c.calibrate.position_steps, 1000);
        r.number("drive_gain", c.calibrate.drive_gain, Range::Positive);
        r.numbers("drive_frequencies", c.calibrate.drive_frequencies, Range::Positive);
        r.numbers("drive_voltages", c.calibrate.drive_voltages, Range::Positive);
        r.integer("drive_steps", c.calibrate.drive_steps, 1000);
        r.integer("psd_segment", c.calibrate.psd_segment, 64);
    });
    root.object("verify", [&](Reader& r) {
        if (!r.has("suites")) return;
        const Json& arr = r.raw("suites");
        if (!arr.is_array()) throw ConfigError(r.field("suites"), "expected an array of names");
        for (const auto& v : arr) {
            if (!v.is_string()) throw ConfigError(r.field("suites"), "expected an array of names");
            c.verify.suites.push_back(v.get<std::string>());
        }
    });
    root.finish();

    // Scenario coupling.
    if (c.scenario == Scenario::Sweep && c.gain_grid.empty()) {
        throw ConfigError("gain_grid", "gain_grid required");
    }
    if (c.scenario == Scenario::Simulate && !doc.contains("sim")) {
        throw ConfigError("sim", "sim block required for scenario simulate");
    }
    if (c.scenario == Scenario::Thermometry && c.thermometry.occupations.empty()) {
        throw ConfigError("thermometry.occupations", "at least one occupation required");
    }
    if (c.simulate.whiteness_band_hi > 0.0 &&
        c.simulate.whiteness_band_hi <= c.simulate.whiteness_band_lo) {
        throw ConfigError("sim.whiteness_band_hi", "must exceed whiteness_band_lo");
    }
    try {
        c.params.validate();
    } catch (const InvalidParameter& e) {
        throw ConfigError("params", e.what());
    }
    return c;
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace

std::string scenario_name(Scenario s) {
    for (const auto& [k, v] : scenario_table()) {
        if (k == s) return v;
    }
    return "unknown";
}

std::optional<Scenario> parse_scenario(const std::string& name) {
    for (const auto& [k, v] : scenario_table()) {
        if (v == name) return k;
    }
    return std::nullopt;
}

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& kv : scenario_table()) out.push_back(kv.second);
        return out;
    }();
    return names;
}

ValidationResult validate_config_text(const std::string& text, bool strict,
                                      std::optional<Scenario> expected_scenario) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte);
        std::ostringstream msg;
        msg << "parse error at line " << line << ", column " << col;
        throw ConfigError("", msg.str());
    }
    ValidationResult res;
    res.config = parse_document(doc, strict, expected_scenario, res.warnings);
    return res;
}

ValidationResult validate_config(const std::string& path, bool strict,
                                 std::optional<Scenario> expected_scenario) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return validate_config_text(ss.str(), strict, expected_scenario);
}

}  // namespace levikal::cli

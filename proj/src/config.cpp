#include "impactosc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "impactosc/error.hpp"

namespace impactosc {

using nlohmann::json;

namespace {

std::string fmt(double v)
{
    std::ostringstream o;
    o << v;
    return o.str();
}

class Reader {
public:
    explicit Reader(std::vector<std::string>& out) : out_(out) {}

    void fail(const std::string& msg) { out_.push_back(msg); }

    void allow_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys)
    {
        if (!obj.is_object()) return;
        for (const auto& [k, _] : obj.items()) {
            if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
                fail(path + k + ": unknown key");
            }
        }
    }

    const json* section(const json& doc, const char* key)
    {
        if (!doc.contains(key)) return nullptr;
        const json& s = doc[key];
        if (!s.is_object()) {
            fail(std::string(key) + ": expected an object");
            return nullptr;
        }
        return &s;
    }

    double number(const json* obj, const char* key, const std::string& path, double def)
    {
        if (!obj || !obj->contains(key)) return def;
        const json& v = (*obj)[key];
        if (!v.is_number()) {
            fail(path + key + ": expected a number");
            return def;
        }
        return v.get<double>();
    }

    bool boolean(const json* obj, const char* key, const std::string& path, bool def)
    {
        if (!obj || !obj->contains(key)) return def;
        const json& v = (*obj)[key];
        if (!v.is_boolean()) {
            fail(path + key + ": expected true or false");
            return def;
        }
        return v.get<bool>();
    }

    std::string text(const json* obj, const char* key, const std::string& path, const std::string& def)
    {
        if (!obj || !obj->contains(key)) return def;
        const json& v = (*obj)[key];
        if (!v.is_string()) {
            fail(path + key + ": expected a string");
            return def;
        }
        return v.get<std::string>();
    }

    std::int64_t integer(const json* obj, const char* key, const std::string& path, std::int64_t def)
    {
        if (!obj || !obj->contains(key)) return def;
        const json& v = (*obj)[key];
        if (!v.is_number_integer()) {
            fail(path + key + ": expected an integer");
            return def;
        }
        return v.get<std::int64_t>();
    }

    std::vector<double> numbers(const json& v, const std::string& path)
    {
        std::vector<double> out;
        if (!v.is_array()) {
            fail(path + ": expected an array of numbers");
            return out;
        }
        for (const auto& e : v) {
            if (!e.is_number()) {
                fail(path + ": expected an array of numbers");
                return {};
            }
            out.push_back(e.get<double>());
        }
        return out;
    }

    /// Array, {"log": [lo, hi, n]} or {"linear": [lo, hi, n]}. Sets `present`.
    std::vector<double> grid(const json* obj, const char* key, const std::string& path, bool& present)
    {
        present = obj && obj->contains(key);
        if (!present) return {};
        const json& v = (*obj)[key];
        const std::string where = path + key;
        if (v.is_array()) return numbers(v, where);
        if (v.is_object() && v.size() == 1 && (v.contains("log") || v.contains("linear"))) {
            const bool log = v.contains("log");
            const json& spec = log ? v["log"] : v["linear"];
            if (!spec.is_array() || spec.size() != 3 || !spec[0].is_number() || !spec[1].is_number() ||
                !spec[2].is_number_integer()) {
                fail(where + ": expected [lo, hi, count] with an integer count");
                return {};
            }
            const double lo = spec[0].get<double>(), hi = spec[1].get<double>();
            const auto n = spec[2].get<std::int64_t>();
            if (n < 0) {
                fail(where + ": count must be >= 0");
                return {};
            }
            if (log && !(lo > 0.0 && hi > 0.0)) {
                fail(where + ": log grid needs positive bounds");
                return {};
            }
            std::vector<double> out;
            for (std::int64_t i = 0; i < n; ++i) {
                const double s = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
                out.push_back(log ? lo * std::pow(hi / lo, s) : lo + (hi - lo) * s);
            }
            return out;
        }
        fail(where + ": expected an array or {\"log\"|\"linear\": [lo, hi, count]}");
        return {};
    }

private:
    std::vector<std::string>& out_;
};

FourierSeries read_series(Reader& r, const json& v, const std::string& path)
{
    if (v.is_number()) return FourierSeries::constant(v.get<double>());
    if (!v.is_object()) {
        r.fail(path + ": expected a number or {a0, cos, sin}");
        return {};
    }
    r.allow_keys(v, path + ".", {"a0", "cos", "sin"});
    const double a0 = r.number(&v, "a0", path + ".", 0.0);
    std::vector<double> c, s;
    if (v.contains("cos")) c = r.numbers(v["cos"], path + ".cos");
    if (v.contains("sin")) s = r.numbers(v["sin"], path + ".sin");
    return FourierSeries(a0, c, s);
}

void require_grid(Reader& r, bool present, const std::string& name, const std::string& experiment)
{
    if (!present) r.fail("grids." + name + ": required by experiment '" + experiment + "'");
}

void require_scaling_grid(Reader& r, const std::vector<double>& g, const std::string& name)
{
    if (g.empty()) return;
    if (g.size() < 8) r.fail("grids." + name + ": a scaling fit needs at least 8 points");
    const auto [lo, hi] = std::minmax_element(g.begin(), g.end());
    if (*lo > 0.0 && std::log10(*hi / *lo) < 3.0 - 1e-9) {
        r.fail("grids." + name + ": a scaling fit needs a span of at least 3 decades");
    }
}

}  // namespace

json parse_json_text(const std::string& text, const std::string& origin)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < upto; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::string what = e.what();
        const auto pos = what.find("parse error");
        if (pos != std::string::npos) what = what.substr(pos);
        throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
    }
}

json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json_text(ss.str(), path.string());
}

ConfigCheck check_config(const json& doc)
{
    ConfigCheck out;
    auto& c = out.config;
    Reader r(out.violations);
    c.source = doc;
    if (!doc.is_object()) {
        r.fail("top level: expected an object");
        return out;
    }
    r.allow_keys(doc, "", {"experiment", "validation_mode", "seed", "potential", "integrator", "model", "grids",
                           "orbit", "successor", "scaling", "sweep", "gentrig", "output", "description"});

    c.experiment = r.text(&doc, "experiment", "", "");
    const auto& names = experiment_names();
    if (c.experiment.empty()) r.fail("experiment: missing");
    else if (std::find(names.begin(), names.end(), c.experiment) == names.end()) {
        r.fail("experiment: unknown experiment '" + c.experiment + "'");
    }
    c.validation_mode = r.boolean(&doc, "validation_mode", "", false);
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) r.fail("seed: expected a non-negative integer");
        else c.seed = doc["seed"].get<std::uint64_t>();
    }

    // potential
    const json* pot = r.section(doc, "potential");
    r.allow_keys(pot ? *pot : json(), "potential.", {"n", "coeffs"});
    const auto n = r.integer(pot, "n", "potential.", 1);
    if (n < 0 || n > 30) r.fail("potential.n: must lie in [0, 30]");
    else if (n == 0 && !c.validation_mode) r.fail("potential.n: n = 0 is allowed only with validation_mode = true");
    c.potential = PotentialSpec::unperturbed(static_cast<int>(std::clamp<std::int64_t>(n, 0, 30)));
    if (pot && pot->contains("coeffs")) {
        const json& cs = (*pot)["coeffs"];
        if (!cs.is_array()) r.fail("potential.coeffs: expected an array");
        else if (cs.size() != c.potential.coeffs.size()) {
            r.fail("potential.coeffs: expected " + std::to_string(c.potential.coeffs.size()) + " entries (p_0 .. p_2n), got " +
                   std::to_string(cs.size()));
        } else {
            for (std::size_t i = 0; i < cs.size(); ++i) {
                c.potential.coeffs[i] = read_series(r, cs[i], "potential.coeffs[" + std::to_string(i) + "]");
            }
        }
    }
    try {
        c.potential.validate();
    } catch (const ConfigError& e) {
        r.fail(e.what());
    }

    // integrator and model
    const json* integ = r.section(doc, "integrator");
    r.allow_keys(integ ? *integ : json(), "integrator.", {"rel_tol", "abs_tol", "max_step", "event_tol"});
    c.integrator.rel_tol = r.number(integ, "rel_tol", "integrator.", c.integrator.rel_tol);
    c.integrator.abs_tol = r.number(integ, "abs_tol", "integrator.", c.integrator.abs_tol);
    c.integrator.max_step = r.number(integ, "max_step", "integrator.", c.integrator.max_step);
    c.integrator.event_tol = r.number(integ, "event_tol", "integrator.", c.integrator.event_tol);
    for (auto [name, v] : {std::pair{"rel_tol", c.integrator.rel_tol}, std::pair{"abs_tol", c.integrator.abs_tol},
                           std::pair{"max_step", c.integrator.max_step}, std::pair{"event_tol", c.integrator.event_tol}}) {
        if (!(v > 0.0) || !std::isfinite(v)) r.fail(std::string("integrator.") + name + ": must be positive");
    }

    const json* model = r.section(doc, "model");
    r.allow_keys(model ? *model : json(), "model.", {"table_intervals", "i_min", "fd_delta", "backend"});
    const auto intervals = r.integer(model, "table_intervals", "model.", 1024);
    if (intervals < 256) r.fail("model.table_intervals: must be >= 256");
    c.table_intervals = static_cast<std::size_t>(std::max<std::int64_t>(intervals, 256));
    c.i_min = r.number(model, "i_min", "model.", c.i_min);
    if (!(c.i_min > 0.0)) r.fail("model.i_min: must be positive");
    c.fd_delta = r.number(model, "fd_delta", "model.", c.fd_delta);
    if (!(c.fd_delta > 0.0 && c.fd_delta < 0.1)) r.fail("model.fd_delta: must lie in (0, 0.1)");
    const std::string backend = r.text(model, "backend", "model.", "physical");
    if (backend == "physical") c.backend = Backend::Physical;
    else if (backend == "direct") c.backend = Backend::Direct;
    else if (backend == "both") c.compare_backends = true;
    else r.fail("model.backend: expected physical, direct or both");

    // grids
    const json* grids = r.section(doc, "grids");
    r.allow_keys(grids ? *grids : json(), "grids.", {"eps", "upsilon0", "theta0", "I", "tau"});
    bool has_eps, has_u, has_th, has_I, has_tau;
    c.eps = r.grid(grids, "eps", "grids.", has_eps);
    c.upsilon0 = r.grid(grids, "upsilon0", "grids.", has_u);
    c.theta0 = r.grid(grids, "theta0", "grids.", has_th);
    c.I = r.grid(grids, "I", "grids.", has_I);
    c.tau = r.grid(grids, "tau", "grids.", has_tau);
    for (auto [name, present, grid] : {std::tuple{"eps", has_eps, &c.eps}, std::tuple{"upsilon0", has_u, &c.upsilon0},
                                       std::tuple{"theta0", has_th, &c.theta0}, std::tuple{"I", has_I, &c.I},
                                       std::tuple{"tau", has_tau, &c.tau}}) {
        if (present && grid->empty()) r.fail(std::string("grids.") + name + ": grid is empty");
    }
    for (double e : c.eps) {
        if (!(e > 0.0)) {
            r.fail("grids.eps: values must be positive");
            break;
        }
    }
    for (double u : c.upsilon0) {
        if (!(u >= 1.0 && u <= 2.0)) {
            r.fail("grids.upsilon0: values must lie in [1, 2]");
            break;
        }
    }
    for (double t : c.theta0) {
        if (!std::isfinite(t)) r.fail("grids.theta0: values must be finite");
    }
    for (double t : c.tau) {
        if (!std::isfinite(t)) r.fail("grids.tau: values must be finite");
    }
    for (double I : c.I) {
        if (!(I >= c.i_min)) {
            r.fail("grids.I: values must be >= model.i_min = " + fmt(c.i_min));
            break;
        }
    }

    // experiment sections
    const json* orbit = r.section(doc, "orbit");
    r.allow_keys(orbit ? *orbit : json(), "orbit.", {"x0", "v0", "t0", "t_end", "sample_dt"});
    c.orbit.x0 = r.number(orbit, "x0", "orbit.", c.orbit.x0);
    c.orbit.v0 = r.number(orbit, "v0", "orbit.", c.orbit.v0);
    c.orbit.t0 = r.number(orbit, "t0", "orbit.", c.orbit.t0);
    c.orbit.t_end = r.number(orbit, "t_end", "orbit.", c.orbit.t_end);
    c.orbit.sample_dt = r.number(orbit, "sample_dt", "orbit.", c.orbit.sample_dt);

    const json* succ = r.section(doc, "successor");
    r.allow_keys(succ ? *succ : json(), "successor.", {"iterates", "fit_iterates", "harmonics", "tolerance"});
    c.successor.iterates = static_cast<std::size_t>(std::max<std::int64_t>(0, r.integer(succ, "iterates", "successor.", 2000)));
    c.successor.fit_iterates =
        static_cast<std::size_t>(std::max<std::int64_t>(0, r.integer(succ, "fit_iterates", "successor.", 1000)));
    c.successor.harmonics = static_cast<int>(r.integer(succ, "harmonics", "successor.", 12));
    c.successor.tolerance = r.number(succ, "tolerance", "successor.", 1e-3);

    const json* scal = r.section(doc, "scaling");
    r.allow_keys(scal ? *scal : json(), "scaling.", {"which", "max_order", "residual_bound", "derivative_slack"});
    if (scal && scal->contains("which")) {
        const json& w = (*scal)["which"];
        c.scaling.which.clear();
        if (w.is_string()) c.scaling.which.push_back(w.get<std::string>());
        else if (w.is_array()) {
            for (const auto& e : w) {
                if (e.is_string()) c.scaling.which.push_back(e.get<std::string>());
                else r.fail("scaling.which: entries must be strings");
            }
        } else {
            r.fail("scaling.which: expected a string or an array of strings");
        }
        for (const auto& s : c.scaling.which) {
            if (s != "R" && s != "f1" && s != "f2") r.fail("scaling.which: unknown quantity '" + s + "'");
        }
        if (c.scaling.which.empty()) r.fail("scaling.which: empty");
    }
    c.scaling.max_order = static_cast<int>(r.integer(scal, "max_order", "scaling.", 3));
    c.scaling.residual_bound = r.number(scal, "residual_bound", "scaling.", 0.4);
    c.scaling.derivative_slack = r.number(scal, "derivative_slack", "scaling.", 0.15);

    const json* sw = r.section(doc, "sweep");
    r.allow_keys(sw ? *sw : json(), "sweep.", {"horizon", "checkpoints", "threshold", "ics", "energy_range"});
    c.sweep.horizon = r.number(sw, "horizon", "sweep.", c.sweep.horizon);
    c.sweep.checkpoints = static_cast<int>(r.integer(sw, "checkpoints", "sweep.", 10));
    c.sweep.threshold = r.number(sw, "threshold", "sweep.", c.sweep.threshold);
    if (sw && sw->contains("energy_range")) {
        const json& er = (*sw)["energy_range"];
        if (!er.is_object()) r.fail("sweep.energy_range: expected {min, max, count}");
        else {
            r.allow_keys(er, "sweep.energy_range.", {"min", "max", "count"});
            c.sweep.e_min = r.number(&er, "min", "sweep.energy_range.", c.sweep.e_min);
            c.sweep.e_max = r.number(&er, "max", "sweep.energy_range.", c.sweep.e_max);
            c.sweep.count = static_cast<std::size_t>(std::max<std::int64_t>(0, r.integer(&er, "count", "sweep.energy_range.", 20)));
        }
    }
    if (sw && sw->contains("ics")) {
        const json& ics = (*sw)["ics"];
        if (!ics.is_array()) r.fail("sweep.ics: expected an array of {x, v, t}");
        else {
            for (std::size_t i = 0; i < ics.size(); ++i) {
                const std::string p = "sweep.ics[" + std::to_string(i) + "].";
                if (!ics[i].is_object()) {
                    r.fail(p + ": expected {x, v, t}");
                    continue;
                }
                r.allow_keys(ics[i], p, {"x", "v", "t"});
                PhaseState s{r.number(&ics[i], "x", p, 0.0), r.number(&ics[i], "v", p, 0.0), r.number(&ics[i], "t", p, 0.0), 0};
                if (!(s.x >= 0.0)) r.fail(p + "x: must be >= 0");
                c.sweep.ics.push_back(s);
            }
            if (c.sweep.ics.empty()) r.fail("sweep.ics: empty");
        }
    }

    const json* gt = r.section(doc, "gentrig");
    r.allow_keys(gt ? *gt : json(), "gentrig.", {"n", "samples", "tol"});
    if (gt && gt->contains("n")) {
        c.gentrig.n_values.clear();
        for (double v : r.numbers((*gt)["n"], "gentrig.n")) c.gentrig.n_values.push_back(static_cast<int>(v));
        if (c.gentrig.n_values.empty()) r.fail("gentrig.n: empty");
    }
    for (int v : c.gentrig.n_values) {
        if (v < 0 || v > 30) r.fail("gentrig.n: values must lie in [0, 30]");
        else if (v == 0 && !c.validation_mode) r.fail("gentrig.n: n = 0 is allowed only with validation_mode = true");
    }
    c.gentrig.samples = static_cast<std::size_t>(std::max<std::int64_t>(0, r.integer(gt, "samples", "gentrig.", 4096)));
    c.gentrig.tol = r.number(gt, "tol", "gentrig.", 1e-12);

    const json* outp = r.section(doc, "output");
    r.allow_keys(outp ? *outp : json(), "output.", {"directory", "formats"});
    c.output.directory = r.text(outp, "directory", "output.", c.output.directory);
    if (c.output.directory.empty()) r.fail("output.directory: empty");
    if (outp && outp->contains("formats")) {
        const json& f = (*outp)["formats"];
        c.output.csv = c.output.svg = false;
        if (!f.is_array()) r.fail("output.formats: expected an array");
        else {
            for (const auto& e : f) {
                const std::string s = e.is_string() ? e.get<std::string>() : "";
                if (s == "csv") c.output.csv = true;
                else if (s == "svg") c.output.svg = true;
                else r.fail("output.formats: unknown format (expected csv or svg)");
            }
        }
    }

    // per-experiment requirements
    const std::string& ex = c.experiment;
    auto check_regime = [&] {
        if (c.eps.empty() || c.upsilon0.empty()) return;
        const double worst = *std::min_element(c.upsilon0.begin(), c.upsilon0.end()) /
                             *std::max_element(c.eps.begin(), c.eps.end());
        if (worst < c.i_min) {
            r.fail("grids.eps: upsilon0/eps = " + fmt(worst) + " falls below model.i_min = " + fmt(c.i_min) +
                   " (decrease eps)");
        }
    };
    if (ex == "orbit") {
        if (!(c.orbit.x0 >= 0.0)) r.fail("orbit.x0: must be >= 0");
        if (c.orbit.x0 == 0.0 && !(c.orbit.v0 > 0.0)) r.fail("orbit.v0: must be > 0 when x0 = 0");
        if (!(c.orbit.t_end > c.orbit.t0)) r.fail("orbit.t_end: must exceed orbit.t0");
        if (!(c.orbit.sample_dt >= 0.0)) r.fail("orbit.sample_dt: must be >= 0");
    } else if (ex == "successor" || ex == "poincare") {
        require_grid(r, has_eps, "eps", ex);
        require_grid(r, has_u, "upsilon0", ex);
        require_grid(r, has_th, "theta0", ex);
        check_regime();
        if (ex == "successor") {
            if (c.successor.iterates < 1) r.fail("successor.iterates: must be >= 1");
            if (c.successor.harmonics < 0) r.fail("successor.harmonics: must be >= 0");
            if (c.successor.fit_iterates >= c.successor.iterates) {
                r.fail("successor.fit_iterates: must be smaller than successor.iterates");
            }
            if (static_cast<std::size_t>(4 * (2 * std::max(c.successor.harmonics, 0) + 1)) > c.successor.fit_iterates) {
                r.fail("successor.harmonics: needs fit_iterates >= 4 (2 harmonics + 1)");
            }
            if (!(c.successor.tolerance > 0.0)) r.fail("successor.tolerance: must be positive");
        }
    } else if (ex == "scaling") {
        const auto& w = c.scaling.which;
        const bool wants_f = std::find(w.begin(), w.end(), "f1") != w.end() || std::find(w.begin(), w.end(), "f2") != w.end();
        const bool wants_R = std::find(w.begin(), w.end(), "R") != w.end();
        if (wants_f) {
            require_grid(r, has_eps, "eps", ex);
            require_grid(r, has_u, "upsilon0", ex);
            require_grid(r, has_th, "theta0", ex);
            require_scaling_grid(r, c.eps, "eps");
            check_regime();
        }
        if (wants_R) {
            require_grid(r, has_I, "I", ex);
            require_grid(r, has_th, "theta0", ex);
            require_grid(r, has_tau, "tau", ex);
            require_scaling_grid(r, c.I, "I");
            if (c.scaling.max_order < 0 || c.scaling.max_order > 5) r.fail("scaling.max_order: must lie in [0, 5]");
        }
    } else if (ex == "sweep") {
        if (!(c.sweep.horizon > 0.0)) r.fail("sweep.horizon: must be positive");
        if (c.sweep.checkpoints < 2) r.fail("sweep.checkpoints: must be >= 2");
        if (!(c.sweep.threshold > 1.0)) r.fail("sweep.threshold: must exceed 1");
        if (c.sweep.ics.empty()) {
            if (c.sweep.count < 1) r.fail("sweep.energy_range.count: must be >= 1");
            if (!(c.sweep.e_min > 0.0 && c.sweep.e_max >= c.sweep.e_min)) {
                r.fail("sweep.energy_range: need 0 < min <= max");
            }
        }
    } else if (ex == "gentrig-check") {
        if (c.gentrig.samples < 16) r.fail("gentrig.samples: must be >= 16");
        if (!(c.gentrig.tol > 1e-14 && c.gentrig.tol < 1e-6)) r.fail("gentrig.tol: must lie in (1e-14, 1e-6)");
    }
    return out;
}

ExperimentConfig load_config(const json& doc)
{
    auto checked = check_config(doc);
    if (!checked.violations.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& v : checked.violations) msg += "\n  " + v;
        throw ConfigError(msg);
    }
    return std::move(checked.config);
}

}  // namespace impactosc

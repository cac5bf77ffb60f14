#include "impactosc/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <boost/version.hpp>

#include "impactosc/csv.hpp"
#include "impactosc/error.hpp"
#include "impactosc/gentrig.hpp"
#include "impactosc/svg.hpp"
#include "impactosc/sweeps.hpp"

#ifndef IMPACTOSC_VERSION
#define IMPACTOSC_VERSION "0.0.0"
#endif

namespace impactosc {

using nlohmann::json;
using io::Cell;

namespace {

constexpr double kConsistencyLimit = 1e-4;
constexpr double kAgreementTarget = 1e-6;

struct Context {
    const ExperimentConfig& cfg;
    std::filesystem::path dir;
    SweepOptions sweep;
    std::uint64_t seed = 0;
    RunResult& result;
    std::string deferred_error;

    bool csv() const { return cfg.output.csv; }
    bool svg() const { return cfg.output.svg; }

    io::CsvWriter open_csv(const std::string& name, std::vector<std::string> header)
    {
        result.files.push_back(name);
        return io::CsvWriter(dir / name, std::move(header));
    }

    void plot(const std::string& name, const io::Plot& p)
    {
        if (!svg()) return;
        io::write_svg(dir / name, p);
        result.files.push_back(name);
    }

    void check(bool ok, const std::string& what)
    {
        if (!ok) result.checks_passed = false;
        result.notes.push_back(std::string(ok ? "PASS " : "FAIL ") + what);
    }
};

Cell num(double v) { return v; }
Cell integer(std::int64_t v) { return v; }
Cell flag(bool b) { return std::int64_t{b ? 1 : 0}; }

std::string g(double v) { return io::format_double(v); }

ImpactModel make_model(const ExperimentConfig& c)
{
    return ImpactModel::build(c.potential, c.table_intervals, c.i_min, c.fd_delta);
}

// ---------------------------------------------------------------- gentrig-check

void run_gentrig(Context& ctx)
{
    const auto& gs = ctx.cfg.gentrig;
    std::optional<io::CsvWriter> summary;
    if (ctx.csv()) {
        summary.emplace(ctx.open_csv("gentrig_summary.csv",
                                     {"n", "period", "period_quadrature", "period_event", "period_gap",
                                      "max_grid_defect", "max_node_defect", "c_quarter", "pass"}));
    }
    json js = json::array();
    for (int n : gs.n_values) {
        const auto pe = period_estimates(n, gs.tol);
        const auto table = GenTrigTable::build(n, ctx.cfg.table_intervals, gs.tol);
        const double T = table.period();
        const std::size_t N = gs.samples;
        std::vector<double> ts(N + 1), cs(N + 1), ss(N + 1), ds(N + 1);
        double max_defect = 0.0;
        for (std::size_t i = 0; i <= N; ++i) {
            ts[i] = T * static_cast<double>(i) / static_cast<double>(N);
            const auto v = table.eval(ts[i]);
            cs[i] = v.c;
            ss[i] = v.s;
            ds[i] = table.defect(v);
            max_defect = std::max(max_defect, std::abs(ds[i]));
        }
        const double cq = table.eval(0.25 * T).c;
        const double gap = std::abs(pe.quadrature - pe.event);
        const bool pass = max_defect < 1e-9 && std::abs(cq) < 1e-9 && gap < 1e-10;
        ctx.check(pass, "gentrig n=" + std::to_string(n) + ": max defect " + g(max_defect) + ", |C(T0/4)| " +
                            g(std::abs(cq)) + ", period gap " + g(gap));
        if (ctx.csv()) {
            const std::string name = "gentrig_n" + std::to_string(n) + ".csv";
            auto w = ctx.open_csv(name, {"t", "c", "s", "defect"});
            for (std::size_t i = 0; i <= N; ++i) w.row({num(ts[i]), num(cs[i]), num(ss[i]), num(ds[i])});
            w.close();
            summary->row({integer(n), num(T), num(pe.quadrature), num(pe.event), num(gap), num(max_defect),
                          num(table.max_node_defect()), num(cq), flag(pass)});
        }
        io::Plot p{"Generalized cosine and sine, n = " + std::to_string(n), "t", "value", false, false, {}};
        p.series.push_back({"C(t)", ts, cs, io::Series::Style::Line});
        p.series.push_back({"S(t)", ts, ss, io::Series::Style::Line});
        ctx.plot("gentrig_n" + std::to_string(n) + ".svg", p);
        js.push_back({{"n", n}, {"period", T}, {"max_grid_defect", max_defect}, {"period_gap", gap}, {"pass", pass}});
    }
    if (summary) summary->close();
    ctx.result.summary["gentrig"] = js;
}

// ---------------------------------------------------------------- orbit

void run_orbit(Context& ctx)
{
    const auto& os = ctx.cfg.orbit;
    const PhaseState s0{os.x0, os.v0, os.t0, 0};
    const auto tr = integrate(ctx.cfg.potential, s0, os.t_end, ctx.cfg.integrator, os.sample_dt);
    if (ctx.csv()) {
        auto w = ctx.open_csv("orbit.csv", {"t", "x", "v", "impact_flag"});
        for (std::size_t i = 0; i < tr.samples.size(); ++i) {
            const auto& s = tr.samples[i];
            w.row({num(s.t), num(s.x), num(s.v), flag(tr.sample_is_impact[i] != 0)});
        }
        w.close();
        auto wi = ctx.open_csv("orbit_impacts.csv", {"index", "t", "speed"});
        for (std::size_t i = 0; i < tr.impacts.size(); ++i) {
            wi.row({integer(static_cast<std::int64_t>(i)), num(tr.impacts[i].t), num(tr.impacts[i].speed)});
        }
        wi.close();
        auto ws = ctx.open_csv("orbit_summary.csv",
                               {"impacts", "max_norm", "energy_min", "energy_max", "unperturbed_drift", "t_final",
                                "x_final", "v_final", "steps", "rejected"});
        ws.row({integer(static_cast<std::int64_t>(tr.impacts.size())), num(tr.max_norm), num(tr.energy_min),
                num(tr.energy_max), num(tr.unperturbed_drift), num(tr.final_state.t), num(tr.final_state.x),
                num(tr.final_state.v), integer(static_cast<std::int64_t>(tr.stats.accepted)),
                integer(static_cast<std::int64_t>(tr.stats.rejected))});
        ws.close();
    }
    io::Plot p{"Phase portrait", "x", "v", false, false, {}};
    io::Series s{"orbit", {}, {}, io::Series::Style::Line};
    for (const auto& q : tr.samples) {
        s.x.push_back(q.x);
        s.y.push_back(q.v);
    }
    p.series.push_back(std::move(s));
    ctx.plot("orbit_phase.svg", p);

    bool no_penetration = true;
    for (const auto& q : tr.samples) no_penetration = no_penetration && q.x >= -1e-12;
    ctx.check(no_penetration, "orbit stays in x >= 0");
    if (ctx.cfg.potential.is_unperturbed()) {
        ctx.check(tr.unperturbed_drift < 1e-10, "unperturbed energy drift " + g(tr.unperturbed_drift));
    }
    ctx.result.summary["orbit"] = {{"impacts", tr.impacts.size()},
                                   {"max_norm", tr.max_norm},
                                   {"energy_min", tr.energy_min},
                                   {"energy_max", tr.energy_max},
                                   {"unperturbed_drift", tr.unperturbed_drift}};
}

// ---------------------------------------------------------------- successor

struct GridPoint {
    double eps, upsilon0, theta0;
};

std::vector<GridPoint> grid_points(const ExperimentConfig& c)
{
    std::vector<GridPoint> pts;
    for (double e : c.eps)
        for (double u : c.upsilon0)
            for (double t : c.theta0) pts.push_back({e, u, t});
    return pts;
}

void run_successor(Context& ctx)
{
    const auto& c = ctx.cfg;
    const auto& ss = c.successor;
    const auto model = make_model(c);
    const auto pts = grid_points(c);
    std::vector<SuccessorOrbit> orbits(pts.size());
    std::vector<InvariantCircleReport> reports(pts.size());
    run_indexed(
        pts.size(),
        [&](std::size_t i) {
            orbits[i] = iterate_successor(model, pts[i].upsilon0, pts[i].theta0, pts[i].eps, ss.iterates, c.integrator);
            reports[i] = fit_invariant_circle(orbits[i], pts[i].eps, ss.fit_iterates, ss.iterates - ss.fit_iterates,
                                              ss.harmonics, ss.tolerance);
        },
        ctx.sweep);

    if (ctx.csv()) {
        auto w = ctx.open_csv("successor_orbits.csv", {"point", "iterate", "upsilon", "theta", "theta_mod1"});
        for (std::size_t i = 0; i < pts.size(); ++i) {
            for (std::size_t k = 0; k < orbits[i].upsilon.size(); ++k) {
                w.row({integer(static_cast<std::int64_t>(i)), integer(static_cast<std::int64_t>(k)),
                       num(orbits[i].upsilon[k]), num(orbits[i].theta[k]), num(unit_phase(orbits[i].theta[k]))});
            }
        }
        w.close();
        auto s = ctx.open_csv("successor_summary.csv",
                              {"point", "eps", "upsilon0", "theta0", "iterates", "escaped", "rotation_number",
                               "rotation_error", "rotation_partial", "fit_residual", "max_deviation", "recurrent",
                               "error"});
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const auto& r = reports[i];
            s.row({integer(static_cast<std::int64_t>(i)), num(pts[i].eps), num(pts[i].upsilon0), num(pts[i].theta0),
                   integer(static_cast<std::int64_t>(orbits[i].upsilon.size() - 1)), flag(orbits[i].escaped),
                   num(r.rotation.value), num(r.rotation.error), flag(r.rotation.partial), num(r.fit_residual),
                   num(r.max_deviation), flag(r.recurrent), orbits[i].error});
        }
        s.close();
    }
    io::Plot p{"Successor map orbits", "theta mod 1", "upsilon", false, false, {}};
    for (std::size_t i = 0; i < pts.size(); ++i) {
        io::Series s{"eps=" + g(pts[i].eps) + " u0=" + g(pts[i].upsilon0) + " th0=" + g(pts[i].theta0), {}, {},
                     io::Series::Style::Points};
        for (std::size_t k = 0; k < orbits[i].upsilon.size(); ++k) {
            s.x.push_back(unit_phase(orbits[i].theta[k]));
            s.y.push_back(orbits[i].upsilon[k]);
        }
        p.series.push_back(std::move(s));
    }
    ctx.plot("successor_phase.svg", p);

    std::size_t recurrent = 0;
    for (const auto& r : reports) recurrent += r.recurrent ? 1 : 0;
    ctx.check(recurrent > 0, std::to_string(recurrent) + " of " + std::to_string(pts.size()) +
                                 " successor orbits recur within " + g(ss.tolerance) + " of a fitted circle");
    ctx.result.summary["successor"] = {{"points", pts.size()}, {"recurrent", recurrent}};
}

// ---------------------------------------------------------------- poincare

std::vector<TwistSample> map_grid(const ImpactModel& model, const ExperimentConfig& c, Backend b,
                                  const SweepOptions& sweep)
{
    std::vector<TwistSample> all;
    for (double e : c.eps) {
        auto part = poincare_grid(model, c.upsilon0, c.theta0, e, b, c.integrator, sweep);
        all.insert(all.end(), part.begin(), part.end());
    }
    return all;
}

void write_samples(Context& ctx, const std::string& name, const std::vector<TwistSample>& v)
{
    if (!ctx.csv()) return;
    auto w = ctx.open_csv(name, {"eps", "upsilon0", "theta0", "upsilon1", "theta1", "f1", "f2", "twist_term"});
    for (const auto& s : v) {
        w.row({num(s.eps), num(s.upsilon0), num(s.theta0), num(s.upsilon1), num(s.theta1), num(s.f1), num(s.f2),
               num(s.twist_term)});
    }
    w.close();
}

void run_poincare(Context& ctx)
{
    const auto& c = ctx.cfg;
    const auto model = make_model(c);
    std::vector<Backend> backends;
    if (c.compare_backends) backends = {Backend::Physical, Backend::Direct};
    else backends = {c.backend};

    std::vector<std::vector<TwistSample>> runs;
    for (Backend b : backends) {
        runs.push_back(map_grid(model, c, b, ctx.sweep));
        write_samples(ctx, std::string("poincare_") + to_string(b) + ".csv", runs.back());
    }
    json js = {{"samples", runs.front().size()}, {"backends", json::array()}};
    for (Backend b : backends) js["backends"].push_back(to_string(b));

    if (runs.size() == 2) {
        double worst = 0.0;
        std::optional<io::CsvWriter> w;
        if (ctx.csv()) {
            w.emplace(ctx.open_csv("poincare_diff.csv", {"eps", "upsilon0", "theta0", "d_upsilon1", "d_theta1", "difference"}));
        }
        for (std::size_t i = 0; i < runs[0].size(); ++i) {
            const auto& a = runs[0][i];
            const auto& b = runs[1][i];
            const double du = b.upsilon1 - a.upsilon1, dt = b.theta1 - a.theta1;
            const double d = std::max(std::abs(du), std::abs(dt));
            worst = std::max(worst, d);
            if (w) w->row({num(a.eps), num(a.upsilon0), num(a.theta0), num(du), num(dt), num(d)});
        }
        if (w) w->close();
        js["max_backend_difference"] = worst;
        ctx.check(worst < kAgreementTarget, "backends agree to " + g(worst));
        if (!(worst <= kConsistencyLimit)) {
            ctx.deferred_error = "physical and direct backends differ by " + g(worst) + " (limit " +
                                 g(kConsistencyLimit) + ")";
        }
    }

    for (int which = 1; which <= 2; ++which) {
        io::Plot p{std::string("Twist-map residual f") + std::to_string(which), "theta0",
                   std::string("f") + std::to_string(which), false, false, {}};
        std::map<std::pair<double, double>, io::Series> by_curve;
        for (const auto& s : runs.front()) {
            auto& ser = by_curve[{s.eps, s.upsilon0}];
            if (ser.label.empty()) ser.label = "eps=" + g(s.eps) + " u0=" + g(s.upsilon0);
            ser.x.push_back(s.theta0);
            ser.y.push_back(which == 1 ? s.f1 : s.f2);
        }
        for (auto& [_, ser] : by_curve) p.series.push_back(std::move(ser));
        ctx.plot("poincare_f" + std::to_string(which) + ".svg", p);
    }
    ctx.result.summary["poincare"] = js;
}

// ---------------------------------------------------------------- scaling

void run_scaling(Context& ctx)
{
    const auto& c = ctx.cfg;
    const auto& sc = c.scaling;
    const auto model = make_model(c);
    const auto wants = [&](const char* q) { return std::find(sc.which.begin(), sc.which.end(), q) != sc.which.end(); };
    json js = json::object();

    if (wants("R")) {
        const auto rows = r_derivative_sweep(model, c.I, c.theta0, c.tau, sc.max_order, ctx.sweep);
        if (ctx.csv()) {
            auto w = ctx.open_csv("scaling_R.csv", {"j", "k", "I", "sup_abs", "accuracy_warning"});
            for (const auto& r : rows) w.row({integer(r.j), integer(r.k), num(r.I), num(r.sup_abs), flag(r.accuracy_warning)});
            w.close();
        }
        std::optional<io::CsvWriter> fits;
        if (ctx.csv()) {
            fits.emplace(ctx.open_csv("scaling_R_fits.csv", {"j", "k", "exponent", "intercept", "r2", "points",
                                                             "decades", "bound", "warnings", "pass"}));
        }
        io::Plot p{"Derivatives of R", "I", "sup |D_I^j D_theta^k R|", true, true, {}};
        json jr = json::array();
        for (int order = 0; order <= sc.max_order; ++order) {
            for (int j = 0; j <= order; ++j) {
                const int k = order - j;
                std::vector<double> xs, ys;
                std::int64_t warnings = 0;
                for (const auto& r : rows) {
                    if (r.j != j || r.k != k) continue;
                    xs.push_back(r.I);
                    ys.push_back(r.sup_abs);
                    warnings += r.accuracy_warning ? 1 : 0;
                }
                const double bound = 0.5 - j + sc.derivative_slack;
                ScalingFit fit{std::nan(""), std::nan(""), std::nan(""), xs.size(), 0.0};
                std::string why;
                try {
                    fit = fit_scaling(xs, ys);
                } catch (const Error& e) {
                    why = e.what();
                }
                const bool pass = why.empty() && fit.exponent <= bound;
                ctx.check(pass, "R j=" + std::to_string(j) + " k=" + std::to_string(k) + " slope " + g(fit.exponent) +
                                    " <= " + g(bound) + (why.empty() ? "" : " (" + why + ")"));
                if (fits) {
                    fits->row({integer(j), integer(k), num(fit.exponent), num(fit.intercept), num(fit.r2),
                               integer(static_cast<std::int64_t>(fit.points)), num(fit.decades), num(bound),
                               integer(warnings), flag(pass)});
                }
                p.series.push_back({"j=" + std::to_string(j) + " k=" + std::to_string(k), xs, ys,
                                    io::Series::Style::Line});
                jr.push_back({{"j", j}, {"k", k}, {"exponent", fit.exponent}, {"pass", pass}});
            }
        }
        if (fits) fits->close();
        ctx.plot("scaling_R.svg", p);
        js["R"] = jr;
    }

    if (wants("f1") || wants("f2")) {
        const Backend b = c.compare_backends ? Backend::Physical : c.backend;
        const auto sweep = residual_sweep(model, c.eps, c.upsilon0, c.theta0, b, c.integrator, ctx.sweep);
        write_samples(ctx, "scaling_f_samples.csv", sweep.samples);
        if (ctx.csv()) {
            auto w = ctx.open_csv("scaling_f.csv", {"eps", "sup_f1", "sup_f2"});
            for (const auto& r : sweep.rows) w.row({num(r.eps), num(r.sup_f1), num(r.sup_f2)});
            w.close();
        }
        std::optional<io::CsvWriter> fits;
        if (ctx.csv()) {
            fits.emplace(ctx.open_csv("scaling_f_fits.csv", {"quantity", "exponent", "intercept", "r2", "points",
                                                             "decades", "bound", "pass"}));
        }
        io::Plot p{"Twist-map residuals", "eps", "sup |f|", true, true, {}};
        std::vector<double> xs;
        for (const auto& r : sweep.rows) xs.push_back(r.eps);
        for (const char* q : {"f1", "f2"}) {
            if (!wants(q)) continue;
            std::vector<double> ys;
            for (const auto& r : sweep.rows) ys.push_back(q[1] == '1' ? r.sup_f1 : r.sup_f2);
            ScalingFit fit{std::nan(""), std::nan(""), std::nan(""), xs.size(), 0.0};
            std::string why;
            try {
                fit = fit_scaling(xs, ys);
            } catch (const Error& e) {
                why = e.what();
            }
            const bool pass = why.empty() && fit.exponent >= sc.residual_bound;
            ctx.check(pass, std::string(q) + " slope " + g(fit.exponent) + " >= " + g(sc.residual_bound) +
                                (why.empty() ? "" : " (" + why + ")"));
            if (fits) {
                fits->row({std::string(q), num(fit.exponent), num(fit.intercept), num(fit.r2),
                           integer(static_cast<std::int64_t>(fit.points)), num(fit.decades), num(sc.residual_bound),
                           flag(pass)});
            }
            p.series.push_back({std::string("sup |") + q + "|", xs, ys, io::Series::Style::Line});
            js[q] = {{"exponent", fit.exponent}, {"r2", fit.r2}, {"pass", pass}};
        }
        if (fits) fits->close();
        ctx.plot("scaling_f.svg", p);
    }
    ctx.result.summary["scaling"] = js;
}

// ---------------------------------------------------------------- sweep

void run_sweep(Context& ctx)
{
    const auto& c = ctx.cfg;
    const auto& sw = c.sweep;
    const auto ics = sw.ics.empty() ? energy_ladder(sw.count, sw.e_min, sw.e_max, ctx.seed) : sw.ics;
    const BoundednessOptions bo{sw.horizon, sw.checkpoints, sw.threshold};
    const auto rep = boundedness_sweep(c.potential, ics, bo, c.integrator, ctx.sweep);

    if (ctx.csv()) {
        auto w = ctx.open_csv("sweep_records.csv", {"ic", "x0", "v0", "t0", "initial_energy", "energy_min",
                                                    "energy_max", "ratio", "flagged", "failed", "error"});
        for (std::size_t i = 0; i < rep.records.size(); ++i) {
            const auto& r = rep.records[i];
            w.row({integer(static_cast<std::int64_t>(i)), num(r.ic.x), num(r.ic.v), num(r.ic.t), num(r.initial_energy),
                   num(r.energy_min), num(r.energy_max), num(r.ratio), flag(r.flagged), flag(r.failed), r.error});
        }
        w.close();
        auto wc = ctx.open_csv("sweep_checkpoints.csv", {"ic", "t", "max_norm", "impacts"});
        for (std::size_t i = 0; i < rep.records.size(); ++i) {
            for (const auto& cp : rep.records[i].checkpoints) {
                wc.row({integer(static_cast<std::int64_t>(i)), num(cp.t), num(cp.max_norm), integer(cp.impacts)});
            }
        }
        wc.close();
    }
    io::Plot p{"Running maximum of |x| + |v|", "t", "M(t)", false, true, {}};
    for (std::size_t i = 0; i < rep.records.size(); ++i) {
        io::Series s{"E0=" + g(rep.records[i].initial_energy), {}, {}, io::Series::Style::Line};
        for (const auto& cp : rep.records[i].checkpoints) {
            s.x.push_back(cp.t);
            s.y.push_back(cp.max_norm);
        }
        p.series.push_back(std::move(s));
    }
    ctx.plot("sweep_growth.svg", p);

    double worst = 0.0;
    for (const auto& r : rep.records) {
        if (!r.failed) worst = std::max(worst, r.ratio);
    }
    ctx.check(rep.flagged == 0 && rep.failed == 0,
              std::to_string(rep.records.size()) + " ICs, " + std::to_string(rep.flagged) + " flagged, " +
                  std::to_string(rep.failed) + " failed, max ratio " + g(worst));
    ctx.result.summary["sweep"] = {{"ics", rep.records.size()},
                                   {"flagged", rep.flagged},
                                   {"failed", rep.failed},
                                   {"max_ratio", worst}};
}

// ---------------------------------------------------------------- manifest

void remove_previous_outputs(const std::filesystem::path& dir)
{
    const auto manifest = dir / "manifest.json";
    if (!std::filesystem::exists(manifest)) return;
    json old;
    try {
        old = read_json_file(manifest);
    } catch (const Error&) {
        return;
    }
    if (!old.is_object() || !old.contains("files") || !old["files"].is_array()) return;
    for (const auto& f : old["files"]) {
        if (!f.is_string()) continue;
        const std::filesystem::path name = f.get<std::string>();
        if (name.has_parent_path() || name.filename() != name || name == "." || name == "..") continue;
        std::error_code ec;
        if (std::filesystem::is_regular_file(dir / name, ec)) std::filesystem::remove(dir / name, ec);
    }
    std::error_code ec;
    std::filesystem::remove(manifest, ec);
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options)
{
    const auto start = std::chrono::steady_clock::now();
    RunResult result;
    result.out_dir = options.out_dir ? *options.out_dir : std::filesystem::path(config.output.directory);
    std::filesystem::create_directories(result.out_dir);
    remove_previous_outputs(result.out_dir);

    Context ctx{config, result.out_dir, SweepOptions{Execution::Parallel, options.jobs},
                options.seed ? *options.seed : config.seed, result, {}};
    const std::string& ex = config.experiment;
    if (ex == "gentrig-check") run_gentrig(ctx);
    else if (ex == "orbit") run_orbit(ctx);
    else if (ex == "successor") run_successor(ctx);
    else if (ex == "poincare") run_poincare(ctx);
    else if (ex == "scaling") run_scaling(ctx);
    else if (ex == "sweep") run_sweep(ctx);
    else throw ConfigError("unknown experiment '" + ex + "'");

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json manifest;
    manifest["tool"] = "impactosc";
    manifest["experiment"] = ex;
    manifest["config_path"] = options.config_path;
    manifest["config"] = config.source;
    manifest["versions"] = {{"impactosc", IMPACTOSC_VERSION},
                            {"compiler", __VERSION__},
                            {"cplusplus", static_cast<long>(__cplusplus)},
                            {"boost", BOOST_LIB_VERSION},
                            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    manifest["seed"] = ctx.seed;
    manifest["jobs"] = options.jobs;
    manifest["threads"] = available_threads(ctx.sweep);
    manifest["wall_time_s"] = wall;
    manifest["files"] = result.files;
    manifest["summary"] = result.summary;
    manifest["checks_passed"] = result.checks_passed;
    manifest["checks"] = result.notes;
    {
        std::ofstream out(result.out_dir / "manifest.json", std::ios::binary);
        if (!out) throw Error("cannot write " + (result.out_dir / "manifest.json").string());
        out << manifest.dump(2) << '\n';
    }
    result.files.push_back("manifest.json");
    if (!ctx.deferred_error.empty()) throw ConsistencyError(ctx.deferred_error);
    return result;
}

}  // namespace impactosc

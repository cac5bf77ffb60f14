// Acceptance run: one PASS/FAIL line per criterion.
//
// usage: acceptance <impactosc executable> <configs directory>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "fixtures.hpp"
#include "impactosc/error.hpp"
#include "impactosc/gentrig.hpp"
#include "impactosc/integrator.hpp"
#include "impactosc/maps.hpp"
#include "impactosc/sweeps.hpp"
#include "impactosc/transforms.hpp"

using namespace impactosc;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string g(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

template <class Map>
double jacobian(Map&& f, double u, double w, double hu, double hw)
{
    auto partial = [&](double du, double dw, double h) {
        const PlanePoint p = f(u + du, w + dw);
        const PlanePoint q = f(u - du, w - dw);
        return std::array<double, 2>{(p.x - q.x) / (2.0 * h), (p.y - q.y) / (2.0 * h)};
    };
    auto rich = [&](double du, double dw, double h) {
        const auto a = partial(du, dw, h);
        const auto b = partial(0.5 * du, 0.5 * dw, 0.5 * h);
        return std::array<double, 2>{(4.0 * b[0] - a[0]) / 3.0, (4.0 * b[1] - a[1]) / 3.0};
    };
    const auto du = rich(hu, 0.0, hu);
    const auto dw = rich(0.0, hw, hw);
    return du[0] * dw[1] - du[1] * dw[0];
}

std::vector<double> logspace(double lo, double hi, int n)
{
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return v;
}

std::vector<double> unit_grid(int n, double offset = 0.0)
{
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back((i + offset) / n);
    return v;
}

Outcome gentrig_suite()
{
    double defect = 0.0, quarter = 0.0, gap = 0.0;
    for (int n = 1; n <= 3; ++n) {
        const auto pe = period_estimates(n, 1e-12);
        gap = std::max(gap, std::abs(pe.quadrature - pe.event));
        const auto tab = GenTrigTable::build(n);
        const double T = tab.period();
        for (int i = 0; i <= 20000; ++i) defect = std::max(defect, std::abs(tab.defect(tab.eval(T * i / 20000.0))));
        quarter = std::max(quarter, std::abs(tab.eval(0.25 * T).c));
    }
    return {defect < 1e-9 && quarter < 1e-9 && gap < 1e-10,
            "max defect " + g(defect) + ", max |C(T0/4)| " + g(quarter) + ", period gap " + g(gap)};
}

Outcome symplecticity_suite()
{
    double worst1 = 0.0, worst2 = 0.0;
    for (int n = 0; n <= 3; ++n) {
        const auto tab = GenTrigTable::build(n);
        const auto k = DerivedConstants::from_period(n, tab.period());
        for (int i = 0; i < 20; ++i) {
            const double lam = 0.5 * std::pow(200.0, i / 19.0);
            for (int j = 0; j < 20; ++j) {
                const double th = (j + 0.5) / 20.0;
                const double j1 =
                    jacobian([&](double l, double t) { return psi1(k, tab, ActionAngle{l, t}); }, lam, th, 1e-4 * lam, 1e-4);
                worst1 = std::max(worst1, std::abs(std::abs(j1) - 1.0));
                const double rho = 0.5 * lam;
                const double j2 = jacobian([&](double r, double f) { return psi1(k, tab, psi2(ImpactCoords{r, f})); }, rho,
                                           th, 1e-4 * rho, 1e-4);
                worst2 = std::max(worst2, std::abs(std::abs(j2) - 1.0));
            }
        }
    }
    const auto tab0 = GenTrigTable::build(0);
    const auto k0 = DerivedConstants::from_period(0, tab0.period());
    double harmonic = 0.0;
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 20; ++j) {
            const double x = 0.1 + 0.2 * i, y = -2.0 + 0.2 * j;
            const double lam = psi1_inv(k0, tab0, x, y).lambda;
            const double closed = M_PI * (x * x + y * y);
            harmonic = std::max(harmonic, std::abs(lam - closed) / closed);
        }
    }
    return {worst1 < 1e-8 && worst2 < 1e-8 && harmonic < 1e-9,
            "max ||J|-1| psi1 " + g(worst1) + ", psi1 o psi2 " + g(worst2) + "; n=0 harmonic rel. error " + g(harmonic)};
}

class ImpactAudit : public FlowObserver {
public:
    explicit ImpactAudit(int n, double e0) : n_(n), e0_(e0) {}
    void on_segment(double, double t1, const DenseEval& at) override
    {
        settle();
        const auto xv = at(t1);
        pending_ = true;
        end_t_ = t1;
        end_x_ = xv[0];
        drift = std::max(drift, std::abs(unperturbed_energy(n_, xv[0], xv[1]) - e0_) / e0_);
    }
    bool on_impact(const PhaseState& in, const PhaseState& out) override
    {
        if (pending_ && end_t_ == in.t) {
            impact_residual = std::max(impact_residual, std::abs(end_x_));
            pending_ = false;
        }
        exact = exact && in.x == 0.0 && out.x == 0.0 && out.v == -in.v && in.v < 0.0 && in.t > last_t;
        last_t = in.t;
        drift = std::max(drift, std::abs(0.5 * out.v * out.v - e0_) / e0_);
        return false;
    }
    void settle()
    {
        if (pending_) min_step_x = std::min(min_step_x, end_x_);
        pending_ = false;
    }
    double drift = 0.0;
    double min_step_x = 0.0;       ///< x at accepted step points
    double impact_residual = 0.0;  ///< |x| by dense output at located impact times
    double last_t = -1.0;
    bool exact = true;

private:
    int n_;
    double e0_;
    bool pending_ = false;
    double end_t_ = 0.0;
    double end_x_ = 0.0;
};

Outcome impact_suite()
{
    double drift = 0.0, min_x = 0.0, residual = 0.0, rev = 0.0;
    bool exact = true;
    long fewest = 1L << 40;
    for (int n = 1; n <= 3; ++n) {
        const auto tab = GenTrigTable::build(n);
        const auto spec = PotentialSpec::unperturbed(n);
        for (double v0 : {0.7, 3.0, 10.0, 40.0}) {
            const double flight = unperturbed_flight_time(n, tab.period(), v0);
            ImpactAudit audit(n, 0.5 * v0 * v0);
            const auto end = advance(spec, PhaseState{0.0, v0, 0.0, 0}, 1000.5 * flight, IntegratorOptions{}, &audit);
            audit.settle();
            drift = std::max(drift, audit.drift);
            min_x = std::min(min_x, audit.min_step_x);
            residual = std::max(residual, audit.impact_residual);
            exact = exact && audit.exact;
            fewest = std::min(fewest, end.impact_count);
        }
    }
    // Reversal t -> -t, v -> -v is a symmetry when every p_i is even in t.
    for (const auto& spec : {PotentialSpec::unperturbed(1), testing::single_harmonic_spec()}) {
        const PhaseState s0{0.7, -0.4, 0.0, 0};
        const auto fwd = advance(spec, s0, 30.0, IntegratorOptions{});
        const auto back = advance(spec, PhaseState{fwd.x, -fwd.v, -fwd.t, 0}, 0.0, IntegratorOptions{});
        rev = std::max({rev, std::abs(back.x - s0.x), std::abs(-back.v - s0.v)});
    }
    return {drift < 1e-10 && exact && min_x >= -1e-12 && residual < 1e-11 && fewest >= 1000 && rev < 1e-8,
            std::to_string(fewest) + "+ impacts per run, relative energy drift " + g(drift) + ", reflection exact " +
                (exact ? "yes" : "no") + ", min step x " + g(min_x) + ", max |x(t_impact)| " + g(residual) +
                ", reversibility " + g(rev)};
}

Outcome implicit_suite()
{
    const ImpactModel free = ImpactModel::build(PotentialSpec::unperturbed(1));
    double rmax = 0.0;
    for (double I : logspace(50.0, 1e6, 12)) {
        for (double th : unit_grid(7)) {
            for (double tau : unit_grid(9, 0.3)) rmax = std::max(rmax, std::abs(solve_rho(free, I, th, tau).R) / free.rho0(I));
        }
    }
    const ImpactModel m = ImpactModel::build(testing::mixed_spec());
    const double pts[5][3] = {{1e3, 0.1, 0.3}, {5e3, 0.45, 0.71}, {2e4, 0.8, 0.5}, {1e5, 0.05, 0.12}, {7e5, 0.6, 0.93}};
    double worst = 0.0;
    for (const auto& p : pts) {
        const auto s = solve_rho(m, p[0], p[1], p[2]);
        const double oracle = s.d_t / s.d_rho;
        const auto est = fd_partial_R(m, p[0], p[1], p[2], 0, 1);
        worst = std::max(worst, std::abs(est.value - oracle) / std::abs(oracle));
    }
    return {rmax <= 1e-15 && worst < 1e-6,
            "unperturbed max |R|/rho0 " + g(rmax) + ", D_theta R relative error " + g(worst)};
}

Outcome r_scaling()
{
    const ImpactModel m = ImpactModel::build(testing::mixed_spec());
    const auto rows = r_derivative_sweep(m, logspace(1e3, 1e6, 10), unit_grid(8), {0.13, 0.37, 0.5, 0.71, 0.93}, 3, {});
    bool pass = true;
    double margin = 1e9;
    std::ostringstream o;
    for (int order = 0; order <= 3; ++order) {
        for (int j = 0; j <= order; ++j) {
            std::vector<double> x, y;
            for (const auto& r : rows) {
                if (r.j == j && r.k == order - j) {
                    x.push_back(r.I);
                    y.push_back(r.sup_abs);
                }
            }
            const auto fit = fit_scaling(x, y);
            const double bound = 0.5 - j + 0.15;
            pass = pass && fit.exponent <= bound;
            margin = std::min(margin, bound - fit.exponent);
            o << " (" << j << "," << order - j << ")=" << g(fit.exponent);
        }
    }
    return {pass, "slopes" + o.str() + "; smallest margin " + g(margin)};
}

Outcome f_scaling()
{
    const ImpactModel m = ImpactModel::build(testing::mixed_spec());
    const auto eps = logspace(1e-5, 1e-2, 10);
    const auto sweep =
        residual_sweep(m, eps, {1.0, 1.25, 1.5, 1.75, 2.0}, unit_grid(5), Backend::Physical, IntegratorOptions{}, {});
    std::vector<double> f1, f2;
    for (const auto& r : sweep.rows) {
        f1.push_back(r.sup_f1);
        f2.push_back(r.sup_f2);
    }
    const auto a = fit_scaling(eps, f1);
    const auto b = fit_scaling(eps, f2);
    return {a.exponent >= 0.4 && b.exponent >= 0.4,
            "f1 slope " + g(a.exponent) + " (r2 " + g(a.r2) + "), f2 slope " + g(b.exponent) + " (r2 " + g(b.r2) + ")"};
}

Outcome twist_identity()
{
    double worst_map = 0.0, worst_flight = 0.0;
    for (int n = 1; n <= 3; ++n) {
        const ImpactModel m = ImpactModel::build(PotentialSpec::unperturbed(n));
        for (double eps : {1e-2, 1e-3, 1e-4}) {
            for (double u : {1.0, 1.5, 2.0}) {
                for (double th : {0.0, 0.3, 0.7}) {
                    const double tw = twist_term(m.consts, u, eps);
                    for (Backend b : {Backend::Physical, Backend::Direct}) {
                        const auto s = exchanged_poincare(m, u, th, eps, b);
                        worst_map = std::max(worst_map, std::abs(s.theta1 - th - tw));
                    }
                    const auto r = successor(m.spec, m.consts.period, PhaseState{0.0, std::sqrt(2.0 * u / eps), th, 0},
                                             IntegratorOptions{});
                    worst_flight = std::max(worst_flight, std::abs(r.flight_time - tw));
                }
            }
        }
    }
    return {worst_map < 1e-8 && worst_flight < 1e-8,
            "max |theta1-theta0-twist| " + g(worst_map) + ", max |flight time - twist| " + g(worst_flight)};
}

Outcome backend_consistency()
{
    const ImpactModel m = ImpactModel::build(testing::mixed_spec());
    const std::vector<double> u{1.0, 1.25, 1.5, 1.75, 2.0};
    const auto th = unit_grid(5);
    double worst = 0.0;
    std::size_t count = 0;
    for (double eps : {1e-2, 1e-4}) {
        const auto p = poincare_grid(m, u, th, eps, Backend::Physical, IntegratorOptions{}, {});
        const auto d = poincare_grid(m, u, th, eps, Backend::Direct, IntegratorOptions{}, {});
        for (std::size_t i = 0; i < p.size(); ++i) {
            worst = std::max({worst, std::abs(p[i].upsilon1 - d[i].upsilon1), std::abs(p[i].theta1 - d[i].theta1)});
            ++count;
        }
    }
    return {worst < 1e-6, std::to_string(count) + " points, max difference " + g(worst)};
}

Outcome boundedness_evidence()
{
    const auto spec = testing::single_harmonic_spec(0.5);
    const auto ics = energy_ladder(20, 10.0, 1e4, 1);
    const auto rep = boundedness_sweep(spec, ics, BoundednessOptions{1000.0, 10, 1.5}, IntegratorOptions{}, {});
    double worst = 0.0;
    bool all_below = rep.failed == 0;
    for (const auto& r : rep.records) {
        worst = std::max(worst, r.ratio);
        all_below = all_below && r.ratio < 1.5;
    }
    const ImpactModel m = ImpactModel::build(spec);
    const double eps = 1.5 / 500.0;
    double best = 1e9;
    int recurrent = 0;
    for (double th : {0.0, 0.25, 0.5}) {
        const auto rep2 = detect_invariant_circle(m, 1.5, th, eps, 1000, 1000, 12, 1e-3);
        best = std::min(best, rep2.max_deviation);
        recurrent += rep2.recurrent ? 1 : 0;
    }
    return {all_below && recurrent > 0,
            std::to_string(rep.records.size()) + " ICs, max M(T)/M(T/10) " + g(worst) + ", failed " +
                std::to_string(rep.failed) + "; " + std::to_string(recurrent) +
                "/3 successor orbits recurrent, best deviation " + g(best)};
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

Outcome determinism(const std::string& tool, const std::filesystem::path& configs)
{
    const auto root = std::filesystem::temp_directory_path() / ("impactosc_acceptance_" + std::to_string(::getpid()));
    std::filesystem::remove_all(root);
    std::size_t files = 0;
    bool same = true;
    std::string why;
    for (const char* name : {"poincare", "successor", "scaling_R", "sweep"}) {
        const auto cfg = configs / (std::string(name) + ".json");
        const std::vector<std::pair<std::string, std::string>> runs{{"a", "1"}, {"b", "1"}, {"c", "4"}};
        for (const auto& [tag, jobs] : runs) {
            const auto out = root / name / tag;
            const std::string cmd = "\"" + tool + "\" run \"" + cfg.string() + "\" --out \"" + out.string() +
                                    "\" --jobs " + jobs + " > /dev/null";
            if (std::system(cmd.c_str()) != 0) return {false, "run failed: " + cmd};
        }
        for (const auto& e : std::filesystem::directory_iterator(root / name / "a")) {
            if (e.path().extension() != ".csv") continue;
            const auto f = e.path().filename();
            const auto ref = slurp(e.path());
            for (const char* other : {"b", "c"}) {
                if (slurp(root / name / other / f) != ref) {
                    same = false;
                    why += " " + std::string(name) + "/" + f.string() + "(" + other + ")";
                }
            }
            ++files;
        }
    }
    std::filesystem::remove_all(root);
    return {same && files > 0, std::to_string(files) + " CSVs compared over two --jobs 1 runs and --jobs 4" +
                                   (why.empty() ? "" : "; differing:" + why)};
}

}  // namespace

int main(int argc, char** argv)
{
    if (argc != 3) {
        std::cerr << "usage: acceptance <impactosc executable> <configs directory>\n";
        return 2;
    }
    const std::string tool = argv[1];
    const std::filesystem::path configs = argv[2];

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"generalized trig suite", gentrig_suite},
        {"symplecticity suite", symplecticity_suite},
        {"impact integration suite", impact_suite},
        {"implicit-function suite", implicit_suite},
        {"R derivative scaling", r_scaling},
        {"twist residual scaling", f_scaling},
        {"twist-term identity", twist_identity},
        {"backend consistency", backend_consistency},
        {"boundedness evidence", boundedness_evidence},
        {"determinism", [&] { return determinism(tool, configs); }},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += out.pass ? 0 : 1;
        std::cout << "criterion " << (i + 1) << ": " << (out.pass ? "PASS" : "FAIL") << "  " << criteria[i].first
                  << " | " << out.detail << " | " << g(secs) << " s" << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
    return failed == 0 ? 0 : 1;
}

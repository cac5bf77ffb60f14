#include "impactosc/maps.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "impactosc/error.hpp"
#include "impactosc/ode.hpp"

namespace impactosc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_scaled_start(const ImpactModel& m, double upsilon0, double eps)
{
    if (!(upsilon0 >= 1.0 && upsilon0 <= 2.0)) throw DomainError("exchanged_poincare: upsilon0 must lie in [1, 2]");
    if (!(eps > 0.0)) throw DomainError("exchanged_poincare: eps must be positive");
    if (upsilon0 / eps < m.i_min) {
        throw RegimeError("exchanged_poincare: I = upsilon0/eps = " + std::to_string(upsilon0 / eps) +
                          " is below i_min = " + std::to_string(m.i_min) + "; decrease eps");
    }
}

struct DirectRhs {
    const ImpactModel* m;
    double eps;
    void operator()(double tau, const std::array<double, 2>& y, std::array<double, 2>& dy) const
    {
        const double I = y[0] / eps;
        dy[0] = eps * fd_partial_R(*m, I, y[1], tau, 0, 1).value;
        dy[1] = m->rho0_prime(I) - fd_partial_R(*m, I, y[1], tau, 1, 0).value;
    }
};

TwistSample physical_step(const ImpactModel& m, double upsilon0, double theta0, double eps,
                          const IntegratorOptions& opts)
{
    const double I = upsilon0 / eps;
    const PhaseState start{0.0, std::sqrt(2.0 * I), theta0, 0};
    const auto r = successor(m.spec, m.consts.period, start, opts);
    const ImpactCoords ic = impact_coords_of(m.consts, m.table, 0.0, r.next.v);
    const ExchangedCoords ex = to_exchanged(m, ic, r.next.t);
    TwistSample s;
    s.upsilon1 = eps * ex.I;
    s.theta1 = r.next.t;
    return s;
}

TwistSample direct_step(const ImpactModel& m, double upsilon0, double theta0, double eps,
                        const IntegratorOptions& opts)
{
    ode::Tolerances tol;
    tol.rel_tol = opts.rel_tol;
    tol.abs_tol = std::min(opts.abs_tol, 1e-13);
    tol.max_step = 0.125;
    auto st = ode::make_dop853<2>(DirectRhs{&m, eps}, tol);
    st.reset(0.0, {upsilon0, theta0});
    while (st.t() < 1.0) st.step(1.0);
    TwistSample s;
    s.upsilon1 = st.y()[0];
    s.theta1 = st.y()[1];
    return s;
}

}  // namespace

const char* to_string(Backend b)
{
    return b == Backend::Physical ? "physical" : "direct";
}

double twist_term(const DerivedConstants& k, double upsilon0, double eps)
{
    const double inv = 1.0 / (2.0 * k.beta);
    return inv * std::pow(k.d, -inv) * std::pow(eps, 1.0 - inv) * std::pow(upsilon0, inv - 1.0);
}

TwistSample exchanged_poincare(const ImpactModel& m, double upsilon0, double theta0, double eps, Backend backend,
                               const IntegratorOptions& opts)
{
    check_scaled_start(m, upsilon0, eps);
    TwistSample s = backend == Backend::Physical ? physical_step(m, upsilon0, theta0, eps, opts)
                                                 : direct_step(m, upsilon0, theta0, eps, opts);
    s.upsilon0 = upsilon0;
    s.theta0 = theta0;
    s.eps = eps;
    s.twist_term = twist_term(m.consts, upsilon0, eps);
    s.f1 = s.upsilon1 - upsilon0;
    s.f2 = s.theta1 - theta0 - s.twist_term;
    return s;
}

BackendComparison compare_backends(const ImpactModel& m, double upsilon0, double theta0, double eps,
                                   const IntegratorOptions& opts, double limit)
{
    BackendComparison c;
    c.physical = exchanged_poincare(m, upsilon0, theta0, eps, Backend::Physical, opts);
    c.direct = exchanged_poincare(m, upsilon0, theta0, eps, Backend::Direct, opts);
    c.difference = std::max(std::abs(c.physical.upsilon1 - c.direct.upsilon1),
                            std::abs(c.physical.theta1 - c.direct.theta1));
    if (!(c.difference <= limit)) {
        throw ConsistencyError("physical and direct maps differ by " + std::to_string(c.difference) +
                               " at upsilon0 = " + std::to_string(upsilon0) + ", theta0 = " + std::to_string(theta0) +
                               ", eps = " + std::to_string(eps));
    }
    return c;
}

ScalingFit fit_scaling(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size()) throw DomainError("fit_scaling: x and y differ in length");
    if (x.size() < 8) throw DomainError("fit_scaling: need at least 8 points");
    double lo = x.front(), hi = x.front();
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(std::abs(y[i]) > 0.0) || !std::isfinite(y[i])) {
            throw DomainError("fit_scaling: non-positive or non-finite sample at index " + std::to_string(i));
        }
        lo = std::min(lo, x[i]);
        hi = std::max(hi, x[i]);
    }
    ScalingFit fit;
    fit.points = x.size();
    fit.decades = std::log10(hi / lo);
    if (fit.decades < 3.0 - 1e-9) throw DomainError("fit_scaling: grid spans fewer than 3 decades");

    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += std::log(x[i]);
        sy += std::log(std::abs(y[i]));
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        const double dy = std::log(std::abs(y[i])) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    fit.exponent = sxy / sxx;
    fit.intercept = my - fit.exponent * mx;
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

RotationEstimate rotation_number(const std::vector<double>& lifted, bool partial)
{
    if (lifted.size() < 2) throw DomainError("rotation_number: need at least two points");
    const std::size_t N = lifted.size() - 1;
    if (N < 1000 && !partial) throw DomainError("rotation_number: need at least 1000 iterates");
    RotationEstimate r;
    r.iterates = N;
    r.partial = partial;
    r.value = (lifted[N] - lifted[0]) / static_cast<double>(N);
    const std::size_t q = std::max<std::size_t>(N / 4, 1);
    const double tail = (lifted[N] - lifted[N - q]) / static_cast<double>(q);
    r.error = std::abs(tail - r.value);
    return r;
}

SuccessorOrbit iterate_successor(const ImpactModel& m, double upsilon0, double theta0, double eps,
                                 std::size_t iterates, const IntegratorOptions& opts)
{
    if (!(upsilon0 > 0.0 && eps > 0.0)) throw DomainError("iterate_successor: upsilon0 and eps must be positive");
    SuccessorOrbit orbit;
    orbit.upsilon.reserve(iterates + 1);
    orbit.theta.reserve(iterates + 1);
    PhaseState s{0.0, std::sqrt(2.0 * upsilon0 / eps), theta0, 0};
    orbit.upsilon.push_back(upsilon0);
    orbit.theta.push_back(theta0);
    for (std::size_t i = 0; i < iterates; ++i) {
        try {
            s = successor(m.spec, m.consts.period, s, opts).next;
        } catch (const Error& e) {
            orbit.escaped = true;
            orbit.error = e.what();
            break;
        }
        orbit.upsilon.push_back(eps * 0.5 * s.v * s.v);
        orbit.theta.push_back(s.t);
    }
    return orbit;
}

InvariantCircleReport fit_invariant_circle(const SuccessorOrbit& orbit, double eps, std::size_t fit_iterates,
                                           std::size_t test_iterates, int harmonics, double tolerance)
{
    if (harmonics < 0 || static_cast<std::size_t>(4 * (2 * harmonics + 1)) > fit_iterates) {
        throw DomainError("detect_invariant_circle: too many harmonics for the fitted sample");
    }
    if (orbit.upsilon.empty() || orbit.upsilon.size() != orbit.theta.size()) {
        throw DomainError("fit_invariant_circle: empty or inconsistent orbit");
    }
    InvariantCircleReport rep;
    rep.upsilon0 = orbit.upsilon.front();
    rep.theta0 = orbit.theta.front();
    rep.eps = eps;
    rep.harmonics = harmonics;
    rep.rotation = rotation_number(orbit.theta, orbit.escaped || orbit.theta.size() < 1001);
    if (orbit.escaped || orbit.upsilon.size() < fit_iterates + test_iterates + 1) return rep;

    const auto cols = static_cast<Eigen::Index>(2 * harmonics + 1);
    auto basis_row = [&](double th, Eigen::RowVectorXd& row) {
        row(0) = 1.0;
        for (int k = 1; k <= harmonics; ++k) {
            row(2 * k - 1) = std::cos(kTwoPi * k * th);
            row(2 * k) = std::sin(kTwoPi * k * th);
        }
    };
    const auto rows = static_cast<Eigen::Index>(fit_iterates);
    Eigen::MatrixXd A(rows, cols);
    Eigen::VectorXd b(rows);
    Eigen::RowVectorXd row(cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        basis_row(unit_phase(orbit.theta[static_cast<std::size_t>(i)]), row);
        A.row(i) = row;
        b(i) = orbit.upsilon[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(b);
    rep.g_mean = coef(0);
    for (int k = 1; k <= harmonics; ++k) {
        rep.g_cos.push_back(coef(2 * k - 1));
        rep.g_sin.push_back(coef(2 * k));
    }
    auto deviation = [&](std::size_t i) {
        basis_row(unit_phase(orbit.theta[i]), row);
        return std::abs(orbit.upsilon[i] - row.dot(coef));
    };
    for (std::size_t i = 0; i < fit_iterates; ++i) rep.fit_residual = std::max(rep.fit_residual, deviation(i));
    for (std::size_t i = fit_iterates; i < fit_iterates + test_iterates; ++i) {
        rep.max_deviation = std::max(rep.max_deviation, deviation(i + 1));
    }
    rep.fit_iterates = fit_iterates;
    rep.test_iterates = test_iterates;
    rep.recurrent = rep.max_deviation < tolerance;
    return rep;
}

InvariantCircleReport detect_invariant_circle(const ImpactModel& m, double upsilon0, double theta0, double eps,
                                              std::size_t fit_iterates, std::size_t test_iterates, int harmonics,
                                              double tolerance, const IntegratorOptions& opts)
{
    if (harmonics < 0 || static_cast<std::size_t>(4 * (2 * harmonics + 1)) > fit_iterates) {
        throw DomainError("detect_invariant_circle: too many harmonics for the fitted sample");
    }
    const auto orbit = iterate_successor(m, upsilon0, theta0, eps, fit_iterates + test_iterates, opts);
    return fit_invariant_circle(orbit, eps, fit_iterates, test_iterates, harmonics, tolerance);
}

double successor_jacobian(const PotentialSpec& spec, double period, double theta, double I,
                          const IntegratorOptions& opts, double h)
{
    auto F = [&](double th, double e) {
        const auto r = successor(spec, period, PhaseState{0.0, std::sqrt(2.0 * e), th, 0}, opts);
        return std::array<double, 2>{r.next.t, 0.5 * r.next.v * r.next.v};
    };
    const double ht = h;
    const double hI = h * I;
    const auto tp = F(theta + ht, I), tm = F(theta - ht, I);
    const auto ip = F(theta, I + hI), im = F(theta, I - hI);
    const double dth_dth = (tp[0] - tm[0]) / (2.0 * ht);
    const double dI_dth = (tp[1] - tm[1]) / (2.0 * ht);
    const double dth_dI = (ip[0] - im[0]) / (2.0 * hI);
    const double dI_dI = (ip[1] - im[1]) / (2.0 * hI);
    return dth_dth * dI_dI - dth_dI * dI_dth;
}

IntersectionReport intersection_check(const ImpactModel& m, const std::function<double(double)>& g, double eps,
                                      std::size_t samples, const IntegratorOptions& opts)
{
    if (samples < 4) throw DomainError("intersection_check: need at least 4 samples");
    IntersectionReport rep;
    rep.min_gap = std::numeric_limits<double>::infinity();
    rep.max_gap = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples; ++i) {
        const double th = static_cast<double>(i) / static_cast<double>(samples);
        const auto s = exchanged_poincare(m, g(th), th, eps, Backend::Physical, opts);
        const double gap = s.upsilon1 - g(unit_phase(s.theta1));
        rep.min_gap = std::min(rep.min_gap, gap);
        rep.max_gap = std::max(rep.max_gap, gap);
    }
    rep.crosses = rep.min_gap < 0.0 && rep.max_gap > 0.0;
    return rep;
}

}  // namespace impactosc

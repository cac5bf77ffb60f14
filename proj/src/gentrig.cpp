#include "impactosc/gentrig.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "impactosc/error.hpp"
#include "impactosc/ode.hpp"

namespace impactosc {

namespace {

double ipow(double x, int e)
{
    double r = 1.0;
    double b = x;
    while (e > 0) {
        if (e & 1) r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

struct UnperturbedRhs {
    int n;
    void operator()(double, const std::array<double, 2>& y, std::array<double, 2>& dy) const
    {
        dy[0] = y[1];
        dy[1] = -ipow(y[0], 2 * n + 1);
    }
};

// The period integral after u = 1 - s^2:
//   int_0^1 (1 - u^m)^(-1/2) du = int_0^1 2 s / sqrt(1 - (1 - s^2)^m) ds,
// whose integrand extends analytically to s = 0 with value 2/sqrt(m).
double quadrature_period(int n, double tol)
{
    const double m = 2.0 * n + 2.0;
    auto integrand = [m](double s) {
        if (s <= 0.0) return 2.0 / std::sqrt(m);
        const double w = -std::expm1(m * std::log1p(-s * s));
        return 2.0 * s / std::sqrt(w);
    };
    double err = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        integrand, 0.0, 1.0, 15, std::min(tol, 1e-14), &err);
    if (!std::isfinite(value) || err > tol * std::abs(value)) {
        throw NumericalError("compute_period: quadrature did not converge (error estimate " +
                             std::to_string(err) + ")");
    }
    return 4.0 * std::sqrt(n + 1.0) * value;
}

// Integrates the orbit from (1, 0) until S changes sign from + to -, which
// first happens at t = T0.
double event_period(int n, double tol, double t_guess)
{
    ode::Tolerances tols;
    tols.rel_tol = 1e-14;
    tols.abs_tol = 1e-15;
    tols.max_step = t_guess / 64.0;
    auto stepper = ode::make_dop853<2>(UnperturbedRhs{n}, tols);
    stepper.reset(0.0, {1.0, 0.0});
    const double t_cap = 2.0 * t_guess;
    while (stepper.t() < t_cap) {
        const double s_prev = stepper.y()[1];
        stepper.step(t_cap);
        const double s_new = stepper.y()[1];
        if (s_prev > 0.0 && s_new <= 0.0) {
            auto g = [&](double t) { return stepper.dense(t)[1]; };
            auto dg = [&](double t) { return stepper.dense_derivative(t)[1]; };
            return ode::find_root(g, dg, stepper.t_prev(), stepper.t(), std::min(tol, 1e-13) * t_guess);
        }
    }
    throw NumericalError("compute_period: orbit did not return within twice the quadrature period");
}

}  // namespace

PeriodEstimates period_estimates(int n, double tol)
{
    if (n < 0) throw DomainError("compute_period: n must be >= 0");
    if (!(tol > 1e-14 && tol < 1e-6)) throw DomainError("compute_period: tol must lie in (1e-14, 1e-6)");
    PeriodEstimates est{};
    est.quadrature = quadrature_period(n, tol);
    est.event = event_period(n, tol, est.quadrature);
    return est;
}

double compute_period(int n, double tol)
{
    const PeriodEstimates est = period_estimates(n, tol);
    if (std::abs(est.quadrature - est.event) > tol) {
        throw NumericalError("compute_period: quadrature (" + std::to_string(est.quadrature) +
                             ") and event detection (" + std::to_string(est.event) + ") disagree");
    }
    return est.quadrature;
}

GenTrigTable GenTrigTable::build(int n, std::size_t intervals, double tol)
{
    if (n < 0) throw DomainError("GenTrigTable: n must be >= 0");
    if (intervals < 256) throw DomainError("GenTrigTable: at least 256 intervals required");

    GenTrigTable table;
    table.n_ = n;
    table.period_ = compute_period(n, std::clamp(tol, 2e-14, 9e-7));
    const double quarter = 0.25 * table.period_;
    table.h_ = quarter / static_cast<double>(intervals);
    table.c_.resize(intervals + 1);
    table.s_.resize(intervals + 1);

    ode::Tolerances tols;
    tols.rel_tol = 1e-15;
    tols.abs_tol = 1e-16;
    auto stepper = ode::make_dop853<2>(UnperturbedRhs{n}, tols);
    stepper.reset(0.0, {1.0, 0.0});
    table.c_[0] = 1.0;
    table.s_[0] = 0.0;
    try {
        for (std::size_t i = 1; i <= intervals; ++i) {
            const double target = (i == intervals) ? quarter : static_cast<double>(i) * table.h_;
            while (stepper.t() < target) stepper.step(target);
            table.c_[i] = stepper.y()[0];
            table.s_[i] = stepper.y()[1];
        }
    } catch (const Error& e) {
        throw NumericalError(std::string("GenTrigTable: integration failed: ") + e.what());
    }
    return table;
}

double GenTrigTable::defect(CosSin cs) const
{
    return (n_ + 1.0) * cs.s * cs.s + ipow(cs.c, 2 * n_ + 2) - 1.0;
}

double GenTrigTable::node_defect(std::size_t i) const { return defect({c_[i], s_[i]}); }

double GenTrigTable::max_node_defect() const
{
    double worst = 0.0;
    for (std::size_t i = 0; i < c_.size(); ++i) worst = std::max(worst, std::abs(node_defect(i)));
    return worst;
}

CosSin GenTrigTable::eval_quarter(double t) const
{
    const std::size_t last = c_.size() - 1;
    double pos = t / h_;
    std::size_t i = static_cast<std::size_t>(std::max(0.0, std::floor(pos)));
    if (i >= last) i = last - 1;
    const double u = pos - static_cast<double>(i);
    const double h = h_;

    const int m = 2 * n_ + 1;
    const double c0 = c_[i], c1 = c_[i + 1];
    const double s0 = s_[i], s1 = s_[i + 1];
    // C: value, C' = S, C'' = -C^m;  S: value, S' = -C^m, S'' = -m C^(m-1) S
    const double c0m = ipow(c0, m), c1m = ipow(c1, m);
    const double c0m1 = m > 1 ? ipow(c0, m - 1) : 1.0;
    const double c1m1 = m > 1 ? ipow(c1, m - 1) : 1.0;

    const double u2 = u * u, u3 = u2 * u, u4 = u3 * u, u5 = u4 * u;
    const double H0 = 1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5;
    const double H1 = u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5;
    const double H2 = 0.5 * u2 - 1.5 * u3 + 1.5 * u4 - 0.5 * u5;
    const double H3 = 10.0 * u3 - 15.0 * u4 + 6.0 * u5;
    const double H4 = -4.0 * u3 + 7.0 * u4 - 3.0 * u5;
    const double H5 = 0.5 * u3 - u4 + 0.5 * u5;

    const double h2 = h * h;
    CosSin out;
    out.c = c0 * H0 + h * s0 * H1 + h2 * (-c0m) * H2 + c1 * H3 + h * s1 * H4 + h2 * (-c1m) * H5;
    out.s = s0 * H0 + h * (-c0m) * H1 + h2 * (-m * c0m1 * s0) * H2 + s1 * H3 + h * (-c1m) * H4 +
            h2 * (-m * c1m1 * s1) * H5;
    return out;
}

CosSin GenTrigTable::eval(double t) const
{
    const double T = period_;
    double r = t - T * std::floor(t / T);
    if (r >= T || r < 0.0) r = 0.0;
    double sign_c = 1.0, sign_s = 1.0;
    if (r >= 0.5 * T) {
        r -= 0.5 * T;
        sign_c = -1.0;
        sign_s = -1.0;
    }
    // r in [0, T/2)
    if (r <= 0.25 * T) {
        const CosSin q = eval_quarter(r);
        return {sign_c * q.c, sign_s * q.s};
    }
    // C(r) = -C(T/2 - r), S(r) = S(T/2 - r)
    const CosSin q = eval_quarter(0.5 * T - r);
    return {-sign_c * q.c, sign_s * q.s};
}

double GenTrigTable::solve_quarter_from_s(double s) const
{
    // S decreases from 0 to -1/sqrt(n+1) on [0, T0/4]; S' = -C^(2n+1).
    const std::size_t last = s_.size() - 1;
    auto it = std::lower_bound(s_.begin(), s_.end(), s, [](double a, double b) { return a > b; });
    std::size_t j = static_cast<std::size_t>(std::distance(s_.begin(), it));
    j = std::clamp<std::size_t>(j, 1, last);
    double lo = node_time(j - 1), hi = node_time(j);
    if (j == last) hi = 0.25 * period_;
    double u = 0.5 * (lo + hi);
    for (int it_n = 0; it_n < 60; ++it_n) {
        const CosSin cs = eval_quarter(u);
        const double g = cs.s - s;
        if (g > 0.0) lo = u; else hi = u;
        const double dg = -ipow(cs.c, 2 * n_ + 1);
        double next = (dg != 0.0) ? u - g / dg : 0.5 * (lo + hi);
        if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - u) <= 1e-17 + 4.0 * std::numeric_limits<double>::epsilon() * u) return next;
        u = next;
    }
    return u;
}

double GenTrigTable::solve_quarter_from_c(double c) const
{
    // C decreases from 1 to 0 on [0, T0/4]; C' = S.
    const std::size_t last = c_.size() - 1;
    auto it = std::lower_bound(c_.begin(), c_.end(), c, [](double a, double b) { return a > b; });
    std::size_t j = static_cast<std::size_t>(std::distance(c_.begin(), it));
    j = std::clamp<std::size_t>(j, 1, last);
    double lo = node_time(j - 1), hi = node_time(j);
    if (j == last) hi = 0.25 * period_;
    double u = 0.5 * (lo + hi);
    for (int it_n = 0; it_n < 60; ++it_n) {
        const CosSin cs = eval_quarter(u);
        const double g = cs.c - c;
        if (g > 0.0) lo = u; else hi = u;
        const double dg = cs.s;
        double next = (dg != 0.0) ? u - g / dg : 0.5 * (lo + hi);
        if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - u) <= 1e-17 + 4.0 * std::numeric_limits<double>::epsilon() * u) return next;
        u = next;
    }
    return u;
}

double GenTrigTable::phase_of(double c, double s) const
{
    if (c == 0.0 && s == 0.0) throw DomainError("GenTrigTable::phase_of: (0, 0) is not on the curve");
    const double T = period_;
    const double ac = std::abs(c);
    const double as = std::abs(s);
    // Quarter-period parameter u' with C(u') = |c|, S(u') = -|s|. Pick the
    // better-conditioned equation: S' = -C^(2n+1) is large where |c| is large.
    const double u = (ipow(ac, 2 * n_ + 2) >= 0.5) ? solve_quarter_from_s(-as) : solve_quarter_from_c(ac);
    double phase;
    if (c >= 0.0 && s <= 0.0) phase = u;
    else if (c < 0.0 && s <= 0.0) phase = 0.5 * T - u;
    else if (c <= 0.0 && s > 0.0) phase = 0.5 * T + u;
    else phase = T - u;
    if (phase >= T) phase -= T;
    return phase;
}

}  // namespace impactosc

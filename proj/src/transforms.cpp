#include "impactosc/transforms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "impactosc/error.hpp"

namespace impactosc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr std::size_t kMaxDegree = 64;

double wrap_unit(double v)
{
    double r = v - std::floor(v);
    return r >= 1.0 ? 0.0 : r;
}

double binomial(int n, int k)
{
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

ImpactModel::ImpactModel(PotentialSpec s, GenTrigTable t, double imin, double delta)
    : spec(std::move(s)),
      table(std::move(t)),
      consts(DerivedConstants::from_period(table.n(), table.period())),
      i_min(imin),
      fd_delta(delta)
{
    spec.validate();
    if (spec.n != table.n()) throw ConfigError("ImpactModel: table built for a different n");
    if (!(i_min > 0.0)) throw ConfigError("ImpactModel: i_min must be positive");
    if (!(fd_delta > 0.0 && fd_delta < 0.1)) throw ConfigError("ImpactModel: fd_delta must lie in (0, 0.1)");
}

ImpactModel ImpactModel::build(PotentialSpec spec, std::size_t intervals, double i_min, double fd_delta)
{
    spec.validate();
    auto table = GenTrigTable::build(spec.n, intervals);
    return ImpactModel(std::move(spec), std::move(table), i_min, fd_delta);
}

double ImpactModel::rho0(double I) const
{
    return std::pow(I / consts.d, 1.0 / (2.0 * consts.beta));
}

double ImpactModel::rho0_prime(double I) const
{
    return rho0(I) / (2.0 * consts.beta * I);
}

PlanePoint psi1(const DerivedConstants& k, const GenTrigTable& table, const ActionAngle& aa)
{
    if (!(aa.lambda > 0.0)) throw DomainError("psi1: lambda must be positive");
    const CosSin cs = table.eval(aa.theta * k.period);
    const double al = k.a * aa.lambda;
    return PlanePoint{std::pow(al, k.alpha) * cs.c, std::pow(al, k.beta) * cs.s};
}

ActionAngle psi1_inv(const DerivedConstants& k, const GenTrigTable& table, double x, double y)
{
    const double energy = unperturbed_energy(k.n, x, y);
    if (!(energy > 0.0)) throw DomainError("psi1_inv: the origin has no action-angle coordinates");
    const double al = std::pow((2.0 * k.n + 2.0) * energy, 1.0 / (2.0 * k.beta));
    const double c = x / std::pow(al, k.alpha);
    const double s = y / std::pow(al, k.beta);
    const double u = table.phase_of(c, s);
    return ActionAngle{al / k.a, wrap_unit(u / k.period)};
}

ActionAngle psi2(const ImpactCoords& ic)
{
    if (!(ic.rho > 0.0)) throw DomainError("psi2: rho must be positive");
    return ActionAngle{2.0 * ic.rho, wrap_unit(0.5 * unit_phase(ic.phi) - 0.25)};
}

ImpactCoords psi2_inv(const ActionAngle& aa)
{
    if (!(aa.lambda > 0.0)) throw DomainError("psi2_inv: lambda must be positive");
    constexpr double slack = 1e-12;
    const double th = wrap_unit(aa.theta);
    double phi;
    if (th >= 0.75) phi = 2.0 * (th - 0.75);
    else if (th <= 0.25) phi = 2.0 * th + 0.5;
    else if (th <= 0.25 + slack) phi = 1.0;
    else if (th >= 0.75 - slack) phi = 0.0;
    else throw DomainError("psi2_inv: angle lies in the half-plane x < 0");
    return ImpactCoords{0.5 * aa.lambda, phi};
}

ImpactCoords impact_coords_of(const DerivedConstants& k, const GenTrigTable& table, double x, double v)
{
    if (!(x >= 0.0)) throw DomainError("impact_coords_of: x must be >= 0");
    if (x == 0.0) {
        if (v == 0.0) throw DomainError("impact_coords_of: state at rest on the barrier");
        const double energy = 0.5 * v * v;
        const double al = std::pow((2.0 * k.n + 2.0) * energy, 1.0 / (2.0 * k.beta));
        return ImpactCoords{0.5 * al / k.a, v > 0.0 ? 0.0 : 1.0};
    }
    return psi2_inv(psi1_inv(k, table, x, v));
}

RhoSolution solve_rho(const ImpactModel& m, double I, double theta, double tau)
{
    if (!(I > 0.0) || !std::isfinite(I)) throw DomainError("solve_rho: I must be positive and finite");
    if (I < m.i_min) {
        throw RegimeError("solve_rho: I = " + std::to_string(I) + " is below i_min = " + std::to_string(m.i_min));
    }
    const auto& k = m.consts;
    const double two_beta = 2.0 * k.beta;
    const double r0 = m.rho0(I);
    const double u = unit_phase(tau);
    const double c = (u == 0.0) ? 0.0 : std::max(m.table.eval((0.5 * u - 0.25) * k.period).c, 0.0);

    const std::size_t deg = m.spec.coeffs.size();
    std::array<double, kMaxDegree> p{};
    m.spec.evaluate(theta, std::span<double>(p.data(), deg));

    // F(R) = H3(r0 - R) - I with the leading part written as I ((1 - R/r0)^(2 beta) - 1)
    auto F = [&](double R, double* dF) {
        const double rho = r0 - R;
        const double q = std::log1p(-R / r0);
        const double lead_minus_I = I * std::expm1(two_beta * q);
        double P = 0.0, dPdx = 0.0;
        const double x = (c > 0.0) ? std::pow(2.0 * k.a * rho, k.alpha) * c : 0.0;
        for (std::size_t i = deg; i-- > 0;) {
            P = P * x + p[i] / (static_cast<double>(i) + 1.0);
            dPdx = dPdx * x + p[i];
        }
        P *= x;
        if (dF) *dF = -(two_beta * (I + lead_minus_I) / rho + dPdx * k.alpha * x / rho);
        return lead_minus_I + P;
    };

    RhoSolution out;
    const double lo = -r0;       // rho = 2 r0
    const double hi = 0.5 * r0;  // rho = r0 / 2
    double R = 0.0;
    bool converged = false;
    double prev_step = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 50; ++it) {
        double df = 0.0;
        const double f = F(R, &df);
        ++out.iterations;
        if (f == 0.0) {
            converged = true;
            break;
        }
        if (!(df < 0.0)) break;
        const double step = -f / df;
        const double next = R + step;
        if (!(next > lo && next < hi)) break;
        R = next;
        if (std::abs(step) <= 4.0 * kEps * std::abs(R) || std::abs(step) <= 1e-17 * r0) {
            converged = true;
            break;
        }
        if (it > 8 && std::abs(step) >= prev_step) {
            converged = std::abs(f) <= 1e-13 * I;
            break;
        }
        prev_step = std::abs(step);
    }

    if (!converged) {
        out.bisected = true;
        double a = lo, b = hi;
        double fa = F(a, nullptr), fb = F(b, nullptr);
        if (!(fa > 0.0 && fb < 0.0)) {
            throw RegimeError("solve_rho: no bracket for H3 = I in [rho0/2, 2 rho0] at I = " + std::to_string(I));
        }
        for (int it = 0; it < 200 && (b - a) > 4.0 * kEps * std::max(std::abs(a), std::abs(b)); ++it) {
            const double mid = 0.5 * (a + b);
            const double fm = F(mid, nullptr);
            ++out.iterations;
            if (fm == 0.0) {
                a = b = mid;
                break;
            }
            if (fm > 0.0) a = mid;
            else b = mid;
        }
        R = 0.5 * (a + b);
    }

    out.R = R;
    out.rho = r0 - R;
    const H3Value h = h3_full(m.spec, k, m.table, out.rho, tau, theta);
    out.d_rho = h.d_rho;
    out.d_t = h.d_t;
    if (!(out.d_rho > 0.0)) throw RegimeError("solve_rho: dH3/drho <= 0 at the solution; I is too small");
    if (!(std::abs(h.value - I) < 1e-10 * I)) {
        throw NumericalError("solve_rho: residual " + std::to_string(std::abs(h.value - I) / I) +
                             " (relative) above 1e-10");
    }
    return out;
}

FdEstimate fd_partial_R(const ImpactModel& m, double I, double theta, double tau, int j, int k)
{
    if (j < 0 || k < 0 || j + k > 5) throw DomainError("fd_partial_R: need j, k >= 0 and j + k <= 5");
    FdEstimate out;
    const int order = j + k;
    if (order == 0) {
        out.value = out.fine = solve_rho(m, I, theta, tau).R;
        return out;
    }
    const double h = std::pow(m.fd_delta, 5.0 / (order + 4.0));

    double max_abs_R = 0.0;
    auto central = [&](double step) {
        const double hI = I * step;
        const double ht = step;
        double acc = 0.0;
        for (int a = 0; a <= j; ++a) {
            for (int b = 0; b <= k; ++b) {
                const double w = (((a + b) % 2) ? -1.0 : 1.0) * binomial(j, a) * binomial(k, b);
                const double R = solve_rho(m, I + (0.5 * j - a) * hI, theta + (0.5 * k - b) * ht, tau).R;
                max_abs_R = std::max(max_abs_R, std::abs(R));
                acc += w * R;
            }
        }
        return acc / (std::pow(hI, j) * std::pow(ht, k));
    };

    const double coarse = central(h);
    out.fine = central(0.5 * h);
    out.value = (4.0 * out.fine - coarse) / 3.0;
    const double denom = std::pow(0.5 * h * I, j) * std::pow(0.5 * h, k);
    out.noise = std::pow(2.0, order) * 1e-15 * max_abs_R / denom;
    const double gap = std::abs(out.value - out.fine);
    out.disagreement = gap / std::max({std::abs(out.value), out.noise, std::numeric_limits<double>::min()});
    if (out.disagreement > 0.1) {
        out.accuracy_warning = true;
        out.note = "Richardson levels disagree by " + std::to_string(out.disagreement) + " (relative)";
    }
    return out;
}

ExchangedCoords to_exchanged(const ImpactModel& m, const ImpactCoords& ic, double t)
{
    return ExchangedCoords{h3(m.spec, m.consts, m.table, ic.rho, ic.phi, t), unit_phase(t), ic.phi};
}

ImpactCoords from_exchanged(const ImpactModel& m, const ExchangedCoords& ex)
{
    return ImpactCoords{solve_rho(m, ex.I, ex.theta, ex.tau).rho, ex.tau};
}

}  // namespace impactosc

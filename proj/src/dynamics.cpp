#include "impactosc/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "impactosc/error.hpp"

namespace impactosc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

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

constexpr std::size_t kMaxDegree = 64;

}  // namespace

double unit_phase(double t)
{
    const double r = t - std::floor(t);
    return r >= 1.0 ? 0.0 : r;
}

FourierSeries::FourierSeries(double a0, std::vector<double> cos_coeffs, std::vector<double> sin_coeffs)
    : a0_(a0), cos_(std::move(cos_coeffs)), sin_(std::move(sin_coeffs))
{
}

double FourierSeries::derivative(double t, int order) const
{
    if (order < 0) throw DomainError("FourierSeries::derivative: negative order");
    double acc = (order == 0) ? a0_ : 0.0;
    const std::size_t K = harmonics();
    if (K == 0) return acc;
    const double u = unit_phase(t);
    const double c1 = std::cos(kTwoPi * u);
    const double s1 = std::sin(kTwoPi * u);
    double ck = c1, sk = s1;
    for (std::size_t k = 1; k <= K; ++k) {
        const double ak = k <= cos_.size() ? cos_[k - 1] : 0.0;
        const double bk = k <= sin_.size() ? sin_[k - 1] : 0.0;
        const double w = kTwoPi * static_cast<double>(k);
        // d^m/dt^m of (a cos + b sin)(w t) cycles with period 4 in m
        double term;
        switch (order % 4) {
        case 0: term = ak * ck + bk * sk; break;
        case 1: term = -ak * sk + bk * ck; break;
        case 2: term = -ak * ck - bk * sk; break;
        default: term = ak * sk - bk * ck; break;
        }
        acc += std::pow(w, order) * term;
        const double cn = ck * c1 - sk * s1;
        const double sn = sk * c1 + ck * s1;
        ck = cn;
        sk = sn;
    }
    return acc;
}

bool FourierSeries::is_zero() const
{
    if (a0_ != 0.0) return false;
    return std::all_of(cos_.begin(), cos_.end(), [](double v) { return v == 0.0; }) &&
           std::all_of(sin_.begin(), sin_.end(), [](double v) { return v == 0.0; });
}

double FourierSeries::sup_bound() const
{
    double b = std::abs(a0_);
    for (double v : cos_) b += std::abs(v);
    for (double v : sin_) b += std::abs(v);
    return b;
}

PotentialSpec PotentialSpec::unperturbed(int n)
{
    PotentialSpec spec;
    spec.n = n;
    spec.coeffs.assign(static_cast<std::size_t>(2 * n + 1), FourierSeries{});
    return spec;
}

void PotentialSpec::validate() const
{
    if (n < 0) throw ConfigError("potential: n must be >= 0");
    if (static_cast<std::size_t>(2 * n + 2) > kMaxDegree) throw ConfigError("potential: n too large");
    if (coeffs.size() != static_cast<std::size_t>(2 * n + 1)) {
        throw ConfigError("potential: expected " + std::to_string(2 * n + 1) + " coefficient functions, got " +
                          std::to_string(coeffs.size()));
    }
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        const auto& p = coeffs[i];
        bool ok = std::isfinite(p.a0());
        for (double v : p.cos_coeffs()) ok = ok && std::isfinite(v);
        for (double v : p.sin_coeffs()) ok = ok && std::isfinite(v);
        if (!ok) throw ConfigError("potential: non-finite coefficient in p_" + std::to_string(i));
    }
}

bool PotentialSpec::is_unperturbed() const
{
    return std::all_of(coeffs.begin(), coeffs.end(), [](const FourierSeries& p) { return p.is_zero(); });
}

std::size_t PotentialSpec::max_harmonics() const
{
    std::size_t K = 0;
    for (const auto& p : coeffs) K = std::max(K, p.harmonics());
    return K;
}

void PotentialSpec::evaluate(double t, std::span<double> out) const
{
    const std::size_t K = max_harmonics();
    std::array<double, 33> cs{}, sn{};
    const std::size_t Kc = std::min<std::size_t>(K, cs.size() - 1);
    if (K > 0) {
        const double u = unit_phase(t);
        const double c1 = std::cos(kTwoPi * u);
        const double s1 = std::sin(kTwoPi * u);
        cs[1] = c1;
        sn[1] = s1;
        for (std::size_t k = 2; k <= Kc; ++k) {
            cs[k] = cs[k - 1] * c1 - sn[k - 1] * s1;
            sn[k] = sn[k - 1] * c1 + cs[k - 1] * s1;
        }
    }
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        const auto& p = coeffs[i];
        if (p.harmonics() > Kc) {
            out[i] = p(t);
            continue;
        }
        double v = p.a0();
        const auto& a = p.cos_coeffs();
        const auto& b = p.sin_coeffs();
        for (std::size_t k = 0; k < a.size(); ++k) v += a[k] * cs[k + 1];
        for (std::size_t k = 0; k < b.size(); ++k) v += b[k] * sn[k + 1];
        out[i] = v;
    }
}

double force_with(int n, std::span<const double> p, double x)
{
    // x^(2n+1) + p_2n x^2n + ... + p_0
    double acc = 1.0;
    for (int i = 2 * n; i >= 0; --i) acc = acc * x + p[static_cast<std::size_t>(i)];
    return -acc;
}

double force(const PotentialSpec& spec, double x, double t)
{
    std::array<double, kMaxDegree> p{};
    spec.evaluate(t, std::span<double>(p.data(), spec.coeffs.size()));
    return force_with(spec.n, std::span<const double>(p.data(), spec.coeffs.size()), x);
}

double unperturbed_energy(int n, double x, double y)
{
    return 0.5 * y * y + ipow(x, 2 * n + 2) / (2.0 * n + 2.0);
}

double hamiltonian(const PotentialSpec& spec, double x, double y, double t)
{
    std::array<double, kMaxDegree> p{};
    spec.evaluate(t, std::span<double>(p.data(), spec.coeffs.size()));
    // sum_i p_i x^(i+1)/(i+1) by Horner in x
    double acc = 0.0;
    for (int i = 2 * spec.n; i >= 0; --i) acc = acc * x + p[static_cast<std::size_t>(i)] / (i + 1.0);
    return unperturbed_energy(spec.n, x, y) + acc * x;
}

DerivedConstants DerivedConstants::from_period(int n, double period)
{
    if (!(period > 0.0)) throw DomainError("DerivedConstants: period must be positive");
    DerivedConstants k;
    k.n = n;
    k.period = period;
    k.alpha = 1.0 / (n + 2.0);
    k.beta = (n + 1.0) / (n + 2.0);
    k.a = 1.0 / (k.alpha * period);
    k.d = std::pow(2.0 * k.a, 2.0 * k.beta) / (2.0 * n + 2.0);
    return k;
}

double impact_position(const DerivedConstants& k, const GenTrigTable& table, double rho, double phi)
{
    const double u = unit_phase(phi);
    if (u == 0.0) return 0.0;
    const double c = table.eval((0.5 * u - 0.25) * k.period).c;
    return std::pow(2.0 * k.a * rho, k.alpha) * std::max(c, 0.0);
}

H3Value h3_full(const PotentialSpec& spec, const DerivedConstants& k, const GenTrigTable& table, double rho,
                double phi, double t)
{
    if (!(rho > 0.0)) throw DomainError("h3: rho must be positive");
    H3Value out;
    const double lead = k.d * std::pow(rho, 2.0 * k.beta);
    const double x = impact_position(k, table, rho, phi);
    const std::size_t m = spec.coeffs.size();
    std::array<double, kMaxDegree> p{};
    spec.evaluate(t, std::span<double>(p.data(), m));
    // P = sum p_i x^(i+1)/(i+1);  dP/dx = sum p_i x^i;  dx/drho = alpha x / rho
    double P = 0.0, dPdx = 0.0, dPdt = 0.0;
    for (int i = 2 * spec.n; i >= 0; --i) {
        const auto ui = static_cast<std::size_t>(i);
        P = P * x + p[ui] / (i + 1.0);
        dPdx = dPdx * x + p[ui];
        dPdt = dPdt * x + spec.coeffs[ui].derivative(t, 1) / (i + 1.0);
    }
    P *= x;
    dPdt *= x;
    out.perturbation = P;
    out.perturbation_d_rho = dPdx * k.alpha * x / rho;
    out.value = lead + P;
    out.d_rho = 2.0 * k.beta * lead / rho + out.perturbation_d_rho;
    out.d_t = dPdt;
    return out;
}

double h3(const PotentialSpec& spec, const DerivedConstants& k, const GenTrigTable& table, double rho, double phi,
          double t)
{
    return h3_full(spec, k, table, rho, phi, t).value;
}

}  // namespace impactosc

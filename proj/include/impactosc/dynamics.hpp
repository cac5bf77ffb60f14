#pragma once

// Time-periodic polynomial potential
//   V(x, t) = x^(2n+2)/(2n+2) + sum_i p_i(t) x^(i+1)/(i+1),  i = 0..2n,
// its force, the Hamiltonians H and H0, and H3 in impact coordinates.

#include <span>
#include <vector>

#include "impactosc/gentrig.hpp"

namespace impactosc {

/// p(t) = a0 + sum_k a_k cos(2 pi k t) + b_k sin(2 pi k t), period exactly 1.
class FourierSeries {
public:
    FourierSeries() = default;
    FourierSeries(double a0, std::vector<double> cos_coeffs, std::vector<double> sin_coeffs);

    static FourierSeries constant(double a0) { return FourierSeries(a0, {}, {}); }

    double operator()(double t) const { return derivative(t, 0); }
    /// d^order p / dt^order at t.
    double derivative(double t, int order) const;

    double a0() const { return a0_; }
    const std::vector<double>& cos_coeffs() const { return cos_; }
    const std::vector<double>& sin_coeffs() const { return sin_; }
    std::size_t harmonics() const { return std::max(cos_.size(), sin_.size()); }
    bool is_zero() const;
    /// |a0| + sum |a_k| + |b_k|, an upper bound for sup |p|.
    double sup_bound() const;

private:
    double a0_ = 0.0;
    std::vector<double> cos_;
    std::vector<double> sin_;
};

/// Reduces t to [0, 1); identical for arguments differing by an integer that
/// is exactly representable.
double unit_phase(double t);

struct PotentialSpec {
    int n = 1;
    std::vector<FourierSeries> coeffs;  ///< p_0 ... p_2n

    /// All p_i identically zero.
    static PotentialSpec unperturbed(int n);

    /// Throws ConfigError when the coefficient count is not 2n+1 or a value is not finite.
    void validate() const;
    bool is_unperturbed() const;
    std::size_t max_harmonics() const;

    /// Writes p_0(t) ... p_2n(t) into out (size 2n+1), sharing the harmonics.
    void evaluate(double t, std::span<double> out) const;
};

/// -x^(2n+1) - sum_i p_i(t) x^i (Horner in x). Requires x >= 0.
double force(const PotentialSpec& spec, double x, double t);

/// Same as force() with the coefficient values already evaluated at t.
double force_with(int n, std::span<const double> p, double x);

/// H(x, y, t) = y^2/2 + x^(2n+2)/(2n+2) + sum_i p_i(t) x^(i+1)/(i+1).
double hamiltonian(const PotentialSpec& spec, double x, double y, double t);

/// H0(x, y) = y^2/2 + x^(2n+2)/(2n+2).
double unperturbed_energy(int n, double x, double y);

/// alpha = 1/(n+2), beta = (n+1)/(n+2), a = 1/(alpha T0), d = (2a)^(2 beta)/(2n+2).
struct DerivedConstants {
    int n = 1;
    double period = 0.0;  ///< T0
    double alpha = 0.0;
    double beta = 0.0;
    double a = 0.0;
    double d = 0.0;

    static DerivedConstants from_period(int n, double period);
};

/// Position x(rho, phi) = (2 a rho)^alpha C((frac(phi)/2 - 1/4) T0) of the
/// folded action-angle chart; zero exactly at the angle shift for integer phi.
double impact_position(const DerivedConstants& k, const GenTrigTable& table, double rho, double phi);

/// H3 together with its partial derivatives in rho and t.
struct H3Value {
    double value = 0.0;
    double d_rho = 0.0;
    double d_t = 0.0;
    double perturbation = 0.0;        ///< H3 - d rho^(2 beta)
    double perturbation_d_rho = 0.0;  ///< its rho-derivative
};

/// H3(rho, phi, t) = d rho^(2 beta) + sum_i p_i(t) x^(i+1)/(i+1) with
/// x = impact_position(rho, phi). 1-periodic in phi, right-continuous at integers.
/// Throws DomainError for rho <= 0.
double h3(const PotentialSpec& spec, const DerivedConstants& k, const GenTrigTable& table, double rho, double phi,
          double t);

H3Value h3_full(const PotentialSpec& spec, const DerivedConstants& k, const GenTrigTable& table, double rho,
                double phi, double t);

}  // namespace impactosc

#pragma once

// Generalized cosine/sine pair (C, S): the solution of
//   C' = S,  S' = -C^(2n+1),  (C(0), S(0)) = (1, 0),
// with minimal period T0. C and S obey (n+1) S^2 + C^(2n+2) = 1.

#include <cstddef>
#include <vector>

namespace impactosc {

struct CosSin {
    double c;
    double s;
};

/// Both independent period estimates.
struct PeriodEstimates {
    double quadrature;  ///< 4 sqrt(n+1) * int_0^1 (1 - u^(2n+2))^(-1/2) du
    double event;       ///< first return of the integrated orbit to (1, 0)
};

/// Computes T0 both ways without comparing them.
PeriodEstimates period_estimates(int n, double tol);

/// Minimal period T0 of (C, S). The quadrature value is returned after it has
/// been confirmed by event detection to within `tol` (NumericalError otherwise).
/// Requires n >= 0 and tol in (1e-14, 1e-6).
double compute_period(int n, double tol);

/// Immutable quarter-period table of (C, S) with quintic Hermite interpolation.
///
/// Nodes cover [0, T0/4] uniformly; evaluation on the whole real line uses
/// evenness of C, oddness of S, half-period antisymmetry and T0-periodicity.
/// Hermite data at each node come from the ODE itself (C'' = -C^(2n+1),
/// S'' = -(2n+1) C^(2n) S), so the interpolant is of order 5 in value.
class GenTrigTable {
public:
    /// Integrates the defining ODE to tabulate M+1 nodes (M >= 256).
    static GenTrigTable build(int n, std::size_t intervals = 1024, double tol = 1e-12);

    int n() const { return n_; }
    double period() const { return period_; }
    std::size_t intervals() const { return c_.size() - 1; }
    double node_spacing() const { return h_; }

    double node_time(std::size_t i) const { return static_cast<double>(i) * h_; }
    double node_c(std::size_t i) const { return c_[i]; }
    double node_s(std::size_t i) const { return s_[i]; }
    /// (n+1) S^2 + C^(2n+2) - 1 at node i.
    double node_defect(std::size_t i) const;
    double max_node_defect() const;

    /// (C(t), S(t)) for any finite t.
    CosSin eval(double t) const;

    /// Conservation defect (n+1) S^2 + C^(2n+2) - 1 of an arbitrary pair.
    double defect(CosSin cs) const;

    /// Solves (C(u), S(u)) = (c, s) for u in [0, T0). The pair is expected to
    /// lie on the conservation curve; the quadrant is taken from the signs.
    double phase_of(double c, double s) const;

private:
    GenTrigTable() = default;
    CosSin eval_quarter(double t) const;
    double solve_quarter_from_c(double c) const;
    double solve_quarter_from_s(double s) const;

    int n_ = 1;
    double period_ = 0.0;
    double h_ = 0.0;
    std::vector<double> c_;
    std::vector<double> s_;
};

}  // namespace impactosc

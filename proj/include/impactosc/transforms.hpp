#pragma once

// Coordinate changes of the impact problem:
//   psi1: (lambda, vartheta) -> (x, y)      action-angle chart of H0
//   psi2: (rho, phi) -> (lambda, vartheta)  folding with impacts at integer phi
//   exchange: (rho, phi, t) -> (I, theta, tau) = (H3, t mod 1, phi)
// and the implicit function R(I, theta, tau) = rho0(I) - rho.

#include <string>

#include "impactosc/dynamics.hpp"
#include "impactosc/gentrig.hpp"

namespace impactosc {

struct ActionAngle {
    double lambda = 0.0;
    double theta = 0.0;  ///< in [0, 1)
};

struct ImpactCoords {
    double rho = 0.0;
    double phi = 0.0;  ///< lifted; integer part counts impacts
};

struct ExchangedCoords {
    double I = 0.0;
    double theta = 0.0;  ///< old time mod 1
    double tau = 0.0;    ///< old angle phi
};

/// I = upsilon / eps.
struct ScaledCoords {
    double upsilon = 0.0;
    double eps = 0.0;
    double action() const { return upsilon / eps; }
};

struct PlanePoint {
    double x = 0.0;
    double y = 0.0;
};

/// Immutable bundle shared by the transforms and the map analysis.
struct ImpactModel {
    ImpactModel(PotentialSpec spec, GenTrigTable table, double i_min = 50.0, double fd_delta = 1e-3);

    /// Validates the spec and builds the (C, S) table for spec.n.
    static ImpactModel build(PotentialSpec spec, std::size_t intervals = 1024, double i_min = 50.0,
                             double fd_delta = 1e-3);

    /// rho0(I) = (I / d)^(1/(2 beta)), the unperturbed solution of H3 = I.
    double rho0(double I) const;
    /// d rho0 / dI; also the unperturbed flight time at energy I.
    double rho0_prime(double I) const;

    PotentialSpec spec;
    GenTrigTable table;
    DerivedConstants consts;
    double i_min;     ///< smallest I accepted by solve_rho
    double fd_delta;  ///< base step for fd_partial_R
};

/// x = (a lambda)^alpha C(vartheta T0), y = (a lambda)^beta S(vartheta T0).
PlanePoint psi1(const DerivedConstants& k, const GenTrigTable& table, const ActionAngle& aa);

/// Inverse of psi1; DomainError at the origin.
ActionAngle psi1_inv(const DerivedConstants& k, const GenTrigTable& table, double x, double y);

/// lambda = 2 rho, vartheta = frac(phi)/2 - 1/4 (mod 1).
ActionAngle psi2(const ImpactCoords& ic);

/// Inverse of psi2 on the closed half-plane x >= 0, returning phi in [0, 1]:
/// phi = 0 for the outgoing point on x = 0 (y > 0), phi = 1 for the incoming one.
ImpactCoords psi2_inv(const ActionAngle& aa);

/// (rho, phi in [0, 1]) of a physical state with x >= 0.
ImpactCoords impact_coords_of(const DerivedConstants& k, const GenTrigTable& table, double x, double v);

struct RhoSolution {
    double rho = 0.0;
    double R = 0.0;      ///< rho0(I) - rho
    double d_rho = 0.0;  ///< dH3/drho at the solution
    double d_t = 0.0;    ///< dH3/dt at the solution
    int iterations = 0;
    bool bisected = false;
};

/// Solves H3(rho, tau, theta) = I for rho. RegimeError when I < i_min, when
/// no bracket exists in [rho0/2, 2 rho0] or when dH3/drho <= 0 at the root;
/// NumericalError when the residual stays above 1e-10 I.
RhoSolution solve_rho(const ImpactModel& m, double I, double theta, double tau);

struct FdEstimate {
    double value = 0.0;        ///< Richardson-extrapolated derivative
    double fine = 0.0;         ///< plain central estimate at half step
    double disagreement = 0.0; ///< |value - fine| / max(|value|, noise)
    double noise = 0.0;        ///< rounding floor of the stencil
    bool accuracy_warning = false;
    std::string note;
};

/// D_I^j D_theta^k R at (I, theta, tau) by tensor central differences with
/// steps h_I = I h, h_theta = h, h = fd_delta^(5/(j+k+4)), and one Richardson
/// level. Requires j, k >= 0 and j + k <= 5.
FdEstimate fd_partial_R(const ImpactModel& m, double I, double theta, double tau, int j, int k);

/// I = H3(rho, phi, t), theta = t mod 1, tau = phi.
ExchangedCoords to_exchanged(const ImpactModel& m, const ImpactCoords& ic, double t);

/// (rho, phi = tau) from (I, theta, tau) via solve_rho.
ImpactCoords from_exchanged(const ImpactModel& m, const ExchangedCoords& ex);

}  // namespace impactosc

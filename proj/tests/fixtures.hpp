#pragma once

#include "impactosc/dynamics.hpp"

namespace impactosc::testing {

/// n = 1 with every coefficient function non-trivial, including the
/// top-order p_2 that drives the I^(1/2) growth of R.
inline PotentialSpec mixed_spec()
{
    PotentialSpec spec;
    spec.n = 1;
    spec.coeffs = {
        FourierSeries(0.2, {0.5}, {0.1}),
        FourierSeries(0.0, {}, {0.3}),
        FourierSeries(0.1, {0.0, 0.2}, {0.15}),
    };
    return spec;
}

/// n = 1, p_0(t) = 0.5 cos(2 pi t), other coefficients zero.
inline PotentialSpec single_harmonic_spec(double amplitude = 0.5)
{
    PotentialSpec spec = PotentialSpec::unperturbed(1);
    spec.coeffs[0] = FourierSeries(0.0, {amplitude}, {});
    return spec;
}

}  // namespace impactosc::testing

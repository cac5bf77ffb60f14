#pragma once

// Poincare map of the exchanged system over one unit of tau (impact to
// impact), its residuals f1, f2 against the integrable twist map, and the
// diagnostics built on it.

#include <functional>
#include <string>
#include <vector>

#include "impactosc/integrator.hpp"
#include "impactosc/transforms.hpp"

namespace impactosc {

enum class Backend {
    Physical,  ///< impact-to-impact integration of the original system
    Direct,    ///< integration of (upsilon, theta) in tau with finite-difference derivatives of R
};

const char* to_string(Backend b);

struct TwistSample {
    double upsilon0 = 0.0;
    double theta0 = 0.0;
    double eps = 0.0;
    double upsilon1 = 0.0;
    double theta1 = 0.0;  ///< lifted: theta0 plus the elapsed time
    double f1 = 0.0;      ///< upsilon1 - upsilon0
    double f2 = 0.0;      ///< theta1 - theta0 - twist_term
    double twist_term = 0.0;
};

/// (1/(2 beta)) d^(-1/(2 beta)) eps^(1 - 1/(2 beta)) upsilon0^(1/(2 beta) - 1).
double twist_term(const DerivedConstants& k, double upsilon0, double eps);

/// One step of the map from (upsilon0, theta0) at tau = 0. Requires
/// upsilon0 in [1, 2] and upsilon0 / eps >= m.i_min (RegimeError otherwise).
TwistSample exchanged_poincare(const ImpactModel& m, double upsilon0, double theta0, double eps, Backend backend,
                               const IntegratorOptions& opts = {});

struct BackendComparison {
    TwistSample physical;
    TwistSample direct;
    double difference = 0.0;  ///< max of |d upsilon1| and |d theta1|
};

/// Runs both backends; ConsistencyError when they differ by more than `limit`.
BackendComparison compare_backends(const ImpactModel& m, double upsilon0, double theta0, double eps,
                                   const IntegratorOptions& opts = {}, double limit = 1e-4);

struct ScalingFit {
    double exponent = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t points = 0;
    double decades = 0.0;  ///< log10(max x / min x)
};

/// Least-squares slope of log|y| against log x. DomainError for fewer than 8
/// points, a span under 3 decades, or non-positive values.
ScalingFit fit_scaling(const std::vector<double>& x, const std::vector<double>& y);

struct RotationEstimate {
    double value = 0.0;
    double error = 0.0;  ///< |last-quarter average - full average|
    std::size_t iterates = 0;
    bool partial = false;  ///< the orbit ended before the requested length
};

/// Birkhoff average (theta_N - theta_0) / N of a lifted angle sequence.
/// Requires at least 1000 iterates unless `partial` is set.
RotationEstimate rotation_number(const std::vector<double>& lifted_theta, bool partial = false);

/// Orbit of the physical successor map in (upsilon, theta) = (eps v^2/2, t).
struct SuccessorOrbit {
    std::vector<double> upsilon;
    std::vector<double> theta;  ///< lifted impact times
    bool escaped = false;
    std::string error;
};

SuccessorOrbit iterate_successor(const ImpactModel& m, double upsilon0, double theta0, double eps,
                                 std::size_t iterates, const IntegratorOptions& opts = {});

struct InvariantCircleReport {
    double upsilon0 = 0.0;
    double theta0 = 0.0;
    double eps = 0.0;
    std::size_t fit_iterates = 0;
    std::size_t test_iterates = 0;
    int harmonics = 0;
    double fit_residual = 0.0;  ///< max |upsilon - g(theta)| on the fitted iterates
    double max_deviation = 0.0; ///< same on the following iterates
    RotationEstimate rotation;
    bool recurrent = false;     ///< max_deviation < tolerance over all test iterates
    std::vector<double> g_cos;  ///< fitted circle upsilon = g(theta)
    std::vector<double> g_sin;
    double g_mean = 0.0;
};

/// Iterates the successor map, fits a Fourier graph upsilon = g(theta) to the
/// first `fit_iterates` points and measures how far the next `test_iterates`
/// points stray from it.
InvariantCircleReport detect_invariant_circle(const ImpactModel& m, double upsilon0, double theta0, double eps,
                                              std::size_t fit_iterates = 1000, std::size_t test_iterates = 1000,
                                              int harmonics = 12, double tolerance = 1e-3,
                                              const IntegratorOptions& opts = {});

/// The fit and recurrence test of detect_invariant_circle on an existing orbit
/// of at least fit_iterates + test_iterates + 1 points.
InvariantCircleReport fit_invariant_circle(const SuccessorOrbit& orbit, double eps, std::size_t fit_iterates,
                                           std::size_t test_iterates, int harmonics, double tolerance);

/// Determinant of the successor map (theta, I) -> (theta', I') with I = v^2/2
/// at the outgoing impact, by central differences.
double successor_jacobian(const PotentialSpec& spec, double period, double theta, double I,
                          const IntegratorOptions& opts = {}, double h = 1e-5);

struct IntersectionReport {
    double min_gap = 0.0;  ///< min of upsilon' - g(theta') over the sampled circle
    double max_gap = 0.0;
    bool crosses = false;
};

/// Maps `samples` points of the circle upsilon = g(theta) and checks that the
/// image crosses the circle.
IntersectionReport intersection_check(const ImpactModel& m, const std::function<double(double)>& g, double eps,
                                      std::size_t samples = 64, const IntegratorOptions& opts = {});

}  // namespace impactosc

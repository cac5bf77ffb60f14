#pragma once

// Event-driven integration of x'' = force(x, t) on x >= 0 with elastic
// reflection v -> -v at x = 0.

#include <array>
#include <functional>
#include <vector>

#include "impactosc/dynamics.hpp"
#include "impactosc/ode.hpp"

namespace impactosc {

struct PhaseState {
    double x = 0.0;
    double v = 0.0;
    double t = 0.0;
    long impact_count = 0;
};

struct IntegratorOptions {
    double rel_tol = 1e-13;
    double abs_tol = 1e-13;
    double max_step = 0.05;
    double event_tol = 1e-12;  ///< time tolerance for impact localization

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Speed below which a contact with the barrier is declared degenerate.
inline constexpr double kGrazingSpeed = 1e-12;

/// Receives the smooth pieces of the flow and the impacts between them.
class FlowObserver {
public:
    using DenseEval = std::function<std::array<double, 2>(double)>;

    virtual ~FlowObserver() = default;
    /// One accepted piece of smooth flow on [t0, t1]; `at(t)` returns (x, v).
    virtual void on_segment(double /*t0*/, double /*t1*/, const DenseEval& /*at*/) {}
    /// Called after reflection. Return true to stop the integration here.
    virtual bool on_impact(const PhaseState& /*incoming*/, const PhaseState& /*outgoing*/) { return false; }
};

/// Integrates from s0 up to t_end (or until the observer stops it at an impact)
/// and returns the final state. Errors: StiffnessError on step underflow,
/// DegenerateContactError when the barrier is reached with |v| < kGrazingSpeed.
PhaseState advance(const PotentialSpec& spec, const PhaseState& s0, double t_end, const IntegratorOptions& opts,
                   FlowObserver* observer = nullptr, ode::StepStats* stats = nullptr);

struct ImpactEvent {
    double t = 0.0;
    double speed = 0.0;  ///< |v| at the impact
};

struct OrbitTrace {
    std::vector<PhaseState> samples;  ///< at t0, every sample_dt, and t_end
    std::vector<ImpactEvent> impacts;
    std::vector<char> sample_is_impact;  ///< parallel to samples
    double max_norm = 0.0;               ///< sup |x| + |v| over the trajectory
    double energy_min = 0.0;             ///< envelope of H(x, v, t) over step points
    double energy_max = 0.0;
    double unperturbed_drift = 0.0;      ///< max |H0 - H0(s0)| / H0(s0)
    PhaseState final_state;
    ode::StepStats stats;
};

/// Full trajectory with samples every `sample_dt` (<= 0: endpoints only) and
/// impact states recorded as flagged samples.
OrbitTrace integrate(const PotentialSpec& spec, const PhaseState& s0, double t_end, const IntegratorOptions& opts,
                     double sample_dt = 0.0);

struct SuccessorResult {
    PhaseState next;  ///< post-reflection state at the next impact (x = 0, v > 0)
    double flight_time = 0.0;
};

/// Time between impacts of the unperturbed motion at energy E = v^2/2:
/// half the period of the full-plane orbit, T0 / (2 A^n) with A^(2n+2) = (2n+2) E.
double unperturbed_flight_time(int n, double period, double speed);

/// Maps an outgoing impact state to the next one. Requires x = 0 and v > 0.
/// Throws EscapeError if no impact happens within `time_cap`.
SuccessorResult successor(const PotentialSpec& spec, const PhaseState& at_impact, const IntegratorOptions& opts,
                          double time_cap);

/// Same, with the cap set to 10x the unperturbed flight time at the same speed.
SuccessorResult successor(const PotentialSpec& spec, double period, const PhaseState& at_impact,
                          const IntegratorOptions& opts);

/// Running maximum of |x| + |v| over the flow, refined inside each step.
class MaxNormTracker : public FlowObserver {
public:
    explicit MaxNormTracker(double initial) : max_(initial) {}
    void on_segment(double t0, double t1, const DenseEval& at) override;
    double value() const { return max_; }

private:
    double max_;
};

}  // namespace impactosc

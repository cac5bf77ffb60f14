#pragma once

// Ensemble kernels. Every sweep has a serial reference path and an OpenMP
// path; results are stored by input index, so both produce identical output.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "impactosc/maps.hpp"

namespace impactosc {

enum class Execution { Serial, Parallel };

struct SweepOptions {
    Execution execution = Execution::Parallel;
    int jobs = 0;  ///< OpenMP threads; 0 uses the runtime default
};

/// Runs task(i) for i in [0, n). In parallel mode the exception of the lowest
/// failing index is rethrown after all tasks finish.
void run_indexed(std::size_t n, const std::function<void(std::size_t)>& task, const SweepOptions& sweep);

/// Number of threads a parallel sweep would use.
int available_threads(const SweepOptions& sweep);

/// Map samples on the grid upsilon0 x theta0 (upsilon0 outer).
std::vector<TwistSample> poincare_grid(const ImpactModel& m, const std::vector<double>& upsilon0,
                                       const std::vector<double>& theta0, double eps, Backend backend,
                                       const IntegratorOptions& opts, const SweepOptions& sweep);

struct DerivativeScalingRow {
    int j = 0;
    int k = 0;
    double I = 0.0;
    double sup_abs = 0.0;  ///< sup over the (theta, tau) grid of |D_I^j D_theta^k R|
    bool accuracy_warning = false;
};

/// All (j, k) with j + k <= max_order, each over the I grid; rows ordered by (j, k) then I.
std::vector<DerivativeScalingRow> r_derivative_sweep(const ImpactModel& m, const std::vector<double>& I_grid,
                                                     const std::vector<double>& theta_grid,
                                                     const std::vector<double>& tau_grid, int max_order,
                                                     const SweepOptions& sweep);

struct ResidualScalingRow {
    double eps = 0.0;
    double sup_f1 = 0.0;
    double sup_f2 = 0.0;
};

struct ResidualSweep {
    std::vector<TwistSample> samples;  ///< eps outer, then upsilon0, then theta0
    std::vector<ResidualScalingRow> rows;
};

ResidualSweep residual_sweep(const ImpactModel& m, const std::vector<double>& eps_grid,
                             const std::vector<double>& upsilon0, const std::vector<double>& theta0,
                             Backend backend, const IntegratorOptions& opts, const SweepOptions& sweep);

/// ICs on the barrier, x = 0 and v = sqrt(2E), with E log-spaced in
/// [e_min, e_max] and start times drawn uniformly from [0, 1) with `seed`.
std::vector<PhaseState> energy_ladder(std::size_t count, double e_min, double e_max, std::uint64_t seed);

struct BoundednessOptions {
    double horizon = 1000.0;
    int checkpoints = 10;     ///< M(t) recorded at t0 + horizon * c / checkpoints
    double threshold = 1.5;   ///< flag when M(T) / M(T/checkpoints) exceeds this
};

struct Checkpoint {
    double t = 0.0;
    double max_norm = 0.0;
    long impacts = 0;
};

struct BoundednessRecord {
    PhaseState ic;
    double initial_energy = 0.0;
    std::vector<Checkpoint> checkpoints;
    double energy_min = 0.0;
    double energy_max = 0.0;
    double ratio = 0.0;  ///< M(T) / M(T / checkpoints)
    bool flagged = false;
    bool failed = false;
    std::string error;
};

struct BoundednessReport {
    std::vector<BoundednessRecord> records;
    std::size_t flagged = 0;
    std::size_t failed = 0;
};

/// Integrates every IC to the horizon. A failing IC is recorded with its
/// error and does not stop the sweep.
BoundednessReport boundedness_sweep(const PotentialSpec& spec, const std::vector<PhaseState>& ics,
                                    const BoundednessOptions& bopts, const IntegratorOptions& opts,
                                    const SweepOptions& sweep);

}  // namespace impactosc

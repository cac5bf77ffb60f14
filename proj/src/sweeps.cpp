#include "impactosc/sweeps.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>

#include <omp.h>

#include "impactosc/error.hpp"

namespace impactosc {

int available_threads(const SweepOptions& sweep)
{
    if (sweep.execution == Execution::Serial) return 1;
    return sweep.jobs > 0 ? sweep.jobs : omp_get_max_threads();
}

void run_indexed(std::size_t n, const std::function<void(std::size_t)>& task, const SweepOptions& sweep)
{
    if (sweep.execution == Execution::Serial) {
        for (std::size_t i = 0; i < n; ++i) task(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic) num_threads(available_threads(sweep))
    for (long i = 0; i < count; ++i) {
        try {
            task(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

std::vector<TwistSample> poincare_grid(const ImpactModel& m, const std::vector<double>& upsilon0,
                                       const std::vector<double>& theta0, double eps, Backend backend,
                                       const IntegratorOptions& opts, const SweepOptions& sweep)
{
    const std::size_t nt = theta0.size();
    std::vector<TwistSample> out(upsilon0.size() * nt);
    run_indexed(
        out.size(),
        [&](std::size_t i) { out[i] = exchanged_poincare(m, upsilon0[i / nt], theta0[i % nt], eps, backend, opts); },
        sweep);
    return out;
}

std::vector<DerivativeScalingRow> r_derivative_sweep(const ImpactModel& m, const std::vector<double>& I_grid,
                                                     const std::vector<double>& theta_grid,
                                                     const std::vector<double>& tau_grid, int max_order,
                                                     const SweepOptions& sweep)
{
    if (max_order < 0 || max_order > 5) throw DomainError("r_derivative_sweep: max_order must lie in [0, 5]");
    std::vector<DerivativeScalingRow> rows;
    for (int j = 0; j <= max_order; ++j) {
        for (int k = 0; j + k <= max_order; ++k) {
            for (double I : I_grid) rows.push_back(DerivativeScalingRow{j, k, I, 0.0, false});
        }
    }
    run_indexed(
        rows.size(),
        [&](std::size_t i) {
            auto& r = rows[i];
            for (double th : theta_grid) {
                for (double tau : tau_grid) {
                    const auto e = fd_partial_R(m, r.I, th, tau, r.j, r.k);
                    r.sup_abs = std::max(r.sup_abs, std::abs(e.value));
                    r.accuracy_warning = r.accuracy_warning || e.accuracy_warning;
                }
            }
        },
        sweep);
    return rows;
}

ResidualSweep residual_sweep(const ImpactModel& m, const std::vector<double>& eps_grid,
                             const std::vector<double>& upsilon0, const std::vector<double>& theta0,
                             Backend backend, const IntegratorOptions& opts, const SweepOptions& sweep)
{
    ResidualSweep out;
    const std::size_t per_eps = upsilon0.size() * theta0.size();
    const std::size_t nt = theta0.size();
    out.samples.resize(eps_grid.size() * per_eps);
    run_indexed(
        out.samples.size(),
        [&](std::size_t i) {
            const std::size_t e = i / per_eps;
            const std::size_t r = i % per_eps;
            out.samples[i] = exchanged_poincare(m, upsilon0[r / nt], theta0[r % nt], eps_grid[e], backend, opts);
        },
        sweep);
    for (std::size_t e = 0; e < eps_grid.size(); ++e) {
        ResidualScalingRow row{eps_grid[e], 0.0, 0.0};
        for (std::size_t r = 0; r < per_eps; ++r) {
            const auto& s = out.samples[e * per_eps + r];
            row.sup_f1 = std::max(row.sup_f1, std::abs(s.f1));
            row.sup_f2 = std::max(row.sup_f2, std::abs(s.f2));
        }
        out.rows.push_back(row);
    }
    return out;
}

std::vector<PhaseState> energy_ladder(std::size_t count, double e_min, double e_max, std::uint64_t seed)
{
    if (count == 0) return {};
    if (!(e_min > 0.0 && e_max >= e_min)) throw DomainError("energy_ladder: need 0 < e_min <= e_max");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 1.0);
    std::vector<PhaseState> ics;
    ics.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double s = count > 1 ? static_cast<double>(i) / static_cast<double>(count - 1) : 0.0;
        const double E = e_min * std::pow(e_max / e_min, s);
        ics.push_back(PhaseState{0.0, std::sqrt(2.0 * E), phase(rng), 0});
    }
    return ics;
}

namespace {

class BoundednessObserver : public FlowObserver {
public:
    BoundednessObserver(const PotentialSpec& spec, const PhaseState& s0)
        : spec_(spec), tracker_(std::abs(s0.x) + std::abs(s0.v))
    {
        emin_ = emax_ = hamiltonian(spec, s0.x, s0.v, s0.t);
    }
    void on_segment(double t0, double t1, const DenseEval& at) override
    {
        tracker_.on_segment(t0, t1, at);
        const auto y = at(t1);
        const double h = hamiltonian(spec_, y[0], y[1], t1);
        emin_ = std::min(emin_, h);
        emax_ = std::max(emax_, h);
    }
    double max_norm() const { return tracker_.value(); }
    double energy_min() const { return emin_; }
    double energy_max() const { return emax_; }

private:
    const PotentialSpec& spec_;
    MaxNormTracker tracker_;
    double emin_, emax_;
};

BoundednessRecord run_one(const PotentialSpec& spec, const PhaseState& ic, const BoundednessOptions& b,
                          const IntegratorOptions& opts)
{
    BoundednessRecord rec;
    rec.ic = ic;
    rec.initial_energy = hamiltonian(spec, ic.x, ic.v, ic.t);
    try {
        BoundednessObserver obs(spec, ic);
        PhaseState s = ic;
        for (int c = 1; c <= b.checkpoints; ++c) {
            const double t_c = ic.t + b.horizon * c / b.checkpoints;
            s = advance(spec, s, t_c, opts, &obs);
            rec.checkpoints.push_back(Checkpoint{t_c, obs.max_norm(), s.impact_count});
        }
        rec.energy_min = obs.energy_min();
        rec.energy_max = obs.energy_max();
        rec.ratio = rec.checkpoints.back().max_norm / rec.checkpoints.front().max_norm;
        rec.flagged = !(rec.ratio < b.threshold);
    } catch (const Error& e) {
        rec.failed = true;
        rec.error = e.what();
    }
    return rec;
}

}  // namespace

BoundednessReport boundedness_sweep(const PotentialSpec& spec, const std::vector<PhaseState>& ics,
                                    const BoundednessOptions& bopts, const IntegratorOptions& opts,
                                    const SweepOptions& sweep)
{
    if (!(bopts.horizon > 0.0)) throw ConfigError("boundedness: horizon must be positive");
    if (bopts.checkpoints < 2) throw ConfigError("boundedness: need at least 2 checkpoints");
    if (!(bopts.threshold > 1.0)) throw ConfigError("boundedness: threshold must exceed 1");
    opts.validate();
    BoundednessReport rep;
    rep.records.resize(ics.size());
    run_indexed(ics.size(), [&](std::size_t i) { rep.records[i] = run_one(spec, ics[i], bopts, opts); }, sweep);
    for (const auto& r : rep.records) {
        rep.flagged += r.flagged ? 1 : 0;
        rep.failed += r.failed ? 1 : 0;
    }
    return rep;
}

}  // namespace impactosc

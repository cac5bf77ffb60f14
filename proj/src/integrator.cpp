#include "impactosc/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "impactosc/error.hpp"

namespace impactosc {

namespace {

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

struct ForceRhs {
    const PotentialSpec* spec;
    bool free;
    void operator()(double t, const std::array<double, 2>& y, std::array<double, 2>& dy) const
    {
        dy[0] = y[1];
        if (free) {
            dy[1] = -ipow(y[0], 2 * spec->n + 1);
            return;
        }
        std::array<double, 64> p;
        const std::size_t m = spec->coeffs.size();
        spec->evaluate(t, std::span<double>(p.data(), m));
        dy[1] = force_with(spec->n, std::span<const double>(p.data(), m), y[0]);
    }
};

using Stepper = ode::Dop853<2, ForceRhs>;

// First time in (t0, t1] where x reaches 0 from above, or NaN if x stays
// positive on the sampled grid. `start_on_barrier` marks x(t0) = 0 with v > 0.
double locate_crossing(Stepper& st, double t0, double x0, double t1, double event_tol, bool start_on_barrier)
{
    constexpr int kSub = 8;
    auto x_at = [&](double t) { return t >= t1 ? st.y()[0] : st.dense(t)[0]; };
    auto g = [&](double t) { return st.dense(t)[0]; };
    auto dg = [&](double t) { return st.dense_derivative(t)[0]; };

    double a = t0;
    double ga = start_on_barrier ? std::numeric_limits<double>::min() : x0;
    for (int j = 1; j <= kSub; ++j) {
        const double b = (j == kSub) ? t1 : t0 + (t1 - t0) * j / kSub;
        const double gb = x_at(b);
        if (ga > 0.0 && gb <= 0.0) {
            if (a == t0 && start_on_barrier) {
                // x(a) = 0 exactly: move the left end inward until x > 0 there
                double w = b - a;
                double left = a;
                bool found = false;
                for (int k = 0; k < 40; ++k) {
                    w *= 0.5;
                    const double c = a + w;
                    if (g(c) > 0.0) {
                        left = c;
                        found = true;
                        break;
                    }
                }
                if (!found) {
                    throw DegenerateContactError("barrier re-contact immediately after an impact at t = " +
                                                 std::to_string(t0));
                }
                a = left;
            }
            if (gb == 0.0) return b;
            return ode::find_root(g, dg, a, b, event_tol);
        }
        a = b;
        ga = gb;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

void IntegratorOptions::validate() const
{
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("integrator.") + name + " must be positive");
    };
    positive(rel_tol, "rel_tol");
    positive(abs_tol, "abs_tol");
    positive(max_step, "max_step");
    positive(event_tol, "event_tol");
}

PhaseState advance(const PotentialSpec& spec, const PhaseState& s0, double t_end, const IntegratorOptions& opts,
                   FlowObserver* observer, ode::StepStats* stats)
{
    opts.validate();
    if (!(s0.x >= 0.0)) throw DomainError("advance: initial position must be >= 0");
    if (s0.x == 0.0 && s0.v < 0.0) throw DomainError("advance: initial state on the barrier must have v >= 0");
    if (s0.x == 0.0 && std::abs(s0.v) < kGrazingSpeed) {
        throw DegenerateContactError("advance: initial state at rest on the barrier");
    }
    if (!(t_end > s0.t)) throw DomainError("advance: t_end must exceed the initial time");

    ode::Tolerances tol;
    tol.rel_tol = opts.rel_tol;
    tol.abs_tol = opts.abs_tol;
    tol.max_step = opts.max_step;
    Stepper st(ForceRhs{&spec, spec.is_unperturbed()}, tol);
    st.reset(s0.t, {s0.x, s0.v});

    long count = s0.impact_count;
    bool on_barrier = (s0.x == 0.0);
    const FlowObserver::DenseEval dense = [&st](double t) { return st.dense(t); };

    auto finish = [&](PhaseState s) {
        if (stats) {
            stats->rhs_evals += st.stats().rhs_evals;
            stats->accepted += st.stats().accepted;
            stats->rejected += st.stats().rejected;
        }
        return s;
    };

    while (st.t() < t_end) {
        const double t0 = st.t();
        const auto y0 = st.y();
        st.step(t_end);
        const double t1 = st.t();
        const auto y1 = st.y();

        const bool near_barrier =
            y1[0] <= 0.0 || (y0[0] + y1[0]) < (std::abs(y0[1]) + std::abs(y1[1])) * (t1 - t0);
        double t_hit = std::numeric_limits<double>::quiet_NaN();
        if (near_barrier) t_hit = locate_crossing(st, t0, y0[0], t1, opts.event_tol, on_barrier);

        if (std::isnan(t_hit)) {
            if (observer) observer->on_segment(t0, t1, dense);
            on_barrier = false;
            continue;
        }

        const auto at_hit = (t_hit > t0) ? st.restep(t_hit - t0) : y0;
        const double speed = std::abs(at_hit[1]);
        if (speed < kGrazingSpeed) {
            throw DegenerateContactError("advance: grazing contact (|v| < 1e-12) at t = " + std::to_string(t_hit));
        }
        if (observer && t_hit > t0) observer->on_segment(t0, t_hit, dense);
        const PhaseState incoming{0.0, -speed, t_hit, count};
        ++count;
        const PhaseState outgoing{0.0, speed, t_hit, count};
        if (observer && observer->on_impact(incoming, outgoing)) return finish(outgoing);
        st.reset(t_hit, {0.0, speed});
        on_barrier = true;
    }
    return finish(PhaseState{st.y()[0], st.y()[1], st.t(), count});
}

void MaxNormTracker::on_segment(double t0, double t1, const DenseEval& at)
{
    constexpr int kSub = 8;
    auto f = [&](double t) {
        const auto y = at(t);
        return std::abs(y[0]) + std::abs(y[1]);
    };
    double best = -1.0;
    int best_j = 0;
    std::array<double, kSub + 1> ts{};
    for (int j = 0; j <= kSub; ++j) {
        ts[j] = t0 + (t1 - t0) * j / kSub;
        const double v = f(ts[j]);
        if (v > best) {
            best = v;
            best_j = j;
        }
    }
    if (best > max_) max_ = best;
    if (best < max_ * (1.0 - 1e-3)) return;
    // golden-section refinement around the best sample
    double a = ts[std::max(best_j - 1, 0)];
    double b = ts[std::min(best_j + 1, kSub)];
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 60 && (b - a) > 1e-13 * std::max(1.0, std::abs(t1)); ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    max_ = std::max({max_, fc, fd});
}

namespace {

class TraceRecorder : public FlowObserver {
public:
    TraceRecorder(const PotentialSpec& spec, OrbitTrace& trace, const PhaseState& s0, double sample_dt)
        : spec_(spec), trace_(trace), tracker_(std::abs(s0.x) + std::abs(s0.v)), t_start_(s0.t), dt_(sample_dt)
    {
        h0_ = unperturbed_energy(spec.n, s0.x, s0.v);
        const double h = hamiltonian(spec, s0.x, s0.v, s0.t);
        trace_.energy_min = trace_.energy_max = h;
        trace_.samples.push_back(s0);
        trace_.sample_is_impact.push_back(0);
    }

    void on_segment(double t0, double t1, const DenseEval& at) override
    {
        tracker_.on_segment(t0, t1, at);
        if (dt_ > 0.0) {
            for (;;) {
                const double ts = t_start_ + dt_ * static_cast<double>(next_sample_);
                if (ts > t1) break;
                if (ts > t0) {
                    const auto y = at(ts);
                    trace_.samples.push_back(PhaseState{y[0], y[1], ts, impacts_});
                    trace_.sample_is_impact.push_back(0);
                }
                ++next_sample_;
            }
        }
        const auto y = at(t1);
        const double h = hamiltonian(spec_, y[0], y[1], t1);
        trace_.energy_min = std::min(trace_.energy_min, h);
        trace_.energy_max = std::max(trace_.energy_max, h);
        if (h0_ > 0.0) {
            const double drift = std::abs(unperturbed_energy(spec_.n, y[0], y[1]) - h0_) / h0_;
            trace_.unperturbed_drift = std::max(trace_.unperturbed_drift, drift);
        }
    }

    bool on_impact(const PhaseState& incoming, const PhaseState& outgoing) override
    {
        trace_.impacts.push_back(ImpactEvent{incoming.t, std::abs(incoming.v)});
        trace_.samples.push_back(outgoing);
        trace_.sample_is_impact.push_back(1);
        impacts_ = outgoing.impact_count;
        if (h0_ > 0.0) {
            const double drift = std::abs(0.5 * outgoing.v * outgoing.v - h0_) / h0_;
            trace_.unperturbed_drift = std::max(trace_.unperturbed_drift, drift);
        }
        return false;
    }

    double max_norm() const { return tracker_.value(); }

private:
    const PotentialSpec& spec_;
    OrbitTrace& trace_;
    MaxNormTracker tracker_;
    double t_start_;
    double dt_;
    double h0_ = 0.0;
    long next_sample_ = 1;
    long impacts_ = 0;
};

class StopAtImpact : public FlowObserver {
public:
    bool on_impact(const PhaseState&, const PhaseState&) override
    {
        hit = true;
        return true;
    }
    bool hit = false;
};

}  // namespace

OrbitTrace integrate(const PotentialSpec& spec, const PhaseState& s0, double t_end, const IntegratorOptions& opts,
                     double sample_dt)
{
    OrbitTrace trace;
    TraceRecorder recorder(spec, trace, s0, sample_dt);
    const PhaseState last = advance(spec, s0, t_end, opts, &recorder, &trace.stats);
    if (trace.samples.back().t < last.t) {
        trace.samples.push_back(last);
        trace.sample_is_impact.push_back(0);
    }
    trace.final_state = last;
    trace.max_norm = recorder.max_norm();
    return trace;
}

double unperturbed_flight_time(int n, double period, double speed)
{
    const double energy = 0.5 * speed * speed;
    const double amplitude = std::pow((2.0 * n + 2.0) * energy, 1.0 / (2.0 * n + 2.0));
    return period / (2.0 * std::pow(amplitude, n));
}

SuccessorResult successor(const PotentialSpec& spec, const PhaseState& at_impact, const IntegratorOptions& opts,
                          double time_cap)
{
    if (at_impact.x != 0.0 || !(at_impact.v > 0.0)) {
        throw DomainError("successor: state must be an outgoing impact (x = 0, v > 0)");
    }
    StopAtImpact stop;
    const PhaseState next = advance(spec, at_impact, at_impact.t + time_cap, opts, &stop);
    if (!stop.hit) throw EscapeError("successor: no impact within the time cap");
    return SuccessorResult{next, next.t - at_impact.t};
}

SuccessorResult successor(const PotentialSpec& spec, double period, const PhaseState& at_impact,
                          const IntegratorOptions& opts)
{
    const double cap = 10.0 * unperturbed_flight_time(spec.n, period, at_impact.v);
    return successor(spec, at_impact, opts, cap);
}

}  // namespace impactosc

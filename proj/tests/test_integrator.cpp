#include "doctest.h"

#include <array>
#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "impactosc/error.hpp"
#include "impactosc/gentrig.hpp"
#include "impactosc/integrator.hpp"

using namespace impactosc;

namespace {

// Time for the full-plane orbit x'' = -x^(2n+1) from (x0, 0) to reach x = 0,
// doubled: the flight time between impacts of the reflected motion.
double full_plane_flight(int n, double x0)
{
    auto rhs = [n](double, const std::array<double, 2>& y, std::array<double, 2>& dy) {
        dy[0] = y[1];
        dy[1] = -std::pow(y[0], 2 * n + 1);
    };
    auto st = ode::make_dop853<2>(rhs, ode::Tolerances{1e-14, 1e-14, 0.01});
    st.reset(0.0, {x0, 0.0});
    for (;;) {
        const double t0 = st.t();
        st.step(1e6);
        if (st.y()[0] <= 0.0) {
            const double tq = ode::find_root([&](double t) { return st.dense(t)[0]; },
                                             [&](double t) { return st.dense_derivative(t)[0]; }, t0, st.t(), 1e-15);
            return 2.0 * tq;
        }
    }
}

class ImpactRecorder : public FlowObserver {
public:
    void on_segment(double t0, double t1, const DenseEval& at) override
    {
        for (int j = 0; j <= 8; ++j) min_x = std::min(min_x, at(t0 + (t1 - t0) * j / 8.0)[0]);
        last_end_x = at(t1)[0];
    }
    bool on_impact(const PhaseState& in, const PhaseState& out) override
    {
        max_impact_x = std::max(max_impact_x, std::abs(last_end_x));
        ok = ok && in.x == 0.0 && out.x == 0.0 && in.v < 0.0 && out.v == -in.v && in.t == out.t &&
             out.impact_count == in.impact_count + 1;
        if (last_t >= in.t) ok = false;
        last_t = in.t;
        ++count;
        return false;
    }
    double min_x = std::numeric_limits<double>::infinity();
    double last_end_x = 0.0;
    double max_impact_x = 0.0;
    double last_t = -std::numeric_limits<double>::infinity();
    long count = 0;
    bool ok = true;
};

}  // namespace

TEST_CASE("integrate: unperturbed energy is conserved over a thousand impacts")
{
    const auto spec = PotentialSpec::unperturbed(1);
    const IntegratorOptions opts;
    const double flight = unperturbed_flight_time(1, compute_period(1, 1e-12), 1.0 / std::sqrt(2.0));
    const auto trace = integrate(spec, PhaseState{1.0, 0.0, 0.0, 0}, 1001.0 * flight, opts, 0.5);
    CHECK(trace.impacts.size() >= 1000);
    double worst = 0.0;
    for (const auto& s : trace.samples) worst = std::max(worst, std::abs(unperturbed_energy(1, s.x, s.v) - 0.25));
    CHECK(worst < 1e-10);
    CHECK(trace.unperturbed_drift * 0.25 < 1e-10);
    CHECK(trace.energy_max - trace.energy_min < 1e-10);
    CHECK(trace.final_state.impact_count == static_cast<long>(trace.impacts.size()));
    for (std::size_t i = 1; i < trace.samples.size(); ++i) CHECK(trace.samples[i].t >= trace.samples[i - 1].t);
}

TEST_CASE("advance: reflection is exact state surgery")
{
    const auto spec = testing::mixed_spec();
    ImpactRecorder rec;
    const auto end = advance(spec, PhaseState{0.0, 3.0, 0.1, 0}, 30.0, IntegratorOptions{}, &rec);
    CHECK(rec.count > 5);
    CHECK(rec.ok);
    CHECK(end.impact_count == rec.count);
    CHECK(rec.min_x >= -1e-12);
    CHECK(rec.max_impact_x < 1e-11);
}

TEST_CASE("unperturbed flight time matches the folded full-plane orbit")
{
    for (int n = 0; n <= 3; ++n) {
        const double T0 = compute_period(n, 1e-12);
        for (double x0 : {0.5, 1.0, 2.0}) {
            const double oracle = full_plane_flight(n, x0);
            CHECK(T0 / (2.0 * std::pow(x0, n)) == doctest::Approx(oracle).epsilon(1e-11));

            const auto spec = PotentialSpec::unperturbed(n);
            const auto trace = integrate(spec, PhaseState{x0, 0.0, 0.0, 0}, 2.6 * oracle, IntegratorOptions{});
            REQUIRE(trace.impacts.size() >= 2);
            CHECK(trace.impacts[1].t - trace.impacts[0].t == doctest::Approx(oracle).epsilon(1e-10));
            CHECK(trace.impacts[0].t == doctest::Approx(0.5 * oracle).epsilon(1e-10));

            const double speed = std::sqrt(2.0 * unperturbed_energy(n, x0, 0.0));
            CHECK(unperturbed_flight_time(n, T0, speed) == doctest::Approx(oracle).epsilon(1e-11));
        }
    }
}

TEST_CASE("successor: unperturbed speed preserved and amplitude-time scaling")
{
    for (int n = 0; n <= 3; ++n) {
        const double T0 = compute_period(n, 1e-12);
        const auto spec = PotentialSpec::unperturbed(n);
        const IntegratorOptions opts;
        for (double v : {0.7, 2.0, 5.0}) {
            const auto a = successor(spec, T0, PhaseState{0.0, v, 0.3, 0}, opts);
            const auto b = successor(spec, T0, PhaseState{0.0, 2.0 * v, 0.3, 0}, opts);
            CHECK(a.next.x == 0.0);
            CHECK(a.next.v == doctest::Approx(v).epsilon(1e-11));
            CHECK(a.next.impact_count == 1);
            CHECK(b.flight_time / a.flight_time ==
                  doctest::Approx(std::pow(2.0, -static_cast<double>(n) / (n + 1))).epsilon(1e-10));
            CHECK(a.flight_time == doctest::Approx(unperturbed_flight_time(n, T0, v)).epsilon(1e-10));
        }
    }
}

TEST_CASE("successor: small perturbation moves the flight time by O(|p|)")
{
    const double T0 = compute_period(1, 1e-12);
    const double v = 3.0;
    const double base = unperturbed_flight_time(1, T0, v);
    double prev = 0.0;
    for (double eps : {1e-2, 5e-3, 2.5e-3}) {
        auto spec = testing::mixed_spec();
        for (auto& p : spec.coeffs) {
            std::vector<double> c = p.cos_coeffs(), s = p.sin_coeffs();
            for (double& x : c) x *= eps;
            for (double& x : s) x *= eps;
            p = FourierSeries(p.a0() * eps, c, s);
        }
        const auto r = successor(spec, T0, PhaseState{0.0, v, 0.2, 0}, IntegratorOptions{});
        const double diff = std::abs(r.flight_time - base);
        CHECK(diff < 10.0 * eps);
        if (prev > 0.0) CHECK(diff / prev == doctest::Approx(0.5).epsilon(0.05));
        prev = diff;
    }
}

TEST_CASE("integrate: convergence under tolerance refinement")
{
    const auto spec = testing::mixed_spec();
    const PhaseState s0{0.0, 2.5, 0.0, 0};
    IntegratorOptions coarse;
    coarse.rel_tol = coarse.abs_tol = 1e-10;
    IntegratorOptions fine = coarse;
    fine.rel_tol = fine.abs_tol = 5e-11;
    const auto a = advance(spec, s0, 10.0, coarse);
    const auto b = advance(spec, s0, 10.0, fine);
    CHECK(a.impact_count == b.impact_count);
    const double scale = std::max(1.0, std::abs(a.x) + std::abs(a.v));
    CHECK(std::abs(a.x - b.x) < 10.0 * 1e-10 * scale);
    CHECK(std::abs(a.v - b.v) < 10.0 * 1e-10 * scale);
}

TEST_CASE("integrate: unperturbed dynamics is time reversible")
{
    for (int n = 1; n <= 2; ++n) {
        const auto spec = PotentialSpec::unperturbed(n);
        const PhaseState s0{0.8, 0.6, 0.0, 0};
        const auto fwd = advance(spec, s0, 25.0, IntegratorOptions{});
        CHECK(fwd.impact_count > 2);
        const auto back = advance(spec, PhaseState{fwd.x, -fwd.v, 0.0, 0}, 25.0, IntegratorOptions{});
        CHECK(back.impact_count == fwd.impact_count);
        CHECK(std::abs(back.x - s0.x) < 1e-8);
        CHECK(std::abs(-back.v - s0.v) < 1e-8);
    }
}

TEST_CASE("integrate: samples on the requested grid")
{
    const auto spec = testing::single_harmonic_spec();
    const auto trace = integrate(spec, PhaseState{1.0, 0.0, 0.0, 0}, 5.0, IntegratorOptions{}, 0.25);
    long grid = 0;
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        CHECK(trace.samples[i].x >= 0.0);
        if (trace.sample_is_impact[i]) {
            CHECK(trace.samples[i].x == 0.0);
            CHECK(trace.samples[i].v > 0.0);
        } else {
            ++grid;
        }
    }
    CHECK(grid == 21);
    CHECK(trace.samples.back().t == 5.0);
    CHECK(trace.max_norm >= 1.0);
}

TEST_CASE("max norm tracker finds the interior maximum")
{
    MaxNormTracker tracker(0.0);
    // |x| + |v| for (cos t, -sin t) peaks at sqrt(2) when t = 3 pi / 4
    tracker.on_segment(2.0, 2.5, [](double t) { return std::array<double, 2>{std::cos(t), -std::sin(t)}; });
    CHECK(tracker.value() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("integrator errors")
{
    const auto spec = PotentialSpec::unperturbed(1);
    const IntegratorOptions opts;
    CHECK_THROWS_AS(advance(spec, PhaseState{0.0, 0.0, 0.0, 0}, 1.0, opts), DegenerateContactError);
    CHECK_THROWS_AS(advance(spec, PhaseState{-0.1, 1.0, 0.0, 0}, 1.0, opts), DomainError);
    CHECK_THROWS_AS(advance(spec, PhaseState{0.0, -1.0, 0.0, 0}, 1.0, opts), DomainError);
    CHECK_THROWS_AS(advance(spec, PhaseState{1.0, 0.0, 2.0, 0}, 1.0, opts), DomainError);
    CHECK_THROWS_AS(successor(spec, PhaseState{0.0, 1.0, 0.0, 0}, opts, 0.5), EscapeError);
    CHECK_THROWS_AS(successor(spec, PhaseState{0.1, 1.0, 0.0, 0}, opts, 10.0), DomainError);

    IntegratorOptions bad;
    bad.event_tol = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = IntegratorOptions{};
    bad.max_step = -1.0;
    CHECK_THROWS_AS(advance(spec, PhaseState{1.0, 0.0, 0.0, 0}, 1.0, bad), ConfigError);

    // constant push toward the wall: a particle released at rest on it cannot leave
    PotentialSpec pushed = PotentialSpec::unperturbed(1);
    pushed.coeffs[0] = FourierSeries::constant(1.0);
    CHECK_THROWS_AS(advance(pushed, PhaseState{0.0, 0.0, 0.0, 0}, 1.0, opts), DegenerateContactError);
}

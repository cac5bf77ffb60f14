#include "doctest.h"

#include <cmath>
#include <vector>

#include "impactosc/error.hpp"
#include "impactosc/gentrig.hpp"

using namespace impactosc;

namespace {

// Periods from an independent extended-precision quadrature of
// 4 sqrt(n+1) int_0^1 (1-u^(2n+2))^(-1/2) du (mpmath, 30 digits), which also
// matches the closed form 4 sqrt(n+1) B(1/m, 1/2)/m with m = 2n+2.
constexpr double kPeriod[] = {6.283185307179586477, 7.416298709205487674, 8.413092631952725567,
                              9.308740569746155002};

}  // namespace

TEST_CASE("compute_period: harmonic case is 2 pi")
{
    CHECK(std::abs(compute_period(0, 1e-10) - 2.0 * M_PI) < 1e-12);
}

TEST_CASE("compute_period matches the quadrature oracle for n = 1..3")
{
    for (int n = 1; n <= 3; ++n) {
        CAPTURE(n);
        const PeriodEstimates est = period_estimates(n, 1e-10);
        CHECK(std::abs(est.quadrature - kPeriod[n]) < 1e-12);
        CHECK(std::abs(est.event - est.quadrature) < 1e-10);
        CHECK(compute_period(n, 1e-10) == est.quadrature);
    }
}

TEST_CASE("compute_period rejects bad arguments")
{
    CHECK_THROWS_AS(compute_period(-1, 1e-10), DomainError);
    CHECK_THROWS_AS(compute_period(1, 1e-3), DomainError);
    CHECK_THROWS_AS(compute_period(1, 1e-16), DomainError);
}

TEST_CASE("build_table: node invariants")
{
    const auto table = GenTrigTable::build(1, 1024);
    CHECK(table.max_node_defect() < 1e-10);
    CHECK(table.node_c(0) == 1.0);
    CHECK(table.node_s(0) == 0.0);
    // C strictly decreasing from 1 to 0 on the quarter period
    for (std::size_t i = 1; i <= table.intervals(); ++i) CHECK(table.node_c(i) < table.node_c(i - 1));
    CHECK(std::abs(table.node_c(table.intervals())) < 1e-12);
    CHECK_THROWS_AS(GenTrigTable::build(1, 100), DomainError);
}

TEST_CASE("build_table: n = 0 reproduces cos / -sin")
{
    const auto table = GenTrigTable::build(0, 1024);
    double worst = 0.0;
    for (std::size_t i = 0; i <= table.intervals(); ++i) {
        const double t = table.node_time(i);
        worst = std::max(worst, std::abs(table.node_c(i) - std::cos(t)));
        worst = std::max(worst, std::abs(table.node_s(i) + std::sin(t)));
    }
    CHECK(worst < 1e-10);
    double worst_eval = 0.0;
    for (int k = -500; k <= 500; ++k) {
        const double t = 0.0371 * k;
        const CosSin cs = table.eval(t);
        worst_eval = std::max(worst_eval, std::abs(cs.c - std::cos(t)) + std::abs(cs.s + std::sin(t)));
    }
    CHECK(worst_eval < 1e-10);
}

TEST_CASE("eval_cs: special points and symmetries")
{
    for (int n = 1; n <= 3; ++n) {
        CAPTURE(n);
        const auto table = GenTrigTable::build(n, 1024);
        const double T = table.period();
        CosSin at0 = table.eval(0.0);
        CHECK(at0.c == 1.0);
        CHECK(at0.s == 0.0);
        CosSin q = table.eval(0.25 * T);
        CHECK(std::abs(q.c) < 1e-9);
        CHECK(std::abs(q.s + 1.0 / std::sqrt(n + 1.0)) < 1e-10);
        CosSin full = table.eval(T);
        CHECK(std::abs(full.c - 1.0) < 1e-12);
        CHECK(std::abs(full.s) < 1e-12);
        for (double t : {0.1, 0.77, 1.9, 3.3, 5.05, 12.7}) {
            const CosSin p = table.eval(t);
            const CosSin m = table.eval(-t);
            CHECK(p.c == doctest::Approx(m.c).epsilon(1e-13));
            CHECK(p.s == doctest::Approx(-m.s).epsilon(1e-13));
            const CosSin h = table.eval(t + 0.5 * T);
            CHECK(std::abs(h.c + p.c) < 1e-12);
            CHECK(std::abs(h.s + p.s) < 1e-12);
        }
    }
}

TEST_CASE("eval_cs: conservation and ODE on a dense grid")
{
    for (int n = 1; n <= 3; ++n) {
        CAPTURE(n);
        const auto table = GenTrigTable::build(n, 1024);
        const double T = table.period();
        const double h = 1e-5 * T;
        double worst_defect = 0.0, worst_dc = 0.0, worst_ds = 0.0;
        for (int k = 0; k < 4000; ++k) {
            const double t = -T + 3.0 * T * k / 4000.0 + 1e-3;
            const CosSin cs = table.eval(t);
            worst_defect = std::max(worst_defect, std::abs(table.defect(cs)));
            const CosSin a = table.eval(t + h);
            const CosSin b = table.eval(t - h);
            worst_dc = std::max(worst_dc, std::abs((a.c - b.c) / (2 * h) - cs.s));
            worst_ds = std::max(worst_ds, std::abs((a.s - b.s) / (2 * h) + std::pow(cs.c, 2 * n + 1)));
        }
        CHECK(worst_defect < 1e-9);
        CHECK(worst_dc < 1e-6);
        CHECK(worst_ds < 1e-6);
    }
}

TEST_CASE("eval_cs: zeros of C and S")
{
    const auto table = GenTrigTable::build(2, 1024);
    const double T = table.period();
    const int samples = 8000;
    std::vector<double> c_zeros, s_zeros;
    // grid offset from the quarter points so that no sample lands on a zero
    auto at = [&](int k) { return T * (k + 0.37) / samples; };
    CosSin prev = table.eval(at(0));
    CHECK(prev.s < 0.0);
    for (int k = 1; k < samples; ++k) {
        const CosSin cur = table.eval(at(k));
        if ((prev.c > 0) != (cur.c > 0)) c_zeros.push_back(at(k));
        if ((prev.s < 0) != (cur.s < 0)) s_zeros.push_back(at(k));
        prev = cur;
    }
    REQUIRE(c_zeros.size() == 2);
    CHECK(std::abs(c_zeros[0] - 0.25 * T) <= T / samples);
    CHECK(std::abs(c_zeros[1] - 0.75 * T) <= T / samples);
    // S: zero at t = 0 (left of the first sample) and a single crossing at T/2
    REQUIRE(s_zeros.size() == 1);
    CHECK(std::abs(s_zeros[0] - 0.5 * T) <= T / samples);
}

TEST_CASE("phase_of inverts eval on all quadrants")
{
    const auto table = GenTrigTable::build(1, 1024);
    const double T = table.period();
    double worst = 0.0;
    for (int k = 0; k < 997; ++k) {
        const double u = T * (k + 0.5) / 997.0;
        const CosSin cs = table.eval(u);
        const double back = table.phase_of(cs.c, cs.s);
        double diff = std::abs(back - u);
        diff = std::min(diff, T - diff);
        worst = std::max(worst, diff);
    }
    CHECK(worst < 1e-11);
    CHECK(table.phase_of(1.0, 0.0) == 0.0);
    CHECK_THROWS_AS(table.phase_of(0.0, 0.0), DomainError);
}

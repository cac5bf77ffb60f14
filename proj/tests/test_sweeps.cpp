#include "doctest.h"

#include <cmath>
#include <cstring>

#include "fixtures.hpp"
#include "impactosc/error.hpp"
#include "impactosc/sweeps.hpp"

using namespace impactosc;

namespace {

const SweepOptions kSerial{Execution::Serial, 1};
const SweepOptions kParallel{Execution::Parallel, 4};

bool same_bits(double a, double b)
{
    return std::memcmp(&a, &b, sizeof a) == 0;
}

}  // namespace

TEST_CASE("run_indexed: every index once, lowest error rethrown")
{
    std::vector<int> hits(100, 0);
    run_indexed(hits.size(), [&](std::size_t i) { hits[i] += 1; }, kParallel);
    for (int h : hits) CHECK(h == 1);
    try {
        run_indexed(
            50,
            [](std::size_t i) {
                if (i == 7 || i == 31) throw DomainError("task " + std::to_string(i));
            },
            kParallel);
        FAIL("expected an exception");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()) == "task 7");
    }
    CHECK(available_threads(kSerial) == 1);
    CHECK(available_threads(kParallel) == 4);
}

TEST_CASE("poincare grid: serial and parallel agree bit for bit")
{
    const auto m = ImpactModel::build(testing::mixed_spec());
    const std::vector<double> u{1.0, 1.5, 2.0}, th{0.0, 0.25, 0.5, 0.75};
    const auto a = poincare_grid(m, u, th, 1e-3, Backend::Physical, {}, kSerial);
    const auto b = poincare_grid(m, u, th, 1e-3, Backend::Physical, {}, kParallel);
    REQUIRE(a.size() == 12);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].upsilon0 == u[i / 4]);
        CHECK(a[i].theta0 == th[i % 4]);
        CHECK(same_bits(a[i].upsilon1, b[i].upsilon1));
        CHECK(same_bits(a[i].theta1, b[i].theta1));
    }
}

TEST_CASE("residual and derivative sweeps are ordered and reproducible")
{
    const auto m = ImpactModel::build(testing::mixed_spec());
    const std::vector<double> eps{1e-2, 1e-3}, u{1.0, 2.0}, th{0.1, 0.6};
    const auto a = residual_sweep(m, eps, u, th, Backend::Physical, {}, kSerial);
    const auto b = residual_sweep(m, eps, u, th, Backend::Physical, {}, kParallel);
    REQUIRE(a.rows.size() == 2);
    REQUIRE(a.samples.size() == 8);
    CHECK(a.samples[5].eps == 1e-3);
    CHECK(a.samples[5].upsilon0 == 1.0);
    CHECK(a.samples[5].theta0 == 0.6);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(same_bits(a.rows[i].sup_f1, b.rows[i].sup_f1));
        CHECK(same_bits(a.rows[i].sup_f2, b.rows[i].sup_f2));
    }

    const auto ra = r_derivative_sweep(m, {1e3, 1e4}, {0.0, 0.5}, {0.3}, 2, kSerial);
    const auto rb = r_derivative_sweep(m, {1e3, 1e4}, {0.0, 0.5}, {0.3}, 2, kParallel);
    REQUIRE(ra.size() == 12);
    CHECK(ra[0].j == 0);
    CHECK(ra[0].k == 0);
    CHECK(ra[11].j == 2);
    for (std::size_t i = 0; i < ra.size(); ++i) CHECK(same_bits(ra[i].sup_abs, rb[i].sup_abs));
    CHECK_THROWS_AS(r_derivative_sweep(m, {1e3}, {0.0}, {0.3}, 6, kSerial), DomainError);
}

TEST_CASE("energy ladder")
{
    const auto a = energy_ladder(20, 10.0, 1e4, 42);
    const auto b = energy_ladder(20, 10.0, 1e4, 42);
    const auto c = energy_ladder(20, 10.0, 1e4, 43);
    REQUIRE(a.size() == 20);
    CHECK(0.5 * a.front().v * a.front().v == doctest::Approx(10.0));
    CHECK(0.5 * a.back().v * a.back().v == doctest::Approx(1e4));
    bool differ = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].x == 0.0);
        CHECK(a[i].t >= 0.0);
        CHECK(a[i].t < 1.0);
        CHECK(same_bits(a[i].t, b[i].t));
        differ = differ || a[i].t != c[i].t;
    }
    CHECK(differ);
}

TEST_CASE("boundedness: unperturbed sup norm is reached in the first interval")
{
    const auto spec = PotentialSpec::unperturbed(1);
    BoundednessOptions b;
    b.horizon = 50.0;
    const auto rep = boundedness_sweep(spec, energy_ladder(4, 10.0, 1e3, 1), b, {}, kSerial);
    CHECK(rep.flagged == 0);
    CHECK(rep.failed == 0);
    for (const auto& r : rep.records) {
        REQUIRE(r.checkpoints.size() == 10);
        for (const auto& c : r.checkpoints) {
            CHECK(c.max_norm == doctest::Approx(r.checkpoints.front().max_norm).epsilon(1e-10));
        }
        CHECK(r.energy_max - r.energy_min < 1e-10 * r.initial_energy);
        CHECK(r.checkpoints.back().impacts > r.checkpoints.front().impacts);
    }
}

TEST_CASE("boundedness: per-IC failures do not abort the sweep; parallel matches serial")
{
    const auto spec = testing::single_harmonic_spec();
    auto ics = energy_ladder(5, 10.0, 1e3, 9);
    ics.insert(ics.begin() + 2, PhaseState{0.0, 0.0, 0.0, 0});
    BoundednessOptions b;
    b.horizon = 20.0;
    const auto a = boundedness_sweep(spec, ics, b, {}, kSerial);
    const auto p = boundedness_sweep(spec, ics, b, {}, kParallel);
    CHECK(a.failed == 1);
    CHECK(a.records[2].failed);
    CHECK_FALSE(a.records[2].error.empty());
    CHECK(a.flagged == 0);
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(same_bits(a.records[i].ratio, p.records[i].ratio));
        CHECK(a.records[i].failed == p.records[i].failed);
    }
    CHECK_THROWS_AS(boundedness_sweep(spec, ics, BoundednessOptions{0.0, 10, 1.5}, {}, kSerial), ConfigError);
}

#pragma once

// Adaptive explicit Runge-Kutta stepping (DOP853) with continuous output,
// plus scalar root localization on the dense-output polynomial.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <initializer_list>
#include <string>
#include <utility>

#include "impactosc/dop853_tableau.hpp"
#include "impactosc/error.hpp"

namespace impactosc::ode {

struct Tolerances {
    double rel_tol = 1e-12;
    double abs_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
};

struct StepStats {
    long rhs_evals = 0;
    long accepted = 0;
    long rejected = 0;
};

/// DOP853 stepper for a fixed-size system y' = f(t, y).
///
/// The stepper owns the current point (t, y) and, after every accepted step,
/// exposes a 7th-order interpolant over [t_prev(), t()]. `Rhs` is any callable
/// `void(double t, const State& y, State& dydt)`.
template <std::size_t N, class Rhs>
class Dop853 {
public:
    using State = std::array<double, N>;

    Dop853(Rhs rhs, Tolerances tol) : rhs_(std::move(rhs)), tol_(tol) {}

    /// Restart from a new point (discards step history but keeps the step size hint).
    void reset(double t, const State& y)
    {
        t_ = t;
        y_ = y;
        eval(t_, y_, f_);
        have_dense_ = false;
        stepped_ = false;
        if (!(h_ > 0.0)) h_ = initial_step(+1.0);
    }

    /// Advance by one accepted step, never beyond `t_limit` (> t()).
    /// Returns the size of the accepted step.
    double step(double t_limit)
    {
        const double span = t_limit - t_;
        if (!(span > 0.0)) throw NumericalError("Dop853::step: t_limit must exceed current time");

        const double h_want = std::min(h_, tol_.max_step);
        double h = std::min(h_want, span);
        for (;;) {
            const double h_min = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t_));
            if (h < h_min) {
                throw StiffnessError("step size underflow at t = " + std::to_string(t_));
            }
            stages(t_, y_, f_, h, y_trial_);
            const double err = error_norm(h);
            const double fac11 = std::pow(err, 0.125);
            if (err <= 1.0) {
                const double fac = std::clamp(fac11 / 0.9, 1.0 / 6.0, 1.0 / 0.333);
                double h_next = h / fac;
                if (last_rejected_) h_next = std::min(h_next, h);
                last_rejected_ = false;
                const bool clamped = (h == span && span < h_want);

                t_prev_ = t_;
                y_prev_ = y_;
                f_prev_ = f_;
                t_ = clamped ? t_limit : t_ + h;
                y_ = y_trial_;
                eval(t_, y_, f_);
                h_used_ = t_ - t_prev_;
                h_ = clamped ? std::max(h_, h_next) : h_next;
                have_dense_ = false;
                stepped_ = true;
                ++stats_.accepted;
                return h_used_;
            }
            ++stats_.rejected;
            last_rejected_ = true;
            h /= std::min(1.0 / 0.333, fac11 / 0.9);
        }
    }

    double t() const { return t_; }
    double t_prev() const { return t_prev_; }
    const State& y() const { return y_; }
    const State& y_prev() const { return y_prev_; }
    const State& dydt() const { return f_; }
    double step_hint() const { return h_; }
    void set_step_hint(double h) { h_ = h; }
    const StepStats& stats() const { return stats_; }
    const Tolerances& tolerances() const { return tol_; }

    /// Dense output on the last accepted step, t in [t_prev(), t()].
    State dense(double t)
    {
        prepare_dense();
        const double s = (t - t_prev_) / h_used_;
        const double s1 = 1.0 - s;
        State out{};
        for (std::size_t i = 0; i < N; ++i) {
            const double p7 = r_[6][i] + s * r_[7][i];
            const double p6 = r_[5][i] + s1 * p7;
            const double p5 = r_[4][i] + s * p6;
            const double p4 = r_[3][i] + s1 * p5;
            const double p3 = r_[2][i] + s * p4;
            const double p2 = r_[1][i] + s1 * p3;
            out[i] = r_[0][i] + s * p2;
        }
        return out;
    }

    /// Time derivative of the dense output.
    State dense_derivative(double t)
    {
        prepare_dense();
        const double s = (t - t_prev_) / h_used_;
        const double s1 = 1.0 - s;
        State out{};
        for (std::size_t i = 0; i < N; ++i) {
            const double p7 = r_[6][i] + s * r_[7][i];
            const double p6 = r_[5][i] + s1 * p7;
            const double p5 = r_[4][i] + s * p6;
            const double p4 = r_[3][i] + s1 * p5;
            const double p3 = r_[2][i] + s * p4;
            const double p2 = r_[1][i] + s1 * p3;
            const double d7 = r_[7][i];
            const double d6 = -p7 + s1 * d7;
            const double d5 = p6 + s * d6;
            const double d4 = -p5 + s1 * d5;
            const double d3 = p4 + s * d4;
            const double d2 = -p3 + s1 * d3;
            out[i] = (p2 + s * d2) / h_used_;
        }
        return out;
    }

    /// Re-take the last step from t_prev() with a single step of size h, and
    /// return the resulting state (does not change the stepper).
    State restep(double h)
    {
        State out;
        const auto saved = k_;
        stages(t_prev_, y_prev_, f_prev_, h, out);
        k_ = saved;
        return out;
    }

private:
    void eval(double t, const State& y, State& dydt)
    {
        rhs_(t, y, dydt);
        ++stats_.rhs_evals;
    }

    double scale(std::size_t i, const State& a, const State& b) const
    {
        return tol_.abs_tol + tol_.rel_tol * std::max(std::abs(a[i]), std::abs(b[i]));
    }

    double initial_step(double dir)
    {
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sk = tol_.abs_tol + tol_.rel_tol * std::abs(y_[i]);
            d0 += (y_[i] / sk) * (y_[i] / sk);
            d1 += (f_[i] / sk) * (f_[i] / sk);
        }
        d0 = std::sqrt(d0 / N);
        d1 = std::sqrt(d1 / N);
        double h0 = (d0 < 1e-10 || d1 < 1e-10) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, tol_.max_step);
        State y1, f1;
        for (std::size_t i = 0; i < N; ++i) y1[i] = y_[i] + dir * h0 * f_[i];
        eval(t_ + dir * h0, y1, f1);
        double d2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sk = tol_.abs_tol + tol_.rel_tol * std::abs(y_[i]);
            d2 += ((f1[i] - f_[i]) / sk) * ((f1[i] - f_[i]) / sk);
        }
        d2 = std::sqrt(d2 / N) / h0;
        const double dm = std::max(d1, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 8.0);
        return std::min({100.0 * h0, h1, tol_.max_step});
    }

    // Computes the 12 stages from (t, y, f) with step h; result in y_out.
    // Stage slots k_[0..11] hold k1..k12; k_[12] holds the weighted increment.
    void stages(double t, const State& y, const State& f, double h, State& y_out)
    {
        using namespace dop853;
        auto& k = k_;
        k[0] = f;
        State w;
        auto combine = [&](std::initializer_list<std::pair<int, double>> terms) {
            for (std::size_t i = 0; i < N; ++i) {
                double acc = 0.0;
                for (const auto& [idx, coef] : terms) acc += coef * k[idx][i];
                w[i] = y[i] + h * acc;
            }
        };
        combine({{0, a21}});
        eval(t + c2 * h, w, k[1]);
        combine({{0, a31}, {1, a32}});
        eval(t + c3 * h, w, k[2]);
        combine({{0, a41}, {2, a43}});
        eval(t + c4 * h, w, k[3]);
        combine({{0, a51}, {2, a53}, {3, a54}});
        eval(t + c5 * h, w, k[4]);
        combine({{0, a61}, {3, a64}, {4, a65}});
        eval(t + c6 * h, w, k[5]);
        combine({{0, a71}, {3, a74}, {4, a75}, {5, a76}});
        eval(t + c7 * h, w, k[6]);
        combine({{0, a81}, {3, a84}, {4, a85}, {5, a86}, {6, a87}});
        eval(t + c8 * h, w, k[7]);
        combine({{0, a91}, {3, a94}, {4, a95}, {5, a96}, {6, a97}, {7, a98}});
        eval(t + c9 * h, w, k[8]);
        combine({{0, a101}, {3, a104}, {4, a105}, {5, a106}, {6, a107}, {7, a108}, {8, a109}});
        eval(t + c10 * h, w, k[9]);
        combine({{0, a111}, {3, a114}, {4, a115}, {5, a116}, {6, a117}, {7, a118}, {8, a119}, {9, a1110}});
        eval(t + c11 * h, w, k[10]);
        combine({{0, a121}, {3, a124}, {4, a125}, {5, a126}, {6, a127}, {7, a128}, {8, a129}, {9, a1210},
                 {10, a1211}});
        eval(t + h, w, k[11]);
        for (std::size_t i = 0; i < N; ++i) {
            k[12][i] = b1 * k[0][i] + b6 * k[5][i] + b7 * k[6][i] + b8 * k[7][i] + b9 * k[8][i] +
                       b10 * k[9][i] + b11 * k[10][i] + b12 * k[11][i];
            y_out[i] = y[i] + h * k[12][i];
        }
    }

    double error_norm(double h) const
    {
        using namespace dop853;
        const auto& k = k_;
        double err5 = 0.0, err3 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sk = scale(i, y_, y_trial_);
            const double e3 = k[12][i] - e31 * k[0][i] - e32 * k[8][i] - e33 * k[11][i];
            const double e5 = e51 * k[0][i] + e56 * k[5][i] + e57 * k[6][i] + e58 * k[7][i] + e59 * k[8][i] +
                              e510 * k[9][i] + e511 * k[10][i] + e512 * k[11][i];
            err3 += (e3 / sk) * (e3 / sk);
            err5 += (e5 / sk) * (e5 / sk);
        }
        double deno = err5 + 0.01 * err3;
        if (deno <= 0.0) deno = 1.0;
        return std::abs(h) * err5 * std::sqrt(1.0 / (static_cast<double>(N) * deno));
    }

    void prepare_dense()
    {
        using namespace dop853;
        if (have_dense_) return;
        if (!stepped_) throw NumericalError("Dop853: dense output requested before any step");
        // k_ still holds the stages of the last accepted step (stages() ran last on it).
        auto& k = k_;
        const double h = h_used_;
        const State& y0 = y_prev_;
        const State& fn = f_;
        for (std::size_t i = 0; i < N; ++i) {
            r_[0][i] = y0[i];
            r_[1][i] = y_[i] - y0[i];
            r_[2][i] = h * k[0][i] - r_[1][i];
            r_[3][i] = r_[1][i] - h * fn[i] - r_[2][i];
            r_[4][i] = d41 * k[0][i] + d46 * k[5][i] + d47 * k[6][i] + d48 * k[7][i] + d49 * k[8][i] +
                       d410 * k[9][i] + d411 * k[10][i] + d412 * k[11][i];
            r_[5][i] = d51 * k[0][i] + d56 * k[5][i] + d57 * k[6][i] + d58 * k[7][i] + d59 * k[8][i] +
                       d510 * k[9][i] + d511 * k[10][i] + d512 * k[11][i];
            r_[6][i] = d61 * k[0][i] + d66 * k[5][i] + d67 * k[6][i] + d68 * k[7][i] + d69 * k[8][i] +
                       d610 * k[9][i] + d611 * k[10][i] + d612 * k[11][i];
            r_[7][i] = d71 * k[0][i] + d76 * k[5][i] + d77 * k[6][i] + d78 * k[7][i] + d79 * k[8][i] +
                       d710 * k[9][i] + d711 * k[10][i] + d712 * k[11][i];
        }
        State w, k14, k15, k16;
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y0[i] + h * (a141 * k[0][i] + a147 * k[6][i] + a148 * k[7][i] + a149 * k[8][i] +
                                a1410 * k[9][i] + a1411 * k[10][i] + a1412 * k[11][i] + a1413 * fn[i]);
        eval(t_prev_ + c14 * h, w, k14);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y0[i] + h * (a151 * k[0][i] + a156 * k[5][i] + a157 * k[6][i] + a158 * k[7][i] +
                                a1511 * k[10][i] + a1512 * k[11][i] + a1513 * fn[i] + a1514 * k14[i]);
        eval(t_prev_ + c15 * h, w, k15);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y0[i] + h * (a161 * k[0][i] + a166 * k[5][i] + a167 * k[6][i] + a168 * k[7][i] +
                                a169 * k[8][i] + a1613 * fn[i] + a1614 * k14[i] + a1615 * k15[i]);
        eval(t_prev_ + c16 * h, w, k16);
        for (std::size_t i = 0; i < N; ++i) {
            r_[4][i] = h * (r_[4][i] + d413 * fn[i] + d414 * k14[i] + d415 * k15[i] + d416 * k16[i]);
            r_[5][i] = h * (r_[5][i] + d513 * fn[i] + d514 * k14[i] + d515 * k15[i] + d516 * k16[i]);
            r_[6][i] = h * (r_[6][i] + d613 * fn[i] + d614 * k14[i] + d615 * k15[i] + d616 * k16[i]);
            r_[7][i] = h * (r_[7][i] + d713 * fn[i] + d714 * k14[i] + d715 * k15[i] + d716 * k16[i]);
        }
        have_dense_ = true;
    }

    Rhs rhs_;
    Tolerances tol_;
    double t_ = 0.0, t_prev_ = 0.0;
    double h_ = 0.0, h_used_ = 0.0;
    State y_{}, y_prev_{}, f_{}, f_prev_{}, y_trial_{};
    std::array<State, 13> k_{};
    std::array<State, 8> r_{};
    bool have_dense_ = false;
    bool stepped_ = false;
    bool last_rejected_ = false;
    StepStats stats_;
};

template <std::size_t N, class Rhs>
Dop853<N, Rhs> make_dop853(Rhs rhs, Tolerances tol)
{
    return Dop853<N, Rhs>(std::move(rhs), tol);
}

/// Locates a root of g on [a, b] given g(a)·g(b) ≤ 0, using Newton steps on
/// g with derivative dg, falling back to bisection whenever Newton leaves the
/// current bracket or fails to shrink it. Stops when the bracket or the Newton
/// correction drops below `time_tol`, then polishes a few more Newton steps.
template <class G, class DG>
double find_root(G&& g, DG&& dg, double a, double b, double time_tol, int max_iter = 100)
{
    double ga = g(a);
    double gb = g(b);
    if (ga == 0.0) return a;
    if (gb == 0.0) return b;
    if ((ga > 0.0) == (gb > 0.0)) throw NumericalError("find_root: interval does not bracket a root");
    // secant start
    double x = a - ga * (b - a) / (gb - ga);
    for (int it = 0; it < max_iter; ++it) {
        const double gx = g(x);
        if (gx == 0.0) return x;
        if ((gx > 0.0) == (ga > 0.0)) {
            a = x;
            ga = gx;
        } else {
            b = x;
            gb = gx;
        }
        const double d = dg(x);
        double xn = (d != 0.0 && std::isfinite(d)) ? x - gx / d : 0.5 * (a + b);
        if (!(xn > a && xn < b)) xn = 0.5 * (a + b);
        const double step = std::abs(xn - x);
        x = xn;
        if (step < 1e-3 * time_tol || (b - a) < 1e-3 * time_tol) return x;
        if (step <= std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) return x;
    }
    if ((b - a) <= time_tol) return x;
    throw NumericalError("find_root: no convergence");
}

}  // namespace impactosc::ode

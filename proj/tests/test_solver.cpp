#include <catch_amalgamated.hpp>

#include "delaydiff/solver.hpp"

using namespace delaydiff;

namespace {

Scenario unit_scalar_scenario(double a = 0.5, double T = 30.0) {
    return make_scenario(make_system_matrix_scalar(a), make_constant_delay(1.0),
                         make_constant_signal_scalar(1.0, -1.0), T, linspace(0.0, T, 301));
}

}  // namespace

TEST_CASE("closed-form evaluation on the unit delay") {
    auto scn = unit_scalar_scenario();
    // hand iteration: x(3.5) -> 0.5 x(2.5) -> ... -> 0.5^4 x0(-0.5)
    CHECK(solve_representation(scn, 3.5)(0) == Catch::Approx(0.0625).margin(1e-15));
    CHECK(solve_representation(scn, -0.25)(0) == 1.0);  // history passthrough
}

TEST_CASE("geometric closed form for constant history") {
    // history identically a: the solution is a^(floor(t)+2)
    for (double a : {0.3, 0.5, 0.8, -0.6}) {
        auto scn = make_scenario(make_system_matrix_scalar(a), make_constant_delay(1.0),
                                 make_constant_signal_scalar(a, -1.0), 20.0, linspace(0.0, 20.0, 41));
        for (double t = -1.0; t <= 20.0; t += 0.31) {
            const double expect = std::pow(a, std::floor(t) + 2.0);
            CHECK(solve_representation(scn, t)(0) == Catch::Approx(expect).margin(1e-14));
        }
    }
}

TEST_CASE("stepping equals the closed form") {
    auto scn = unit_scalar_scenario();
    const Trajectory traj = solve_stepping(scn);
    for (double t = 0.0; t <= 30.0; t += 0.1)
        CHECK(std::abs(traj.evaluator(t)(0) - solve_representation(scn, t)(0)) < 1e-12);
    CHECK(traj.residual_report < 1e-12);
    CHECK(traj.block_count == static_cast<long>(std::ceil(30.0 / 0.5)));
}

TEST_CASE("one-step degenerate delay pins the solution") {
    // tau(0) = 1, tau(t) = t afterwards: x(0) = A x0(-1), x(t) = A^2 x0(-1)
    auto delay = make_piecewise_affine_delay({0.0}, {{1.0, 0.0}}, {std::optional<double>(1.0)});
    auto x0 = make_sampled_signal({-1.0, 0.0}, {Vec::Constant(1, 3.0), Vec::Constant(1, 1.0)});
    auto scn = make_scenario(make_system_matrix_scalar(0.5), delay, x0, 10.0, linspace(0.0, 10.0, 21));
    const Trajectory traj = solve_stepping(scn);
    CHECK(traj.evaluator(0.0)(0) == Catch::Approx(1.5).margin(1e-15));   // A x0(-1)
    for (double t = 0.5; t <= 10.0; t += 0.5)
        CHECK(traj.evaluator(t)(0) == Catch::Approx(0.75).margin(1e-15));  // A^2 x0(-1)
}

TEST_CASE("zero history stays zero") {
    auto scn = make_scenario(make_system_matrix_scalar(0.7), make_affine_delay(0.3, 0.7),
                             make_constant_signal_scalar(0.0, -2.0), 15.0, linspace(0.0, 15.0, 31));
    const Trajectory traj = solve_stepping(scn);
    for (const Vec& v : traj.values) CHECK(v.norm() == 0.0);
}

TEST_CASE("two runs agree bit for bit") {
    auto scn = make_scenario(make_system_matrix_scalar(0.5), make_affine_delay(0.4, 0.6),
                             make_constant_signal_scalar(1.0, -1.0), 25.0, linspace(0.0, 25.0, 501));
    const Trajectory a = solve_stepping(scn);
    const Trajectory b = solve_stepping(scn);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
}

TEST_CASE("linearity in the initial condition") {
    const auto A = make_system_matrix_scalar(0.6);
    const auto delay = make_affine_delay(0.25, 0.8);
    const auto grid = linspace(0.0, 12.0, 25);
    auto solve_const = [&](double c) {
        auto scn = make_scenario(A, delay, make_constant_signal_scalar(c, -1.0), 12.0, grid);
        return solve_stepping(scn);
    };
    const Trajectory x = solve_const(1.0);
    const Trajectory y = solve_const(-0.7);
    const Trajectory z = solve_const(2.0 * 1.0 + 3.0 * (-0.7));
    for (std::size_t i = 0; i < x.values.size(); ++i)
        CHECK(z.values[i](0) == Catch::Approx(2.0 * x.values[i](0) + 3.0 * y.values[i](0)).margin(1e-12));
}

TEST_CASE("history truncation reports an error") {
    auto scn = make_scenario(make_system_matrix_scalar(0.5), make_constant_delay(2.0),
                             make_constant_signal_scalar(1.0, -1.0), 10.0, linspace(0.0, 10.0, 11));
    // the orbit lands in [-2, 0) but the history only covers [-1, 0)
    CHECK_THROWS_AS(solve_representation(scn, 0.1), HistoryError);
}

TEST_CASE("residual is reported against the equation") {
    auto scn = make_scenario(make_system_matrix_scalar(0.5), make_dyadic_spike_delay(),
                             make_constant_signal_scalar(1.0, -1.0), 40.0, linspace(0.0, 40.0, 401));
    CHECK(solve_stepping(scn).residual_report < 1e-12);
    CHECK(solve_representation_trajectory(scn).residual_report < 1e-12);
}

TEST_CASE("window norms") {
    SECTION("constant trajectory") {
        auto scn = make_scenario(make_system_matrix_scalar(1.0), make_constant_delay(1.0),
                                 make_constant_signal_scalar(2.0, -1.0), 10.0, linspace(0.0, 10.0, 101));
        const Trajectory traj = solve_stepping(scn);  // identically 2
        CHECK(window_norm(traj, 5.0, 1.0, 3.0) == Catch::Approx(6.0).epsilon(1e-12));
        CHECK(window_norm(traj, 5.0, 2.0, 3.0) == Catch::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-12));
        CHECK(window_norm(traj, 5.0, kInf, 3.0) == 2.0);
    }
    SECTION("sup of a decaying staircase sits at the window's left edge") {
        auto scn = unit_scalar_scenario();
        const Trajectory traj = solve_stepping(scn);
        const double expect = traj.evaluator(7.0)(0);
        CHECK(window_norm(traj, 9.0, kInf, 2.0) == Catch::Approx(expect).margin(1e-15));
    }
    SECTION("window exceeding the history is rejected") {
        auto scn = unit_scalar_scenario();
        const Trajectory traj = solve_stepping(scn);
        CHECK_THROWS_AS(window_norm(traj, 0.5, 1.0, 5.0), HistoryError);
    }
    SECTION("geometric growth of the moving integral norms") {
        // growing delay 0.75 t + 1 with unit history: the window integral
        // doubles between the chained times 4, 20, 84
        auto scn = make_scenario(make_system_matrix_scalar(0.5), make_affine_delay(0.75, 1.0),
                                 make_constant_signal_scalar(1.0, -1.0, 0.0, Regularity::Lp), 84.0,
                                 linspace(0.0, 84.0, 841));
        const Trajectory traj = solve_stepping(scn);
        const double n1 = window_norm(traj, 4.0, 1.0, largest_delay(scn.delay, 4.0, 200.0).h_of_t);
        const double n2 = window_norm(traj, 20.0, 1.0, largest_delay(scn.delay, 20.0, 200.0).h_of_t);
        const double n3 = window_norm(traj, 84.0, 1.0, largest_delay(scn.delay, 84.0, 400.0).h_of_t);
        CHECK(n1 == Catch::Approx(2.0).epsilon(0.01));
        CHECK(n2 == Catch::Approx(4.0).epsilon(0.01));
        CHECK(n3 == Catch::Approx(8.0).epsilon(0.01));
        CHECK(n2 / n1 == Catch::Approx(2.0).epsilon(0.01));
        CHECK(n3 / n2 == Catch::Approx(2.0).epsilon(0.01));
    }
}

TEST_CASE("solution family over the vanishing-infimum delay") {
    const auto A = make_system_matrix_scalar(0.5);
    SECTION("every member solves the equation") {
        const double e = std::exp(1.0);
        for (double rho : {0.0, 1.0, -2.5}) {
            for (double t : {0.5, 1.0, 2.0, 5.0}) {
                const double lhs = nonuniqueness_family(A, rho, t)(0);
                const double rhs = 0.5 * nonuniqueness_family(A, rho, t / e)(0);
                CHECK(std::abs(lhs - rhs) < 1e-12);
            }
        }
    }
    SECTION("value at t = 1") { CHECK(std::abs(nonuniqueness_family(A, 1.0, 1.0)(0)) == Catch::Approx(1.0).margin(1e-14)); }
    SECTION("zero member vanishes") { CHECK(nonuniqueness_family(A, 0.0, 7.0)(0) == 0.0); }
    SECTION("nilpotent matrices are rejected") {
        Mat n(2, 2);
        n << 0.0, 1.0, 0.0, 0.0;
        CHECK_THROWS_AS(nonuniqueness_family(make_system_matrix(n), 1.0, 1.0), Error);
    }
}

TEST_CASE("regulated data propagates with one-sided limits") {
    // piecewise-monotone one-step image and a regulated (jumpy) history:
    // away from the output breakpoints, neighbouring samples agree to the
    // local increment, so lateral limits exist along the grid
    auto delay = make_piecewise_affine_delay({0.0, 2.0}, {{0.0, 1.0}, {0.5, 0.0}});
    auto x0 = make_sampled_signal({-1.0, -0.5, -0.5 + 1e-9, 0.0},
                                  {Vec::Constant(1, 1.0), Vec::Constant(1, 1.0), Vec::Constant(1, -0.5),
                                   Vec::Constant(1, -0.5)},
                                  Interp::Linear, Regularity::Regulated);
    auto scn = make_scenario(make_system_matrix_scalar(0.5), delay, x0, 8.0, linspace(0.0, 8.0, 1601));
    const Trajectory traj = solve_stepping(scn);
    // count large jumps between adjacent samples; the jump set must be finite
    // (bounded by the image of the history jump under finitely many steps)
    int jumps = 0;
    for (std::size_t i = 1; i < traj.times.size(); ++i) {
        if (traj.times[i] < 0.0) continue;
        if ((traj.values[i] - traj.values[i - 1]).norm() > 0.05) ++jumps;
    }
    CHECK(jumps <= 12);
    CHECK(traj.residual_report < 1e-12);
}

TEST_CASE("state-dependent stepping") {
    const auto A = make_system_matrix_scalar(0.5);
    const Signal x0 = make_constant_signal_scalar(1.0, -1.5);

    SECTION("state-blind dependence reduces to the constant delay") {
        StateDelayFn constant_fn = [](double, const HistoryView&) { return 1.0; };
        const Trajectory sd = solve_state_dependent(A, constant_fn, 1.0, 1.5, x0, 10.0);
        auto scn = make_scenario(A, make_constant_delay(1.0), x0, 10.0, linspace(0.0, 10.0, 41));
        const Trajectory st = solve_stepping(scn);
        for (std::size_t i = 0; i < sd.trace_times.size(); ++i) {
            const double t = sd.trace_times[i];
            CHECK((sd.interp(t) - st.evaluator(t)).norm() < 1e-12);
        }
    }
    SECTION("contracting state feedback decays under the worst-case rate") {
        StateDelayFn tau_sd = [](double, const HistoryView& v) { return 1.0 + 0.5 * std::min(1.0, v.at(0.0).norm()); };
        const Trajectory traj = solve_state_dependent(A, tau_sd, 1.0, 1.5, x0, 24.0);
        const double gamma = std::log(2.0) / 1.5;
        for (std::size_t i = 0; i < traj.times.size(); ++i) {
            if (traj.times[i] < 0.0) continue;
            CHECK(traj.values[i].norm() <= std::exp(-gamma * traj.times[i]) + 1e-12);
        }
        for (double tr : traj.trace_values) {
            CHECK(tr >= 1.0);
            CHECK(tr <= 1.5);
        }
    }
    SECTION("zero history gives the zero solution and a state-blind trace") {
        const Signal zero = make_constant_signal_scalar(0.0, -1.5);
        StateDelayFn tau_sd = [](double, const HistoryView& v) { return 1.0 + 0.5 * std::min(1.0, v.at(0.0).norm()); };
        const Trajectory traj = solve_state_dependent(A, tau_sd, 1.0, 1.5, zero, 8.0);
        for (const Vec& v : traj.values) CHECK(v.norm() == 0.0);
        for (double tr : traj.trace_values) CHECK(tr == 1.0);  // tau(t, 0)
    }
    SECTION("delays escaping the declared interval are rejected") {
        StateDelayFn bad = [](double, const HistoryView&) { return 0.5; };
        CHECK_THROWS_AS(solve_state_dependent(A, bad, 1.0, 1.5, x0, 5.0), Error);
    }
}

TEST_CASE("stepping and closed form agree across random closed-form scenarios") {
    std::mt19937_64 rng(1234);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        const int d = 1 + static_cast<int>(rng() % 3);
        Mat A(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) A(i, j) = g(rng);
        A *= (0.3 + 0.5 * u(rng)) / std::max(spectral_radius(A), 1e-9);

        DelaySpec delay;
        switch (rep % 4) {
            case 0: delay = make_constant_delay(0.3 + u(rng)); break;
            case 1: delay = make_affine_delay(0.8 * u(rng), 0.4 + u(rng)); break;
            case 2: delay = make_dyadic_spike_delay(); break;
            default:
                delay = make_piecewise_affine_delay({0.0, 2.0, 5.0},
                                                    {{0.0, 0.5 + u(rng)}, {0.3, 0.4}, {0.0, 1.0 + u(rng)}});
        }
        const double h0 = largest_delay(delay, 0.0, 90.0).h_of_t;
        auto scn = make_scenario(make_system_matrix(A), delay, make_constant_signal(Vec::Constant(d, 1.0), -h0 - 1.0),
                                 30.0, linspace(0.0, 30.0, 301));
        const Trajectory traj = solve_stepping(scn);
        double gap = 0.0;
        for (double t : scn.output_grid)
            gap = std::max(gap, (traj.evaluator(t) - solve_representation(scn, t)).cwiseAbs().maxCoeff());
        CHECK(gap < 1e-10);
    }
}

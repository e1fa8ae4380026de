#include <catch_amalgamated.hpp>

#include "delaydiff/json_io.hpp"

using namespace delaydiff;

TEST_CASE("delay evaluation across families") {
    CHECK(eval_delay(make_constant_delay(1.0), 3.5) == 1.0);
    CHECK(eval_delay(make_affine_delay(1.0, 1.0), 2.0) == 3.0);
    CHECK(eval_delay(make_dyadic_spike_delay(), 8.5) == 3.0);
    CHECK(eval_delay(make_dyadic_spike_delay(), 2.0) == 1.0);   // first spike coincides with the base level
    CHECK(eval_delay(make_dyadic_spike_delay(), 4.0) == 2.0);
    CHECK(eval_delay(make_dyadic_spike_delay(), 5.0) == 1.0);   // half-open spike interval
    CHECK_THROWS_AS(eval_delay(make_constant_delay(1.0), -0.1), DomainError);
}

TEST_CASE("delay construction rejects non-positive values") {
    CHECK_THROWS_AS(make_constant_delay(0.0), ConstructionError);
    CHECK_THROWS_AS(make_affine_delay(-0.1, 1.0), ConstructionError);
    CHECK_THROWS_AS(make_affine_delay(0.5, 0.0), ConstructionError);
    CHECK_THROWS_AS(make_tabulated_delay({0.0, 1.0}, {1.0, -0.5}), ConstructionError);
    CHECK_THROWS_AS(make_tabulated_delay({0.0, 1.0}, {1.0, 2.0}, Interp::Linear, std::nullopt, 1.5), ConstructionError);
}

TEST_CASE("point overrides shape the vanishing-infimum delay") {
    auto d = make_piecewise_affine_delay({0.0}, {{1.0 - std::exp(-1.0), 0.0}}, {std::optional<double>(1.0)});
    CHECK(eval_delay(d, 0.0) == 1.0);
    CHECK(eval_delay(d, 2.0) == Catch::Approx(2.0 * (1.0 - std::exp(-1.0))).margin(1e-15));
    CHECK(d.sigma1_monotone == Monotonicity::Nondecreasing);
}

TEST_CASE("tabulated interpolation modes") {
    auto lin = make_tabulated_delay({0.0, 1.0, 2.0}, {1.0, 2.0, 1.0});
    CHECK(eval_delay(lin, 0.5) == 1.5);
    CHECK(eval_delay(lin, 5.0) == 1.0);  // held beyond the table
    auto lc = make_tabulated_delay({0.0, 1.0, 2.0}, {1.0, 2.0, 1.0}, Interp::LeftConstant);
    CHECK(eval_delay(lc, 0.99) == 1.0);
    CHECK(eval_delay(lc, 1.0) == 2.0);
}

TEST_CASE("every family evaluates positive on a dense grid") {
    std::vector<DelaySpec> families = {
        make_constant_delay(0.3), make_affine_delay(0.75, 1.0), make_dyadic_spike_delay(),
        make_piecewise_affine_delay({0.0, 1.0, 2.0}, {{1.0, 1.0}, {0.0, 2.0}, {1.0, -1.0}}),
        make_tabulated_delay({0.0, 3.0, 7.0}, {0.5, 1.5, 0.25})};
    for (const auto& d : families)
        for (double t = 0.0; t <= 40.0; t += 0.01) CHECK(d(t) > 0.0);
}

TEST_CASE("signal evaluation and validation") {
    SECTION("constant and sampled") {
        auto s = make_constant_signal_scalar(2.0, -1.0);
        CHECK(s.eval(-0.25)(0) == 2.0);
        CHECK_THROWS_AS(s.eval(0.0), HistoryError);   // right-open support
        CHECK_THROWS_AS(s.eval(-1.5), HistoryError);

        auto lin = make_sampled_signal({-1.0, 0.0}, {Vec::Constant(1, 2.0), Vec::Constant(1, 1.0)});
        CHECK(lin.eval(-0.5)(0) == Catch::Approx(1.5).margin(1e-15));
    }
    SECTION("unbounded power form requires the integrability tag") {
        Vec dir = Vec::Constant(1, 1.0);
        CHECK_NOTHROW(make_power_signal(0.3, dir, -1.0, 0.0, 1.0));
        CHECK_THROWS_AS(make_power_signal(1.2, dir, -1.0, 0.0, 1.0), ConstructionError);  // beta p >= 1
        Signal bad;
        bad.support_left = -1.0;
        bad.support_right = 0.0;
        bad.form = PowerForm{0.5, dir};
        bad.regularity = Regularity::Continuous;
        CHECK_THROWS_AS(detail::validate_signal(bad), ConstructionError);
    }
    SECTION("continuity audit on sampled data") {
        CHECK_THROWS_AS(make_sampled_signal({-1.0, -0.5, 0.0},
                                            {Vec::Constant(1, 1.0), Vec::Constant(1, 2.0), Vec::Constant(1, 2.0)},
                                            Interp::LeftConstant, Regularity::Continuous),
                        ConstructionError);
        CHECK_NOTHROW(make_sampled_signal({-1.0, -0.5, 0.0},
                                          {Vec::Constant(1, 1.0), Vec::Constant(1, 2.0), Vec::Constant(1, 2.0)},
                                          Interp::LeftConstant, Regularity::Regulated));
    }
    SECTION("infinite history only for constant and power forms") {
        CHECK_NOTHROW(make_constant_signal_scalar(1.0, -kInf));
        CHECK_THROWS_AS(make_sampled_signal({-kInf, 0.0}, {Vec::Constant(1, 1.0), Vec::Constant(1, 1.0)}),
                        ConstructionError);
    }
}

TEST_CASE("hypothesis audit: growing affine delay") {
    const auto rep = audit_hypotheses(make_affine_delay(0.75, 1.0), make_system_matrix_scalar(0.5), 100.0, 1.0);
    CHECK(rep[1].verdict == Verdict::Holds);
    CHECK(*rep[1].witness == Catch::Approx(1.0).margin(0));
    CHECK(rep[8].verdict == Verdict::Holds);
    CHECK(rep[10].verdict == Verdict::Fails);
    CHECK(rep[9].verdict == Verdict::Fails);
    CHECK(*rep[9].witness == Catch::Approx(2.0).margin(1e-12));  // 4 * 0.5
    CHECK(rep[7].verdict == Verdict::Holds);
}

TEST_CASE("hypothesis audit: constant delay") {
    const auto rep = audit_hypotheses(make_constant_delay(1.0), make_system_matrix_scalar(0.9), 10.0);
    CHECK(rep[1].verdict == Verdict::Holds);
    CHECK(*rep[1].witness == 1.0);
    CHECK(rep[10].verdict == Verdict::Holds);
    CHECK(*rep[10].witness == 1.0);
    CHECK(rep[2].verdict == Verdict::Holds);
    CHECK(rep[9].verdict == Verdict::Undecidable);  // no exponent requested
}

TEST_CASE("hypothesis audit: vanishing infimum fails H1") {
    auto vanish = make_piecewise_affine_delay({0.0}, {{1.0 - std::exp(-1.0), 0.0}}, {std::optional<double>(1.0)});
    const auto rep = audit_hypotheses(vanish, make_system_matrix_scalar(0.5), 10.0);
    CHECK(rep[1].verdict == Verdict::Fails);
    CHECK(*rep[1].witness == Catch::Approx(0.0).margin(1e-15));  // infimum approached at 0+
}

TEST_CASE("hypothesis audit: flat one-step image fails the null-set hypothesis") {
    const auto rep = audit_hypotheses(make_affine_delay(1.0, 1.0), make_system_matrix_scalar(0.5), 10.0, 1.0);
    CHECK(rep[5].verdict == Verdict::Fails);
    CHECK(rep[6].verdict == Verdict::Fails);
    CHECK(rep[9].verdict == Verdict::Fails);
    CHECK(rep[8].verdict == Verdict::Fails);
}

TEST_CASE("hypothesis audit: dyadic delay") {
    const auto rep = audit_hypotheses(make_dyadic_spike_delay(), make_system_matrix_scalar(0.5), 64.0, 1.0);
    CHECK(rep[1].verdict == Verdict::Holds);
    CHECK(rep[2].verdict == Verdict::Fails);
    CHECK(*rep[2].witness == 4.0);
    CHECK(rep[6].verdict == Verdict::Holds);
    CHECK(*rep[6].witness == 2.0);  // two overlapping branches
    CHECK(rep[10].verdict == Verdict::Fails);
    CHECK(rep[9].verdict == Verdict::Fails);  // product 2 * 0.5 = 1 is not below one
    CHECK(*rep[9].witness == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("hypothesis audit is monotone in T for H1") {
    auto vanish = make_piecewise_affine_delay({0.0}, {{1.0 - std::exp(-1.0), 0.0}}, {std::optional<double>(1.0)});
    const auto m = make_system_matrix_scalar(0.5);
    bool failed = false;
    for (double T : {0.5, 1.0, 5.0, 20.0, 100.0}) {
        const bool fails_now = audit_hypotheses(vanish, m, T)[1].verdict == Verdict::Fails;
        if (failed) CHECK(fails_now);
        failed = failed || fails_now;
    }
    CHECK(failed);
}

TEST_CASE("tabulated delays audit at grid level") {
    auto tab = make_tabulated_delay({0.0, 1.0, 2.0}, {1.0, 0.5, 1.5});
    const auto rep = audit_hypotheses(tab, make_system_matrix_scalar(0.5), 10.0, 1.0);
    CHECK(rep[4].verdict == Verdict::Undecidable);
    CHECK(rep[5].verdict == Verdict::Undecidable);
    CHECK(rep[6].verdict == Verdict::Undecidable);
    CHECK(rep[1].verdict == Verdict::Holds);
}

TEST_CASE("scenario JSON round-trips bit-exactly") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int rep = 0; rep < 30; ++rep) {
        const int d = 1 + static_cast<int>(rng() % 3);
        Mat m = Mat::Zero(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) m(i, j) = u(rng) - 1.5;
        DelaySpec delay;
        switch (rng() % 4) {
            case 0: delay = make_constant_delay(u(rng)); break;
            case 1: delay = make_affine_delay(u(rng) * 0.3, u(rng)); break;
            case 2: delay = make_dyadic_spike_delay(); break;
            default:
                delay = make_piecewise_affine_delay({0.0, 1.0}, {{0.0, u(rng)}, {0.2, u(rng)}},
                                                    {std::nullopt, std::optional<double>(u(rng))});
        }
        auto scn = make_scenario(make_system_matrix(m), delay,
                                 make_constant_signal(Vec::Constant(d, u(rng)), -u(rng) - 2.0), 10.0,
                                 linspace(0.0, 10.0, 7), {{kInf, std::nullopt}, {2.0, 0.5}});
        const json j1 = jsonio::scenario_to_json(scn);
        const std::string text = j1.dump();
        const Scenario back = jsonio::scenario_from_json(json::parse(text));
        const json j2 = jsonio::scenario_to_json(back);
        CHECK(j1 == j2);
        // numbers survive the text round trip bit-for-bit
        CHECK(back.matrix.entries == scn.matrix.entries);
        CHECK(back.initial.eval(-1.0) == scn.initial.eval(-1.0));
        for (double t : {0.0, 0.7, 3.3}) CHECK(back.delay(t) == scn.delay(t));
    }
}

TEST_CASE("config errors carry a JSON pointer") {
    json j;
    j["delay"] = {{"kind", "constant"}, {"c", 1.0}};
    try {
        jsonio::scenario_from_json(j);
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(e.pointer == "/matrix");
    }
}

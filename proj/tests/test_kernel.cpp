#include <catch_amalgamated.hpp>

#include "delaydiff/delay_kernel.hpp"

using namespace delaydiff;

namespace {

// brute-force oracle: n(t) and the orbit by direct subtraction, written
// independently of the kernel's bookkeeping
long counter_oracle(const DelaySpec& d, double t, int hard_cap = 1000000) {
    if (t < 0) return 0;
    long n = 0;
    double s = t;
    while (s >= 0.0 && n < hard_cap) {
        s -= d(s);
        ++n;
    }
    return n;
}

long dyadic_closed_form(double t) {
    if (t < 0.0) return 0;
    if (t < 1.0) return 1;
    const double fl = std::floor(std::log2(t));
    return static_cast<long>(std::floor(t) - 0.5 * (fl - 2.0) * (fl + 1.0));
}

std::vector<DelaySpec> sample_families() {
    std::vector<DelaySpec> out;
    out.push_back(make_constant_delay(1.0));
    out.push_back(make_constant_delay(0.37));
    out.push_back(make_affine_delay(0.75, 1.0));
    out.push_back(make_affine_delay(0.2, 0.5));
    out.push_back(make_dyadic_spike_delay());
    out.push_back(make_piecewise_affine_delay({0.0, 1.0, 2.0}, {{1.0, 1.0}, {0.0, 2.0}, {1.0, -1.0}}));
    out.push_back(make_tabulated_delay({0.0, 2.0, 5.0, 10.0}, {1.0, 0.5, 2.0, 1.5}));
    return out;
}

}  // namespace

TEST_CASE("iterated map basics") {
    auto unit = make_constant_delay(1.0);
    CHECK(*iterate_sigma(unit, 3.5, 2) == Catch::Approx(1.5).margin(0));
    CHECK(*iterate_sigma(unit, -0.3, 0) == -0.3);

    auto degenerate = make_affine_delay(1.0, 1.0);
    CHECK(*iterate_sigma(degenerate, 5.0, 1) == -1.0);
    CHECK_FALSE(iterate_sigma(degenerate, 5.0, 2).has_value());  // two-step domain empty
}

TEST_CASE("iteration counter on the unit delay") {
    auto unit = make_constant_delay(1.0);
    const auto table = iteration_count(unit, 3.5);
    CHECK(table.n_of_t == 4);
    CHECK(table.orbit.back() == Catch::Approx(-0.5).margin(0));
    CHECK(table.landed_in_history);

    const auto neg = iteration_count(unit, -1.0);
    CHECK(neg.n_of_t == 0);
    CHECK(neg.orbit == std::vector<double>{-1.0});
}

TEST_CASE("iteration counter on the dyadic spike delay") {
    auto d = make_dyadic_spike_delay();
    CHECK(d(8.5) == 3.0);
    CHECK(d(2.5) == 1.0);
    CHECK(iteration_count(d, 10.0).n_of_t == 8);
    for (double t = 0.0; t <= 70.0; t += 0.037) CHECK(iteration_count(d, t).n_of_t == dyadic_closed_form(t));
}

TEST_CASE("counter equals the brute-force oracle across families") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> td(-3.0, 60.0);
    for (const auto& d : sample_families())
        for (int i = 0; i < 200; ++i) {
            const double t = td(rng);
            CHECK(iteration_count(d, t).n_of_t == counter_oracle(d, t));
        }
}

TEST_CASE("step-cap trips when the delay infimum vanishes") {
    // tau(0) = 1, tau(t) = (1 - 1/e) t afterwards: the orbit for t > 0 never
    // leaves [0, inf)
    auto vanish = make_piecewise_affine_delay({0.0}, {{1.0 - std::exp(-1.0), 0.0}}, {std::optional<double>(1.0)});
    CHECK_THROWS_AS(iteration_count(vanish, 2.0), StepCapError);
}

TEST_CASE("orbit invariants") {
    for (const auto& d : sample_families()) {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> td(0.0, 50.0);
        for (int i = 0; i < 100; ++i) {
            const auto table = iteration_count(d, td(rng));
            REQUIRE(table.orbit.size() == static_cast<std::size_t>(table.n_of_t) + 1);
            for (long k = 0; k < table.n_of_t; ++k) {
                CHECK(table.orbit[static_cast<std::size_t>(k)] >= 0.0);
                CHECK(table.orbit[static_cast<std::size_t>(k + 1)] ==
                      table.orbit[static_cast<std::size_t>(k)] - d(table.orbit[static_cast<std::size_t>(k)]));
            }
            CHECK(table.orbit.back() < 0.0);
        }
    }
}

TEST_CASE("counter drops by one under one delay step") {
    for (const auto& d : sample_families()) {
        std::mt19937_64 rng(23);
        std::uniform_real_distribution<double> td(0.0, 50.0);
        for (int i = 0; i < 200; ++i) {
            const double t = td(rng);
            const double s1 = t - d(t);
            const long n_t = iteration_count(d, t).n_of_t;
            const long n_s = iteration_count(d, s1).n_of_t;
            CHECK(n_s == n_t - 1);
        }
    }
}

TEST_CASE("iterates compose") {
    for (const auto& d : sample_families()) {
        std::mt19937_64 rng(31);
        std::uniform_real_distribution<double> td(0.0, 50.0);
        for (int i = 0; i < 200; ++i) {
            const double t = td(rng);
            const auto table = iteration_count(d, t);
            const long n = table.n_of_t;
            if (n < 1) continue;
            std::uniform_int_distribution<long> kd(0, n);
            const long k = kd(rng);
            const auto sk = iterate_sigma(d, t, k);
            REQUIRE(sk.has_value());
            const auto rest = iterate_sigma(d, *sk, n - k);
            REQUIRE(rest.has_value());
            CHECK(*rest == table.orbit.back());  // bitwise: identical operation sequence
        }
    }
}

TEST_CASE("domain nesting") {
    // membership in the n-step domain implies membership in every earlier one
    for (const auto& d : sample_families()) {
        std::mt19937_64 rng(41);
        std::uniform_real_distribution<double> td(0.0, 40.0);
        for (int i = 0; i < 100; ++i) {
            const double t = td(rng);
            const long n = iteration_count(d, t).n_of_t;
            for (long k = 0; k <= n; ++k) CHECK(iterate_sigma(d, t, k).has_value());
            CHECK_FALSE(iterate_sigma(d, t, n + 1).has_value());
        }
    }
}

TEST_CASE("largest delay: shortcut and scan") {
    SECTION("constant delay") {
        auto d = make_constant_delay(1.0);
        for (double t : {0.0, 1.7, 12.0}) {
            const auto h = largest_delay(d, t, t + 50.0);
            CHECK(h.method == HMethod::MonotoneShortcut);
            CHECK(h.h_of_t == 1.0);
        }
    }
    SECTION("slowly growing affine delay") {
        auto d = make_affine_delay(0.75, 1.0);
        const auto h = largest_delay(d, 5.0, 100.0);
        CHECK(h.method == HMethod::MonotoneShortcut);
        CHECK(h.h_of_t == Catch::Approx(4.75).margin(1e-15));
    }
    SECTION("degenerate affine delay") {
        auto d = make_affine_delay(1.0, 1.0);  // one-step image identically -1
        const auto h = largest_delay(d, 0.0, 100.0);
        CHECK(h.h_of_t == Catch::Approx(1.0).margin(1e-12));
    }
    SECTION("dyadic delay is scanned, never extrapolated") {
        auto d = make_dyadic_spike_delay();
        const auto h = largest_delay(d, 0.0, 128.0);
        CHECK(h.method == HMethod::HorizonScan);
        CHECK(h.h_of_t == Catch::Approx(1.0).margin(1e-9));  // inf of t - tau(t) is -1, at t = 0
    }
}

TEST_CASE("t - h(t) is nondecreasing on sampled grids") {
    for (const auto& d : sample_families()) {
        double prev = -kInf;
        for (double t = 0.0; t <= 20.0; t += 0.25) {
            const double v = t - largest_delay(d, t, 200.0).h_of_t;
            CHECK(v >= prev - 1e-9);
            prev = v;
        }
    }
}

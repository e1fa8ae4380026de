#include <catch_amalgamated.hpp>

#include "delaydiff/core.hpp"

using namespace delaydiff;

namespace {

Mat mat2(double a, double b, double c, double d) {
    Mat m(2, 2);
    m << a, b, c, d;
    return m;
}

}  // namespace

TEST_CASE("spectral radius on triangular matrices") {
    CHECK(spectral_radius(Mat::Constant(1, 1, 0.5)) == 0.5);
    CHECK(spectral_radius(mat2(0.0, 1.0, 0.0, 0.0)) == Catch::Approx(0.0).margin(1e-12));
    Mat m(2, 2);
    m << 0.3, 0.4, 0.0, 0.6;
    CHECK(spectral_radius(m) == Catch::Approx(0.6).margin(1e-10));
}

TEST_CASE("spectral radius agrees with the power-growth probe") {
    // growth-rate cross-check: (|A^64 x|)^(1/64) approaches the radius
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        const int d = 2 + static_cast<int>(rng() % 2);
        // well-separated eigenvalues via a random similarity of a diagonal
        Mat D = Mat::Zero(d, d);
        std::uniform_real_distribution<double> ev(0.4, 0.9);
        double rho = 0.0;
        for (int i = 0; i < d; ++i) {
            D(i, i) = ev(rng) * (i % 2 == 0 ? 1.0 : -1.0) * (1.0 + 0.2 * i);
            rho = std::max(rho, std::abs(D(i, i)));
        }
        Mat G = Mat::Zero(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) G(i, j) = g(rng);
        const Mat Q = Eigen::HouseholderQR<Mat>(G).householderQ();  // orthogonal similarity
        const Mat A = Q * D * Q.transpose();
        CHECK(spectral_radius(A) == Catch::Approx(rho).epsilon(1e-9));

        Vec x(d);
        for (int i = 0; i < d; ++i) x(i) = g(rng);
        Mat P = Mat::Identity(d, d);
        for (int k = 0; k < 64; ++k) P = A * P;
        const double probe = std::pow((P * x).norm(), 1.0 / 64.0);
        CHECK(probe == Catch::Approx(rho).epsilon(0.05));
    }
}

TEST_CASE("adapted norm contracts below rho + epsilon") {
    SECTION("scalar") {
        const auto n = adapted_norm(Mat::Constant(1, 1, 0.5), 0.01);
        CHECK(n.weight(0, 0) == Catch::Approx(1.0).margin(1e-12));
        CHECK(n.exact_operator_norm == Catch::Approx(0.5).margin(1e-12));
    }
    SECTION("strongly non-normal") {
        const Mat A = mat2(0.5, 100.0, 0.0, 0.5);
        const auto n = adapted_norm(A, 0.1);
        CHECK(n.exact_operator_norm <= 0.6 + 1e-12);
        CHECK(n.achieved_operator_norm <= n.exact_operator_norm + 1e-12);
        // probe verification with an independent seed
        std::mt19937_64 rng(99);
        std::normal_distribution<double> g(0.0, 1.0);
        for (int k = 0; k < 10000; ++k) {
            Vec x(2);
            x << g(rng), g(rng);
            CHECK((n.weight * (A * x)).norm() <= 0.6 * (n.weight * x).norm() * (1 + 1e-12));
        }
    }
    SECTION("nilpotent") {
        const auto n = adapted_norm(mat2(0.0, 1.0, 0.0, 0.0), 0.05);
        CHECK(n.exact_operator_norm <= 0.05 + 1e-12);
        CHECK(n.exact_operator_norm > 0.0);
    }
    SECTION("random matrices, property over draws") {
        std::mt19937_64 rng(17);
        std::normal_distribution<double> g(0.0, 1.0);
        std::uniform_real_distribution<double> eps_d(0.01, 0.5);
        for (int rep = 0; rep < 25; ++rep) {
            const int d = 1 + static_cast<int>(rng() % 3);
            Mat A(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) A(i, j) = g(rng);
            const double eps = eps_d(rng);
            const double rho = spectral_radius(A);
            const auto n = adapted_norm(A, eps);
            CHECK(n.exact_operator_norm <= rho + eps + 1e-9);
            for (int k = 0; k < 200; ++k) {
                Vec x(d);
                for (int i = 0; i < d; ++i) x(i) = g(rng);
                const double nx = n.vec_norm(x);
                if (nx == 0) continue;
                CHECK(n.vec_norm(A * x) <= (rho + eps) * nx * (1 + 1e-10));
            }
            // norm equivalence constants really bound the reweighted norm
            for (int k = 0; k < 50; ++k) {
                Vec x(d);
                for (int i = 0; i < d; ++i) x(i) = g(rng);
                CHECK(n.vec_norm(x) <= n.equiv_upper * x.norm() * (1 + 1e-10));
                CHECK(n.vec_norm(x) >= n.equiv_lower * x.norm() * (1 - 1e-10));
            }
        }
    }
}

TEST_CASE("matrix powers through the cached factorization") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        const int d = 1 + static_cast<int>(rng() % 3);
        Mat A(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) A(i, j) = 0.5 * g(rng);
        const auto sm = make_system_matrix(A);
        Mat direct = Mat::Identity(d, d);
        for (int n = 0; n <= 40; ++n) {
            CHECK((sm.power(n) - direct).cwiseAbs().maxCoeff() <
                  1e-11 * std::max(1.0, direct.cwiseAbs().maxCoeff()));
            direct = A * direct;
        }
    }
}

TEST_CASE("multi-matrix stability index") {
    SECTION("single matrix reduces to the spectral radius") {
        CHECK(rho_hale_silkowski({Mat::Constant(1, 1, 0.5)}, 16) == Catch::Approx(0.5).margin(1e-12));
    }
    SECTION("two aligned scalars") {
        const double v = rho_hale_silkowski({Mat::Constant(1, 1, 0.4), Mat::Constant(1, 1, 0.4)}, 32);
        CHECK(v == Catch::Approx(0.8).margin(1e-12));  // attained at equal angles, on the grid
    }
    SECTION("two opposed scalars") {
        const double v = rho_hale_silkowski({Mat::Constant(1, 1, 0.4), Mat::Constant(1, 1, -0.4)}, 32);
        CHECK(v == Catch::Approx(0.8).margin(1e-12));  // attained at angles pi apart
    }
    SECTION("brute-force oracle on random scalar pairs") {
        std::mt19937_64 rng(29);
        std::uniform_real_distribution<double> u(-0.9, 0.9);
        for (int rep = 0; rep < 10; ++rep) {
            const double a = u(rng), b = u(rng);
            double best = 0.0;
            for (int i = 0; i < 256; ++i)
                for (int j = 0; j < 256; ++j) {
                    const double t1 = 2 * M_PI * i / 256, t2 = 2 * M_PI * j / 256;
                    best = std::max(best, std::abs(a * std::polar(1.0, t1) + b * std::polar(1.0, t2)));
                }
            CHECK(rho_hale_silkowski({Mat::Constant(1, 1, a), Mat::Constant(1, 1, b)}, 256) ==
                  Catch::Approx(best).margin(1e-12));
        }
    }
    SECTION("monotone under grid refinement") {
        std::vector<Mat> ms = {mat2(0.3, 0.2, -0.1, 0.4), mat2(0.1, -0.3, 0.2, 0.0)};
        double prev = 0.0;
        for (int G : {8, 16, 32, 64}) {
            const double v = rho_hale_silkowski(ms, G);
            CHECK(v >= prev - 1e-14);
            prev = v;
        }
    }
    SECTION("input validation") {
        CHECK_THROWS_AS(rho_hale_silkowski({}, 16), ConstructionError);
        CHECK_THROWS_AS(rho_hale_silkowski({Mat::Identity(2, 2), Mat::Identity(3, 3)}, 16), ConstructionError);
        CHECK_THROWS_AS(rho_hale_silkowski({Mat::Identity(2, 2)}, 4), ConstructionError);
    }
}

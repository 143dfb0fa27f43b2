#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "oracle_potential.hpp"
#include "thinlab/potential.hpp"

using namespace thinlab;

TEST_CASE("interior coefficients of a ball") {
    for (double rho : {1.0, 0.7, 2.0}) {
        Ellipsoid E(2, {rho, rho, rho});
        InteriorQuadratic q = interior_coefficients(E);
        for (int j = 0; j < 3; ++j) REQUIRE(q.c[size_t(j)] == Catch::Approx(1.0 / 3).margin(1e-12));
        REQUIRE(q.c0 == Catch::Approx(0.5 * rho * rho).epsilon(1e-11));
    }
}

TEST_CASE("coefficients sum to one for generic ellipsoids") {
    for (auto axes : {std::vector<double>{2, 1, 1}, {0.4, 0.3, 0.2}, {3, 0.4, 0.1}}) {
        InteriorQuadratic q = interior_coefficients(Ellipsoid(2, axes));
        double s = q.c[0] + q.c[1] + q.c[2];
        REQUIRE(s == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("ball potential closed forms") {
    Ellipsoid E(2, {1.0, 1.0, 1.0});
    PotentialEvaluator V(E);
    REQUIRE(V.value({0, 0, 0}) == Catch::Approx(0.5).epsilon(1e-11));
    REQUIRE(V.value({2, 0, 0}) == Catch::Approx(1.0 / 6).epsilon(1e-10));
    REQUIRE(V.value({0, 0, -2}) == Catch::Approx(1.0 / 6).epsilon(1e-10));
    // interior profile rho^2/2 - |X|^2/6
    REQUIRE(V.value({0.5, 0, 0}) == Catch::Approx(0.5 - 0.25 / 6).epsilon(1e-10));
}

TEST_CASE("continuity and C^1 matching across the boundary") {
    Ellipsoid E(2, {0.9, 0.5, 0.3});
    PotentialEvaluator V(E);
    Vec dir{0.62, 0.55, 0.56};
    double t = E.boundary_radius(dir);
    Vec inside = (t * (1 - 1e-9)) * dir, outside = (t * (1 + 1e-9)) * dir;
    REQUIRE(V.value(inside) == Catch::Approx(V.value(outside)).margin(1e-9));
    Vec gi = V.gradient(inside), go = V.gradient(outside);
    for (int j = 0; j < 3; ++j) REQUIRE(gi[j] == Catch::Approx(go[j]).margin(1e-7));
}

TEST_CASE("laplacian of the potential is -1 inside and 0 outside") {
    Ellipsoid E(2, {1.3, 0.8, 0.45});
    PotentialEvaluator V(E);
    REQUIRE(V.hessian({0.3, 0.2, 0.1}).trace() == Catch::Approx(-1.0).margin(1e-11));
    REQUIRE(V.hessian({2.0, 1.5, 0.8}).trace() == Catch::Approx(0.0).margin(1e-11));
}

TEST_CASE("scaling law V_{tE}(tX) = t^2 V_E(X)") {
    Ellipsoid E(2, {0.8, 0.6, 0.4});
    PotentialEvaluator V(E);
    for (double t : {0.5, 2.0}) {
        PotentialEvaluator Vt(E.scaled(t));
        for (Vec X : {Vec{0.1, 0.2, 0.1}, Vec{1.5, -0.3, 0.8}, Vec{0.0, 0.0, 2.0}}) {
            REQUIRE(Vt.value(t * X) == Catch::Approx(t * t * V.value(X)).epsilon(1e-11).margin(1e-12));
        }
    }
}

TEST_CASE("brute-force volume quadrature oracle agreement") {
    // spec-pinned instance first
    Ellipsoid E(2, {2, 1, 1});
    std::vector<Vec> pts{{0, 0, 0}, {0.5, 0, 0}};
    auto oracle = thinlab_test::brute_force_potential(E, pts, 96);
    PotentialEvaluator V(E);
    REQUIRE(std::abs(V.value(pts[0]) - oracle[0]) <= 1e-4);
    REQUIRE(std::abs(V.value(pts[1]) - oracle[1]) <= 1e-4);

    // one seeded random ellipsoid, points inside and outside
    std::mt19937_64 rng(20240817);
    std::uniform_real_distribution<double> axis(0.15, 1.5), pos(-2.0, 2.0);
    Ellipsoid R(2, {axis(rng), axis(rng), axis(rng)});
    std::vector<Vec> rp;
    while (rp.size() < 8) {
        Vec X{pos(rng), pos(rng), pos(rng)};
        if (std::abs(R.level(X) - 1.0) > 0.05) rp.push_back(X);
    }
    auto ov = thinlab_test::brute_force_potential(R, rp, 96);
    PotentialEvaluator VR(R);
    for (size_t i = 0; i < rp.size(); ++i) REQUIRE(std::abs(VR.value(rp[i]) - ov[i]) <= 1e-4);
}

TEST_CASE("decay certificate") {
    SECTION("ball normalized to V(0) = 1") {
        double rho = std::sqrt(2.0);
        Ellipsoid E(2, {rho, rho, rho});
        DecayReport rep = decay_certificate(E, rho, 4.0);
        REQUIRE(rep.bound == Catch::Approx(1.0 / 3));
        REQUIRE(rep.max_potential == Catch::Approx(1.0 / 6).epsilon(1e-8));
        REQUIRE(rep.certified);
    }
    SECTION("m near 1 certifies trivially") {
        Ellipsoid E(2, {0.5, 0.4, 0.3});
        DecayReport rep = decay_certificate(E, 0.5, 1.0001);
        REQUIRE(rep.certified);  // bound blows up
    }
    SECTION("E not inside B_R") {
        Ellipsoid E(2, {1.0, 0.4, 0.3});
        REQUIRE_THROWS_AS(decay_certificate(E, 0.5, 4.0), invalid_input);
    }
}

TEST_CASE("inverse ellipsoid: ball case") {
    InverseSolveResult r = solve_inverse_ellipsoid({1.0 / 3, 1.0 / 3, 1.0 / 3}, 1.0);
    REQUIRE(r.converged);
    for (int j = 0; j < 3; ++j) REQUIRE(r.E.semi_axes[size_t(j)] == Catch::Approx(std::sqrt(2.0)).margin(1e-8));
    REQUIRE(r.residual <= 1e-10);
}

TEST_CASE("inverse ellipsoid: oblate target and self-consistency") {
    InverseSolveResult r = solve_inverse_ellipsoid({0.25, 0.25, 0.5}, 1.0);
    REQUIRE(r.converged);
    REQUIRE(r.residual <= 1e-10);
    REQUIRE(r.E.semi_axes[0] == Catch::Approx(r.E.semi_axes[1]).epsilon(1e-9));
    REQUIRE(r.E.semi_axes[0] > r.E.semi_axes[2]);
    InteriorQuadratic q = interior_coefficients(r.E);
    REQUIRE(q.c[0] == Catch::Approx(0.25).margin(1e-10));
    REQUIRE(q.c[2] == Catch::Approx(0.5).margin(1e-10));
    REQUIRE(q.c0 == Catch::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("inverse ellipsoid: thinning family") {
    // targets (a_1/n, a_2/n, 1 - 2/n) with a_1 = a_2 = 1: thickness ratio
    // l_y / max l_j must vanish as n grows
    double prev_ratio = 1e300;
    for (int n : {4, 8, 16, 32}) {
        std::vector<double> a{1.0 / n, 1.0 / n, 1.0 - 2.0 / n};
        InverseSolveResult r = solve_inverse_ellipsoid(a, 1.0 / n);
        REQUIRE(r.converged);
        double ratio = r.E.semi_axes[2] / std::max(r.E.semi_axes[0], r.E.semi_axes[1]);
        REQUIRE(ratio < prev_ratio);
        prev_ratio = ratio;
    }
    REQUIRE(prev_ratio < 0.05);
}

TEST_CASE("inverse ellipsoid: monotone thinness in a_y") {
    double prev = 1e300;
    for (double ay : {0.40, 0.50, 0.60, 0.70, 0.80}) {
        std::vector<double> a{(1 - ay) / 2, (1 - ay) / 2, ay};
        InverseSolveResult r = solve_inverse_ellipsoid(a, 1.0);
        REQUIRE(r.converged);
        double ratio = r.E.semi_axes[2] / r.E.semi_axes[0];
        REQUIRE(ratio < prev);
        prev = ratio;
    }
}

TEST_CASE("inverse ellipsoid rejects bad input") {
    REQUIRE_THROWS_AS(solve_inverse_ellipsoid({0.5, 0.5, 0.5}, 1.0), invalid_input);
    REQUIRE_THROWS_AS(solve_inverse_ellipsoid({0.5, 0.6, -0.1}, 1.0), invalid_input);
    InverseSolveResult r = solve_inverse_ellipsoid({0.5 - 5e-7, 0.5 - 5e-7, 1e-6}, 1.0);
    REQUIRE(r.condition_warning);
}

TEST_CASE("obstacle solution from an ellipsoid") {
    SECTION("unit ball closed form") {
        PotentialSolution U = build_obstacle_solution(Ellipsoid(2, {1, 1, 1}));
        REQUIRE(U.value({0, 0, 0}) == 0.0);
        REQUIRE(U.value({2, 0, 0}) == Catch::Approx(1.0 / 3).epsilon(1e-9));
        // U = |X|^2/6 - 1/2 + V with V from the radial solve
        REQUIRE(U.value({0, 1.7, 0}) ==
                Catch::Approx(sq(1.7) / 6 - 0.5 + 1.0 / (3 * 1.7)).epsilon(1e-9));
    }
    SECTION("vanishes identically on E and solves the equation") {
        Ellipsoid E(2, {0.8, 0.5, 0.35});
        PotentialSolution U = build_obstacle_solution(E);
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u01(-1.0, 1.0);
        int inside_checked = 0;
        while (inside_checked < 50) {
            Vec X{0.8 * u01(rng), 0.5 * u01(rng), 0.35 * u01(rng)};
            if (E.level(X) > 1.0) continue;
            ++inside_checked;
            // explicit quadratic identity, bypassing the early return
            double raw = U.P(X) - U.q.c0 + U.V.value(X);
            REQUIRE(std::abs(raw) <= 1e-10);
            REQUIRE(U.value(X) == 0.0);
            REQUIRE(U.hessian(X).trace() == Catch::Approx(0.0).margin(1e-11));
        }
        for (int k = 0; k < 50; ++k) {
            Vec X{2.5 * u01(rng), 2.5 * u01(rng), 2.5 * u01(rng)};
            if (E.level(X) <= 1.0) continue;
            REQUIRE(U.value(X) >= 0.0);
            REQUIRE(U.hessian(X).trace() == Catch::Approx(1.0).margin(1e-10));
        }
    }
}

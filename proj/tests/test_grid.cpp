#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <cstdio>

#include "thinlab/grid.hpp"

using namespace thinlab;

TEST_CASE("build_grid node alignment") {
    GridSpec s = GridSpec::all_symmetric(2, 1.0, 0.5);
    GridField f(s);
    REQUIRE(f.half_count() == 2);  // 5 nodes per full axis
    REQUIRE(f.coords({0, 0, 0})[0] == 0.0);

    GridSpec s2 = GridSpec::all_symmetric(2, 2.0, 2.0 / 128);
    REQUIRE(2 * GridField(s2).half_count() + 1 == 257);

    GridSpec bad = GridSpec::all_symmetric(2, 1.0, 0.3);
    REQUIRE_THROWS_AS(GridField(bad), invalid_input);

    GridSpec badd = GridSpec::all_symmetric(2, 1.0, 0.25);
    badd.d = 1;
    REQUIRE_THROWS_AS(GridField(badd), invalid_input);
}

TEST_CASE("discrete laplacian is exact on quadratics") {
    GridSpec s = GridSpec::all_symmetric(2, 1.0, 0.125);
    GridField f(s);

    SECTION("f = y^2/2 gives 1") {
        f.fill([](const Vec& X) { return 0.5 * sq(X.y()); });
        GridField L = discrete_laplacian(f);
        L.for_each_stored([&](const std::array<int, 4>& li) {
            if (f.is_boundary(li)) {
                REQUIRE(std::isnan(L.at(li)));
                return;
            }
            REQUIRE(L.at(li) == Catch::Approx(1.0).margin(1e-12));
        });
    }
    SECTION("harmonic quadratic gives 0") {
        f.fill([](const Vec& X) { return 0.5 * sq(X[0]) - 0.5 * sq(X.y()); });
        GridField L = discrete_laplacian(f);
        L.for_each_stored([&](const std::array<int, 4>& li) {
            if (!f.is_boundary(li)) REQUIRE(L.at(li) == Catch::Approx(0.0).margin(1e-12));
        });
    }
    SECTION("|X|^2 gives 2(d+1)") {
        f.fill([](const Vec& X) { return norm2(X); });
        GridField L = discrete_laplacian(f);
        L.for_each_stored([&](const std::array<int, 4>& li) {
            if (!f.is_boundary(li)) REQUIRE(L.at(li) == Catch::Approx(6.0).margin(1e-11));
        });
    }
}

TEST_CASE("reflection symmetry is exact by construction") {
    GridSpec s = GridSpec::all_symmetric(2, 1.0, 0.25);
    GridField f(s);
    f.fill([](const Vec& X) { return std::cos(X[0]) * std::cos(X[1]) * std::cos(X.y()) + sq(X[0]); });
    for (int i = -4; i <= 4; ++i)
        for (int j = -4; j <= 4; ++j)
            for (int k = -4; k <= 4; ++k) {
                double v = f.at({i, j, k});
                REQUIRE(v == f.at({-i, j, k}));
                REQUIRE(v == f.at({i, -j, k}));
                REQUIRE(v == f.at({i, j, -k}));
            }
}

TEST_CASE("multilinear interpolation") {
    GridSpec s;
    s.d = 2;
    s.box_radius = 1.0;
    s.spacing = 0.125;
    s.symmetric = {false, true, true, false};
    GridField f(s);

    SECTION("exact on multilinear data") {
        f.fill([](const Vec& X) { return X[0]; });
        REQUIRE(f.interpolate({0.37, 0.0, 0.0}) == Catch::Approx(0.37).margin(1e-15));
        REQUIRE(f.interpolate({-0.81, 0.3, 0.2}) == Catch::Approx(-0.81).margin(1e-15));
    }
    SECTION("quadratic error bound h^2/8 at cell centers") {
        f.fill([](const Vec& X) { return 0.5 * sq(X.y()); });
        double h = s.spacing;
        Vec c{0.0, 0.0, 3.5 * h};
        double err = std::abs(f.interpolate(c) - 0.5 * sq(c.y()));
        REQUIRE(err <= sq(h) / 8 + 1e-15);
    }
    SECTION("out-of-box query throws") {
        REQUIRE_THROWS_AS(f.interpolate({1.5, 0, 0}), invalid_input);
    }
}

TEST_CASE("sphere integral on grid data and callables") {
    GridSpec s = GridSpec::all_symmetric(2, 2.0, 1.0 / 32);
    GridField f(s);
    f.fill([](const Vec&) { return 1.0; });
    SphereQuadrature q(2, 1.0);
    REQUIRE(sphere_integral(f, q) == Catch::Approx(4 * M_PI).epsilon(1e-10));

    // analytic callable: no interpolation error at all
    auto y2 = [](const Vec& X) { return sq(X.y()); };
    REQUIRE(sphere_integral(y2, q) == Catch::Approx(4 * M_PI / 3).epsilon(1e-10));

    SphereQuadrature big(2, 2.5);
    REQUIRE_THROWS_AS(sphere_integral(f, big), invalid_input);
}

TEST_CASE("ball gradient energy") {
    GridSpec s = GridSpec::all_symmetric(2, 1.5, 1.0 / 24);
    GridField f(s);

    SECTION("unit gradient integrates to ball volume") {
        f.fill([](const Vec& X) { return X[0]; });
        double e = ball_gradient_energy(f, 1.0);
        REQUIRE(e == Catch::Approx(4 * M_PI / 3).epsilon(0.02));
    }
    SECTION("constant field has zero energy") {
        f.fill([](const Vec&) { return 7.5; });
        REQUIRE(ball_gradient_energy(f, 1.0) == 0.0);
    }
    SECTION("refinement convergence order >= 0.9 on smooth field") {
        auto smooth = [](const Vec& X) { return 0.5 * sq(X.y()); };
        double exact = 4 * M_PI / 15;  // int_{B_1} y^2
        double e1, e2;
        {
            GridField g1(GridSpec::all_symmetric(2, 1.5, 1.0 / 12));
            g1.fill(smooth);
            e1 = std::abs(ball_gradient_energy(g1, 1.0) - exact);
        }
        {
            GridField g2(GridSpec::all_symmetric(2, 1.5, 1.0 / 24));
            g2.fill(smooth);
            e2 = std::abs(ball_gradient_energy(g2, 1.0) - exact);
        }
        double order = std::log2(e1 / e2);
        REQUIRE(order >= 0.9);
    }
    SECTION("ball not contained in box") {
        REQUIRE_THROWS_AS(ball_gradient_energy(f, 1.5), invalid_input);
    }
}

TEST_CASE("one-sided dy stencil is second order") {
    auto err_at = [](double h) {
        GridSpec s = GridSpec::all_symmetric(2, 1.0, h);
        s.symmetric[2] = false;  // general data in y for this check
        GridField f(s);
        f.fill([](const Vec& X) { return std::exp(X.y()) + X[0]; });
        return std::abs(one_sided_dy(f, {0, 0, 0}) - 1.0);
    };
    double e1 = err_at(1.0 / 16), e2 = err_at(1.0 / 32);
    REQUIRE(e1 <= sq(1.0 / 16));  // truncation constant is f'''(0)/3
    REQUIRE(std::log2(e1 / e2) >= 1.8);
}

TEST_CASE("gf round trip is bit exact") {
    GridSpec s;
    s.d = 2;
    s.box_radius = 1.0;
    s.spacing = 0.25;
    s.symmetric = {true, false, true, false};
    GridField f(s);
    f.fill([](const Vec& X) { return std::sin(1 + X[0]) * std::cos(X[1]) + X.y(); });
    std::string path = "roundtrip_test.gf";
    write_gf(f, path);
    GridField g = read_gf(path);
    REQUIRE(g.spec.d == f.spec.d);
    REQUIRE(g.spec.box_radius == f.spec.box_radius);
    REQUIRE(g.data() == f.data());
    std::remove(path.c_str());
}

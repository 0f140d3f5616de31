#include "pfb/errors.hpp"
#include "pfb/grid.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace pfb;

namespace {

GridFunction torsion_profile(const RadialGrid& g) {
    GridFunction f(g.nodes.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = (g.radius * g.radius - g.nodes[i] * g.nodes[i]) / (2.0 * g.dimension);
    return f;
}

GridFunction smooth_h10(const RadialGrid& g, int mode) {
    GridFunction f(g.nodes.size(), 0.0);
    for (std::size_t i = 0; i + 1 < f.size(); ++i) {
        const double x = g.nodes[i] / g.radius;
        f[i] = std::sin(mode * std::numbers::pi * x) * (1.0 - 0.3 * x);
    }
    return f;
}

} // namespace

TEST_CASE("unit-volume radii") {
    CHECK(build_grid(2, 64).radius == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)).epsilon(1e-14));
    CHECK(build_grid(3, 64).radius ==
          doctest::Approx(std::pow(3.0 / (4.0 * std::numbers::pi), 1.0 / 3.0)).epsilon(1e-14));
}

TEST_CASE("grid rejects bad arguments") {
    CHECK_THROWS_AS(build_grid(1, 64), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(2, 8), std::invalid_argument);
}

TEST_CASE("total weight is the unit volume") {
    const RadialGrid g = build_grid(2, 4096);
    CHECK(integrate(g, GridFunction(g.nodes.size(), 1.0)) == doctest::Approx(1.0).epsilon(1e-6));
    const RadialGrid g3 = build_grid(3, 1024);
    CHECK(integrate(g3, GridFunction(g3.nodes.size(), 1.0)) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("moment integrals on the disc") {
    const RadialGrid g = build_grid(2, 2048);
    GridFunction r2(g.nodes.size());
    for (std::size_t i = 0; i < r2.size(); ++i) r2[i] = g.nodes[i] * g.nodes[i];
    CHECK(integrate(g, r2) == doctest::Approx(1.0 / (2.0 * std::numbers::pi)).epsilon(1e-6));

    // int of the torsion profile = R^2 / (N(N+2))
    const double exact = g.radius * g.radius / (2.0 * 4.0);
    CHECK(integrate(g, torsion_profile(g)) == doctest::Approx(exact).epsilon(1e-6));
}

TEST_CASE("sector apply reproduces -Delta of the torsion profile") {
    for (int N : {2, 3, 5}) {
        const RadialGrid g = build_grid(N, 256);
        const SectorOperator op = sector_operator(g, 0);
        const GridFunction img = sector_apply(g, op, torsion_profile(g));
        for (int i = 0; i < g.segments(); ++i) CHECK(img[i] == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("sector apply of zero is zero") {
    const RadialGrid g = build_grid(2, 64);
    const SectorOperator op = sector_operator(g, 0);
    for (double v : sector_apply(g, op, GridFunction(g.nodes.size(), 0.0))) CHECK(v == 0.0);
}

TEST_CASE("l=1 operator matches central differences at doubled resolution") {
    // oracle: -f'' - f'/r + f/r^2 by central differences of the closed form
    const int N = 2;
    const RadialGrid g = build_grid(N, 512);
    const SectorOperator op = sector_operator(g, 1);
    GridFunction f(g.nodes.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = g.nodes[i] * (g.radius - g.nodes[i]);
    const GridFunction img = sector_apply(g, op, f);

    auto fexact = [&](double r) { return r * (g.radius - r); };
    const double hh = 0.5 * g.spacing;  // doubled resolution stencil
    double worst = 0.0;
    for (int i = 2; i < g.segments() - 1; ++i) {
        const double r = g.nodes[i];
        const double d2 = (fexact(r + hh) - 2.0 * fexact(r) + fexact(r - hh)) / (hh * hh);
        const double d1 = (fexact(r + hh) - fexact(r - hh)) / (2.0 * hh);
        const double ref = -d2 - d1 / r + fexact(r) / (r * r);
        worst = std::max(worst, std::abs(img[i] - ref));
    }
    CHECK(worst < 1e-4);  // O(M^-2) at M = 512
}

TEST_CASE("green solve returns the torsion profile for unit load") {
    for (int N : {2, 3}) {
        const RadialGrid g = build_grid(N, 512);
        const SectorOperator op = sector_operator(g, 0);
        const GridFunction phi = green_solve(g, op, GridFunction(g.nodes.size(), 1.0));
        const GridFunction exact = torsion_profile(g);
        double worst = 0.0;
        for (std::size_t i = 0; i < phi.size(); ++i)
            worst = std::max(worst, std::abs(phi[i] - exact[i]));
        CHECK(worst < 1e-7);
        for (double v : green_solve(g, op, GridFunction(g.nodes.size(), 0.0))) CHECK(v == 0.0);
    }
}

TEST_CASE("green solve round trip is the identity") {
    const RadialGrid g = build_grid(3, 300);
    for (int l : {0, 1, 2}) {
        const SectorOperator op = sector_operator(g, l);
        GridFunction f = smooth_h10(g, 2);
        if (l > 0) f[0] = 0.0;
        const GridFunction back = sector_apply(g, op, green_solve(g, op, f));
        double worst = 0.0;
        for (int i = op.first; i < g.segments(); ++i)
            worst = std::max(worst, std::abs(back[i] - f[i]));
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("discrete symmetry of the sector operators") {
    const RadialGrid g = build_grid(2, 200);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int l : {0, 1, 3}) {
        const SectorOperator op = sector_operator(g, l);
        GridFunction f(g.nodes.size(), 0.0), q(g.nodes.size(), 0.0);
        for (int i = op.first; i < g.segments(); ++i) {
            f[i] = uni(rng);
            q[i] = uni(rng);
        }
        const double a = weighted_inner(g, sector_apply(g, op, f), q);
        const double b = weighted_inner(g, f, sector_apply(g, op, q));
        CHECK(std::abs(a - b) <= 1e-10 * weighted_norm(g, f) * weighted_norm(g, q) + 1e-12);
    }
}

TEST_CASE("h10 inner product of the torsion profile on the disc") {
    const RadialGrid g = build_grid(2, 1024);
    const GridFunction f = torsion_profile(g);
    CHECK(h10_inner(g, f, f) ==
          doctest::Approx(1.0 / (8.0 * std::numbers::pi)).epsilon(1e-7));
    CHECK(h10_inner(g, GridFunction(g.nodes.size(), 0.0), f) == 0.0);
}

TEST_CASE("integration by parts: <f,g>_H10 = int (-Delta f) g") {
    const RadialGrid g = build_grid(2, 256);
    const SectorOperator op = sector_operator(g, 0);
    const GridFunction f = smooth_h10(g, 1);
    const GridFunction q = smooth_h10(g, 3);
    const double lhs = h10_inner(g, f, q);
    const double rhs = weighted_inner(g, sector_apply(g, op, f), q);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("torsion quantities refine at second order") {
    auto err = [](int M) {
        const RadialGrid g = build_grid(2, M);
        const SectorOperator op = sector_operator(g, 0);
        const GridFunction phi = green_solve(g, op, GridFunction(g.nodes.size(), 1.0));
        const double exact = 1.0 / (8.0 * std::numbers::pi);
        return std::abs(h10_inner(g, phi, phi) - exact);
    };
    const double ratio = err(128) / err(256);
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.0);
}

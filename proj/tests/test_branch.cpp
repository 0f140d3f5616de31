#include "pfb/branch.hpp"

#include "pfb/emden.hpp"
#include "pfb/errors.hpp"
#include "pfb/spectrum.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace pfb;

namespace {

struct Setup {
    RadialGrid grid;
    SectorOperator op0;
    ProblemParams params;
    Setup(int N, double p, int M)
        : grid(build_grid(N, M)), op0(sector_operator(grid, 0)), params(N, p) {}
};

constexpr double kLambdaPlus22 = 12.4852686536;  // frozen from the shooting oracle

} // namespace

TEST_CASE("residual at the lambda=0 anchor") {
    Setup s(2, 2.0, 512);
    GridFunction torsion(s.grid.nodes.size());
    for (std::size_t i = 0; i < torsion.size(); ++i)
        torsion[i] = (s.grid.radius * s.grid.radius - s.grid.nodes[i] * s.grid.nodes[i]) / 4.0;
    auto [phi1, phi2] = residual(s.grid, s.op0, s.params, 0.0, 1.0, torsion);
    CHECK(std::abs(phi1) < 1e-6);  // quadrature-order mass defect
    double worst = 0.0;
    for (int i = 0; i < s.grid.segments(); ++i) worst = std::max(worst, std::abs(phi2[i]));
    CHECK(worst < 1e-9);  // flux form is exact on the quadratic profile

    auto [e1, e2] = residual(s.grid, s.op0, s.params, 0.0, 0.0, GridFunction(torsion.size(), 0.0));
    CHECK(e1 == doctest::Approx(-1.0));
    for (int i = 0; i < s.grid.segments(); ++i) CHECK(e2[i] == 0.0);
}

TEST_CASE("newton at lambda=0 returns the torsion solution") {
    Setup s(2, 2.0, 1024);
    const BranchPoint pt =
        newton_solve(s.grid, s.op0, s.params, 0.0, 1.0, GridFunction(s.grid.nodes.size(), 0.0));
    CHECK(pt.alpha == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(pt.residual_norm <= 1e-10);
    CHECK(pt.energy == doctest::Approx(1.0 / (16.0 * std::numbers::pi)).epsilon(1e-6));
    CHECK(pt.energy == doctest::Approx(pt.energy_dual).epsilon(1e-9));
    for (double v : pt.psi) CHECK(v >= 0.0);
}

TEST_CASE("jacobian matches finite differences in random directions") {
    Setup s(2, 2.0, 256);
    SweepOptions opts;
    BranchPoint pt = torsion_anchor(s.grid, s.op0, s.params);
    pt = continue_to(s.grid, s.op0, s.params, pt, 0.7 * kLambdaPlus22, opts);

    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const double eps = 1e-6;
    for (int trial = 0; trial < 5; ++trial) {
        const double ds = uni(rng);
        GridFunction dphi(s.grid.nodes.size(), 0.0);
        for (int i = 0; i < s.grid.segments(); ++i) dphi[i] = uni(rng);

        auto [j1, j2] = jacobian_apply(s.grid, s.op0, s.params, pt, ds, dphi);
        GridFunction psi_p = pt.psi;
        for (std::size_t i = 0; i < psi_p.size(); ++i) psi_p[i] += eps * dphi[i];
        auto [a1, a2] = residual(s.grid, s.op0, s.params, pt.lambda, pt.alpha + eps * ds, psi_p);
        auto [b1, b2] = residual(s.grid, s.op0, s.params, pt.lambda, pt.alpha, pt.psi);

        CHECK(j1 == doctest::Approx((a1 - b1) / eps).epsilon(2e-4));
        double worst = 0.0;
        for (int i = 0; i < s.grid.segments(); ++i)
            worst = std::max(worst, std::abs((a2[i] - b2[i]) / eps - j2[i]));
        // O(eps) + O(eps^(p-1)) near the free boundary
        CHECK(worst < 5e-4);
    }

    auto [z1, z2] = jacobian_apply(s.grid, s.op0, s.params, pt, 0.0,
                                   GridFunction(s.grid.nodes.size(), 0.0));
    CHECK(z1 == 0.0);
    for (double v : z2) CHECK(v == 0.0);
}

TEST_CASE("jacobian at lambda=0 reduces to the substituted form") {
    Setup s(2, 2.0, 128);
    const BranchPoint pt = torsion_anchor(s.grid, s.op0, s.params);
    const double ds = 0.37;
    auto [j1, j2] =
        jacobian_apply(s.grid, s.op0, s.params, pt, ds, GridFunction(pt.psi.size(), 0.0));
    // V0 = alpha^(p-1) with alpha = 1 + O(M^-2)
    CHECK(j1 == doctest::Approx(s.params.exponent * ds).epsilon(1e-4));
    for (int i = 0; i < s.grid.segments(); ++i)
        CHECK(j2[i] == doctest::Approx(-s.params.exponent * ds).epsilon(1e-4));
}

TEST_CASE("sweep: monotone alpha and energy, sign change at lambda_plus") {
    Setup s(2, 2.0, 512);
    std::vector<double> lams;
    for (int i = 0; i <= 24; ++i) lams.push_back(3.0 * kLambdaPlus22 * i / 24);
    const SweepTrace trace = sweep(s.grid, s.op0, s.params, lams);

    CHECK(trace.alpha_decreasing);
    CHECK(trace.energy_increasing);
    CHECK(trace.points.front().alpha == doctest::Approx(1.0).epsilon(1e-5));
    int crossings = 0;
    for (std::size_t i = 1; i < trace.points.size(); ++i)
        if ((trace.points[i].alpha <= 0.0) != (trace.points[i - 1].alpha <= 0.0)) ++crossings;
    CHECK(crossings == 1);
    REQUIRE(trace.lambda_plus.has_value());
    CHECK(std::abs(*trace.lambda_plus - kLambdaPlus22) / kLambdaPlus22 < 1e-3);
    for (const BranchPoint& pt : trace.points) CHECK(pt.residual_norm <= 1e-10);
    for (double da : trace.dalpha) CHECK(da < 0.0);
}

TEST_CASE("sweep rejects malformed lambda lists") {
    Setup s(2, 2.0, 128);
    CHECK_THROWS_AS(sweep(s.grid, s.op0, s.params, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(sweep(s.grid, s.op0, s.params, {0.0, 2.0, 1.5}), std::invalid_argument);
}

TEST_CASE("single-point sweep is the torsion anchor") {
    Setup s(3, 2.0, 256);
    const SweepTrace trace = sweep(s.grid, s.op0, s.params, {0.0});
    REQUIRE(trace.points.size() == 1);
    const double exact = s.grid.radius * s.grid.radius / (2.0 * 3.0 * 5.0);
    CHECK(trace.points[0].energy == doctest::Approx(exact).epsilon(1e-5));
    CHECK_FALSE(trace.lambda_plus.has_value());
}

TEST_CASE("tangent satisfies the constraint-derivative identity and matches FD") {
    Setup s(2, 2.0, 512);
    SweepOptions opts;
    BranchPoint pt = torsion_anchor(s.grid, s.op0, s.params);
    pt = continue_to(s.grid, s.op0, s.params, pt, 0.6 * kLambdaPlus22, opts);

    const BranchTangent tg = tangent(s.grid, s.op0, s.params, pt);
    CHECK(tg.identity_gap <= 1e-8);
    CHECK(tg.dalpha < 0.0);
    CHECK(tg.denergy > 0.0);

    const double d = 1e-4;
    const BranchPoint hi = continue_to(s.grid, s.op0, s.params, pt, pt.lambda + d, opts);
    const BranchPoint lo = continue_to(s.grid, s.op0, s.params, pt, pt.lambda - d, opts);
    const double fd = (hi.alpha - lo.alpha) / (2.0 * d);
    CHECK(std::abs(tg.dalpha - fd) / std::abs(fd) < 1e-4);
}

TEST_CASE("tangent at lambda=0 is minus the torsion mean") {
    Setup s(2, 2.0, 512);
    const BranchPoint pt = torsion_anchor(s.grid, s.op0, s.params);
    const BranchTangent tg = tangent(s.grid, s.op0, s.params, pt);
    // dalpha(0) = -<psi_0> = -int psi_0 (V ~ 1, m ~ 1): -1/(8 pi) on the disc
    CHECK(tg.dalpha == doctest::Approx(-1.0 / (8.0 * std::numbers::pi)).epsilon(1e-4));
}

TEST_CASE("find_lambda_plus agrees with the closed formula") {
    Setup s(2, 2.0, 1024);
    const double lp = find_lambda_plus(s.grid, s.op0, s.params);
    CHECK(std::abs(lp - kLambdaPlus22) / kLambdaPlus22 < 1e-3);

    Setup s3(3, 2.0, 1024);
    const double lp3 = find_lambda_plus(s3.grid, s3.op0, s3.params);
    CHECK(std::abs(lp3 - 14.5806603675) / 14.5806603675 < 1e-3);
    CHECK(std::isfinite(lp3));
}

TEST_CASE("alpha negative and plasma strictly interior above lambda_plus") {
    Setup s(2, 2.0, 512);
    SweepOptions opts;
    BranchPoint pt = torsion_anchor(s.grid, s.op0, s.params);
    pt = continue_to(s.grid, s.op0, s.params, pt, 1.2 * kLambdaPlus22, opts);
    CHECK(pt.alpha < 0.0);
    const PotentialData pot = potential(s.grid, s.params, pt);
    CHECK(pot.r_plus < s.grid.radius);
    CHECK(pot.r_plus > 0.0);
}

TEST_CASE("multiplier identity at converged points") {
    Setup s(2, 1.5, 512);
    SweepOptions opts;
    BranchPoint pt = torsion_anchor(s.grid, s.op0, s.params);
    for (double f : {0.5, 1.0, 1.7, 2.6}) {
        pt = continue_to(s.grid, s.op0, s.params, pt, f * 14.7884440583, opts);
        const PotentialData pot = potential(s.grid, s.params, pt);
        double vpsi = 0.0;
        for (std::size_t i = 0; i < pot.V.size(); ++i)
            vpsi += s.grid.weights[i] * pot.V[i] * pt.psi[i];
        const double gap = (pt.alpha + pt.lambda * vpsi / pot.mass) * pot.mass - 1.0;
        CHECK(std::abs(gap) <= 1e-9);
    }
}

TEST_CASE("two-resolution stability of alpha at fixed lambda") {
    const double lam = 0.8 * kLambdaPlus22;
    auto alpha_at = [&](int M) {
        Setup s(2, 2.0, M);
        BranchPoint pt = torsion_anchor(s.grid, s.op0, s.params);
        return continue_to(s.grid, s.op0, s.params, pt, lam, SweepOptions{}).alpha;
    };
    const double a1 = alpha_at(256), a2 = alpha_at(512), a3 = alpha_at(1024);
    CHECK(std::abs(a1 - a2) < 1e-4);
    const double ratio = std::abs(a1 - a2) / std::abs(a2 - a3);
    CHECK(ratio > 2.5);
    CHECK(ratio < 6.0);
}

TEST_CASE("energy identities along a short sweep") {
    Setup s(3, 1.5, 384);
    std::vector<double> lams;
    for (int i = 0; i <= 10; ++i) lams.push_back(2.0 * 19.1005109376 * i / 10);
    const SweepTrace trace = sweep(s.grid, s.op0, s.params, lams);
    for (const BranchPoint& pt : trace.points) {
        CHECK(pt.energy == doctest::Approx(energy(s.grid, pt)).epsilon(1e-12));
        CHECK(std::abs(pt.energy - pt.energy_dual) <= 1e-8 * std::max(1.0, pt.energy));
    }
}

#include "pfb/sobolev.hpp"

#include "pfb/emden.hpp"
#include "pfb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pfb {

namespace {

double lt_norm_pow(const RadialGrid& grid, const GridFunction& w, double t) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        s += grid.weights[i] * std::pow(std::abs(w[i]), t);
    return s;
}

// w^(t-1) on the nonnegative cone, stable for t < 2 at w = 0
inline double pow_t1(double w, double t) { return w > 0.0 ? std::pow(w, t - 1.0) : 0.0; }

void check_subcritical(const RadialGrid& grid, double t) {
    if (t < 1.0) throw std::invalid_argument("best_constant: t must be >= 1");
    if (grid.dimension >= 3 && t >= 2.0 * grid.dimension / (grid.dimension - 2))
        throw std::invalid_argument("best_constant: t must stay below 2 p_N");
}

} // namespace

double best_constant_shooting(int dimension, double t, double tol) {
    const double R = ball_radius(dimension);
    const double s = t - 1.0;
    ShotProfile shot = shoot_radial(dimension, s, 1.0, tol);
    if (std::abs(t - 2.0) < 1e-13) {
        // linear case: the quotient is the first Dirichlet eigenvalue
        const double z = shot.zero / R;
        return z * z;
    }
    // w(r) = c v(c^((t-2)/2) r) with c placing the zero at R; then
    // Lambda = (int_{B_R} w^t)^((t-2)/t)
    const double c = std::pow(shot.zero / R, 2.0 / (t - 2.0));
    const double scale = std::pow(c, 0.5 * (t - 2.0));
    const int F = static_cast<int>(shot.values.size()) - 1;
    const double omega = unit_ball_volume(dimension);
    // Simpson over the resampled profile on [0, R]
    double acc = 0.0;
    auto val = [&](int k) {
        const double r = R * k / F;
        const double rr = scale * r;
        const double x = rr / shot.zero * F;
        const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(x), F - 1);
        const double frac = x - i;
        const double v = (1.0 - frac) * shot.values[i] + frac * shot.values[i + 1];
        return std::pow(c * std::max(v, 0.0), t) * std::pow(r, dimension - 1);
    };
    for (int k = 0; k < F; k += 2) acc += val(k) + 4.0 * val(k + 1) + val(k + 2);
    const double st = dimension * omega * acc * R / (3.0 * F);
    return std::pow(st, (t - 2.0) / t);
}

BestConstantResult best_constant(const RadialGrid& grid, double t, const DescentOptions& opts) {
    check_subcritical(grid, t);
    const int M = grid.segments();
    const SectorOperator op0 = sector_operator(grid, 0);

    BestConstantResult res;
    res.dimension = grid.dimension;
    res.t = t;

    // torsion profile start: positive, radial, cheap
    GridFunction w = green_solve(grid, op0, GridFunction(M + 1, 1.0));
    double S = lt_norm_pow(grid, w, t);
    for (double& v : w) v /= std::pow(S, 1.0 / t);
    double quot = h10_inner(grid, w, w);

    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        // H^1_0-preconditioned gradient of the quotient at int w^t = 1:
        // d = w - quot * K^-1 (W w^(t-1))
        GridFunction g(M + 1, 0.0);
        for (int i = 0; i <= M; ++i) g[i] = pow_t1(w[i], t);
        GridFunction pre = green_solve(grid, op0, g);
        GridFunction dir(M + 1, 0.0);
        for (int i = 0; i < M; ++i) dir[i] = w[i] - quot * pre[i];
        const double dn2 = h10_inner(grid, dir, dir);
        if (std::sqrt(dn2) <= opts.tol * std::max(1.0, quot)) {
            res.converged = true;
            break;
        }

        double step = 1.0;
        bool accepted = false;
        for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
            GridFunction cand(M + 1, 0.0);
            for (int i = 0; i < M; ++i) cand[i] = std::max(w[i] - step * dir[i], 0.0);
            const double Sc = lt_norm_pow(grid, cand, t);
            if (Sc > 0.0) {
                const double qc = h10_inner(grid, cand, cand) / std::pow(Sc, 2.0 / t);
                if (qc <= quot - opts.armijo_c * step * dn2) {
                    for (double& v : cand) v /= std::pow(Sc, 1.0 / t);
                    w = std::move(cand);
                    quot = qc;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!accepted) {
            res.converged = true;  // descent direction exhausted at rounding level
            break;
        }
    }

    res.iterations = it;
    res.lambda = quot;
    res.minimizer = w;

    GridFunction el = sector_apply(grid, op0, w);
    GridFunction gap(M + 1, 0.0);
    for (int i = 0; i < M; ++i) gap[i] = el[i] - quot * pow_t1(w[i], t);
    res.el_residual = weighted_norm(grid, gap);

    if (opts.run_oracle) {
        res.oracle_lambda = best_constant_shooting(grid.dimension, t);
        res.method_gap = std::abs(res.lambda - res.oracle_lambda) / res.lambda;
    }
    return res;
}

double lambda0(const RadialGrid& grid, double p, const DescentOptions& opts) {
    if (!(p >= 1.0)) throw std::invalid_argument("lambda0: p must be >= 1");
    return best_constant(grid, 2.0 * p, opts).lambda / p;
}

double lambda1(const RadialGrid& grid, double p, const DescentOptions& opts) {
    if (grid.dimension != 2) throw std::invalid_argument("lambda1 is defined on the disc only");
    if (!(p >= 1.0)) throw std::invalid_argument("lambda1: p must be >= 1");
    const double lam = best_constant(grid, p + 1.0, opts).lambda;
    const double a = (p - 1.0) / (2.0 * p);
    const double b = (p + 1.0) / (2.0 * p);
    return std::pow(8.0 * std::numbers::pi / (p + 1.0), a) * std::pow(lam, b);
}

} // namespace pfb

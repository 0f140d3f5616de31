#include "pfb/grid.hpp"

#include "pfb/errors.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pfb {

double unit_ball_volume(int dimension) {
    return std::pow(std::numbers::pi, dimension / 2.0) / std::tgamma(dimension / 2.0 + 1.0);
}

double ball_radius(int dimension) {
    return std::pow(unit_ball_volume(dimension), -1.0 / dimension);
}

RadialGrid build_grid(int dimension, int segments) {
    if (dimension < 2) throw std::invalid_argument("build_grid: dimension must be >= 2");
    if (segments < 16) throw std::invalid_argument("build_grid: need at least 16 segments");

    RadialGrid g;
    g.dimension = dimension;
    g.radius = ball_radius(dimension);
    const int M = segments;
    const double h = g.radius / M;
    g.spacing = h;
    const double omega = unit_ball_volume(dimension);
    const double nom = dimension * omega;

    g.nodes.resize(M + 1);
    g.weights.resize(M + 1);
    g.edges.resize(M);
    for (int i = 0; i <= M; ++i) g.nodes[i] = i * h;
    // exact cell volumes: the node-i weight is the measure of
    // [r_{i-1/2}, r_{i+1/2}]; totals telescope to exactly 1 and the flux
    // form of the sector operators is pointwise exact on quadratics
    auto cell = [&](double a, double b) {
        return omega * (std::pow(b, dimension) - std::pow(a, dimension));
    };
    g.weights[0] = cell(0.0, h / 2.0);
    for (int i = 1; i < M; ++i) g.weights[i] = cell(g.nodes[i] - h / 2.0, g.nodes[i] + h / 2.0);
    g.weights[M] = cell(g.radius - h / 2.0, g.radius);
    for (int i = 0; i < M; ++i) {
        const double rm = 0.5 * (g.nodes[i] + g.nodes[i + 1]);
        g.edges[i] = nom * std::pow(rm, dimension - 1) / h;
    }
    return g;
}

double integrate(const RadialGrid& grid, const GridFunction& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < grid.weights.size(); ++i) s += grid.weights[i] * f[i];
    return s;
}

double weighted_inner(const RadialGrid& grid, const GridFunction& f, const GridFunction& g) {
    double s = 0.0;
    for (std::size_t i = 0; i < grid.weights.size(); ++i) s += grid.weights[i] * f[i] * g[i];
    return s;
}

double weighted_norm(const RadialGrid& grid, const GridFunction& f) {
    return std::sqrt(weighted_inner(grid, f, f));
}

double h10_inner(const RadialGrid& grid, const GridFunction& f, const GridFunction& g) {
    double s = 0.0;
    for (std::size_t i = 0; i < grid.edges.size(); ++i)
        s += grid.edges[i] * (f[i + 1] - f[i]) * (g[i + 1] - g[i]);
    return s;
}

double h10_norm(const RadialGrid& grid, const GridFunction& f) {
    return std::sqrt(h10_inner(grid, f, f));
}

SectorOperator sector_operator(const RadialGrid& grid, int sector) {
    if (sector < 0) throw std::invalid_argument("sector_operator: sector must be >= 0");
    const int M = grid.segments();
    const int N = grid.dimension;
    SectorOperator op;
    op.sector = sector;
    op.first = sector == 0 ? 0 : 1;
    const int n = M - op.first;
    op.diag.resize(n);
    op.sub.resize(n - 1);
    const double cf = static_cast<double>(sector) * (sector + N - 2);
    for (int k = 0; k < n; ++k) {
        const int i = op.first + k;
        double d = grid.edges[i];
        if (i > 0) d += grid.edges[i - 1];
        if (sector > 0) d += grid.weights[i] * cf / (grid.nodes[i] * grid.nodes[i]);
        op.diag[k] = d;
        if (k + 1 < n) op.sub[k] = -grid.edges[i];
    }
    op.factor = tridiag::factor_spd(op.diag, op.sub);
    return op;
}

GridFunction sector_apply(const RadialGrid& grid, const SectorOperator& op, const GridFunction& f) {
    const int M = grid.segments();
    GridFunction y(M + 1, 0.0);
    // flux form keeps the rounding floor well below the solver tolerances
    for (int i = op.first; i < M; ++i) {
        double v = grid.edges[i] * (f[i] - f[i + 1]);
        if (i > 0) v += grid.edges[i - 1] * (f[i] - f[i - 1]);
        if (op.sector > 0) {
            const double cf = static_cast<double>(op.sector) * (op.sector + grid.dimension - 2);
            v += grid.weights[i] * cf / (grid.nodes[i] * grid.nodes[i]) * f[i];
        }
        y[i] = v / grid.weights[i];
    }
    return y;
}

GridFunction green_solve(const RadialGrid& grid, const SectorOperator& op, const GridFunction& f) {
    const int M = grid.segments();
    const int n = op.unknowns();
    std::vector<double> b(n), x(n);
    for (int k = 0; k < n; ++k) b[k] = grid.weights[op.first + k] * f[op.first + k];
    x = b;
    tridiag::solve_in_place(op.factor, x);
    // one refinement pass removes the O(kappa * eps) solve residual
    std::vector<double> r(n);
    tridiag::sym_mult(op.diag, op.sub, x, r);
    for (int k = 0; k < n; ++k) r[k] = b[k] - r[k];
    tridiag::solve_in_place(op.factor, r);
    for (int k = 0; k < n; ++k) x[k] += r[k];

    GridFunction phi(M + 1, 0.0);
    for (int k = 0; k < n; ++k) phi[op.first + k] = x[k];
    return phi;
}

double sector_h10(const RadialGrid&, const SectorOperator& op, const GridFunction& f,
                  const GridFunction& g) {
    const int n = op.unknowns();
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
        double kf = op.diag[k] * f[op.first + k];
        if (k > 0) kf += op.sub[k - 1] * f[op.first + k - 1];
        if (k + 1 < n) kf += op.sub[k] * f[op.first + k + 1];
        s += kf * g[op.first + k];
    }
    return s;
}

} // namespace pfb

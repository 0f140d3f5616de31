#pragma once

#include "pfb/tridiag.hpp"

#include <vector>

namespace pfb {

/// Nodal values on a RadialGrid, one entry per node including r = 0 and
/// r = R. Functions of H^1_0 type carry an explicit 0 in the last slot.
using GridFunction = std::vector<double>;

/// Uniform radial discretization of the unit-volume ball in R^N.
///
/// Quadrature weights approximate the N-dimensional volume measure
/// N omega_N r^(N-1) dr: trapezoidal at interior nodes and at r = R, and
/// the exact half-cell ball volume omega_N (h/2)^N at the origin, which
/// is the choice that makes the sector operators self-adjoint with
/// respect to the weighted inner product.
struct RadialGrid {
    int dimension = 0;
    double radius = 0.0;
    double spacing = 0.0;
    std::vector<double> nodes;    // size M+1, nodes[0] = 0, nodes[M] = R
    std::vector<double> weights;  // size M+1, sum = 1 + O(M^-2)
    std::vector<double> edges;    // size M, N omega_N r_{i+1/2}^(N-1) / h

    int segments() const { return static_cast<int>(nodes.size()) - 1; }
};

double unit_ball_volume(int dimension);
double ball_radius(int dimension);  // radius of the unit-volume ball

/// Requires dimension >= 2 and segments >= 16.
RadialGrid build_grid(int dimension, int segments);

double integrate(const RadialGrid& grid, const GridFunction& f);
double weighted_inner(const RadialGrid& grid, const GridFunction& f, const GridFunction& g);
double weighted_norm(const RadialGrid& grid, const GridFunction& f);

/// Midpoint-rule quadrature of the Dirichlet product int <grad f, grad g>
/// for radial functions; coincides exactly with f^T K_0 g for grid
/// functions vanishing at r = R.
double h10_inner(const RadialGrid& grid, const GridFunction& f, const GridFunction& g);
double h10_norm(const RadialGrid& grid, const GridFunction& f);

/// Discrete radial operator -f'' - (N-1)/r f' + l(l+N-2)/r^2 f on angular
/// sector l, with the Dirichlet condition at r = R and the origin handled
/// by symmetry (l = 0) or by f(0) = 0 (l >= 1). Stored in stiffness form
/// (symmetric tridiagonal K acting on the unknown nodes) together with a
/// prefactored LDL^T; immutable after construction.
struct SectorOperator {
    int sector = 0;
    int first = 0;  // first unknown node index
    std::vector<double> diag;
    std::vector<double> sub;
    tridiag::Ldlt factor;

    int unknowns() const { return static_cast<int>(diag.size()); }
};

SectorOperator sector_operator(const RadialGrid& grid, int sector);

/// Image of the sector operator in nodal (divided-by-weight) form.
/// Slots outside the unknown range are set to zero.
GridFunction sector_apply(const RadialGrid& grid, const SectorOperator& op, const GridFunction& f);

/// Solves op(phi) = f with phi = 0 at r = R; exact inverse of
/// sector_apply on the discrete level up to one step of iterative
/// refinement.
GridFunction green_solve(const RadialGrid& grid, const SectorOperator& op, const GridFunction& f);

/// f^T K_l g: the H^1_0 inner product of the sector-l functions with
/// radial factors f, g (centrifugal term included).
double sector_h10(const RadialGrid& grid, const SectorOperator& op, const GridFunction& f,
                  const GridFunction& g);

} // namespace pfb

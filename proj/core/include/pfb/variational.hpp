#pragma once

#include "pfb/grid.hpp"
#include "pfb/params.hpp"
#include "pfb/spectrum.hpp"

#include <cstdint>
#include <utility>

namespace pfb {

/// A unit-mass nonnegative density with its free energy, the recovered
/// mass-constraint multiplier and the induced potential psi = G[rho].
struct DensityState {
    GridFunction rho;
    double value = 0.0;           // free energy at rho
    double alpha = 0.0;
    double alpha_deviation = 0.0; // pointwise-multiplier spread, stationarity diagnostic
    GridFunction psi;
    double stationarity = 0.0;    // unit-step projected-gradient displacement
    int iterations = 0;
    bool converged = false;       // stationarity target reached before max_iterations
};

/// F_lambda(rho) = p/(p+1) int rho^(1+1/p) - lambda/2 int rho G[rho].
double free_energy(const RadialGrid& grid, const SectorOperator& op0, const ProblemParams& params,
                   double lambda, const GridFunction& rho);

/// Euclidean projection onto {rho >= 0, int rho = 1} in the
/// quadrature-weighted metric: clip at a shifted threshold located by
/// bisection.
GridFunction project_simplex(const RadialGrid& grid, const GridFunction& rho);

struct MinimizeOptions {
    double tol = 1e-8;          // first-order stationarity target
    int max_iterations = 40000;
    double armijo_c = 1e-4;
    int max_backtracks = 60;
};

/// Projected-gradient descent with Barzilai-Borwein steps and an Armijo
/// safeguard, first-order steps only. Hitting max_iterations leaves
/// converged = false with the achieved stationarity in the state.
DensityState minimize_free_energy(const RadialGrid& grid, const SectorOperator& op0,
                                  const ProblemParams& params, double lambda,
                                  const GridFunction& init, const MinimizeOptions& opts = {});

/// Best-of-three minimization: uniform density, optional warm start, and
/// an interior bump, for the nonconvex large-lambda regime.
DensityState minimize_free_energy_multistart(const RadialGrid& grid, const SectorOperator& op0,
                                             const ProblemParams& params, double lambda,
                                             const GridFunction* warm = nullptr,
                                             const MinimizeOptions& opts = {});

/// Mass-weighted average of the pointwise multiplier rho^(1/p) - lambda G[rho]
/// over the positivity set; second entry is its weighted standard deviation.
/// Throws on an empty positivity set.
std::pair<double, double> recover_alpha(const RadialGrid& grid, const SectorOperator& op0,
                                        const ProblemParams& params, double lambda,
                                        const GridFunction& rho);

/// Second variation of the free energy at a branch point in direction
/// V [phi]: value = int V [phi]^2 - tau int V [phi] G[V [phi]].
struct SecondVariation {
    double value = 0.0;
    double mean_square = 0.0;   // <[phi]^2>_lambda
    double interaction = 0.0;   // tau <[phi] G[V [phi]]>_lambda
};

SecondVariation second_variation(const RadialGrid& grid, const SectorOperator& op0,
                                 const PotentialData& pot, const GridFunction& phi);

/// Smooth radial test function from seeded sine coefficients, vanishing
/// at r = R; used by the randomized nonnegativity sweeps.
GridFunction random_test_function(const RadialGrid& grid, std::uint64_t seed, int modes = 6);

} // namespace pfb

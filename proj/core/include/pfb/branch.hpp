#pragma once

#include "pfb/grid.hpp"
#include "pfb/params.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace pfb {

/// One solution (lambda, alpha, psi) of the constrained problem on the
/// discrete ball, with the derived density rho = [alpha + lambda psi]_+^p
/// and the energy E = 1/2 int |grad psi|^2.
struct BranchPoint {
    double lambda = 0.0;
    double alpha = 0.0;
    GridFunction psi;
    GridFunction rho;
    double energy = 0.0;
    double energy_dual = 0.0;    // 1/2 int rho psi; equals energy up to the Newton residual
    double residual_norm = 0.0;
};

/// Constraint and field residuals (Phi_1, Phi_2) of the map whose zeros
/// are the solutions: Phi_1 = -1 + int [alpha+lambda psi]_+^p,
/// Phi_2 = -Delta psi - [alpha+lambda psi]_+^p on the unknown nodes.
std::pair<double, GridFunction> residual(const RadialGrid& grid, const SectorOperator& op0,
                                         const ProblemParams& params, double lambda,
                                         double alpha, const GridFunction& psi);

/// Directional derivative of (Phi_1, Phi_2) at `point` in direction (s, phi).
std::pair<double, GridFunction> jacobian_apply(const RadialGrid& grid, const SectorOperator& op0,
                                               const ProblemParams& params,
                                               const BranchPoint& point, double s,
                                               const GridFunction& phi);

struct NewtonOptions {
    double tolerance = 1e-10;
    int max_iterations = 50;
    int max_backtracks = 30;
};

/// Damped (semismooth) Newton on (alpha, psi) at fixed lambda. The linear
/// step solves the bordered system by block elimination: two tridiagonal
/// solves plus a Schur complement on the scalar unknown.
/// Throws NewtonDivergence / SingularJacobian.
BranchPoint newton_solve(const RadialGrid& grid, const SectorOperator& op0,
                         const ProblemParams& params, double lambda, double alpha0,
                         const GridFunction& psi0, const NewtonOptions& opts = {});

struct BranchTangent {
    double dalpha = 0.0;
    GridFunction dpsi;
    double denergy = 0.0;
    // |dalpha + <psi> + lambda <dpsi>|: the constraint-derivative identity,
    // satisfied to solver accuracy by construction
    double identity_gap = 0.0;
};

/// d/dlambda of the solution at a converged point (bordered solve against
/// -d(Phi)/dlambda).
BranchTangent tangent(const RadialGrid& grid, const SectorOperator& op0,
                      const ProblemParams& params, const BranchPoint& point);

double energy(const RadialGrid& grid, const BranchPoint& point);

/// Ordered trace of branch points; sigma1 entries are filled by the
/// spectrum layer when requested.
struct SweepTrace {
    std::vector<BranchPoint> points;
    std::vector<double> dalpha;            // tangent slope at each point
    std::vector<double> sigma1;            // NaN until filled
    std::vector<int> sigma1_sector;
    std::optional<double> lambda_plus;     // alpha zero crossing, if crossed
    bool alpha_decreasing = false;
    bool energy_increasing = false;
};

struct SweepOptions {
    NewtonOptions newton{};
    int max_halvings = 10;
    double crossing_alpha_tol = 1e-9;
};

/// Continuation over the given strictly increasing lambda values starting
/// at 0: tangent predictor, Newton corrector, step halving on failure.
/// Throws NewtonDivergence carrying the failing lambda if halving runs out.
SweepTrace sweep(const RadialGrid& grid, const SectorOperator& op0, const ProblemParams& params,
                 const std::vector<double>& lambda_values, const SweepOptions& opts = {});

/// One continuation move from an already converged point to the given
/// lambda (predictor + corrector, halving the step on divergence).
BranchPoint continue_to(const RadialGrid& grid, const SectorOperator& op0,
                        const ProblemParams& params, const BranchPoint& from, double lambda,
                        const SweepOptions& opts = {});

/// Zero crossing of lambda -> alpha_lambda located by marching plus a
/// safeguarded secant, each evaluation a warm-started Newton solve;
/// terminates at |alpha| <= crossing_alpha_tol.
double find_lambda_plus(const RadialGrid& grid, const SectorOperator& op0,
                        const ProblemParams& params, const SweepOptions& opts = {});

/// Closed-form anchor at lambda = 0: alpha chosen so the discrete mass is
/// exactly 1 and psi the discrete torsion profile.
BranchPoint torsion_anchor(const RadialGrid& grid, const SectorOperator& op0,
                           const ProblemParams& params);

} // namespace pfb

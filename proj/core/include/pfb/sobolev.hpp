#pragma once

#include "pfb/grid.hpp"

#include <string>

namespace pfb {

/// Best-constant functional Lambda(D_N, t) = inf |grad w|_2^2 / |w|_t^2
/// over radial nonnegative trial functions, with the minimizer normalized
/// to int |w|^t = 1. `lambda` always carries the Rayleigh-descent value;
/// `oracle_lambda` the independent shooting value used to cross-validate.
struct BestConstantResult {
    int dimension = 0;
    double t = 0.0;
    double lambda = 0.0;
    GridFunction minimizer;
    std::string method = "rayleigh-descent";
    double oracle_lambda = 0.0;
    double method_gap = 0.0;     // |descent - shooting| / descent
    double el_residual = 0.0;    // || -Delta w - Lambda w^(t-1) ||_w
    int iterations = 0;
    bool converged = false;
};

struct DescentOptions {
    int max_iterations = 2000;
    double tol = 1e-11;          // H^1_0 norm of the preconditioned gradient
    double armijo_c = 1e-4;
    int max_backtracks = 60;
    bool run_oracle = true;
};

/// Requires 1 <= t < 2 p_N. Preconditioned projected gradient descent on
/// the Rayleigh quotient from the torsion profile, Armijo backtracking;
/// cross-validated against the scaling-based shooting oracle.
BestConstantResult best_constant(const RadialGrid& grid, double t,
                                 const DescentOptions& opts = {});

/// lambda_0(D_N, p) = Lambda(D_N, 2p) / p.
double lambda0(const RadialGrid& grid, double p, const DescentOptions& opts = {});

/// lambda_1(D_2, p) = (8 pi / (p+1))^((p-1)/(2p)) Lambda(D_2, p+1)^((p+1)/(2p));
/// defined on the planar disc only, throws for other dimensions.
double lambda1(const RadialGrid& grid, double p, const DescentOptions& opts = {});

/// Shooting route alone: rescale the radial shot of -Delta v = v^(t-1) so
/// its first zero lands on the ball boundary and read Lambda off the
/// normalization. Exposed for tests.
double best_constant_shooting(int dimension, double t, double tol = 1e-12);

} // namespace pfb

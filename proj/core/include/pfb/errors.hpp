#pragma once

#include <stdexcept>
#include <string>

namespace pfb {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Newton left the basin: residual not reduced below tolerance within the
// iteration budget, or the line search stalled.
struct NewtonDivergence : SolverError {
    NewtonDivergence(double lambda, int iterations, double residual)
        : SolverError("Newton diverged at lambda=" + std::to_string(lambda) +
                      " after " + std::to_string(iterations) +
                      " iterations (residual " + std::to_string(residual) + ")"),
          lambda(lambda), iterations(iterations), residual(residual) {}
    double lambda;
    int iterations;
    double residual;
};

struct SingularJacobian : SolverError {
    explicit SingularJacobian(double lambda)
        : SolverError("bordered Jacobian singular at lambda=" + std::to_string(lambda)),
          lambda(lambda) {}
    double lambda;
};

// The radial shooting integrator found no sign change before r_max.
struct EmdenNoZero : SolverError {
    EmdenNoZero(int dimension, double exponent, double r_max)
        : SolverError("no zero crossing up to r=" + std::to_string(r_max) +
                      " for N=" + std::to_string(dimension) +
                      ", exponent=" + std::to_string(exponent)) {}
};

struct EigenNotConverged : SolverError {
    EigenNotConverged(int sector, int sweeps, double ritz_residual)
        : SolverError("sector " + std::to_string(sector) +
                      " eigensolve not converged after " + std::to_string(sweeps) +
                      " sweeps (Ritz residual " + std::to_string(ritz_residual) + ")"),
          sector(sector), sweeps(sweeps), ritz_residual(ritz_residual) {}
    int sector;
    int sweeps;
    double ritz_residual;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace pfb

#pragma once

#include "pfb/branch.hpp"
#include "pfb/grid.hpp"
#include "pfb/params.hpp"

#include <utility>
#include <vector>

namespace pfb {

/// Linearization weight V = [alpha + lambda psi]_+^(p-1) at a branch
/// point, its mass m = int V, the plasma radius r_plus (support boundary
/// of the density) and tau = lambda p.
struct PotentialData {
    GridFunction V;
    double mass = 0.0;
    double r_plus = 0.0;
    double tau = 0.0;
};

PotentialData potential(const RadialGrid& grid, const ProblemParams& params,
                        const BranchPoint& point);

/// V-weighted mean <phi> = int V phi / int V and the deflated part
/// [phi] = phi - <phi>.
std::pair<double, GridFunction> deflate(const RadialGrid& grid, const PotentialData& pot,
                                        const GridFunction& phi);

/// T phi = G_l * (tau V [phi]) with the deflation active only in the
/// radial sector; identically zero at lambda = 0.
GridFunction apply_T(const RadialGrid& grid, const SectorOperator& op, const PotentialData& pot,
                     const GridFunction& phi);

/// One eigenpair of the linearized operator in a fixed angular sector:
/// -Delta phi = (tau + sigma) V [phi], normalized <phi, phi>_{H^1_0} = 1.
/// mu = tau / (tau + sigma) is the compact-operator eigenvalue (0 at
/// lambda = 0 where the parametrization degenerates). weighted_mean is
/// identically 0 for sectors l >= 1.
struct EigenPair {
    int sector = 0;
    double sigma = 0.0;
    double mu = 0.0;
    GridFunction phi;
    double weighted_mean = 0.0;
    double residual = 0.0;
};

struct EigOptions {
    int max_sweeps = 500;
    double tol = 1e-10;          // relative Ritz residual target
    int dense_threshold = 700;   // below this many unknowns solve densely
    bool force_dense = false;
    bool force_iterative = false;
};

/// k lowest-sigma eigenpairs of the sector-l problem. Production path is
/// blocked power (subspace) iteration on the compact operator with H^1_0
/// orthogonalization; small problems and the lambda = 0 limit use a dense
/// symmetric generalized eigensolve.
std::vector<EigenPair> sector_eigs(const RadialGrid& grid, const ProblemParams& params,
                                   const BranchPoint& point, int sector, int k,
                                   const EigOptions& opts = {});

/// Plain Dirichlet eigenvalues of the sector-l Laplacian (no weight, no
/// deflation); the lambda = 0, l >= 1 limit and the Rayleigh cross-check.
std::vector<double> dirichlet_eigs(const RadialGrid& grid, int sector, int k,
                                   const EigOptions& opts = {});

struct Sigma1Result {
    double sigma1 = 0.0;
    int sector = 0;
    std::vector<double> per_sector;  // minimum sigma per sector 0..l_max
    bool sector_monotone = true;     // min sigma nondecreasing over l >= 1
};

/// Minimum sigma over sectors 0..l_max; flags a violation of the
/// centrifugal monotonicity that justifies truncating at l_max.
Sigma1Result sigma1(const RadialGrid& grid, const ProblemParams& params, const BranchPoint& point,
                    int l_max, const EigOptions& opts = {});

/// Explicit kernel candidate of the compact operator for alpha < 0:
/// constant on the plasma region, harmonic in the vacuum annulus.
struct KernelReport {
    bool kernel_expected = false;  // alpha < 0
    double r_plus = 0.0;
    double weighted_mean = 0.0;        // <phi0>, equals the plateau constant
    double plateau_deviation = 0.0;    // sup |[phi0]| over the plasma nodes
    double v_bracket_norm = 0.0;       // || V [phi0] ||_w
    double t_image_h10 = 0.0;          // || T phi0 ||_{H^1_0}
};

KernelReport kernel_check(const RadialGrid& grid, const ProblemParams& params,
                          const BranchPoint& point);

/// Residual of the radial eigenpair identity
/// <phi>/m = (lambda (p-1) + sigma) <psi [phi]> and the associated sign
/// condition sign <[phi] psi> = sign <phi>.
struct IdentityCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;   // relative
    bool sign_applicable = false;
    bool sign_ok = true;
};

IdentityCheck eigen_identity_check(const RadialGrid& grid, const ProblemParams& params,
                                   const BranchPoint& point, const EigenPair& pair);

/// Radial eigenbasis coefficients of psi_test by the two equivalent
/// formulas (H^1_0 product vs weighted integral), plus the truncated
/// H^1_0 reconstruction errors.
struct EigenbasisProjection {
    std::vector<double> beta_h10;
    std::vector<double> beta_weighted;
    std::vector<double> reconstruction_error;
};

EigenbasisProjection project_eigenbasis(const RadialGrid& grid, const ProblemParams& params,
                                        const BranchPoint& point, const GridFunction& psi_test,
                                        int k, const EigOptions& opts = {});

/// Everything the spectrum subcommand reports for one branch point.
struct SpectrumReport {
    std::vector<std::vector<EigenPair>> sectors;  // l = 0..l_max, k pairs each
    Sigma1Result sig1;
    KernelReport kernel;
    std::vector<IdentityCheck> radial_identities;
};

SpectrumReport spectrum_report(const RadialGrid& grid, const ProblemParams& params,
                               const BranchPoint& point, int l_max, int k,
                               const EigOptions& opts = {});

} // namespace pfb

#pragma once

#include "pfb/branch.hpp"
#include "pfb/grid.hpp"
#include "pfb/params.hpp"

#include <vector>

namespace pfb {

/// Radial profile of the positive solution of -Delta u = u^p on the
/// unit-radius ball, rescaled so the first zero sits exactly at r = 1,
/// sampled on its own fine grid. integral_p = int_{B_1} u^p.
struct EmdenProfile {
    int dimension = 0;
    double exponent = 0.0;
    std::vector<double> radii;   // uniform on [0, 1]
    std::vector<double> values;
    double integral_p = 0.0;
    double center_value = 0.0;
    double first_zero = 0.0;     // zero of the unnormalized shot, diagnostic

    /// Linear interpolation; zero outside [0, 1].
    double value_at(double r) const;
};

/// Raw radial shot u'' + (N-1)/r u' + u^s = 0 from u(0) = center,
/// u'(0) = 0, stopped at the first zero crossing. Exposed because the
/// Sobolev module reuses the integrator with exponent s = t - 1.
struct ShotProfile {
    double zero = 0.0;              // first zero location
    std::vector<double> radii;      // uniform on [0, zero]
    std::vector<double> values;
};

ShotProfile shoot_radial(int dimension, double exponent_s, double center, double tol,
                         double r_max = 50.0);

struct EmdenOptions {
    double center = 1.0;    // shooting height before rescaling
    double r_max = 50.0;
    int profile_points = 16384;
};

/// Shooting solve of the Emden problem with adaptive Dormand-Prince
/// integration and a series start at the coordinate singularity; the shot
/// is rescaled by the Emden scaling u_a(r) = a u(a^((p-1)/2) r) so the
/// first zero lands at r = 1. Throws EmdenNoZero if no sign change occurs
/// before r_max.
EmdenProfile solve_emden(const ProblemParams& params, double tol, const EmdenOptions& opts = {});

/// lambda_plus(D_N, p) = I_p^(1 - 1/p) * R^(-(N/p)(1 - p/p_N)).
double lambda_plus_formula(const ProblemParams& params, double integral_p, double radius);

/// Transplants the profile onto the unit-volume ball and normalizes it
/// into a boundary branch point: alpha = 0, lambda^(p/(p-1)) = int u^p,
/// psi = lambda^(-p/(p-1)) u.
BranchPoint emden_to_branch_point(const EmdenProfile& profile, const RadialGrid& grid);

} // namespace pfb

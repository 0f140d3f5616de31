// Test-only oracles, independent of the library's solver paths:
// a fixed-step classic RK4 shooter for the radial Emden equation and a
// few frozen reference constants.
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

// first zeros of the Bessel functions J_0, J_1 (radial / first-sector
// Dirichlet data on the disc)
inline constexpr double kBesselJ0Zero1 = 2.4048255576957728;
inline constexpr double kBesselJ1Zero1 = 3.8317059702075123;
// first positive root of tan x = x: the order-3/2 zero entering the
// N = 3 deflated radial spectrum
inline constexpr double kBesselJ32Zero1 = 4.493409457909064;

struct Shot {
    double zero = 0.0;
    std::vector<double> r;
    std::vector<double> u;
};

// u'' + (N-1)/r u' + [u]_+^s = 0, u(0) = a, u'(0) = 0. Plain RK4 with a
// fixed step and a quartic series start; bisection on RK4 substeps for
// the zero. Entirely separate from the adaptive production integrator.
inline Shot rk4_shoot(int N, double s, double a = 1.0, double h = 2e-5, double r_max = 50.0) {
    auto f = [&](double r, double u, double v, double& du, double& dv) {
        du = v;
        dv = -(N - 1) / r * v - (u > 0.0 ? std::pow(u, s) : 0.0);
    };
    const double r0 = 1e-4;
    double u = a - std::pow(a, s) * r0 * r0 / (2.0 * N) +
               s * std::pow(a, 2.0 * s - 1.0) * std::pow(r0, 4) / (8.0 * N * (N + 2));
    double v = -std::pow(a, s) * r0 / N +
               s * std::pow(a, 2.0 * s - 1.0) * std::pow(r0, 3) / (2.0 * N * (N + 2));
    double r = r0;

    Shot shot;
    shot.r.push_back(0.0);
    shot.u.push_back(a);
    auto rk4_step = [&](double rr, double uu, double vv, double hh, double& uo, double& vo) {
        double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
        f(rr, uu, vv, k1u, k1v);
        f(rr + hh / 2, uu + hh / 2 * k1u, vv + hh / 2 * k1v, k2u, k2v);
        f(rr + hh / 2, uu + hh / 2 * k2u, vv + hh / 2 * k2v, k3u, k3v);
        f(rr + hh, uu + hh * k3u, vv + hh * k3v, k4u, k4v);
        uo = uu + hh / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
        vo = vv + hh / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    };
    while (r < r_max) {
        double un, vn;
        rk4_step(r, u, v, h, un, vn);
        if (un <= 0.0) {
            double lo = r, hi = r + h;
            double ulo = u, vlo = v;
            for (int it = 0; it < 100 && hi - lo > 1e-15 * hi; ++it) {
                const double hm = 0.5 * (hi - lo);
                double um, vm;
                rk4_step(lo, ulo, vlo, hm, um, vm);
                if (um > 0.0) {
                    lo += hm;
                    ulo = um;
                    vlo = vm;
                } else {
                    hi = lo + hm;
                }
            }
            shot.zero = 0.5 * (lo + hi);
            shot.r.push_back(shot.zero);
            shot.u.push_back(0.0);
            return shot;
        }
        r += h;
        u = un;
        v = vn;
        shot.r.push_back(r);
        shot.u.push_back(u);
    }
    return shot;  // zero = 0: no crossing (callers assert)
}

// I_p = int_{B_1} u0^p after rescaling the shot so its zero lands at 1;
// trapezoid on the RK4 samples
inline double rk4_integral_p(int N, double p, double a = 1.0, double h = 2e-5) {
    const Shot shot = rk4_shoot(N, p, a, h);
    const double z = shot.zero;
    const double beta = std::pow(z, 2.0 / (p - 1.0));
    const double pi = 3.14159265358979323846;
    const double omega = std::pow(pi, N / 2.0) / std::tgamma(N / 2.0 + 1.0);
    double acc = 0.0;
    for (std::size_t i = 1; i + 1 < shot.r.size(); ++i) {
        const double x0 = shot.r[i - 1] / z, x1 = shot.r[i] / z;
        const double f0 = std::pow(beta * shot.u[i - 1], p) * std::pow(x0, N - 1);
        const double f1 = std::pow(beta * shot.u[i], p) * std::pow(x1, N - 1);
        acc += 0.5 * (f0 + f1) * (x1 - x0);
    }
    // closing panel to the zero
    const std::size_t n = shot.r.size();
    const double x0 = shot.r[n - 2] / z;
    acc += 0.5 * std::pow(beta * shot.u[n - 2], p) * std::pow(x0, N - 1) * (1.0 - x0);
    return N * omega * acc;
}

} // namespace oracle

#include "pfb/emden.hpp"

#include "pfb/errors.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>

namespace pfb {

namespace {

using State = std::array<double, 2>;

inline double pos_pow(double u, double s) {
    if (u <= 0.0) return 0.0;
    return s == 0.0 ? 1.0 : std::pow(u, s);
}

struct RadialOde {
    int N;
    double s;
    void operator()(const State& y, State& dy, double r) const {
        dy[0] = y[1];
        dy[1] = -(N - 1) / r * y[1] - pos_pow(y[0], s);
    }
};

// series start: u(r) = a - a^s r^2/(2N) + s a^(2s-1) r^4 / (8N(N+2))
State series_state(int N, double s, double a, double r) {
    const double c2 = pos_pow(a, s) / (2.0 * N);
    const double c4 = s * pos_pow(a, 2.0 * s - 1.0) / (8.0 * N * (N + 2));
    State y;
    y[0] = a - c2 * r * r + c4 * r * r * r * r;
    y[1] = -2.0 * c2 * r + 4.0 * c4 * r * r * r;
    return y;
}

template <typename Stepper>
double locate_zero(Stepper& stepper, const RadialOde& rhs, double r_max) {
    while (stepper.current_time() < r_max) {
        stepper.do_step(rhs);
        if (stepper.current_state()[0] <= 0.0) {
            double lo = stepper.previous_time(), hi = stepper.current_time();
            State y;
            for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                stepper.calc_state(mid, y);
                (y[0] > 0.0 ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
    }
    return -1.0;
}

} // namespace

ShotProfile shoot_radial(int dimension, double exponent_s, double center, double tol,
                         double r_max) {
    namespace ode = boost::numeric::odeint;
    const double r0 = 1e-4;
    RadialOde rhs{dimension, exponent_s};

    // run the stepper two decades below the requested tolerance so the
    // delivered profile (and I_p) track `tol` with margin
    const double step_tol = std::max(1e-2 * tol, 1e-14);
    auto stepper = ode::make_dense_output(step_tol, step_tol, ode::runge_kutta_dopri5<State>());
    stepper.initialize(series_state(dimension, exponent_s, center, r0), r0, 1e-4);
    const double zero = locate_zero(stepper, rhs, r_max);
    if (zero < 0.0) throw EmdenNoZero(dimension, exponent_s, r_max);

    // second pass: emit uniform samples on [0, zero] from the dense
    // interpolant of the step currently in flight
    const int F = 16384;
    ShotProfile shot;
    shot.zero = zero;
    shot.radii.resize(F + 1);
    shot.values.resize(F + 1);
    for (int i = 0; i <= F; ++i) shot.radii[i] = zero * i / F;

    stepper.initialize(series_state(dimension, exponent_s, center, r0), r0, 1e-4);
    int i = 0;
    for (; i <= F && shot.radii[i] < r0; ++i)
        shot.values[i] = series_state(dimension, exponent_s, center, shot.radii[i])[0];
    State y;
    while (i <= F) {
        if (shot.radii[i] <= stepper.current_time()) {
            stepper.calc_state(shot.radii[i], y);
            shot.values[i] = std::max(y[0], 0.0);
            ++i;
        } else {
            stepper.do_step(rhs);
        }
    }
    shot.values[F] = 0.0;
    shot.values[0] = center;
    return shot;
}

double EmdenProfile::value_at(double r) const {
    if (r <= 0.0) return values.front();
    if (r >= 1.0) return 0.0;
    const double x = r * (values.size() - 1);
    const std::size_t i = static_cast<std::size_t>(x);
    const double t = x - i;
    return (1.0 - t) * values[i] + t * values[i + 1];
}

EmdenProfile solve_emden(const ProblemParams& params, double tol, const EmdenOptions& opts) {
    const int N = params.dimension;
    const double p = params.exponent;
    ShotProfile shot = shoot_radial(N, p, opts.center, tol, opts.r_max);

    // u0(x) = z^(2/(p-1)) u(z x): moves the first zero to x = 1
    const double beta = std::pow(shot.zero, 2.0 / (p - 1.0));
    EmdenProfile prof;
    prof.dimension = N;
    prof.exponent = p;
    prof.first_zero = shot.zero;
    const int F = static_cast<int>(shot.values.size()) - 1;
    prof.radii.resize(F + 1);
    prof.values.resize(F + 1);
    for (int i = 0; i <= F; ++i) {
        prof.radii[i] = static_cast<double>(i) / F;
        prof.values[i] = beta * shot.values[i];
    }
    prof.center_value = prof.values[0];

    // I_p = N omega_N int_0^1 u0^p x^(N-1) dx, composite Simpson
    const double omega = unit_ball_volume(N);
    double acc = 0.0;
    auto g = [&](int k) { return std::pow(prof.values[k], p) * std::pow(prof.radii[k], N - 1); };
    for (int k = 0; k < F; k += 2) acc += g(k) + 4.0 * g(k + 1) + g(k + 2);
    prof.integral_p = N * omega * acc / (3.0 * F);
    return prof;
}

double lambda_plus_formula(const ProblemParams& params, double integral_p, double radius) {
    if (!(integral_p > 0.0) || !(radius > 0.0))
        throw std::invalid_argument("lambda_plus_formula: I_p and R must be positive");
    const double p = params.exponent;
    const double N = params.dimension;
    const double ratio = params.dimension == 2 ? 0.0 : p / params.critical_exponent();
    const double expo = -(N / p) * (1.0 - ratio);
    return std::pow(integral_p, 1.0 - 1.0 / p) * std::pow(radius, expo);
}

BranchPoint emden_to_branch_point(const EmdenProfile& profile, const RadialGrid& grid) {
    if (profile.dimension != grid.dimension)
        throw std::invalid_argument("emden_to_branch_point: dimension mismatch");
    const double p = profile.exponent;
    const double R = grid.radius;
    const double scale = std::pow(R, -2.0 / (p - 1.0));

    // u(x) = R^(-2/(p-1)) u0(x/R) solves the same equation on the
    // unit-volume ball
    GridFunction u(grid.nodes.size());
    GridFunction up(grid.nodes.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = scale * profile.value_at(grid.nodes[i] / R);
        up[i] = std::pow(u[i], p);
    }
    const double mass = integrate(grid, up);
    const double lambda = std::pow(mass, (p - 1.0) / p);
    const double inv = std::pow(lambda, -p / (p - 1.0));

    BranchPoint pt;
    pt.lambda = lambda;
    pt.alpha = 0.0;
    pt.psi.resize(u.size());
    pt.rho.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        pt.psi[i] = inv * u[i];
        const double v = lambda * pt.psi[i];
        pt.rho[i] = std::pow(v > 0.0 ? v : 0.0, p);
    }
    pt.energy = 0.5 * h10_inner(grid, pt.psi, pt.psi);
    pt.energy_dual = 0.5 * weighted_inner(grid, pt.rho, pt.psi);

    SectorOperator op0 = sector_operator(grid, 0);
    auto [phi1, phi2] =
        residual(grid, op0, ProblemParams(profile.dimension, p), lambda, 0.0, pt.psi);
    double s = 0.0;
    for (int i = 0; i < grid.segments(); ++i) s += grid.weights[i] * phi2[i] * phi2[i];
    pt.residual_norm = std::max(std::abs(phi1), std::sqrt(s));
    return pt;
}

} // namespace pfb

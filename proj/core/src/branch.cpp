#include "pfb/branch.hpp"

#include "pfb/errors.hpp"
#include "pfb/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pfb {

namespace {

inline double pos(double x) { return x > 0.0 ? x : 0.0; }

GridFunction density(const ProblemParams& params, double lambda, double alpha,
                     const GridFunction& psi) {
    GridFunction rho(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i)
        rho[i] = std::pow(pos(alpha + lambda * psi[i]), params.exponent);
    return rho;
}

GridFunction linear_weight(const ProblemParams& params, double lambda, double alpha,
                           const GridFunction& psi) {
    GridFunction V(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i)
        V[i] = std::pow(pos(alpha + lambda * psi[i]), params.exponent - 1.0);
    return V;
}

double field_norm(const RadialGrid& grid, const SectorOperator& op0, const GridFunction& f) {
    double s = 0.0;
    const int M = grid.segments();
    for (int i = op0.first; i < M; ++i) s += grid.weights[i] * f[i] * f[i];
    return std::sqrt(s);
}

// Bordered linear solve in stiffness form:
//   [B  b][phi]   [rf]        B = K0 - tau diag(w V)   (n x n tridiagonal)
//   [c' d][ s ] = [rs]        b = -p (w V), c = p lambda (w V), d = p m
// Solved by block elimination with one step of iterative refinement on the
// full bordered residual.
struct Bordered {
    const RadialGrid& grid;
    const SectorOperator& op0;
    std::vector<double> Bd, Bs;   // shifted tridiagonal
    std::vector<double> bcol, crow;
    double dscal;
    tridiag::Plu lu;
    double lambda;

    Bordered(const RadialGrid& g, const SectorOperator& op, const ProblemParams& params,
             double lam, const GridFunction& V)
        : grid(g), op0(op), lambda(lam) {
        const int n = op.unknowns();
        const double tau = lam * params.exponent;
        Bd.resize(n);
        Bs.assign(op.sub.begin(), op.sub.end());
        bcol.resize(n);
        crow.resize(n);
        double m = 0.0;
        for (std::size_t i = 0; i < V.size(); ++i) m += g.weights[i] * V[i];
        for (int k = 0; k < n; ++k) {
            const int i = op.first + k;
            const double wv = g.weights[i] * V[i];
            Bd[k] = op.diag[k] - tau * wv;
            bcol[k] = -params.exponent * wv;
            crow[k] = lam * params.exponent * wv;
        }
        dscal = params.exponent * m;
        lu = tridiag::factor_general(Bd, Bs, Bs);
        if (lu.singular) throw SingularJacobian(lam);
    }

    void mult(const std::vector<double>& x, double s, std::vector<double>& out_f,
              double& out_s) const {
        const int n = static_cast<int>(Bd.size());
        tridiag::sym_mult(Bd, Bs, x, out_f);
        out_s = dscal * s;
        for (int k = 0; k < n; ++k) {
            out_f[k] += bcol[k] * s;
            out_s += crow[k] * x[k];
        }
    }

    // solve for (phi, s) given the right-hand side (rf, rs); inputs untouched
    void solve(const std::vector<double>& rf, double rs, std::vector<double>& phi,
               double& s) const {
        const int n = static_cast<int>(Bd.size());
        std::vector<double> x = rf;
        tridiag::solve_in_place(lu, x);
        std::vector<double> y = bcol;
        for (double& v : y) v = -v;
        tridiag::solve_in_place(lu, y);
        double cx = 0.0, cy = 0.0;
        for (int k = 0; k < n; ++k) {
            cx += crow[k] * x[k];
            cy += crow[k] * y[k];
        }
        const double denom = dscal + cy;
        if (denom == 0.0 || !std::isfinite(denom)) throw SingularJacobian(lambda);
        s = (rs - cx) / denom;
        phi = x;
        for (int k = 0; k < n; ++k) phi[k] += s * y[k];

        // refinement against the bordered residual
        std::vector<double> res_f(n);
        double res_s;
        mult(phi, s, res_f, res_s);
        for (int k = 0; k < n; ++k) res_f[k] = rf[k] - res_f[k];
        res_s = rs - res_s;
        std::vector<double> xc = res_f;
        tridiag::solve_in_place(lu, xc);
        double cxc = 0.0;
        for (int k = 0; k < n; ++k) cxc += crow[k] * xc[k];
        const double sc = (res_s - cxc) / denom;
        s += sc;
        for (int k = 0; k < n; ++k) phi[k] += xc[k] + sc * y[k];
    }
};

struct Evaluated {
    double phi1;
    GridFunction phi2;
    double norm;
};

Evaluated eval_residual(const RadialGrid& grid, const SectorOperator& op0,
                        const ProblemParams& params, double lambda, double alpha,
                        const GridFunction& psi) {
    Evaluated ev;
    const GridFunction rho = density(params, lambda, alpha, psi);
    ev.phi1 = -1.0 + integrate(grid, rho);
    ev.phi2 = sector_apply(grid, op0, psi);
    const int M = grid.segments();
    for (int i = op0.first; i < M; ++i) ev.phi2[i] -= rho[i];
    ev.norm = std::max(std::abs(ev.phi1), field_norm(grid, op0, ev.phi2));
    return ev;
}

} // namespace

std::pair<double, GridFunction> residual(const RadialGrid& grid, const SectorOperator& op0,
                                         const ProblemParams& params, double lambda,
                                         double alpha, const GridFunction& psi) {
    Evaluated ev = eval_residual(grid, op0, params, lambda, alpha, psi);
    return {ev.phi1, std::move(ev.phi2)};
}

std::pair<double, GridFunction> jacobian_apply(const RadialGrid& grid, const SectorOperator& op0,
                                               const ProblemParams& params,
                                               const BranchPoint& point, double s,
                                               const GridFunction& phi) {
    const GridFunction V = linear_weight(params, point.lambda, point.alpha, point.psi);
    const double p = params.exponent;
    double d1 = 0.0;
    for (std::size_t i = 0; i < V.size(); ++i)
        d1 += grid.weights[i] * V[i] * (s + point.lambda * phi[i]);
    d1 *= p;
    GridFunction d2 = sector_apply(grid, op0, phi);
    const int M = grid.segments();
    for (int i = op0.first; i < M; ++i) d2[i] -= p * V[i] * (s + point.lambda * phi[i]);
    return {d1, std::move(d2)};
}

BranchPoint torsion_anchor(const RadialGrid& grid, const SectorOperator& op0,
                           const ProblemParams& params) {
    // mass weight is not exactly 1 on the grid; pick alpha so the discrete
    // constraint holds exactly
    const double total = integrate(grid, GridFunction(grid.nodes.size(), 1.0));
    const double alpha = std::pow(total, -1.0 / params.exponent);
    const double rho0 = std::pow(alpha, params.exponent);
    GridFunction rhs(grid.nodes.size(), rho0);
    GridFunction psi = green_solve(grid, op0, rhs);

    BranchPoint pt;
    pt.lambda = 0.0;
    pt.alpha = alpha;
    pt.psi = std::move(psi);
    pt.rho = density(params, 0.0, alpha, pt.psi);
    pt.energy = 0.5 * h10_inner(grid, pt.psi, pt.psi);
    pt.energy_dual = 0.5 * weighted_inner(grid, pt.rho, pt.psi);
    pt.residual_norm = eval_residual(grid, op0, params, 0.0, alpha, pt.psi).norm;
    return pt;
}

BranchPoint newton_solve(const RadialGrid& grid, const SectorOperator& op0,
                         const ProblemParams& params, double lambda, double alpha0,
                         const GridFunction& psi0, const NewtonOptions& opts) {
    const int M = grid.segments();
    const int n = op0.unknowns();
    double alpha = alpha0;
    GridFunction psi = psi0;

    Evaluated ev = eval_residual(grid, op0, params, lambda, alpha, psi);
    double merit = 0.5 * ev.norm * ev.norm;

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        if (ev.norm <= opts.tolerance) break;
        if (!std::isfinite(ev.norm)) throw NewtonDivergence(lambda, iter, ev.norm);

        const GridFunction V = linear_weight(params, lambda, alpha, psi);
        Bordered sys(grid, op0, params, lambda, V);

        // right-hand side is -Phi in stiffness form
        std::vector<double> rf(n);
        for (int k = 0; k < n; ++k) {
            const int i = op0.first + k;
            rf[k] = -grid.weights[i] * ev.phi2[i];
        }
        std::vector<double> dpsi;
        double dalpha;
        sys.solve(rf, -ev.phi1, dpsi, dalpha);

        double step = 1.0;
        bool accepted = false;
        for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
            const double a_try = alpha + step * dalpha;
            GridFunction psi_try = psi;
            for (int k = 0; k < n; ++k) psi_try[op0.first + k] += step * dpsi[k];
            Evaluated ev_try = eval_residual(grid, op0, params, lambda, a_try, psi_try);
            const double merit_try = 0.5 * ev_try.norm * ev_try.norm;
            if (std::isfinite(merit_try) && merit_try <= (1.0 - 1e-4 * step) * merit) {
                alpha = a_try;
                psi = std::move(psi_try);
                ev = std::move(ev_try);
                merit = merit_try;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (ev.norm <= 10.0 * opts.tolerance) break;  // stalled at the rounding floor
            throw NewtonDivergence(lambda, iter, ev.norm);
        }
    }
    if (ev.norm > 10.0 * opts.tolerance)
        throw NewtonDivergence(lambda, opts.max_iterations, ev.norm);

    BranchPoint pt;
    pt.lambda = lambda;
    pt.alpha = alpha;
    pt.psi = std::move(psi);
    pt.rho = density(params, lambda, alpha, pt.psi);
    pt.energy = 0.5 * h10_inner(grid, pt.psi, pt.psi);
    pt.energy_dual = 0.5 * weighted_inner(grid, pt.rho, pt.psi);
    pt.residual_norm = ev.norm;
    (void)M;
    return pt;
}

BranchTangent tangent(const RadialGrid& grid, const SectorOperator& op0,
                      const ProblemParams& params, const BranchPoint& point) {
    const int n = op0.unknowns();
    const double p = params.exponent;
    const GridFunction V = linear_weight(params, point.lambda, point.alpha, point.psi);
    Bordered sys(grid, op0, params, point.lambda, V);

    // -d(Phi)/dlambda: scalar -p int V psi, field +p V psi (stiffness form)
    std::vector<double> rf(n);
    double rs = 0.0;
    for (std::size_t i = 0; i < V.size(); ++i) rs += grid.weights[i] * V[i] * point.psi[i];
    rs *= -p;
    for (int k = 0; k < n; ++k) {
        const int i = op0.first + k;
        rf[k] = p * grid.weights[i] * V[i] * point.psi[i];
    }

    std::vector<double> dpsi_u;
    double dalpha;
    sys.solve(rf, rs, dpsi_u, dalpha);

    BranchTangent t;
    t.dalpha = dalpha;
    t.dpsi.assign(point.psi.size(), 0.0);
    for (int k = 0; k < n; ++k) t.dpsi[op0.first + k] = dpsi_u[k];
    t.denergy = h10_inner(grid, point.psi, t.dpsi);

    double m = 0.0, mp = 0.0, md = 0.0;
    for (std::size_t i = 0; i < V.size(); ++i) {
        m += grid.weights[i] * V[i];
        mp += grid.weights[i] * V[i] * point.psi[i];
        md += grid.weights[i] * V[i] * t.dpsi[i];
    }
    t.identity_gap = std::abs(dalpha + mp / m + point.lambda * md / m);
    return t;
}

double energy(const RadialGrid& grid, const BranchPoint& point) {
    return 0.5 * h10_inner(grid, point.psi, point.psi);
}

// Newton with tangent-predicted start; halves the continuation step on
// divergence, marching through intermediate lambdas.
BranchPoint continue_to(const RadialGrid& grid, const SectorOperator& op0,
                        const ProblemParams& params, const BranchPoint& from, double lambda,
                        const SweepOptions& opts) {
    BranchPoint base = from;
    double target = lambda;
    int halvings = 0;
    while (true) {
        const double step = target - base.lambda;
        double a0 = base.alpha;
        GridFunction psi0 = base.psi;
        if (std::abs(step) > 0.0) {
            BranchTangent t = tangent(grid, op0, params, base);
            a0 += step * t.dalpha;
            for (std::size_t i = 0; i < psi0.size(); ++i) psi0[i] += step * t.dpsi[i];
        }
        try {
            BranchPoint next = newton_solve(grid, op0, params, target, a0, psi0, opts.newton);
            if (target == lambda) return next;
            base = std::move(next);
            target = lambda;
        } catch (const SolverError&) {
            if (++halvings > opts.max_halvings) throw;
            target = base.lambda + 0.5 * (target - base.lambda);
        }
    }
}

SweepTrace sweep(const RadialGrid& grid, const SectorOperator& op0, const ProblemParams& params,
                 const std::vector<double>& lambda_values, const SweepOptions& opts) {
    if (lambda_values.empty() || lambda_values.front() != 0.0)
        throw std::invalid_argument("sweep: lambda values must start at 0");
    for (std::size_t i = 1; i < lambda_values.size(); ++i)
        if (!(lambda_values[i] > lambda_values[i - 1]))
            throw std::invalid_argument("sweep: lambda values must be strictly increasing");

    SweepTrace trace;
    trace.points.reserve(lambda_values.size());
    BranchPoint pt = torsion_anchor(grid, op0, params);
    pt = newton_solve(grid, op0, params, 0.0, pt.alpha, pt.psi, opts.newton);
    trace.points.push_back(pt);
    trace.dalpha.push_back(tangent(grid, op0, params, pt).dalpha);

    for (std::size_t i = 1; i < lambda_values.size(); ++i) {
        pt = continue_to(grid, op0, params, trace.points.back(), lambda_values[i], opts);
        trace.points.push_back(pt);
        trace.dalpha.push_back(tangent(grid, op0, params, pt).dalpha);
    }

    const std::size_t npts = trace.points.size();
    trace.sigma1.assign(npts, std::numeric_limits<double>::quiet_NaN());
    trace.sigma1_sector.assign(npts, -1);
    trace.alpha_decreasing = true;
    trace.energy_increasing = true;
    for (std::size_t i = 1; i < npts; ++i) {
        if (!(trace.points[i].alpha < trace.points[i - 1].alpha)) trace.alpha_decreasing = false;
        if (!(trace.points[i].energy > trace.points[i - 1].energy)) trace.energy_increasing = false;
    }

    // refine the alpha zero crossing by a secant on warm-started solves
    for (std::size_t i = 1; i < npts; ++i) {
        if (trace.points[i - 1].alpha > 0.0 && trace.points[i].alpha <= 0.0) {
            double lo = trace.points[i - 1].lambda, hi = trace.points[i].lambda;
            double flo = trace.points[i - 1].alpha, fhi = trace.points[i].alpha;
            BranchPoint warm = trace.points[i - 1];
            for (int it = 0; it < 80; ++it) {
                double mid = hi - fhi * (hi - lo) / (fhi - flo);
                if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
                warm = continue_to(grid, op0, params, warm, mid, opts);
                if (std::abs(warm.alpha) <= opts.crossing_alpha_tol) break;
                if (warm.alpha > 0.0) {
                    lo = mid;
                    flo = warm.alpha;
                } else {
                    hi = mid;
                    fhi = warm.alpha;
                }
            }
            trace.lambda_plus = warm.lambda;
            break;
        }
    }
    return trace;
}

double find_lambda_plus(const RadialGrid& grid, const SectorOperator& op0,
                        const ProblemParams& params, const SweepOptions& opts) {
    BranchPoint pt = torsion_anchor(grid, op0, params);
    pt = newton_solve(grid, op0, params, 0.0, pt.alpha, pt.psi, opts.newton);

    // march with growing steps until alpha turns negative
    double step = 1.0;
    BranchPoint below = pt;
    BranchPoint above;
    bool bracketed = false;
    for (int it = 0; it < 200 && !bracketed; ++it) {
        BranchPoint next = continue_to(grid, op0, params, pt, pt.lambda + step, opts);
        if (next.alpha <= 0.0) {
            above = next;
            bracketed = true;
        } else {
            below = next;
            pt = std::move(next);
            step *= 1.5;
        }
    }
    if (!bracketed) throw SolverError("find_lambda_plus: no sign change located");

    double lo = below.lambda, hi = above.lambda;
    double flo = below.alpha, fhi = above.alpha;
    BranchPoint warm = below;
    for (int it = 0; it < 100; ++it) {
        double mid = hi - fhi * (hi - lo) / (fhi - flo);
        if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
        warm = continue_to(grid, op0, params, warm, mid, opts);
        if (std::abs(warm.alpha) <= opts.crossing_alpha_tol) return warm.lambda;
        if (warm.alpha > 0.0) {
            lo = mid;
            flo = warm.alpha;
        } else {
            hi = mid;
            fhi = warm.alpha;
        }
    }
    throw SolverError("find_lambda_plus: secant failed to reach alpha tolerance");
}

} // namespace pfb

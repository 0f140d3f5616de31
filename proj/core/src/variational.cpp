#include "pfb/variational.hpp"

#include "pfb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace pfb {

namespace {

double entropy_term(const RadialGrid& grid, const ProblemParams& params,
                    const GridFunction& rho) {
    const double ex = 1.0 + 1.0 / params.exponent;
    double s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i)
        s += grid.weights[i] * std::pow(rho[i], ex);
    return s * params.exponent / (params.exponent + 1.0);
}

// gradient of the free energy in the weighted metric: rho^(1/p) - lambda psi
GridFunction fe_gradient(const ProblemParams& params, double lambda, const GridFunction& rho,
                         const GridFunction& psi) {
    GridFunction g(rho.size());
    const double ip = 1.0 / params.exponent;
    for (std::size_t i = 0; i < rho.size(); ++i)
        g[i] = std::pow(rho[i], ip) - lambda * psi[i];
    return g;
}

} // namespace

double free_energy(const RadialGrid& grid, const SectorOperator& op0, const ProblemParams& params,
                   double lambda, const GridFunction& rho) {
    const GridFunction psi = green_solve(grid, op0, rho);
    return entropy_term(grid, params, rho) - 0.5 * lambda * weighted_inner(grid, rho, psi);
}

GridFunction project_simplex(const RadialGrid& grid, const GridFunction& rho) {
    // find xi with sum w [rho - xi]_+ = 1 by bisection; mass is monotone in xi
    double lo = *std::min_element(rho.begin(), rho.end()) - 2.0;
    double hi = *std::max_element(rho.begin(), rho.end());
    auto mass_at = [&](double xi) {
        double s = 0.0;
        for (std::size_t i = 0; i < rho.size(); ++i)
            s += grid.weights[i] * std::max(rho[i] - xi, 0.0);
        return s;
    };
    double xi = 0.5 * (lo + hi);
    for (int it = 0; it < 90 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
        xi = 0.5 * (lo + hi);
        const double m = mass_at(xi);
        if (std::abs(m - 1.0) < 1e-15) break;
        (m > 1.0 ? lo : hi) = xi;
    }
    GridFunction out(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) out[i] = std::max(rho[i] - xi, 0.0);
    // exact simplex membership after every projection step
    const double m = integrate(grid, out);
    if (m > 0.0)
        for (double& v : out) v /= m;
    return out;
}

DensityState minimize_free_energy(const RadialGrid& grid, const SectorOperator& op0,
                                  const ProblemParams& params, double lambda,
                                  const GridFunction& init, const MinimizeOptions& opts) {
    DensityState st;
    st.rho = project_simplex(grid, init);
    st.psi = green_solve(grid, op0, st.rho);
    st.value = entropy_term(grid, params, st.rho) -
               0.5 * lambda * weighted_inner(grid, st.rho, st.psi);

    GridFunction grad = fe_gradient(params, lambda, st.rho, st.psi);
    GridFunction rho_prev, grad_prev;
    double step = 1.0;
    double best_stat = std::numeric_limits<double>::infinity();
    int best_stat_iter = 0;

    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        // unit-step projected displacement as the stationarity measure
        {
            GridFunction probe(st.rho.size());
            for (std::size_t i = 0; i < probe.size(); ++i) probe[i] = st.rho[i] - grad[i];
            probe = project_simplex(grid, probe);
            double s = 0.0;
            for (std::size_t i = 0; i < probe.size(); ++i) {
                const double d = probe[i] - st.rho[i];
                s += grid.weights[i] * d * d;
            }
            st.stationarity = std::sqrt(s);
            if (st.stationarity <= opts.tol) {
                st.converged = true;
                break;
            }
            if (st.stationarity < 0.9 * best_stat) {
                best_stat = st.stationarity;
                best_stat_iter = it;
            } else if (it - best_stat_iter > 2000) {
                break;  // stalled near the free boundary; report as-is
            }
        }

        if (!rho_prev.empty()) {
            // BB step from the last displacement pair, safeguarded
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < st.rho.size(); ++i) {
                const double dr = st.rho[i] - rho_prev[i];
                const double dg = grad[i] - grad_prev[i];
                num += grid.weights[i] * dr * dr;
                den += grid.weights[i] * dr * dg;
            }
            if (den > 1e-300) step = std::clamp(num / den, 1e-8, 1e8);
        }

        GridFunction cand(st.rho.size());
        double value_c = 0.0, dist2 = 0.0;
        GridFunction psi_c;
        bool accepted = false;
        double try_step = step;
        for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
            for (std::size_t i = 0; i < cand.size(); ++i)
                cand[i] = st.rho[i] - try_step * grad[i];
            cand = project_simplex(grid, cand);
            psi_c = green_solve(grid, op0, cand);
            value_c = entropy_term(grid, params, cand) -
                      0.5 * lambda * weighted_inner(grid, cand, psi_c);
            dist2 = 0.0;
            for (std::size_t i = 0; i < cand.size(); ++i) {
                const double d = cand[i] - st.rho[i];
                dist2 += grid.weights[i] * d * d;
            }
            if (value_c <= st.value - opts.armijo_c / std::max(try_step, 1e-300) * dist2) {
                accepted = true;
                break;
            }
            try_step *= 0.5;
        }
        if (!accepted || dist2 == 0.0) break;  // no feasible decrease left

        rho_prev = std::move(st.rho);
        grad_prev = std::move(grad);
        st.rho = std::move(cand);
        st.psi = std::move(psi_c);
        st.value = value_c;
        grad = fe_gradient(params, lambda, st.rho, st.psi);
    }
    st.iterations = it;

    auto [alpha, dev] = recover_alpha(grid, op0, params, lambda, st.rho);
    st.alpha = alpha;
    st.alpha_deviation = dev;
    return st;
}

DensityState minimize_free_energy_multistart(const RadialGrid& grid, const SectorOperator& op0,
                                             const ProblemParams& params, double lambda,
                                             const GridFunction* warm,
                                             const MinimizeOptions& opts) {
    const std::size_t n = grid.nodes.size();
    std::vector<GridFunction> starts;
    starts.emplace_back(n, 1.0);  // uniform
    if (warm) starts.push_back(*warm);
    GridFunction bump(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid.nodes[i] / grid.radius;
        bump[i] = std::exp(-8.0 * x * x);
    }
    starts.push_back(std::move(bump));

    DensityState best;
    bool have = false;
    for (const auto& s0 : starts) {
        DensityState st = minimize_free_energy(grid, op0, params, lambda, s0, opts);
        if (!have || st.value < best.value) {
            best = std::move(st);
            have = true;
        }
    }
    return best;
}

std::pair<double, double> recover_alpha(const RadialGrid& grid, const SectorOperator& op0,
                                        const ProblemParams& params, double lambda,
                                        const GridFunction& rho) {
    const GridFunction psi = green_solve(grid, op0, rho);
    double peak = 0.0;
    for (double v : rho) peak = std::max(peak, v);
    const double threshold = 1e-10 * peak;

    double wsum = 0.0, mean = 0.0;
    const double ip = 1.0 / params.exponent;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (rho[i] <= threshold) continue;
        const double wm = grid.weights[i] * rho[i];  // mass weight
        mean += wm * (std::pow(rho[i], ip) - lambda * psi[i]);
        wsum += wm;
    }
    if (wsum == 0.0) throw SolverError("recover_alpha: empty positivity set");
    mean /= wsum;
    double var = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (rho[i] <= threshold) continue;
        const double d = std::pow(rho[i], ip) - lambda * psi[i] - mean;
        var += grid.weights[i] * rho[i] * d * d;
    }
    return {mean, std::sqrt(var / wsum)};
}

SecondVariation second_variation(const RadialGrid& grid, const SectorOperator& op0,
                                 const PotentialData& pot, const GridFunction& phi) {
    auto [mean, br] = deflate(grid, pot, phi);
    (void)mean;
    GridFunction vbr(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) vbr[i] = pot.V[i] * br[i];
    const GridFunction g = green_solve(grid, op0, vbr);

    SecondVariation sv;
    double quad = 0.0, inter = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        quad += grid.weights[i] * vbr[i] * br[i];
        inter += grid.weights[i] * vbr[i] * g[i];
    }
    sv.value = quad - pot.tau * inter;
    sv.mean_square = quad / pot.mass;
    sv.interaction = pot.tau * inter / pot.mass;
    return sv;
}

GridFunction random_test_function(const RadialGrid& grid, std::uint64_t seed, int modes) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<double> coef(modes);
    for (double& c : coef) c = uni(rng);
    GridFunction f(grid.nodes.size(), 0.0);
    for (std::size_t i = 0; i + 1 < f.size(); ++i) {
        const double x = grid.nodes[i] / grid.radius;
        double v = 0.0;
        for (int j = 0; j < modes; ++j)
            v += coef[j] * std::sin((j + 1) * std::numbers::pi * x) / (j + 1);
        f[i] = v;
    }
    return f;
}

} // namespace pfb

#include "pfb/spectrum.hpp"

#include "pfb/errors.hpp"
#include "pfb/tridiag.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace pfb {

namespace {

inline double pos(double x) { return x > 0.0 ? x : 0.0; }

// Weighted "mass" action of the sector eigenproblem right-hand side on
// the unknown nodes: D phi = (w V) phi - deflated * (w V) <phi>.
struct MassAction {
    std::vector<double> d;    // w_i V_i at unknown nodes
    double mass = 0.0;        // full weighted mass of V (includes r = R node)
    bool deflated = false;

    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        const std::size_t n = d.size();
        if (!deflated) {
            for (std::size_t i = 0; i < n; ++i) y[i] = d[i] * x[i];
            return;
        }
        double dx = 0.0;
        for (std::size_t i = 0; i < n; ++i) dx += d[i] * x[i];
        const double mean = dx / mass;
        for (std::size_t i = 0; i < n; ++i) y[i] = d[i] * (x[i] - mean);
    }
};

MassAction mass_action(const RadialGrid& grid, const SectorOperator& op, const GridFunction& V,
                       double mass, bool deflated) {
    MassAction ma;
    ma.mass = mass;
    ma.deflated = deflated;
    const int n = op.unknowns();
    ma.d.resize(n);
    for (int k = 0; k < n; ++k) ma.d[k] = grid.weights[op.first + k] * V[op.first + k];
    return ma;
}

struct GeneralizedPair {
    double nu;                 // eigenvalue of K phi = nu D phi (smallest first)
    std::vector<double> phi;   // K-normalized: phi' K phi = 1
    double residual;           // || K phi - nu D phi || / || K phi ||
};

double pair_residual(const SectorOperator& op, const MassAction& ma, double nu,
                     const std::vector<double>& phi) {
    const std::size_t n = phi.size();
    std::vector<double> kf(n), df(n);
    tridiag::sym_mult(op.diag, op.sub, phi, kf);
    ma.apply(phi, df);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = kf[i] - nu * df[i];
        num += r * r;
        den += kf[i] * kf[i];
    }
    return std::sqrt(num / std::max(den, 1e-300));
}

// Dense oracle: with K = C C^T (bidiagonal Cholesky from the LDL^T
// factor), the generalized problem becomes S y = theta y with
// S = C^-1 D C^-T and theta = 1/nu; eigenvectors map back K-normalized.
std::vector<GeneralizedPair> dense_eigs(const SectorOperator& op, const MassAction& ma, int k) {
    const int n = op.unknowns();
    Eigen::MatrixXd Dm = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) Dm(i, i) = ma.d[i];
    if (ma.deflated) {
        Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(ma.d.data(), n);
        Dm -= d * d.transpose() / ma.mass;
    }
    std::vector<double> cd(n);  // Cholesky diagonal; off-diagonal = e_i * cd_i
    for (int i = 0; i < n; ++i) cd[i] = std::sqrt(op.factor.d[i]);

    auto forward = [&](Eigen::Ref<Eigen::VectorXd> b) {
        // solve C x = b in place
        b(0) /= cd[0];
        for (int i = 1; i < n; ++i) b(i) = (b(i) - op.factor.e[i - 1] * cd[i - 1] * b(i - 1)) / cd[i];
    };
    auto backward = [&](Eigen::Ref<Eigen::VectorXd> b) {
        // solve C^T x = b in place
        b(n - 1) /= cd[n - 1];
        for (int i = n - 2; i >= 0; --i)
            b(i) = (b(i) - op.factor.e[i] * cd[i] * b(i + 1)) / cd[i];
    };

    Eigen::MatrixXd S = Dm;
    for (int j = 0; j < n; ++j) forward(S.col(j));
    S.transposeInPlace();
    for (int j = 0; j < n; ++j) forward(S.col(j));
    S = 0.5 * (S + S.transpose().eval());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    std::vector<GeneralizedPair> out;
    const double floor_theta = 1e-14 * std::max(es.eigenvalues().maxCoeff(), 1e-300);
    for (int j = n - 1; j >= 0 && static_cast<int>(out.size()) < k; --j) {
        const double theta = es.eigenvalues()(j);
        if (theta <= floor_theta) break;  // nu = infinity: not part of the spectrum
        GeneralizedPair gp;
        gp.nu = 1.0 / theta;
        Eigen::VectorXd y = es.eigenvectors().col(j);
        backward(y);
        gp.phi.assign(y.data(), y.data() + n);
        gp.residual = pair_residual(op, ma, gp.nu, gp.phi);
        out.push_back(std::move(gp));
    }
    return out;
}

// Blocked power iteration on Z = K^-1 D with Rayleigh-Ritz in the
// K-inner product; returns the k smallest nu = 1/theta.
std::vector<GeneralizedPair> iterative_eigs(const SectorOperator& op, const MassAction& ma, int k,
                                            const EigOptions& opts) {
    const int n = op.unknowns();
    const int b = std::min(n, k + 3);
    std::mt19937_64 rng(0x9E3779B97F4A7C15ull ^ static_cast<unsigned long long>(op.sector));
    std::uniform_real_distribution<double> uni(-1.0, 1.0);

    std::vector<std::vector<double>> X(b, std::vector<double>(n));
    for (auto& col : X)
        for (double& v : col) v = uni(rng);

    auto k_inner = [&](const std::vector<double>& f, const std::vector<double>& g) {
        std::vector<double> kf(n);
        tridiag::sym_mult(op.diag, op.sub, f, kf);
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += kf[i] * g[i];
        return s;
    };

    std::vector<double> theta(b, 0.0);
    std::vector<std::vector<double>> Z(b, std::vector<double>(n));
    double worst_res = std::numeric_limits<double>::infinity();
    bool converged = false;

    for (int sweep = 0; sweep < opts.max_sweeps && !converged; ++sweep) {
        // Y = K^-1 (D X)
        for (int j = 0; j < b; ++j) {
            ma.apply(X[j], Z[j]);
            tridiag::solve_in_place(op.factor, Z[j]);
        }
        // K-orthonormalize (modified Gram-Schmidt, one re-pass)
        for (int j = 0; j < b; ++j) {
            for (int rep = 0; rep < 2; ++rep)
                for (int l = 0; l < j; ++l) {
                    const double c = k_inner(Z[j], Z[l]);
                    for (int i = 0; i < n; ++i) Z[j][i] -= c * Z[l][i];
                }
            double nrm = std::sqrt(std::max(k_inner(Z[j], Z[j]), 0.0));
            if (nrm < 1e-150) {
                // block collapsed in this direction: refresh with noise
                for (double& v : Z[j]) v = uni(rng);
                nrm = std::sqrt(std::max(k_inner(Z[j], Z[j]), 1e-300));
            }
            for (double& v : Z[j]) v /= nrm;
        }
        // Rayleigh-Ritz: H_{lj} = <Z_l, D Z_j> (the K-projection of the operator)
        Eigen::MatrixXd H(b, b);
        std::vector<double> dz(n);
        for (int j = 0; j < b; ++j) {
            ma.apply(Z[j], dz);
            for (int l = 0; l < b; ++l) {
                double s = 0.0;
                for (int i = 0; i < n; ++i) s += dz[i] * Z[l][i];
                H(l, j) = s;
            }
        }
        H = 0.5 * (H + H.transpose().eval());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        // rotate, descending theta
        std::vector<std::vector<double>> Xn(b, std::vector<double>(n, 0.0));
        for (int j = 0; j < b; ++j) {
            const int src = b - 1 - j;
            theta[j] = es.eigenvalues()(src);
            for (int l = 0; l < b; ++l) {
                const double c = es.eigenvectors()(l, src);
                for (int i = 0; i < n; ++i) Xn[j][i] += c * Z[l][i];
            }
        }
        X.swap(Xn);

        if (sweep >= 2) {
            worst_res = 0.0;
            for (int j = 0; j < k && worst_res < 1e30; ++j) {
                if (!(theta[j] > 0.0)) {
                    worst_res = 1e30;  // block not yet aligned with positive spectrum
                    break;
                }
                worst_res = std::max(worst_res, pair_residual(op, ma, 1.0 / theta[j], X[j]));
            }
            converged = worst_res <= opts.tol;
        }
    }
    if (!converged) throw EigenNotConverged(op.sector, opts.max_sweeps, worst_res);

    std::vector<GeneralizedPair> out;
    for (int j = 0; j < k; ++j) {
        if (!(theta[j] > 0.0)) break;
        GeneralizedPair gp;
        gp.nu = 1.0 / theta[j];
        gp.phi = X[j];
        gp.residual = pair_residual(op, ma, gp.nu, gp.phi);
        out.push_back(std::move(gp));
    }
    return out;
}

std::vector<GeneralizedPair> generalized_eigs(const SectorOperator& op, const MassAction& ma,
                                              int k, const EigOptions& opts) {
    const bool dense = opts.force_dense ||
                       (!opts.force_iterative && op.unknowns() <= opts.dense_threshold);
    std::vector<GeneralizedPair> pairs =
        dense ? dense_eigs(op, ma, k) : iterative_eigs(op, ma, k, opts);
    // deterministic sign: largest-magnitude entry positive
    for (auto& gp : pairs) {
        double mx = 0.0;
        for (double v : gp.phi) mx = std::abs(v) > std::abs(mx) ? v : mx;
        if (mx < 0.0)
            for (double& v : gp.phi) v = -v;
    }
    return pairs;
}

GridFunction embed(const RadialGrid& grid, const SectorOperator& op,
                   const std::vector<double>& u) {
    GridFunction f(grid.nodes.size(), 0.0);
    for (int k = 0; k < op.unknowns(); ++k) f[op.first + k] = u[k];
    return f;
}

} // namespace

PotentialData potential(const RadialGrid& grid, const ProblemParams& params,
                        const BranchPoint& point) {
    PotentialData pot;
    pot.tau = point.lambda * params.exponent;
    pot.V.resize(point.psi.size());
    for (std::size_t i = 0; i < point.psi.size(); ++i)
        pot.V[i] = std::pow(pos(point.alpha + point.lambda * point.psi[i]),
                            params.exponent - 1.0);
    pot.mass = integrate(grid, pot.V);

    if (point.alpha >= 0.0) {
        pot.r_plus = grid.radius;
    } else {
        // alpha + lambda psi decreases through zero; linear interpolation
        // between the last positive node and its neighbor
        const int M = grid.segments();
        int j = -1;
        for (int i = M; i >= 0; --i) {
            if (point.alpha + point.lambda * point.psi[i] > 0.0) {
                j = i;
                break;
            }
        }
        if (j < 0) {
            pot.r_plus = 0.0;
        } else if (j == M) {
            pot.r_plus = grid.radius;
        } else {
            const double gj = point.alpha + point.lambda * point.psi[j];
            const double gj1 = point.alpha + point.lambda * point.psi[j + 1];
            pot.r_plus = grid.nodes[j] + grid.spacing * gj / (gj - gj1);
        }
    }
    return pot;
}

std::pair<double, GridFunction> deflate(const RadialGrid& grid, const PotentialData& pot,
                                        const GridFunction& phi) {
    if (pot.mass <= 1e-14) throw SolverError("deflate: degenerate weight (mass ~ 0)");
    double s = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) s += grid.weights[i] * pot.V[i] * phi[i];
    const double mean = s / pot.mass;
    GridFunction out(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) out[i] = phi[i] - mean;
    return {mean, std::move(out)};
}

GridFunction apply_T(const RadialGrid& grid, const SectorOperator& op, const PotentialData& pot,
                     const GridFunction& phi) {
    GridFunction g(phi.size());
    if (op.sector == 0) {
        auto [mean, br] = deflate(grid, pot, phi);
        (void)mean;
        for (std::size_t i = 0; i < phi.size(); ++i) g[i] = pot.tau * pot.V[i] * br[i];
    } else {
        for (std::size_t i = 0; i < phi.size(); ++i) g[i] = pot.tau * pot.V[i] * phi[i];
    }
    return green_solve(grid, op, g);
}

std::vector<EigenPair> sector_eigs(const RadialGrid& grid, const ProblemParams& params,
                                   const BranchPoint& point, int sector, int k,
                                   const EigOptions& opts) {
    if (k < 1 || k > 10) throw std::invalid_argument("sector_eigs: k must be in 1..10");
    const PotentialData pot = potential(grid, params, point);
    const SectorOperator op = sector_operator(grid, sector);
    const MassAction ma = mass_action(grid, op, pot.V, pot.mass, sector == 0);

    EigOptions eo = opts;
    // at lambda = 0 the compact operator vanishes and the mu-parametrization
    // degenerates; solve the limit problem directly as a dense generalized
    // symmetric eigenproblem
    if (pot.tau == 0.0 && !opts.force_iterative) eo.force_dense = true;
    std::vector<GeneralizedPair> pairs = generalized_eigs(op, ma, k, eo);

    std::vector<EigenPair> out;
    out.reserve(pairs.size());
    for (auto& gp : pairs) {
        EigenPair ep;
        ep.sector = sector;
        ep.sigma = gp.nu - pot.tau;
        ep.mu = pot.tau == 0.0 ? 0.0 : pot.tau / gp.nu;
        ep.phi = embed(grid, op, gp.phi);
        ep.residual = gp.residual;
        if (sector == 0) {
            double s = 0.0;
            for (std::size_t i = 0; i < ep.phi.size(); ++i)
                s += grid.weights[i] * pot.V[i] * ep.phi[i];
            ep.weighted_mean = s / pot.mass;
        } else {
            ep.weighted_mean = 0.0;  // angular mean-zero, exact in the sector split
        }
        out.push_back(std::move(ep));
    }
    return out;
}

std::vector<double> dirichlet_eigs(const RadialGrid& grid, int sector, int k,
                                   const EigOptions& opts) {
    const SectorOperator op = sector_operator(grid, sector);
    MassAction ma;
    ma.deflated = false;
    ma.mass = 1.0;
    ma.d.resize(op.unknowns());
    for (int i = 0; i < op.unknowns(); ++i) ma.d[i] = grid.weights[op.first + i];
    std::vector<GeneralizedPair> pairs = generalized_eigs(op, ma, k, opts);
    std::vector<double> out;
    for (const auto& gp : pairs) out.push_back(gp.nu);
    return out;
}

Sigma1Result sigma1(const RadialGrid& grid, const ProblemParams& params, const BranchPoint& point,
                    int l_max, const EigOptions& opts) {
    if (l_max < 2) throw std::invalid_argument("sigma1: l_max must be >= 2");
    Sigma1Result res;
    res.sigma1 = std::numeric_limits<double>::infinity();
    for (int l = 0; l <= l_max; ++l) {
        const auto pairs = sector_eigs(grid, params, point, l, 1, opts);
        if (pairs.empty()) throw SolverError("sigma1: sector returned no eigenvalues");
        const double s = pairs.front().sigma;
        res.per_sector.push_back(s);
        if (s < res.sigma1) {
            res.sigma1 = s;
            res.sector = l;
        }
    }
    for (int l = 1; l + 1 <= l_max; ++l) {
        // centrifugal monotonicity guard for the l_max truncation
        if (res.per_sector[l + 1] < res.per_sector[l] * (1.0 - 1e-10) - 1e-10)
            res.sector_monotone = false;
    }
    return res;
}

KernelReport kernel_check(const RadialGrid& grid, const ProblemParams& params,
                          const BranchPoint& point) {
    KernelReport rep;
    const PotentialData pot = potential(grid, params, point);
    rep.r_plus = pot.r_plus;
    rep.kernel_expected = point.alpha < 0.0;
    if (!rep.kernel_expected) return rep;  // no kernel for alpha >= 0

    const int N = grid.dimension;
    const double R = grid.radius;
    const double rp = pot.r_plus;
    GridFunction phi0(grid.nodes.size());
    for (std::size_t i = 0; i < phi0.size(); ++i) {
        const double r = grid.nodes[i];
        if (r <= rp) {
            phi0[i] = 1.0;
        } else if (N == 2) {
            phi0[i] = std::log(R / r) / std::log(R / rp);
        } else {
            const double a = std::pow(r, 2.0 - N) - std::pow(R, 2.0 - N);
            const double b = std::pow(rp, 2.0 - N) - std::pow(R, 2.0 - N);
            phi0[i] = a / b;
        }
    }
    phi0.back() = 0.0;

    auto [mean, br] = deflate(grid, pot, phi0);
    rep.weighted_mean = mean;
    double vb = 0.0, plateau = 0.0;
    for (std::size_t i = 0; i < phi0.size(); ++i) {
        const double vbr = pot.V[i] * br[i];
        vb += grid.weights[i] * vbr * vbr;
        if (grid.nodes[i] <= rp) plateau = std::max(plateau, std::abs(br[i]));
    }
    rep.v_bracket_norm = std::sqrt(vb);
    rep.plateau_deviation = plateau;

    const SectorOperator op0 = sector_operator(grid, 0);
    const GridFunction timg = apply_T(grid, op0, pot, phi0);
    rep.t_image_h10 = h10_norm(grid, timg);
    return rep;
}

IdentityCheck eigen_identity_check(const RadialGrid& grid, const ProblemParams& params,
                                   const BranchPoint& point, const EigenPair& pair) {
    IdentityCheck chk;
    if (pair.sector != 0) {
        // angular integrals kill both sides in the sector representation
        chk.lhs = chk.rhs = chk.residual = 0.0;
        chk.sign_applicable = false;
        return chk;
    }
    const PotentialData pot = potential(grid, params, point);
    auto [mean, br] = deflate(grid, pot, pair.phi);
    double psi_br = 0.0;
    for (std::size_t i = 0; i < br.size(); ++i)
        psi_br += grid.weights[i] * pot.V[i] * point.psi[i] * br[i];
    psi_br /= pot.mass;

    chk.lhs = mean / pot.mass;
    chk.rhs = (point.lambda * (params.exponent - 1.0) + pair.sigma) * psi_br;
    const double scale = std::max({std::abs(chk.lhs), std::abs(chk.rhs), 1e-300});
    chk.residual = std::abs(chk.lhs - chk.rhs) / scale;

    const double mean_scale = std::sqrt(weighted_inner(grid, pair.phi, pair.phi));
    chk.sign_applicable = std::abs(mean) > 1e-12 * std::max(mean_scale, 1.0);
    if (chk.sign_applicable)
        chk.sign_ok = (psi_br > 0.0) == (mean > 0.0) && psi_br != 0.0;
    return chk;
}

EigenbasisProjection project_eigenbasis(const RadialGrid& grid, const ProblemParams& params,
                                        const BranchPoint& point, const GridFunction& psi_test,
                                        int k, const EigOptions& opts) {
    const PotentialData pot = potential(grid, params, point);
    if (pot.tau <= 0.0) throw SolverError("project_eigenbasis: requires lambda > 0");
    const auto pairs = sector_eigs(grid, params, point, 0, k, opts);

    EigenbasisProjection proj;
    GridFunction partial(psi_test.size(), 0.0);
    const double full = h10_inner(grid, psi_test, psi_test);
    for (const auto& ep : pairs) {
        const double b1 = h10_inner(grid, psi_test, ep.phi);
        auto [mean, br] = deflate(grid, pot, ep.phi);
        (void)mean;
        double b2 = 0.0;
        for (std::size_t i = 0; i < br.size(); ++i)
            b2 += grid.weights[i] * pot.V[i] * br[i] * psi_test[i];
        b2 *= pot.tau / ep.mu;
        proj.beta_h10.push_back(b1);
        proj.beta_weighted.push_back(b2);
        for (std::size_t i = 0; i < partial.size(); ++i) partial[i] += b1 * ep.phi[i];
        GridFunction diff(psi_test.size());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = psi_test[i] - partial[i];
        proj.reconstruction_error.push_back(h10_norm(grid, diff) /
                                            std::sqrt(std::max(full, 1e-300)));
    }
    return proj;
}

SpectrumReport spectrum_report(const RadialGrid& grid, const ProblemParams& params,
                               const BranchPoint& point, int l_max, int k,
                               const EigOptions& opts) {
    SpectrumReport rep;
    for (int l = 0; l <= l_max; ++l)
        rep.sectors.push_back(sector_eigs(grid, params, point, l, k, opts));
    rep.sig1.sigma1 = std::numeric_limits<double>::infinity();
    for (int l = 0; l <= l_max; ++l) {
        const double s = rep.sectors[l].front().sigma;
        rep.sig1.per_sector.push_back(s);
        if (s < rep.sig1.sigma1) {
            rep.sig1.sigma1 = s;
            rep.sig1.sector = l;
        }
    }
    for (int l = 1; l + 1 <= l_max; ++l)
        if (rep.sig1.per_sector[l + 1] < rep.sig1.per_sector[l] * (1.0 - 1e-10) - 1e-10)
            rep.sig1.sector_monotone = false;
    rep.kernel = kernel_check(grid, params, point);
    for (const auto& ep : rep.sectors[0])
        rep.radial_identities.push_back(eigen_identity_check(grid, params, point, ep));
    return rep;
}

} // namespace pfb

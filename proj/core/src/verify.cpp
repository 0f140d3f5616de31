#include "pfb/verify.hpp"

#include "pfb/branch.hpp"
#include "pfb/emden.hpp"
#include "pfb/errors.hpp"
#include "pfb/sobolev.hpp"
#include "pfb/spectrum.hpp"
#include "pfb/sweep_driver.hpp"
#include "pfb/variational.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

namespace pfb {

namespace {

// pinned acceptance thresholds; config.tol only steers the solvers
constexpr double kDiscEqualityTol = 1e-3;
constexpr double kSigmaRefinementTol = 0.05;
constexpr double kTangentFdTol = 1e-4;
constexpr double kLambdaPlusCrossTol = 1e-3;
constexpr double kMultiplierTol = 1e-9;
constexpr double kEigenIdentityTol = 1e-6;
constexpr double kVariationalL1Tol = 1e-3;
constexpr double kSecondVariationFloor = -1e-8;
constexpr double kKernelVNormTol = 1e-8;
constexpr double kKernelTNormTol = 1e-6;
constexpr double kMuAwayFromZero = 1e-3;
constexpr double kLambda0MarginTol = 1e-3;
constexpr double kOrderLow = 3.0;
constexpr double kOrderHigh = 5.0;
constexpr int kSweepPoints = 40;
constexpr int kSecondVariationSamples = 200;

struct PairCase {
    int dimension;
    double exponent;
};

const std::vector<PairCase> kMatrix = {
    {2, 1.5}, {2, 2.0}, {2, 3.0}, {3, 1.5}, {3, 2.0}};

// Everything computed once per (N, p) cell and consumed by several checks.
struct CellContext {
    PairCase pc{2, 2.0};
    double lambda_plus_ref = 0.0;       // Emden shooting + closed formula
    double integral_p = 0.0;
    SweepResult coarse;                 // at M_base, sigma1 filled
    SweepResult fine;                   // at 2 M_base, sigma1 filled
    std::string error;                  // nonempty if construction failed

    bool ok() const { return error.empty(); }
};

RunConfig cell_config(const RunConfig& base, const PairCase& pc, int grid_m) {
    RunConfig c = base;
    c.dimension = pc.dimension;
    c.exponent = pc.exponent;
    c.grid_m = grid_m;
    c.lambda_max = -1.0;
    c.lambda_step = -1.0;
    return c;
}

CellContext build_cell(const RunConfig& base, const PairCase& pc, int m_base) {
    CellContext ctx;
    ctx.pc = pc;
    try {
        const ProblemParams params(pc.dimension, pc.exponent);
        const EmdenProfile prof = solve_emden(params, 1e-12);
        ctx.integral_p = prof.integral_p;
        ctx.lambda_plus_ref =
            lambda_plus_formula(params, prof.integral_p, ball_radius(pc.dimension));

        RunConfig cc = cell_config(base, pc, m_base);
        cc.lambda_max = 3.0 * ctx.lambda_plus_ref;
        cc.lambda_step = cc.lambda_max / kSweepPoints;
        ctx.coarse = compute_sweep(cc);

        RunConfig cf = cell_config(base, pc, 2 * m_base);
        cf.lambda_max = cc.lambda_max;
        cf.lambda_step = cc.lambda_step;
        ctx.fine = compute_sweep(cf);
    } catch (const std::exception& e) {
        ctx.error = e.what();
    }
    return ctx;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

std::string cell_tag(const PairCase& pc) {
    std::ostringstream os;
    os << "(N=" << pc.dimension << ", p=" << pc.exponent << ")";
    return os.str();
}

using CheckBody = std::function<void(CheckResult&)>;

void run_check(std::vector<CheckResult>& out, const std::string& id, double tolerance,
               const CheckBody& body) {
    CheckResult res;
    res.id = id;
    res.tolerance = tolerance;
    Timer timer;
    try {
        body(res);
    } catch (const std::exception& e) {
        res.passed = false;
        res.detail = std::string("exception: ") + e.what();
        res.measured = std::numeric_limits<double>::quiet_NaN();
    }
    res.seconds = timer.seconds();
    out.push_back(std::move(res));
}

} // namespace

VerifyReport run_verify(const RunConfig& config) {
    config.validate();
    const int m_base = std::max(config.grid_m / 2, 64);

    int degree = config.parallelism;
    if (degree <= 0)
        degree = std::max(1u, std::thread::hardware_concurrency());
    degree = std::min<int>(degree, static_cast<int>(kMatrix.size()));

    // heavy per-cell sweeps, batched across the matrix
    std::vector<CellContext> cells(kMatrix.size());
    for (std::size_t begin = 0; begin < kMatrix.size();
         begin += static_cast<std::size_t>(degree)) {
        const std::size_t end =
            std::min(kMatrix.size(), begin + static_cast<std::size_t>(degree));
        std::vector<std::future<CellContext>> batch;
        for (std::size_t i = begin; i < end; ++i)
            batch.push_back(std::async(std::launch::async, build_cell, std::cref(config),
                                       kMatrix[i], m_base));
        for (std::size_t i = begin; i < end; ++i) cells[i] = batch[i - begin].get();
    }

    VerifyReport report;
    auto& checks = report.checks;

    // 1. disc equality: lambda_plus from Emden shooting equals lambda_1 from
    //    Rayleigh minimization on the disc, for p in {1.5, 2, 3}
    run_check(checks, "disc-equality", kDiscEqualityTol, [&](CheckResult& res) {
        const RadialGrid grid2 = build_grid(2, config.grid_m);
        double worst = 0.0;
        std::ostringstream detail;
        for (double p : {1.5, 2.0, 3.0}) {
            const ProblemParams params(2, p);
            const EmdenProfile prof = solve_emden(params, 1e-12);
            const double lp = lambda_plus_formula(params, prof.integral_p, grid2.radius);
            const double l1 = lambda1(grid2, p);
            const double rel = std::abs(lp - l1) / lp;
            worst = std::max(worst, rel);
            detail << "p=" << p << ": lambda+=" << format_double(lp)
                   << " lambda1=" << format_double(l1) << " rel=" << rel << "; ";
        }
        res.measured = worst;
        res.passed = worst <= res.tolerance;
        res.detail = detail.str();
    });

    // 2. sigma1 > 0 at every swept point of every cell, stable under grid
    //    refinement
    run_check(checks, "sigma1-positive", kSigmaRefinementTol, [&](CheckResult& res) {
        double min_sigma = std::numeric_limits<double>::infinity();
        double worst_refine = 0.0;
        std::string where_min, where_ref;
        for (const CellContext& ctx : cells) {
            if (!ctx.ok()) throw SolverError(cell_tag(ctx.pc) + ": " + ctx.error);
            for (std::size_t i = 0; i < ctx.coarse.rows.size(); ++i) {
                const double sc = ctx.coarse.rows[i].sigma1;
                const double sf = ctx.fine.rows[i].sigma1;
                if (sc < min_sigma) {
                    min_sigma = sc;
                    where_min = cell_tag(ctx.pc);
                }
                const double rel = std::abs(sc - sf) / std::abs(sc);
                if (rel > worst_refine) {
                    worst_refine = rel;
                    where_ref = cell_tag(ctx.pc);
                }
            }
        }
        res.measured = worst_refine;
        res.passed = min_sigma > 0.0 && worst_refine <= res.tolerance;
        std::ostringstream detail;
        detail << "min sigma1 = " << format_double(min_sigma) << " at " << where_min
               << "; worst refinement " << worst_refine << " at " << where_ref;
        res.detail = detail.str();
    });

    // 3. alpha strictly decreasing, energy strictly increasing, tangent vs
    //    centered finite difference away from lambda_plus
    run_check(checks, "branch-monotone", kTangentFdTol, [&](CheckResult& res) {
        double worst_fd = 0.0;
        bool monotone = true;
        std::ostringstream detail;
        for (const CellContext& ctx : cells) {
            if (!ctx.ok()) throw SolverError(cell_tag(ctx.pc) + ": " + ctx.error);
            monotone = monotone && ctx.coarse.trace.alpha_decreasing &&
                       ctx.coarse.trace.energy_increasing;

            const RadialGrid grid = build_grid(ctx.pc.dimension, m_base);
            const SectorOperator op0 = sector_operator(grid, 0);
            const ProblemParams params(ctx.pc.dimension, ctx.pc.exponent);
            for (double factor : {0.4, 2.2}) {
                const double lam0 = factor * ctx.lambda_plus_ref;
                std::size_t nearest = 0;
                for (std::size_t i = 0; i < ctx.coarse.rows.size(); ++i)
                    if (std::abs(ctx.coarse.rows[i].lambda - lam0) <
                        std::abs(ctx.coarse.rows[nearest].lambda - lam0))
                        nearest = i;
                const BranchPoint& pt = ctx.coarse.trace.points[nearest];
                const BranchTangent tg = tangent(grid, op0, params, pt);
                const double delta = std::max(1e-4, 1e-5 * ctx.lambda_plus_ref);
                const BranchPoint hi = continue_to(grid, op0, params, pt, pt.lambda + delta);
                const BranchPoint lo = continue_to(grid, op0, params, pt, pt.lambda - delta);
                const double fd = (hi.alpha - lo.alpha) / (2.0 * delta);
                const double rel = std::abs(tg.dalpha - fd) / std::abs(fd);
                worst_fd = std::max(worst_fd, rel);
            }
            detail << cell_tag(ctx.pc) << (ctx.coarse.trace.alpha_decreasing ? " a-" : " a!")
                   << (ctx.coarse.trace.energy_increasing ? " E+" : " E!") << "; ";
        }
        detail << "worst tangent-vs-fd " << worst_fd;
        res.measured = worst_fd;
        res.passed = monotone && worst_fd <= res.tolerance;
        res.detail = detail.str();
    });

    // 4. lambda_plus cross-validation: closed formula vs sweep zero crossing
    run_check(checks, "lambda-plus-cross", kLambdaPlusCrossTol, [&](CheckResult& res) {
        double worst = 0.0;
        std::ostringstream detail;
        for (const CellContext& ctx : cells) {
            if (!ctx.ok()) throw SolverError(cell_tag(ctx.pc) + ": " + ctx.error);
            if (!ctx.coarse.trace.lambda_plus)
                throw SolverError(cell_tag(ctx.pc) + ": sweep did not cross lambda_plus");
            const double rel =
                std::abs(*ctx.coarse.trace.lambda_plus - ctx.lambda_plus_ref) /
                ctx.lambda_plus_ref;
            worst = std::max(worst, rel);
            detail << cell_tag(ctx.pc) << " rel=" << rel << "; ";
        }
        res.measured = worst;
        res.passed = worst <= res.tolerance;
        res.detail = detail.str();
    });

    // 5. multiplier identity (alpha + lambda <psi>) m = 1 at every point
    run_check(checks, "multiplier-identity", kMultiplierTol, [&](CheckResult& res) {
        double worst = 0.0;
        for (const CellContext& ctx : cells) {
            if (!ctx.ok()) throw SolverError(cell_tag(ctx.pc) + ": " + ctx.error);
            const RadialGrid grid = build_grid(ctx.pc.dimension, m_base);
            const ProblemParams params(ctx.pc.dimension, ctx.pc.exponent);
            for (const BranchPoint& pt : ctx.coarse.trace.points) {
                const PotentialData pot = potential(grid, params, pt);
                double vpsi = 0.0;
                for (std::size_t i = 0; i < pot.V.size(); ++i)
                    vpsi += grid.weights[i] * pot.V[i] * pt.psi[i];
                const double gap =
                    std::abs((pt.alpha + pt.lambda * vpsi / pot.mass) * pot.mass - 1.0);
                worst = std::max(worst, gap);
            }
        }
        res.measured = worst;
        res.passed = worst <= res.tolerance;
        res.detail = "max |(alpha + lambda <psi>) m - 1| over all swept points";
    });

    // 6. radial eigenpair identity and sign condition at
    //    lambda in {0.5, 1, 1.5, 2} lambda_plus on the disc, p = 2
    run_check(checks, "eigen-identity", kEigenIdentityTol, [&](CheckResult& res) {
        const PairCase pc{2, 2.0};
        const ProblemParams params(pc.dimension, pc.exponent);
        const RadialGrid grid = build_grid(pc.dimension, config.grid_m);
        const SectorOperator op0 = sector_operator(grid, 0);
        const EmdenProfile prof = solve_emden(params, 1e-12);
        const double lp = lambda_plus_formula(params, prof.integral_p, grid.radius);

        SweepOptions sopts;
        sopts.newton.tolerance = config.tol;
        BranchPoint pt = torsion_anchor(grid, op0, params);
        pt = newton_solve(grid, op0, params, 0.0, pt.alpha, pt.psi, sopts.newton);

        double worst = 0.0;
        bool signs_ok = true;
        std::ostringstream detail;
        for (double factor : {0.5, 1.0, 1.5, 2.0}) {
            pt = continue_to(grid, op0, params, pt, factor * lp, sopts);
            const auto pairs = sector_eigs(grid, params, pt, 0, 3);
            for (const auto& ep : pairs) {
                const IdentityCheck chk = eigen_identity_check(grid, params, pt, ep);
                worst = std::max(worst, chk.residual);
                if (chk.sign_applicable && !chk.sign_ok) signs_ok = false;
            }
            detail << factor << "lp ok; ";
        }
        detail << "sign condition " << (signs_ok ? "holds" : "VIOLATED");
        res.measured = worst;
        res.passed = worst <= res.tolerance && signs_ok;
        res.detail = detail.str();
    });

    // 7. variational route agrees with the Newton route; second variation
    //    nonnegative over randomized directions
    run_check(checks, "variational-cross", kVariationalL1Tol, [&](CheckResult& res) {
        double worst_l1 = 0.0;
        double min_a = std::numeric_limits<double>::infinity();
        std::ostringstream detail;
        for (const PairCase pc : {PairCase{2, 2.0}, PairCase{3, 2.0}}) {
            const CellContext* ctx = nullptr;
            for (const CellContext& c : cells)
                if (c.pc.dimension == pc.dimension && c.pc.exponent == pc.exponent) ctx = &c;
            if (!ctx || !ctx->ok()) throw SolverError(cell_tag(pc) + ": context unavailable");

            const ProblemParams params(pc.dimension, pc.exponent);
            const RadialGrid grid = build_grid(pc.dimension, m_base);
            const SectorOperator op0 = sector_operator(grid, 0);
            SweepOptions sopts;
            sopts.newton.tolerance = config.tol;

            for (double factor : {0.5, 1.5}) {
                const double lam = factor * ctx->lambda_plus_ref;
                std::size_t nearest = 0;
                for (std::size_t i = 0; i < ctx->coarse.rows.size(); ++i)
                    if (std::abs(ctx->coarse.rows[i].lambda - lam) <
                        std::abs(ctx->coarse.rows[nearest].lambda - lam))
                        nearest = i;
                const BranchPoint pt = continue_to(
                    grid, op0, params, ctx->coarse.trace.points[nearest], lam, sopts);

                const DensityState st =
                    minimize_free_energy_multistart(grid, op0, params, lam, &pt.rho);
                double l1 = 0.0;
                for (std::size_t i = 0; i < st.rho.size(); ++i)
                    l1 += grid.weights[i] * std::abs(st.rho[i] - pt.rho[i]);
                worst_l1 = std::max(worst_l1, l1);

                const PotentialData pot = potential(grid, params, pt);
                for (int s = 0; s < kSecondVariationSamples; ++s) {
                    const GridFunction phi = random_test_function(
                        grid, config.seed + 977u * s + 131u * pc.dimension +
                                  static_cast<std::uint64_t>(factor * 4));
                    min_a = std::min(min_a, second_variation(grid, op0, pot, phi).value);
                }
                detail << cell_tag(pc) << "@" << factor << "lp L1=" << l1 << "; ";
            }
        }
        detail << "min A(phi) = " << format_double(min_a);
        res.measured = worst_l1;
        res.passed = worst_l1 <= res.tolerance && min_a >= kSecondVariationFloor;
        res.detail = detail.str();
    });

    // 8. kernel structure: explicit candidate annihilated for alpha < 0,
    //    computed mu bounded away from zero for lambda < lambda_plus
    run_check(checks, "kernel-structure", kKernelVNormTol, [&](CheckResult& res) {
        const PairCase pc{2, 2.0};
        const ProblemParams params(pc.dimension, pc.exponent);
        const RadialGrid grid = build_grid(pc.dimension, config.grid_m);
        const SectorOperator op0 = sector_operator(grid, 0);
        const EmdenProfile prof = solve_emden(params, 1e-12);
        const double lp = lambda_plus_formula(params, prof.integral_p, grid.radius);
        SweepOptions sopts;
        sopts.newton.tolerance = config.tol;

        BranchPoint pt = torsion_anchor(grid, op0, params);
        pt = newton_solve(grid, op0, params, 0.0, pt.alpha, pt.psi, sopts.newton);
        const BranchPoint below = continue_to(grid, op0, params, pt, 0.5 * lp, sopts);
        const BranchPoint above = continue_to(grid, op0, params, below, 1.5 * lp, sopts);

        const KernelReport kr = kernel_check(grid, params, above);
        double mu_min = std::numeric_limits<double>::infinity();
        for (const auto& ep : sector_eigs(grid, params, below, 0, 6))
            mu_min = std::min(mu_min, ep.mu);

        res.measured = kr.v_bracket_norm;
        res.passed = kr.kernel_expected && kr.v_bracket_norm <= kKernelVNormTol &&
                     kr.t_image_h10 <= kKernelTNormTol && mu_min >= kMuAwayFromZero;
        std::ostringstream detail;
        detail << "alpha<0: ||V[phi0]|| = " << format_double(kr.v_bracket_norm)
               << ", ||T phi0||_H10 = " << format_double(kr.t_image_h10)
               << "; alpha>0: min computed mu = " << format_double(mu_min);
        res.detail = detail.str();
    });

    // 9. strict threshold ordering lambda_0 < lambda_plus for p > 1
    run_check(checks, "lambda0-strict", kLambda0MarginTol, [&](CheckResult& res) {
        double min_margin = std::numeric_limits<double>::infinity();
        std::ostringstream detail;
        for (const CellContext& ctx : cells) {
            if (!ctx.ok()) throw SolverError(cell_tag(ctx.pc) + ": " + ctx.error);
            const RadialGrid grid = build_grid(ctx.pc.dimension, config.grid_m);
            const double l0 = lambda0(grid, ctx.pc.exponent);
            const double margin = (ctx.lambda_plus_ref - l0) / ctx.lambda_plus_ref;
            min_margin = std::min(min_margin, margin);
            detail << cell_tag(ctx.pc) << " lambda0=" << format_double(l0)
                   << " margin=" << margin << "; ";
        }
        res.measured = min_margin;
        res.passed = min_margin >= res.tolerance;
        res.detail = detail.str();
    });

    // 10. second-order convergence: torsion energy, lambda_plus, sigma1
    //     error contraction under M -> 2M
    run_check(checks, "convergence-orders", kOrderLow, [&](CheckResult& res) {
        const PairCase pc{2, 2.0};
        const ProblemParams params(pc.dimension, pc.exponent);
        const EmdenProfile prof = solve_emden(params, 1e-12);

        // torsion energy against the closed form
        auto torsion_err = [&](int m) {
            const RadialGrid grid = build_grid(pc.dimension, m);
            const SectorOperator op0 = sector_operator(grid, 0);
            const BranchPoint pt = torsion_anchor(grid, op0, params);
            const double exact =
                grid.radius * grid.radius / (2.0 * pc.dimension * (pc.dimension + 2));
            return std::abs(pt.energy - exact);
        };
        const double r_torsion = torsion_err(m_base) / torsion_err(2 * m_base);

        // lambda_plus against the shooting formula
        auto lp_err = [&](int m) {
            const RadialGrid grid = build_grid(pc.dimension, m);
            const SectorOperator op0 = sector_operator(grid, 0);
            const double ref = lambda_plus_formula(params, prof.integral_p, grid.radius);
            return std::abs(find_lambda_plus(grid, op0, params) - ref);
        };
        const double r_lp = lp_err(m_base / 2) / lp_err(m_base);

        // sigma1 at 0.5 lambda_plus via successive differences
        const double lam = 0.5 * lambda_plus_formula(params, prof.integral_p,
                                                     ball_radius(pc.dimension));
        auto sigma_at = [&](int m) {
            const RadialGrid grid = build_grid(pc.dimension, m);
            const SectorOperator op0 = sector_operator(grid, 0);
            BranchPoint pt = torsion_anchor(grid, op0, params);
            pt = newton_solve(grid, op0, params, 0.0, pt.alpha, pt.psi);
            pt = continue_to(grid, op0, params, pt, lam);
            return sigma1(grid, params, pt, 2).sigma1;
        };
        const double s1 = sigma_at(m_base / 2);
        const double s2 = sigma_at(m_base);
        const double s3 = sigma_at(2 * m_base);
        const double r_sigma = std::abs(s1 - s2) / std::abs(s2 - s3);

        std::ostringstream detail;
        detail << "torsion " << r_torsion << ", lambda+ " << r_lp << ", sigma1 " << r_sigma;
        res.detail = detail.str();
        res.measured = std::min({r_torsion, r_lp, r_sigma});
        res.passed = r_torsion >= kOrderLow && r_torsion <= kOrderHigh && r_lp >= kOrderLow &&
                     r_lp <= kOrderHigh && r_sigma >= kOrderLow && r_sigma <= kOrderHigh;
    });

    return report;
}

std::string verify_json(const VerifyReport& report) {
    nlohmann::ordered_json j;
    j["schema"] = "pfb-verify-report/1";
    j["all_passed"] = report.all_passed();
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const CheckResult& c : report.checks) {
        nlohmann::ordered_json e;
        e["id"] = c.id;
        e["status"] = c.passed ? "pass" : "fail";
        e["measured"] = c.measured;
        e["tolerance"] = c.tolerance;
        e["seconds"] = c.seconds;
        e["detail"] = c.detail;
        arr.push_back(e);
    }
    j["checks"] = arr;
    return j.dump(2) + "\n";
}

} // namespace pfb

// Command-line front end: branch sweeps, spectral reports, thresholds and
// the verification matrix for the constrained plasma problem on balls.

#include "pfb/branch.hpp"
#include "pfb/emden.hpp"
#include "pfb/errors.hpp"
#include "pfb/run_config.hpp"
#include "pfb/sobolev.hpp"
#include "pfb/spectrum.hpp"
#include "pfb/sweep_driver.hpp"
#include "pfb/variational.hpp"
#include "pfb/verify.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>

namespace {

using nlohmann::ordered_json;

void write_or_print(const pfb::RunConfig& cfg, const std::string& name, const ordered_json& j) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    const fs::path path = fs::path(cfg.out_dir) / name;
    std::ofstream(path) << j.dump(2) << "\n";
    std::cout << j.dump(2) << "\n[written " << path.string() << "]\n";
}

// lambda for point subcommands: explicit --lambda wins, otherwise a
// multiple of the closed-form lambda_plus
double resolve_lambda(const pfb::RunConfig& cfg, double lambda_plus, double default_factor) {
    return cfg.lambda >= 0.0 ? cfg.lambda : default_factor * lambda_plus;
}

struct PointSolve {
    pfb::RadialGrid grid;
    pfb::SectorOperator op0;
    pfb::BranchPoint point;
    double lambda_plus = 0.0;
};

PointSolve solve_point(const pfb::RunConfig& cfg, double default_factor) {
    const pfb::ProblemParams params(cfg.dimension, cfg.exponent);
    PointSolve ps{pfb::build_grid(cfg.dimension, cfg.grid_m), {}, {}, 0.0};
    ps.op0 = pfb::sector_operator(ps.grid, 0);
    const pfb::EmdenProfile prof = pfb::solve_emden(params, 1e-12);
    ps.lambda_plus = pfb::lambda_plus_formula(params, prof.integral_p, ps.grid.radius);
    const double lambda = resolve_lambda(cfg, ps.lambda_plus, default_factor);

    pfb::SweepOptions sopts;
    sopts.newton.tolerance = cfg.tol;
    pfb::BranchPoint pt = pfb::torsion_anchor(ps.grid, ps.op0, params);
    pt = pfb::newton_solve(ps.grid, ps.op0, params, 0.0, pt.alpha, pt.psi, sopts.newton);
    if (lambda > 0.0) {
        // march in quarters of lambda_plus to stay inside the Newton basin
        double lam = 0.0;
        const double step = 0.25 * ps.lambda_plus;
        while (lam + step < lambda) {
            lam += step;
            pt = pfb::continue_to(ps.grid, ps.op0, params, pt, lam, sopts);
        }
        pt = pfb::continue_to(ps.grid, ps.op0, params, pt, lambda, sopts);
    }
    ps.point = std::move(pt);
    return ps;
}

int cmd_emden(const pfb::RunConfig& cfg) {
    const pfb::ProblemParams params(cfg.dimension, cfg.exponent);
    const pfb::EmdenProfile prof = pfb::solve_emden(params, std::max(cfg.tol, 1e-12));
    const double R = pfb::ball_radius(cfg.dimension);
    ordered_json j;
    j["schema"] = "pfb-emden/1";
    j["dimension"] = cfg.dimension;
    j["exponent"] = cfg.exponent;
    j["first_zero"] = prof.first_zero;
    j["center_value"] = prof.center_value;
    j["integral_p"] = prof.integral_p;
    j["ball_radius"] = R;
    j["lambda_plus"] = pfb::lambda_plus_formula(params, prof.integral_p, R);
    write_or_print(cfg, "emden.json", j);
    return 0;
}

int cmd_lambda_plus(const pfb::RunConfig& cfg) {
    const pfb::ProblemParams params(cfg.dimension, cfg.exponent);
    const pfb::RadialGrid grid = pfb::build_grid(cfg.dimension, cfg.grid_m);
    const pfb::SectorOperator op0 = pfb::sector_operator(grid, 0);
    const pfb::EmdenProfile prof = pfb::solve_emden(params, 1e-12);
    const double by_formula = pfb::lambda_plus_formula(params, prof.integral_p, grid.radius);
    pfb::SweepOptions sopts;
    sopts.newton.tolerance = cfg.tol;
    const double by_sweep = pfb::find_lambda_plus(grid, op0, params, sopts);
    ordered_json j;
    j["schema"] = "pfb-lambda-plus/1";
    j["dimension"] = cfg.dimension;
    j["exponent"] = cfg.exponent;
    j["grid"] = cfg.grid_m;
    j["formula"] = by_formula;
    j["sweep"] = by_sweep;
    j["relative_gap"] = std::abs(by_formula - by_sweep) / by_formula;
    write_or_print(cfg, "lambda_plus.json", j);
    return 0;
}

int cmd_branch(const pfb::RunConfig& cfg) {
    const pfb::SweepResult result = pfb::run_sweep(cfg);
    std::cout << pfb::sweep_summary_json(cfg, result);
    std::cout << "[written " << result.csv_path << ", " << result.json_path << "]\n";
    const bool solver_ok = result.trace.points.size() == result.rows.size();
    return solver_ok ? 0 : 1;
}

int cmd_spectrum(const pfb::RunConfig& cfg) {
    const pfb::ProblemParams params(cfg.dimension, cfg.exponent);
    const PointSolve ps = solve_point(cfg, 1.5);
    const pfb::SpectrumReport rep =
        pfb::spectrum_report(ps.grid, params, ps.point, cfg.l_max, 3);
    ordered_json j;
    j["schema"] = "pfb-spectrum/1";
    j["dimension"] = cfg.dimension;
    j["exponent"] = cfg.exponent;
    j["lambda"] = ps.point.lambda;
    j["alpha"] = ps.point.alpha;
    j["sigma1"] = rep.sig1.sigma1;
    j["sigma1_sector"] = rep.sig1.sector;
    j["sector_minima"] = rep.sig1.per_sector;
    j["sector_monotone"] = rep.sig1.sector_monotone;
    ordered_json sect = ordered_json::array();
    for (const auto& pairs : rep.sectors) {
        ordered_json row = ordered_json::array();
        for (const auto& ep : pairs) {
            ordered_json e;
            e["sector"] = ep.sector;
            e["sigma"] = ep.sigma;
            e["mu"] = ep.mu;
            e["weighted_mean"] = ep.weighted_mean;
            e["residual"] = ep.residual;
            row.push_back(e);
        }
        sect.push_back(row);
    }
    j["eigenvalues"] = sect;
    j["kernel"] = {{"expected", rep.kernel.kernel_expected},
                   {"r_plus", rep.kernel.r_plus},
                   {"v_bracket_norm", rep.kernel.v_bracket_norm},
                   {"t_image_h10", rep.kernel.t_image_h10}};
    ordered_json ids = ordered_json::array();
    for (const auto& chk : rep.radial_identities)
        ids.push_back({{"lhs", chk.lhs},
                       {"rhs", chk.rhs},
                       {"residual", chk.residual},
                       {"sign_ok", chk.sign_ok}});
    j["radial_identities"] = ids;
    write_or_print(cfg, "spectrum.json", j);
    return 0;
}

int cmd_sobolev(const pfb::RunConfig& cfg) {
    const pfb::RadialGrid grid = pfb::build_grid(cfg.dimension, cfg.grid_m);
    const pfb::BestConstantResult bc2p = pfb::best_constant(grid, 2.0 * cfg.exponent);
    ordered_json j;
    j["schema"] = "pfb-sobolev/1";
    j["dimension"] = cfg.dimension;
    j["exponent"] = cfg.exponent;
    j["grid"] = cfg.grid_m;
    j["best_constant_2p"] = {{"t", bc2p.t},
                             {"lambda", bc2p.lambda},
                             {"oracle_lambda", bc2p.oracle_lambda},
                             {"method_gap", bc2p.method_gap},
                             {"method", bc2p.method}};
    j["lambda0"] = bc2p.lambda / cfg.exponent;
    if (cfg.dimension == 2) {
        j["lambda1"] = pfb::lambda1(grid, cfg.exponent);
        const pfb::ProblemParams params(cfg.dimension, cfg.exponent);
        const pfb::EmdenProfile prof = pfb::solve_emden(params, 1e-12);
        j["lambda_plus"] = pfb::lambda_plus_formula(params, prof.integral_p, grid.radius);
    }
    write_or_print(cfg, "sobolev.json", j);
    return 0;
}

int cmd_variational(const pfb::RunConfig& cfg) {
    const pfb::ProblemParams params(cfg.dimension, cfg.exponent);
    const PointSolve ps = solve_point(cfg, 0.5);
    const pfb::DensityState st = pfb::minimize_free_energy_multistart(
        ps.grid, ps.op0, params, ps.point.lambda, &ps.point.rho);
    double l1 = 0.0;
    for (std::size_t i = 0; i < st.rho.size(); ++i)
        l1 += ps.grid.weights[i] * std::abs(st.rho[i] - ps.point.rho[i]);

    const pfb::PotentialData pot = pfb::potential(ps.grid, params, ps.point);
    double min_a = std::numeric_limits<double>::infinity();
    for (int s = 0; s < 200; ++s) {
        const pfb::GridFunction phi = pfb::random_test_function(ps.grid, cfg.seed + 977u * s);
        min_a = std::min(min_a, pfb::second_variation(ps.grid, ps.op0, pot, phi).value);
    }
    ordered_json j;
    j["schema"] = "pfb-variational/1";
    j["dimension"] = cfg.dimension;
    j["exponent"] = cfg.exponent;
    j["lambda"] = ps.point.lambda;
    j["free_energy"] = st.value;
    j["alpha_recovered"] = st.alpha;
    j["alpha_newton"] = ps.point.alpha;
    j["alpha_deviation"] = st.alpha_deviation;
    j["stationarity"] = st.stationarity;
    j["iterations"] = st.iterations;
    j["converged"] = st.converged;
    j["l1_distance_to_branch"] = l1;
    j["second_variation_min"] = min_a;
    write_or_print(cfg, "variational.json", j);
    return 0;
}

int cmd_verify(const pfb::RunConfig& cfg) {
    const pfb::VerifyReport rep = pfb::run_verify(cfg);
    for (const pfb::CheckResult& c : rep.checks)
        std::printf("[%s] %-20s measured=%.3e tolerance=%.3e (%.1fs)\n",
                    c.passed ? "PASS" : "FAIL", c.id.c_str(), c.measured, c.tolerance,
                    c.seconds);
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    const fs::path path = fs::path(cfg.out_dir) / "verify.json";
    std::ofstream(path) << pfb::verify_json(rep);
    std::cout << "[written " << path.string() << "]\n";
    return rep.all_passed() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for the constrained plasma problem on unit-volume balls"};
    app.set_config("--config", "", "key = value configuration file");
    app.require_subcommand(1);

    pfb::RunConfig cfg;
    app.add_option("--dimension", cfg.dimension, "ball dimension N >= 2")->capture_default_str();
    app.add_option("--exponent", cfg.exponent, "nonlinearity exponent p in (1, p_N)")
        ->capture_default_str();
    app.add_option("--grid", cfg.grid_m, "radial segments M")->capture_default_str();
    app.add_option("--lambda", cfg.lambda, "lambda for point subcommands (default: auto)");
    app.add_option("--lambda-max", cfg.lambda_max, "sweep upper end (default: 3 lambda_plus)");
    app.add_option("--lambda-step", cfg.lambda_step, "sweep step (default: lambda_plus / 40)");
    app.add_option("--lmax", cfg.l_max, "largest angular sector")->capture_default_str();
    app.add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", cfg.seed, "seed for randomized checks")->capture_default_str();
    app.add_option("--tol", cfg.tol, "solver tolerance")->capture_default_str();

    auto* c_emden = app.add_subcommand("emden", "shoot the Emden profile, report I_p and lambda_plus");
    auto* c_lp = app.add_subcommand("lambda-plus", "lambda_plus by closed formula vs sweep crossing");
    auto* c_branch = app.add_subcommand("branch", "continuation sweep: CSV rows + JSON summary");
    auto* c_spec = app.add_subcommand("spectrum", "sector eigenvalues, sigma1 and kernel report");
    auto* c_sob = app.add_subcommand("sobolev", "best constants and thresholds lambda_0, lambda_1");
    auto* c_var = app.add_subcommand("variational", "free-energy minimization cross-check");
    auto* c_ver = app.add_subcommand("verify", "full verification matrix, JSON report");

    CLI11_PARSE(app, argc, argv);

    try {
        pfb::apply_env_overrides(cfg);
        cfg.validate();  // no computation starts on an invalid config
        if (c_emden->parsed()) return cmd_emden(cfg);
        if (c_lp->parsed()) return cmd_lambda_plus(cfg);
        if (c_branch->parsed()) return cmd_branch(cfg);
        if (c_spec->parsed()) return cmd_spectrum(cfg);
        if (c_sob->parsed()) return cmd_sobolev(cfg);
        if (c_var->parsed()) return cmd_variational(cfg);
        if (c_ver->parsed()) return cmd_verify(cfg);
    } catch (const pfb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

#include "pfb/sweep_driver.hpp"

#include "pfb/emden.hpp"
#include "pfb/errors.hpp"
#include "pfb/spectrum.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace pfb {

SweepResult compute_sweep(const RunConfig& config) {
    config.validate();
    const ProblemParams params(config.dimension, config.exponent);
    const RadialGrid grid = build_grid(config.dimension, config.grid_m);
    const SectorOperator op0 = sector_operator(grid, 0);

    SweepResult result;
    const EmdenProfile prof = solve_emden(params, std::max(config.tol, 1e-12));
    result.lambda_plus_formula = lambda_plus_formula(params, prof.integral_p, grid.radius);

    const double lam_max =
        config.lambda_max >= 0.0 ? config.lambda_max : 3.0 * result.lambda_plus_formula;
    const double lam_step =
        config.lambda_step > 0.0 ? config.lambda_step : result.lambda_plus_formula / 40.0;

    std::vector<double> lambdas{0.0};
    for (double lam = lam_step; lam < lam_max + 0.5 * lam_step && lam_max > 0.0;
         lam += lam_step)
        lambdas.push_back(std::min(lam, lam_max));

    SweepOptions sopts;
    sopts.newton.tolerance = config.tol;
    result.trace = sweep(grid, op0, params, lambdas, sopts);

    for (std::size_t i = 0; i < result.trace.points.size(); ++i) {
        const BranchPoint& pt = result.trace.points[i];
        const Sigma1Result sg = sigma1(grid, params, pt, config.l_max);
        result.trace.sigma1[i] = sg.sigma1;
        result.trace.sigma1_sector[i] = sg.sector;

        const PotentialData pot = potential(grid, params, pt);
        SweepRow row;
        row.lambda = pt.lambda;
        row.alpha = pt.alpha;
        row.energy = pt.energy;
        row.sigma1 = sg.sigma1;
        row.sigma1_sector = sg.sector;
        row.m_lambda = pot.mass;
        row.r_plus = pot.r_plus;
        row.dalpha_dlambda = result.trace.dalpha[i];
        row.residual = pt.residual_norm;
        result.rows.push_back(row);
    }
    return result;
}

std::string sweep_csv(const SweepResult& result) {
    std::ostringstream out;
    out << "lambda,alpha,energy,sigma1,sigma1_sector,m_lambda,r_plus,dalpha_dlambda,residual\n";
    for (const SweepRow& r : result.rows) {
        out << format_double(r.lambda) << ',' << format_double(r.alpha) << ','
            << format_double(r.energy) << ',' << format_double(r.sigma1) << ','
            << r.sigma1_sector << ',' << format_double(r.m_lambda) << ','
            << format_double(r.r_plus) << ',' << format_double(r.dalpha_dlambda) << ','
            << format_double(r.residual) << '\n';
    }
    return out.str();
}

std::string sweep_summary_json(const RunConfig& config, const SweepResult& result) {
    nlohmann::ordered_json j;
    j["schema"] = "pfb-sweep-summary/1";
    j["dimension"] = config.dimension;
    j["exponent"] = config.exponent;
    j["grid"] = config.grid_m;
    j["points"] = result.rows.size();
    j["lambda_plus_formula"] = result.lambda_plus_formula;
    if (result.trace.lambda_plus)
        j["lambda_plus"] = *result.trace.lambda_plus;
    else
        j["lambda_plus"] = nullptr;
    j["alpha_decreasing"] = result.trace.alpha_decreasing;
    j["energy_increasing"] = result.trace.energy_increasing;
    double smin = std::numeric_limits<double>::infinity();
    for (const SweepRow& r : result.rows) smin = std::min(smin, r.sigma1);
    j["sigma1_min"] = smin;
    j["sigma1_positive"] = smin > 0.0;
    return j.dump(2) + "\n";
}

SweepResult run_sweep(const RunConfig& config) {
    SweepResult result = compute_sweep(config);
    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);
    const fs::path csv = fs::path(config.out_dir) / "sweep.csv";
    const fs::path json = fs::path(config.out_dir) / "summary.json";
    std::ofstream(csv) << sweep_csv(result);
    std::ofstream(json) << sweep_summary_json(config, result);
    result.csv_path = csv.string();
    result.json_path = json.string();
    return result;
}

} // namespace pfb

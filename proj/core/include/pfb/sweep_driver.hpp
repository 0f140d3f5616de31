#pragma once

#include "pfb/branch.hpp"
#include "pfb/run_config.hpp"

#include <string>

namespace pfb {

/// One CSV row of a sweep: per-lambda solution and spectrum scalars.
struct SweepRow {
    double lambda = 0.0;
    double alpha = 0.0;
    double energy = 0.0;
    double sigma1 = 0.0;
    int sigma1_sector = 0;
    double m_lambda = 0.0;
    double r_plus = 0.0;
    double dalpha_dlambda = 0.0;
    double residual = 0.0;
};

struct SweepResult {
    SweepTrace trace;
    std::vector<SweepRow> rows;
    double lambda_plus_formula = 0.0;  // Emden route, for the JSON summary
    std::string csv_path;
    std::string json_path;
};

/// Continuation sweep over the configured lambda range with per-point
/// sigma1, written as sweep.csv (fixed header, one row per lambda) and
/// summary.json under the configured output directory. Deterministic:
/// identical config produces byte-identical files.
SweepResult run_sweep(const RunConfig& config);

/// In-memory variant used by run_sweep, tests and the verify suite.
SweepResult compute_sweep(const RunConfig& config);

std::string sweep_csv(const SweepResult& result);
std::string sweep_summary_json(const RunConfig& config, const SweepResult& result);

} // namespace pfb

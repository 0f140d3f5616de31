#pragma once

#include <cstdint>
#include <string>

namespace pfb {

/// Validated run parameters shared by the CLI subcommands. Defaults match
/// the production scale; validate() rejects anything violating the module
/// preconditions before any computation starts.
struct RunConfig {
    int dimension = 2;
    double exponent = 2.0;
    int grid_m = 2048;
    double lambda = -1.0;        // single-point subcommands; < 0 = auto (1.5 lambda_plus)
    double lambda_max = -1.0;    // sweeps; < 0 = auto (3 lambda_plus)
    double lambda_step = -1.0;   // sweeps; < 0 = auto (lambda_plus / 40)
    int l_max = 2;
    double tol = 1e-10;          // solver target; acceptance thresholds stay pinned
    std::string out_dir = ".";
    std::uint64_t seed = 12345;
    int parallelism = 0;         // 0 = hardware default

    void validate() const;       // throws ConfigError
};

/// PFB_OUT_DIR and PFB_PARALLEL override the respective fields.
void apply_env_overrides(RunConfig& config);

/// Fixed-format scientific serialization used by every writer:
/// 17 significant digits, round-trip exact.
std::string format_double(double v);

} // namespace pfb

#include "pfb/run_config.hpp"

#include "pfb/errors.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace pfb {

void RunConfig::validate() const {
    if (dimension < 2) throw ConfigError("dimension must be >= 2");
    const double p_crit =
        dimension == 2 ? std::numeric_limits<double>::infinity()
                       : static_cast<double>(dimension) / (dimension - 2);
    if (!(exponent > 1.0) || !(exponent < p_crit))
        throw ConfigError("exponent must lie in (1, p_N)");
    if (grid_m < 16) throw ConfigError("grid must have at least 16 segments");
    if (l_max < 2) throw ConfigError("lmax must be >= 2");
    if (tol < 0.0 || !std::isfinite(tol)) throw ConfigError("tol must be nonnegative");
    if (lambda_max >= 0.0 && lambda_step > lambda_max)
        throw ConfigError("lambda-step exceeds lambda-max");
    if (out_dir.empty()) throw ConfigError("output directory must not be empty");
    if (parallelism < 0) throw ConfigError("parallelism must be nonnegative");
}

void apply_env_overrides(RunConfig& config) {
    if (const char* dir = std::getenv("PFB_OUT_DIR"); dir && *dir) config.out_dir = dir;
    if (const char* par = std::getenv("PFB_PARALLEL"); par && *par)
        config.parallelism = std::atoi(par);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace pfb

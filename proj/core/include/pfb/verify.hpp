#pragma once

#include "pfb/run_config.hpp"

#include <string>
#include <vector>

namespace pfb {

struct CheckResult {
    std::string id;
    bool passed = false;
    double measured = 0.0;
    double tolerance = 0.0;
    double seconds = 0.0;
    std::string detail;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
};

/// Runs the full verification matrix: every theorem-level property at its
/// pinned tolerance, over the (N, p) grid
/// {(2,1.5), (2,2), (2,3), (3,1.5), (3,2)}. Individual check failures do
/// not abort the suite. config.grid_m is the production resolution; the
/// sweep matrix runs at grid_m/2 with grid_m as its refinement.
VerifyReport run_verify(const RunConfig& config);

std::string verify_json(const VerifyReport& report);

} // namespace pfb

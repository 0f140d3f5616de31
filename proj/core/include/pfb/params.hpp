#pragma once

#include <limits>
#include <stdexcept>

namespace pfb {

/// Dimension and nonlinearity exponent of the constrained problem.
/// Subcriticality 1 < p < p_N is enforced at construction,
/// p_N = +inf for N = 2 and N/(N-2) for N >= 3.
struct ProblemParams {
    ProblemParams(int dimension, double exponent)
        : dimension(dimension), exponent(exponent) {
        if (dimension < 2) throw std::invalid_argument("ProblemParams: dimension must be >= 2");
        if (!(exponent > 1.0) || !(exponent < critical_exponent()))
            throw std::invalid_argument("ProblemParams: exponent outside (1, p_N)");
    }

    int dimension;
    double exponent;

    double critical_exponent() const {
        if (dimension == 2) return std::numeric_limits<double>::infinity();
        return static_cast<double>(dimension) / (dimension - 2);
    }

    /// Hoelder conjugate q = p/(p-1).
    double conjugate() const { return exponent / (exponent - 1.0); }
};

} // namespace pfb

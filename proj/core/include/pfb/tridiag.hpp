#pragma once

#include <span>
#include <vector>

namespace pfb::tridiag {

// LDL^T factorization of a symmetric positive definite tridiagonal matrix.
// d holds the pivots, e the unit subdiagonal multipliers.
struct Ldlt {
    std::vector<double> d;
    std::vector<double> e;
};

// Throws SolverError on a non-positive pivot (matrix not SPD).
Ldlt factor_spd(std::span<const double> diag, std::span<const double> sub);

void solve_in_place(const Ldlt& f, std::span<double> b);

// y = T x for symmetric tridiagonal T = (diag, sub).
void sym_mult(std::span<const double> diag, std::span<const double> sub,
              std::span<const double> x, std::span<double> y);

// LU with partial pivoting for a general tridiagonal matrix; pivoting
// introduces a second superdiagonal. Safe for the indefinite shifted
// matrices arising in the bordered Newton solves.
struct Plu {
    std::vector<double> low;   // multipliers
    std::vector<double> d;     // main diagonal of U
    std::vector<double> u1;    // first superdiagonal of U
    std::vector<double> u2;    // second superdiagonal of U
    std::vector<int> swapped;  // row interchange flags
    bool singular = false;
};

Plu factor_general(std::span<const double> diag, std::span<const double> sub,
                   std::span<const double> sup);

void solve_in_place(const Plu& f, std::span<double> b);

} // namespace pfb::tridiag

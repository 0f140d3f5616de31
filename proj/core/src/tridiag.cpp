#include "pfb/tridiag.hpp"

#include "pfb/errors.hpp"

#include <cmath>
#include <cstddef>

namespace pfb::tridiag {

Ldlt factor_spd(std::span<const double> diag, std::span<const double> sub) {
    const std::size_t n = diag.size();
    Ldlt f;
    f.d.resize(n);
    f.e.resize(n > 0 ? n - 1 : 0);
    double prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double di = diag[i];
        if (i > 0) di -= f.e[i - 1] * f.e[i - 1] * prev;
        if (!(di > 0.0)) throw SolverError("non-positive pivot in SPD tridiagonal factorization");
        f.d[i] = di;
        if (i + 1 < n) f.e[i] = sub[i] / di;
        prev = di;
    }
    return f;
}

void solve_in_place(const Ldlt& f, std::span<double> b) {
    const std::size_t n = f.d.size();
    for (std::size_t i = 1; i < n; ++i) b[i] -= f.e[i - 1] * b[i - 1];
    for (std::size_t i = 0; i < n; ++i) b[i] /= f.d[i];
    for (std::size_t i = n - 1; i-- > 0;) b[i] -= f.e[i] * b[i + 1];
}

void sym_mult(std::span<const double> diag, std::span<const double> sub,
              std::span<const double> x, std::span<double> y) {
    const std::size_t n = diag.size();
    if (n == 0) return;
    if (n == 1) {
        y[0] = diag[0] * x[0];
        return;
    }
    y[0] = diag[0] * x[0] + sub[0] * x[1];
    for (std::size_t i = 1; i + 1 < n; ++i)
        y[i] = sub[i - 1] * x[i - 1] + diag[i] * x[i] + sub[i] * x[i + 1];
    y[n - 1] = sub[n - 2] * x[n - 2] + diag[n - 1] * x[n - 1];
}

Plu factor_general(std::span<const double> diag, std::span<const double> sub,
                   std::span<const double> sup) {
    const std::size_t n = diag.size();
    Plu f;
    f.d.assign(diag.begin(), diag.end());
    f.u1.assign(n > 0 ? n - 1 : 0, 0.0);
    f.u2.assign(n > 1 ? n - 2 : 0, 0.0);
    f.low.assign(n > 0 ? n - 1 : 0, 0.0);
    f.swapped.assign(n > 0 ? n - 1 : 0, 0);
    for (std::size_t i = 0; i + 1 < n; ++i) f.u1[i] = sup[i];

    for (std::size_t i = 0; i + 1 < n; ++i) {
        double a = f.d[i];
        double b = sub[i];
        if (std::abs(b) > std::abs(a)) {
            // swap rows i and i+1
            f.swapped[i] = 1;
            std::swap(a, b);
            const double t1 = f.u1[i];
            f.u1[i] = f.d[i + 1];
            f.d[i + 1] = t1;
            if (i + 2 < n) {
                f.u2[i] = f.u1[i + 1];
                f.u1[i + 1] = 0.0;
            }
        }
        if (a == 0.0) {
            f.singular = true;
            a = 1e-300; // keep elimination well-defined; caller inspects the flag
        }
        const double m = b / a;
        f.low[i] = m;
        f.d[i] = a;
        f.d[i + 1] -= m * f.u1[i];
        if (i + 2 < n) f.u1[i + 1] -= m * f.u2[i];
    }
    if (n > 0 && f.d[n - 1] == 0.0) f.singular = true;
    return f;
}

void solve_in_place(const Plu& f, std::span<double> b) {
    const std::size_t n = f.d.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (f.swapped[i]) std::swap(b[i], b[i + 1]);
        b[i + 1] -= f.low[i] * b[i];
    }
    for (std::size_t i = n; i-- > 0;) {
        double v = b[i];
        if (i + 1 < n) v -= f.u1[i] * b[i + 1];
        if (i + 2 < n) v -= f.u2[i] * b[i + 2];
        b[i] = v / f.d[i];
    }
}

} // namespace pfb::tridiag

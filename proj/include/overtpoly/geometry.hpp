#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace overtpoly {

// Unevaluated double-double sum: value = hi + lo with |lo| <= ulp(hi)/2.
// Roughly 32 significant decimal digits; enough to separate the symbolic
// perturbation weights from exact geometric ties.
struct DD {
    double hi = 0.0;
    double lo = 0.0;
};

DD dd_from(double x);
DD dd_add(DD a, DD b);
DD dd_sub(DD a, DD b);
DD dd_mul(DD a, DD b);
DD dd_div(DD a, DD b);
double dd_abs_hi(DD a);

// Determinant of a row-major k-by-k matrix by LU with partial pivoting.
double det_double(int k, std::span<const double> m);
DD det_dd(int k, std::span<const double> m);

// Sign of the determinant: fast double path, double-double fallback when the
// double result is below 1e-7 times the matrix scale. Values that remain
// below 1e-26 * scale in extended precision are reported as 0.
int det_sign_robust(int k, std::span<const double> m);

// Solves a dense k-by-k system in place; returns false when singular within
// the pivot tolerance.
bool solve_linear(int k, std::vector<double> a, std::span<const double> b, std::span<double> out);

} // namespace overtpoly

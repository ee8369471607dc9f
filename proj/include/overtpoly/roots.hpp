#pragma once

#include <vector>

#include "overtpoly/expr.hpp"

namespace overtpoly {

struct RootIsolationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SignChangeReport {
    std::vector<double> roots;      // sorted, isolated to width <= tol
    bool identically_zero = false;  // e vanished on every subdivision
};

// Isolates the zeros of a univariate expression on [iv.lo, iv.hi] by
// recursive interval subdivision, then bisection. Tangential zeros (no sign
// flip) are conservatively reported as roots. Throws RootIsolationError for
// an unresolvable cluster wider than 1e6*tol.
SignChangeReport find_sign_changes(const Expr& e, Interval iv, double tol = 1e-10);

} // namespace overtpoly

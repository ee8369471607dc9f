#pragma once

#include <optional>
#include <vector>

#include "overtpoly/bounding_set.hpp"
#include "overtpoly/expr.hpp"
#include "overtpoly/interval.hpp"

namespace overtpoly {

// Piecewise-linear function through (breakpoints[i], values[i]).
struct PwlBound {
    std::vector<double> breakpoints;  // strictly increasing, size >= 2
    std::vector<double> values;

    // Interpolates at x, which must lie within [front, back] up to roundoff.
    double operator()(double x) const;
};

enum class ConvexityTag { Convex, Concave, Linear };

// endpoints[0] = a < ... < endpoints[m] = b with tags[i] describing f on
// (endpoints[i], endpoints[i+1]).
struct ConvexityPartition {
    std::vector<double> endpoints;
    std::vector<ConvexityTag> tags;
};

// Splits [a, b] at the zeros of f'' and tags each piece by the sign of f''.
ConvexityPartition convexity_partition(const Expr& f, double a, double b);

enum class BoundSide { Lower, Upper };

// k-segment bound of f over the piece, where f has one convexity throughout.
// The side that hugs f from outside the curve uses chords through points of
// f; the other side uses tangent segments meeting at consecutive tangent-line
// intersections. Breakpoint and tangent-point positions are area-optimized.
PwlBound bound_convex_piece(const Expr& f, Interval piece, int k, BoundSide side);

// Bounds f over [a, b]: convexity partition, k-segment bounds per piece,
// stitched onto the union of all breakpoints, then inflated outward by
// eps_num (default 1e-9 * (1 + max |f| on the breakpoints)). f must have
// exactly one free variable, which names the output's single axis.
BoundingSet bound_univariate(const Expr& f, double a, double b, int k,
                             std::optional<double> eps_num = {});

}  // namespace overtpoly

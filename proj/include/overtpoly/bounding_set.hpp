#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "overtpoly/expr.hpp"
#include "overtpoly/interval.hpp"
#include "overtpoly/triangulation.hpp"

namespace overtpoly {

// Gridded lower/upper envelopes of a function of the listed variables.
// Axis a carries variable vars[a]; vars is strictly increasing. lower/upper
// are row-major over the grid with axis 0 slowest, matching PointSet::grid.
struct BoundingSet {
    std::vector<int> vars;
    std::vector<std::vector<double>> axes;
    std::vector<double> lower;
    std::vector<double> upper;

    int dim() const { return static_cast<int>(axes.size()); }
    std::size_t grid_size() const;
    PointSet grid() const;

    // Structural invariants, including L(p) <= U(p) everywhere.
    void validate() const;
};

// Target frame for lift(). vars must be a strictly increasing superset of
// the source's; pad_lo/pad_hi are indexed like vars and read only for axes
// absent from the source, where pad_lo[a] < pad_hi[a] is required.
struct LiftSpec {
    std::vector<int> vars;
    std::vector<double> pad_lo;
    std::vector<double> pad_hi;
};

// {(p, L(p))} followed by {(p, U(p))}, minus duplicates where L(p) = U(p).
// Each vertex has dim()+1 coordinates.
std::vector<std::vector<double>> polyhedron_vertices(const BoundingSet& b);

BoundingSet lift(const BoundingSet& b, const LiftSpec& spec);

// Inserts each coordinate of q into the matching axis; values at new grid
// points are barycentric interpolants of the old bounds through t, which
// must triangulate b.grid(). Coordinates already on an axis (within the
// dedup tolerance) insert nothing. q must lie inside dom(b).
BoundingSet expand_and_interpolate(const BoundingSet& b, const Triangulation& t,
                                   std::span<const double> q);

// Lifts both sets onto the union of their variables, then inserts every
// missing axis value into each so both end up on the identical merged grid.
// Padding for an axis absent from one operand is that axis's value range in
// the other.
std::pair<BoundingSet, BoundingSet> align_domains(const BoundingSet& bf, const BoundingSet& bg);

// Pointwise arithmetic on identical grids. Mul/Div evaluate the four-product
// table with one operand replaced by its global grid extrema, which keeps
// barycentric interpolants of the result sound; Div requires the denominator
// range to exclude zero and reports an offending grid point otherwise.
BoundingSet compose(const BoundingSet& bf, const BoundingSet& bg, BinOp op);

struct BoundOptions {
    int divisions = 2;                // PWL segments per convexity piece
    std::optional<double> eps_num;    // overrides the default safety inflation
};

// Bottom-up enclosure of a decomposed expression. box[i-1] is the range of
// variable xi and must cover every free variable; constant trees bound over
// the corner grid of the whole box.
BoundingSet bound_expression(const SyntaxTree& t, std::span<const Interval> box,
                             const BoundOptions& opt = {});

struct EnclosureReport {
    int samples = 0;
    double max_lower_violation = 0.0;  // max over samples of L(x) - f(x)
    double max_upper_violation = 0.0;  // max over samples of f(x) - U(x)

    bool ok(double tol) const {
        return max_lower_violation <= tol && max_upper_violation <= tol;
    }
};

// Samples dom(b) uniformly and compares the interpolated envelopes against
// f, which may read any variable in b.vars.
EnclosureReport check_enclosure_sampled(const BoundingSet& b, const Expr& f, int samples,
                                        std::uint64_t seed = 0);

// {"n": dim, "axes": [[...]], "L": [...], "U": [...]}, row-major grid order.
std::string to_json(const BoundingSet& b);

}  // namespace overtpoly

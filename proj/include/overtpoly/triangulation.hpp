#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace overtpoly {

// Finite set of points in R^n, optionally structured as an axis-aligned grid
// (Cartesian product of per-axis sorted coordinate lists). Grid enumeration is
// row-major with axis 0 slowest.
class PointSet {
public:
    static PointSet from_points(int dim, std::vector<double> coords);
    static PointSet grid(std::vector<std::vector<double>> axes);

    int dim() const { return dim_; }
    int count() const { return dim_ == 0 ? 0 : static_cast<int>(coords_.size()) / dim_; }
    std::span<const double> point(int i) const { return {coords_.data() + static_cast<size_t>(i) * dim_, static_cast<size_t>(dim_)}; }
    std::span<const double> flat() const { return coords_; }

    bool is_grid() const { return !axes_.empty(); }
    const std::vector<std::vector<double>>& axes() const { return axes_; }
    // Resolution vector: number of values per axis.
    std::vector<int> resolution() const;

private:
    int dim_ = 0;
    std::vector<double> coords_;
    std::vector<std::vector<double>> axes_;
};

// Indices of the grid points sharing at least one coordinate with q (the star
// of q). q must be a grid point.
std::vector<int> grid_star(const PointSet& grid, std::span<const double> q);

struct Triangulation {
    int dim = 0;
    std::vector<double> points;                 // flat, dim per point
    std::vector<std::vector<int>> simplices;    // each sorted ascending, dim+1 ids
    std::vector<std::vector<int>> neighbors;    // aligned opposite vertex, -1 = hull

    std::span<const double> point(int i) const { return {points.data() + static_cast<size_t>(i) * dim, static_cast<size_t>(dim)}; }
    double simplex_volume(int s) const;
};

// Incremental Bowyer-Watson on the paraboloid lift. Cospherical ties are broken
// by a deterministic per-index weight perturbation, so equal inputs produce
// equal triangulations. Dimension is capped at 6.
Triangulation delaunay_triangulate(const PointSet& p);

struct Barycentric {
    int simplex = -1;
    std::vector<double> theta; // dim+1 coefficients, >= 0, summing to 1
};

// Finds a simplex containing x and the convex coefficients of x in it.
// Points on shared faces resolve to the lowest-index containing simplex.
Barycentric locate_and_barycentric(const Triangulation& t, std::span<const double> x);

} // namespace overtpoly

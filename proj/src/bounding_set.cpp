#include "overtpoly/bounding_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "overtpoly/univariate.hpp"

namespace overtpoly {

namespace {

double axis_tol(double v) { return 1e-12 * (1.0 + std::abs(v)); }

// Index of v in the sorted axis, -1 if absent.
int axis_find(const std::vector<double>& axis, double v) {
    auto it = std::lower_bound(axis.begin(), axis.end(), v);
    if (it != axis.end() && std::abs(*it - v) <= axis_tol(v)) return static_cast<int>(it - axis.begin());
    if (it != axis.begin() && std::abs(*(it - 1) - v) <= axis_tol(v)) return static_cast<int>(it - axis.begin()) - 1;
    return -1;
}

std::vector<std::size_t> row_major_strides(const std::vector<std::vector<double>>& axes) {
    std::vector<std::size_t> s(axes.size());
    std::size_t acc = 1;
    for (std::size_t a = axes.size(); a-- > 0;) {
        s[a] = acc;
        acc *= axes[a].size();
    }
    return s;
}

// Odometer over the grid shape; calls fn(multi_index, flat_index).
template <typename Fn>
void for_each_cell(const std::vector<std::vector<double>>& axes, Fn&& fn) {
    std::vector<std::size_t> idx(axes.size(), 0);
    std::size_t flat = 0;
    for (;;) {
        fn(idx, flat);
        ++flat;
        std::size_t a = axes.size();
        while (a-- > 0) {
            if (++idx[a] < axes[a].size()) break;
            idx[a] = 0;
            if (a == 0) return;
        }
    }
}

std::string point_to_string(const std::vector<double>& p) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
    os << ")";
    return os.str();
}

}  // namespace

std::size_t BoundingSet::grid_size() const {
    std::size_t n = 1;
    for (const auto& axis : axes) n *= axis.size();
    return n;
}

PointSet BoundingSet::grid() const { return PointSet::grid(axes); }

void BoundingSet::validate() const {
    if (axes.empty()) throw std::invalid_argument("bounding set needs at least one axis");
    if (vars.size() != axes.size())
        throw std::invalid_argument("bounding set axis/variable count mismatch");
    for (std::size_t a = 0; a < vars.size(); ++a) {
        if (vars[a] < 1 || (a > 0 && vars[a] <= vars[a - 1]))
            throw std::invalid_argument("bounding set variables must be strictly increasing");
        if (axes[a].size() < 2) throw std::invalid_argument("bounding set axis needs >= 2 values");
        for (std::size_t i = 1; i < axes[a].size(); ++i)
            if (!(axes[a][i - 1] < axes[a][i]))
                throw std::invalid_argument("bounding set axis values must be strictly increasing");
    }
    const std::size_t n = grid_size();
    if (lower.size() != n || upper.size() != n)
        throw std::invalid_argument("bounding set bound array size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]))
            throw std::invalid_argument("bounding set bounds must be finite");
        if (lower[i] > upper[i])
            throw std::invalid_argument("bounding set lower bound exceeds upper bound");
    }
}

std::vector<std::vector<double>> polyhedron_vertices(const BoundingSet& b) {
    const PointSet grid = b.grid();
    std::vector<std::vector<double>> verts;
    verts.reserve(2 * b.grid_size());
    for (int i = 0; i < grid.count(); ++i) {
        auto p = grid.point(i);
        std::vector<double> v(p.begin(), p.end());
        v.push_back(b.lower[static_cast<std::size_t>(i)]);
        verts.push_back(std::move(v));
    }
    for (int i = 0; i < grid.count(); ++i) {
        if (b.upper[static_cast<std::size_t>(i)] == b.lower[static_cast<std::size_t>(i)]) continue;
        auto p = grid.point(i);
        std::vector<double> v(p.begin(), p.end());
        v.push_back(b.upper[static_cast<std::size_t>(i)]);
        verts.push_back(std::move(v));
    }
    return verts;
}

BoundingSet lift(const BoundingSet& b, const LiftSpec& spec) {
    b.validate();
    if (spec.vars.size() <= b.vars.size())
        throw std::invalid_argument("lift target must add at least one axis");
    if (spec.pad_lo.size() != spec.vars.size() || spec.pad_hi.size() != spec.vars.size())
        throw std::invalid_argument("lift padding must be indexed like the target variables");

    // source_axis[a] is the axis of b carried by target axis a, -1 for new.
    std::vector<int> source_axis(spec.vars.size(), -1);
    std::size_t consumed = 0;
    for (std::size_t a = 0; a < spec.vars.size(); ++a) {
        if (a > 0 && spec.vars[a] <= spec.vars[a - 1])
            throw std::invalid_argument("lift target variables must be strictly increasing");
        if (consumed < b.vars.size() && b.vars[consumed] == spec.vars[a])
            source_axis[a] = static_cast<int>(consumed++);
    }
    if (consumed != b.vars.size())
        throw std::invalid_argument("lift target must contain every source variable");

    BoundingSet out;
    out.vars = spec.vars;
    out.axes.resize(spec.vars.size());
    for (std::size_t a = 0; a < spec.vars.size(); ++a) {
        if (source_axis[a] >= 0) {
            out.axes[a] = b.axes[static_cast<std::size_t>(source_axis[a])];
        } else {
            if (!(spec.pad_lo[a] < spec.pad_hi[a]))
                throw std::invalid_argument("lift padding must satisfy pad_lo < pad_hi");
            out.axes[a] = {spec.pad_lo[a], spec.pad_hi[a]};
        }
    }

    const auto src_strides = row_major_strides(b.axes);
    out.lower.resize(out.grid_size());
    out.upper.resize(out.grid_size());
    for_each_cell(out.axes, [&](const std::vector<std::size_t>& idx, std::size_t flat) {
        std::size_t src = 0;
        for (std::size_t a = 0; a < idx.size(); ++a)
            if (source_axis[a] >= 0) src += idx[a] * src_strides[static_cast<std::size_t>(source_axis[a])];
        out.lower[flat] = b.lower[src];
        out.upper[flat] = b.upper[src];
    });
    return out;
}

BoundingSet expand_and_interpolate(const BoundingSet& b, const Triangulation& t,
                                   std::span<const double> q) {
    b.validate();
    if (static_cast<int>(q.size()) != b.dim())
        throw std::invalid_argument("expansion point dimension mismatch");

    // new_pos[a] >= 0 marks the slot q[a] takes in the widened axis.
    std::vector<int> new_pos(q.size(), -1);
    bool any_new = false;
    for (std::size_t a = 0; a < q.size(); ++a) {
        const auto& axis = b.axes[a];
        if (q[a] < axis.front() - axis_tol(q[a]) || q[a] > axis.back() + axis_tol(q[a]))
            throw std::invalid_argument("expansion point lies outside the bounding set domain");
        if (axis_find(axis, q[a]) >= 0) continue;
        new_pos[a] = static_cast<int>(std::lower_bound(axis.begin(), axis.end(), q[a]) - axis.begin());
        any_new = true;
    }
    if (!any_new) return b;

    BoundingSet out;
    out.vars = b.vars;
    out.axes = b.axes;
    for (std::size_t a = 0; a < q.size(); ++a)
        if (new_pos[a] >= 0) out.axes[a].insert(out.axes[a].begin() + new_pos[a], q[a]);

    const auto src_strides = row_major_strides(b.axes);
    out.lower.resize(out.grid_size());
    out.upper.resize(out.grid_size());
    std::vector<double> w(q.size());
    for_each_cell(out.axes, [&](const std::vector<std::size_t>& idx, std::size_t flat) {
        bool carried = true;
        std::size_t src = 0;
        for (std::size_t a = 0; a < idx.size(); ++a) {
            const int np = new_pos[a];
            if (np >= 0 && idx[a] == static_cast<std::size_t>(np)) {
                carried = false;
                break;
            }
            std::size_t old_i = idx[a];
            if (np >= 0 && idx[a] > static_cast<std::size_t>(np)) --old_i;
            src += old_i * src_strides[a];
        }
        if (carried) {
            out.lower[flat] = b.lower[src];
            out.upper[flat] = b.upper[src];
            return;
        }
        for (std::size_t a = 0; a < idx.size(); ++a) w[a] = out.axes[a][idx[a]];
        const Barycentric bc = locate_and_barycentric(t, w);
        const auto& verts = t.simplices[static_cast<std::size_t>(bc.simplex)];
        double lo = 0.0, up = 0.0;
        for (std::size_t i = 0; i < verts.size(); ++i) {
            lo += bc.theta[i] * b.lower[static_cast<std::size_t>(verts[i])];
            up += bc.theta[i] * b.upper[static_cast<std::size_t>(verts[i])];
        }
        out.lower[flat] = lo;
        out.upper[flat] = up;
    });
    return out;
}

namespace {

// Inserts every target axis value missing from b, one value per pass,
// re-triangulating the grid between insertions.
BoundingSet insert_missing(BoundingSet b, const std::vector<std::vector<double>>& target) {
    for (std::size_t a = 0; a < target.size(); ++a) {
        for (double v : target[a]) {
            if (axis_find(b.axes[a], v) >= 0) continue;
            const Triangulation tri = delaunay_triangulate(b.grid());
            std::vector<double> q(b.axes.size());
            for (std::size_t j = 0; j < b.axes.size(); ++j) q[j] = b.axes[j].front();
            q[a] = v;
            b = expand_and_interpolate(b, tri, q);
        }
    }
    return b;
}

}  // namespace

std::pair<BoundingSet, BoundingSet> align_domains(const BoundingSet& bf, const BoundingSet& bg) {
    bf.validate();
    bg.validate();

    std::vector<int> vars_u;
    std::merge(bf.vars.begin(), bf.vars.end(), bg.vars.begin(), bg.vars.end(),
               std::back_inserter(vars_u));
    vars_u.erase(std::unique(vars_u.begin(), vars_u.end()), vars_u.end());

    auto lift_to_union = [&](const BoundingSet& b, const BoundingSet& other) {
        if (b.vars == vars_u) return b;
        LiftSpec spec;
        spec.vars = vars_u;
        spec.pad_lo.resize(vars_u.size());
        spec.pad_hi.resize(vars_u.size());
        for (std::size_t a = 0; a < vars_u.size(); ++a) {
            auto it = std::find(b.vars.begin(), b.vars.end(), vars_u[a]);
            if (it != b.vars.end()) continue;
            auto jt = std::find(other.vars.begin(), other.vars.end(), vars_u[a]);
            const auto& axis = other.axes[static_cast<std::size_t>(jt - other.vars.begin())];
            spec.pad_lo[a] = axis.front();
            spec.pad_hi[a] = axis.back();
        }
        return lift(b, spec);
    };
    BoundingSet lf = lift_to_union(bf, bg);
    BoundingSet lg = lift_to_union(bg, bf);

    std::vector<std::vector<double>> merged(vars_u.size());
    for (std::size_t a = 0; a < vars_u.size(); ++a) {
        std::vector<double> vals = lf.axes[a];
        vals.insert(vals.end(), lg.axes[a].begin(), lg.axes[a].end());
        std::sort(vals.begin(), vals.end());
        for (double v : vals)
            if (merged[a].empty() || v - merged[a].back() > axis_tol(v)) merged[a].push_back(v);
    }

    return {insert_missing(std::move(lf), merged), insert_missing(std::move(lg), merged)};
}

BoundingSet compose(const BoundingSet& bf, const BoundingSet& bg, BinOp op) {
    bf.validate();
    bg.validate();
    if (bf.vars != bg.vars) throw std::invalid_argument("compose requires identical variables");
    for (std::size_t a = 0; a < bf.axes.size(); ++a) {
        if (bf.axes[a].size() != bg.axes[a].size())
            throw std::invalid_argument("compose requires identical grids");
        for (std::size_t i = 0; i < bf.axes[a].size(); ++i)
            if (std::abs(bf.axes[a][i] - bg.axes[a][i]) > 1e-9 * (1.0 + std::abs(bf.axes[a][i])))
                throw std::invalid_argument("compose requires identical grids");
    }

    const std::size_t n = bf.grid_size();
    BoundingSet out;
    out.vars = bf.vars;
    out.axes = bf.axes;
    out.lower.resize(n);
    out.upper.resize(n);

    auto global_range = [n](const BoundingSet& b) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            lo = std::min(lo, b.lower[i]);
            hi = std::max(hi, b.upper[i]);
        }
        return std::pair{lo, hi};
    };

    switch (op) {
        case BinOp::Add:
            for (std::size_t i = 0; i < n; ++i) {
                out.lower[i] = bf.lower[i] + bg.lower[i];
                out.upper[i] = bf.upper[i] + bg.upper[i];
            }
            break;
        case BinOp::Sub:
            for (std::size_t i = 0; i < n; ++i) {
                out.lower[i] = bf.lower[i] - bg.upper[i];
                out.upper[i] = bf.upper[i] - bg.lower[i];
            }
            break;
        case BinOp::Mul: {
            // A pointwise product table is not interpolation-safe when both
            // factors vary across a simplex (the gap is the covariance of the
            // vertex values under theta). Every candidate below replaces at
            // least one factor by global constants, which makes the vertex
            // array linear in the remaining per-vertex bounds and therefore
            // safe to interpolate. The tightest candidate by total mass wins.
            const auto [fmin, fmax] = global_range(bf);
            const auto [gmin, gmax] = global_range(bg);

            auto best = [&](std::vector<std::vector<double>> cands, bool lower_side) {
                std::size_t pick = 0;
                double pick_sum = 0.0;
                for (std::size_t c = 0; c < cands.size(); ++c) {
                    double s = 0.0;
                    for (double v : cands[c]) s += v;
                    if (c == 0 || (lower_side ? s > pick_sum : s < pick_sum)) {
                        pick = c;
                        pick_sum = s;
                    }
                }
                return std::move(cands[pick]);
            };

            auto scale_lo = [&](double c, const BoundingSet& b, std::size_t i) {
                return c * (c >= 0.0 ? b.lower[i] : b.upper[i]);
            };
            auto scale_hi = [&](double c, const BoundingSet& b, std::size_t i) {
                return c * (c >= 0.0 ? b.upper[i] : b.lower[i]);
            };

            std::vector<std::vector<double>> lows(4, std::vector<double>(n));
            std::vector<std::vector<double>> highs(4, std::vector<double>(n));
            for (std::size_t i = 0; i < n; ++i) {
                // Globalized right factor, then globalized left factor.
                lows[0][i] = std::min(scale_lo(gmin, bf, i), scale_lo(gmax, bf, i));
                highs[0][i] = std::max(scale_hi(gmin, bf, i), scale_hi(gmax, bf, i));
                lows[1][i] = std::min(scale_lo(fmin, bg, i), scale_lo(fmax, bg, i));
                highs[1][i] = std::max(scale_hi(fmin, bg, i), scale_hi(fmax, bg, i));
                // McCormick planes fg >= fmin*g + f*gmin - fmin*gmin etc.,
                // with each term rounded through the matching bound array.
                lows[2][i] = scale_lo(fmin, bg, i) + scale_lo(gmin, bf, i) - fmin * gmin;
                lows[3][i] = scale_lo(fmax, bg, i) + scale_lo(gmax, bf, i) - fmax * gmax;
                highs[2][i] = scale_hi(fmin, bg, i) + scale_hi(gmax, bf, i) - fmin * gmax;
                highs[3][i] = scale_hi(fmax, bg, i) + scale_hi(gmin, bf, i) - fmax * gmin;
            }
            out.lower = best(std::move(lows), true);
            out.upper = best(std::move(highs), false);
            break;
        }
        case BinOp::Div: {
            const auto [gmin, gmax] = global_range(bg);
            if (gmin <= 0.0 && gmax >= 0.0) {
                const PointSet grid = bg.grid();
                std::size_t bad = 0;
                for (std::size_t i = 0; i < n; ++i)
                    if (bg.lower[i] <= 0.0 && bg.upper[i] >= 0.0) {
                        bad = i;
                        break;
                    }
                auto p = grid.point(static_cast<int>(bad));
                throw DomainError("division by a bounding set whose range contains zero near grid point " +
                                  point_to_string({p.begin(), p.end()}) + " with bounds [" +
                                  std::to_string(bg.lower[bad]) + ", " + std::to_string(bg.upper[bad]) + "]");
            }
            // The numerator stays per-vertex; 1/denominator enters only
            // through its sign-definite global range, evaluated at interval
            // endpoints where the linear-in-1/c bound attains its extremes.
            for (std::size_t i = 0; i < n; ++i) {
                const double c0 = bf.lower[i] / gmin;
                const double c1 = bf.lower[i] / gmax;
                const double c2 = bf.upper[i] / gmin;
                const double c3 = bf.upper[i] / gmax;
                out.lower[i] = std::min({c0, c1, c2, c3});
                out.upper[i] = std::max({c0, c1, c2, c3});
            }
            break;
        }
    }
    out.validate();
    return out;
}

BoundingSet bound_expression(const SyntaxTree& t, std::span<const Interval> box,
                             const BoundOptions& opt) {
    if (box.empty()) throw std::invalid_argument("bound_expression requires a nonempty box");
    for (const Interval& iv : box)
        if (!(iv.lo < iv.hi)) throw std::invalid_argument("bound_expression box axes must have width");

    if (t.leaf) {
        const auto& free = t.func.free_vars();
        if (free.empty()) {
            const double c = evaluate(t.func, {});
            BoundingSet out;
            out.vars.resize(box.size());
            out.axes.resize(box.size());
            for (std::size_t i = 0; i < box.size(); ++i) {
                out.vars[i] = static_cast<int>(i) + 1;
                out.axes[i] = {box[i].lo, box[i].hi};
            }
            out.lower.assign(out.grid_size(), c);
            out.upper.assign(out.grid_size(), c);
            return out;
        }
        const int var = free.front();
        if (static_cast<std::size_t>(var) > box.size())
            throw std::invalid_argument("bound_expression box does not cover every free variable");
        return bound_univariate(t.func, box[static_cast<std::size_t>(var) - 1].lo,
                                box[static_cast<std::size_t>(var) - 1].hi, opt.divisions,
                                opt.eps_num);
    }

    BoundingSet acc = bound_expression(t.children.front(), box, opt);
    for (std::size_t i = 1; i < t.children.size(); ++i) {
        const BoundingSet rhs = bound_expression(t.children[i], box, opt);
        auto [af, ag] = align_domains(acc, rhs);
        acc = compose(af, ag, t.op);
    }
    return acc;
}

EnclosureReport check_enclosure_sampled(const BoundingSet& b, const Expr& f, int samples,
                                        std::uint64_t seed) {
    b.validate();
    const Triangulation tri = delaunay_triangulate(b.grid());

    int max_var = f.max_var();
    for (int v : b.vars) max_var = std::max(max_var, v);
    std::vector<double> x(static_cast<std::size_t>(max_var), 0.0);

    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::uniform_real_distribution<double>> dist;
    dist.reserve(b.axes.size());
    for (const auto& axis : b.axes) dist.emplace_back(axis.front(), axis.back());

    EnclosureReport rep;
    rep.samples = samples;
    std::vector<double> pt(b.axes.size());
    for (int s = 0; s < samples; ++s) {
        for (std::size_t a = 0; a < b.axes.size(); ++a) pt[a] = dist[a](rng);
        const Barycentric bc = locate_and_barycentric(tri, pt);
        const auto& verts = tri.simplices[static_cast<std::size_t>(bc.simplex)];
        double lo = 0.0, up = 0.0;
        for (std::size_t i = 0; i < verts.size(); ++i) {
            lo += bc.theta[i] * b.lower[static_cast<std::size_t>(verts[i])];
            up += bc.theta[i] * b.upper[static_cast<std::size_t>(verts[i])];
        }
        for (std::size_t a = 0; a < b.axes.size(); ++a)
            x[static_cast<std::size_t>(b.vars[a]) - 1] = pt[a];
        const double fx = evaluate(f, x);
        rep.max_lower_violation = std::max(rep.max_lower_violation, lo - fx);
        rep.max_upper_violation = std::max(rep.max_upper_violation, fx - up);
    }
    return rep;
}

std::string to_json(const BoundingSet& b) {
    nlohmann::json j;
    j["n"] = b.dim();
    j["axes"] = b.axes;
    j["L"] = b.lower;
    j["U"] = b.upper;
    return j.dump();
}

}  // namespace overtpoly

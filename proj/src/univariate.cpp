#include "overtpoly/univariate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "overtpoly/roots.hpp"

namespace overtpoly {

namespace {

// Reusable evaluation buffer; the hot loops below call f tens of thousands
// of times per piece.
class Fn1 {
public:
    Fn1(const Expr& f, int var) : f_(&f), var_(var), buf_(static_cast<std::size_t>(var), 0.0) {}

    double operator()(double x) const {
        buf_[static_cast<std::size_t>(var_) - 1] = x;
        return evaluate(*f_, buf_);
    }

private:
    const Expr* f_;
    int var_;
    mutable std::vector<double> buf_;
};

constexpr int kQuadNodes = 64;      // trapezoid intervals per segment
constexpr int kGoldenIters = 40;
constexpr int kDescentRounds = 50;
constexpr double kMergeWidth = 1e-8;

double trapezoid(const std::vector<double>& ys, double h) {
    double s = 0.5 * (ys.front() + ys.back());
    for (std::size_t i = 1; i + 1 < ys.size(); ++i) s += ys[i];
    return s * h;
}

// Area between the chord through (u, f(u)), (v, f(v)) and f itself.
double chord_gap_area(const Fn1& f, double u, double v) {
    const double fu = f(u);
    const double fv = f(v);
    const double h = (v - u) / kQuadNodes;
    std::vector<double> ys(kQuadNodes + 1);
    for (int i = 0; i <= kQuadNodes; ++i) {
        const double x = u + h * i;
        const double t = (v - u) > 0.0 ? (x - u) / (v - u) : 0.0;
        ys[static_cast<std::size_t>(i)] = std::abs(fu + t * (fv - fu) - f(x));
    }
    return trapezoid(ys, h);
}

template <typename Obj>
double golden_min(double lo, double hi, const Obj& obj) {
    constexpr double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = obj(x1), f2 = obj(x2);
    for (int it = 0; it < kGoldenIters; ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = obj(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = obj(x2);
        }
    }
    return 0.5 * (a + b);
}

PwlBound chord_bound(const Fn1& f, double a, double b, int k) {
    std::vector<double> s(static_cast<std::size_t>(k) + 1);
    for (int i = 0; i <= k; ++i) s[static_cast<std::size_t>(i)] = a + (b - a) * i / k;

    if (k >= 2) {
        const double guard = 1e-9 * (b - a);
        double prev_total = std::numeric_limits<double>::infinity();
        for (int round = 0; round < kDescentRounds; ++round) {
            for (int i = 1; i < k; ++i) {
                const double lo = s[static_cast<std::size_t>(i) - 1] + guard;
                const double hi = s[static_cast<std::size_t>(i) + 1] - guard;
                if (!(lo < hi)) continue;
                auto local = [&](double x) {
                    return chord_gap_area(f, s[static_cast<std::size_t>(i) - 1], x) +
                           chord_gap_area(f, x, s[static_cast<std::size_t>(i) + 1]);
                };
                s[static_cast<std::size_t>(i)] = golden_min(lo, hi, local);
            }
            double total = 0.0;
            for (int i = 0; i < k; ++i)
                total += chord_gap_area(f, s[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(i) + 1]);
            if (prev_total - total < 1e-12 * (1.0 + std::abs(total))) break;
            prev_total = total;
        }
    }

    PwlBound out;
    out.breakpoints = s;
    out.values.resize(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out.values[i] = f(s[i]);
    return out;
}

struct TangentLine {
    double x0, y0, slope;
    double operator()(double x) const { return y0 + slope * (x - x0); }
};

// Envelope of the tangent lines at the given touch points. For a convex f
// this is the pointwise max of lines below the graph (below = true); the
// concave case mirrors. Returns nullopt when the slopes fail to be strictly
// monotone, which only happens on numerically flat pieces.
std::optional<PwlBound> tangent_envelope(const Fn1& f, const Fn1& df, std::vector<double> touch,
                                         bool below, double a, double b) {
    const std::size_t k = touch.size();
    std::vector<TangentLine> lines(k);
    for (std::size_t j = 0; j < k; ++j) lines[j] = {touch[j], f(touch[j]), df(touch[j])};

    double slope_scale = 0.0;
    for (const auto& ln : lines) slope_scale = std::max(slope_scale, std::abs(ln.slope));
    for (std::size_t j = 0; j + 1 < k; ++j) {
        const double d = lines[j + 1].slope - lines[j].slope;
        if (std::abs(d) <= 1e-12 * (1.0 + slope_scale)) return std::nullopt;
        if (below ? d < 0.0 : d > 0.0) return std::nullopt;  // convexity tag was wrong
    }

    PwlBound out;
    out.breakpoints.push_back(a);
    out.values.push_back(lines.front()(a));
    for (std::size_t j = 0; j + 1 < k; ++j) {
        const double denom = lines[j].slope - lines[j + 1].slope;
        double xs = (lines[j + 1].y0 - lines[j + 1].slope * lines[j + 1].x0 -
                     (lines[j].y0 - lines[j].slope * lines[j].x0)) /
                    denom;
        xs = std::clamp(xs, touch[j], touch[j + 1]);
        if (xs <= out.breakpoints.back() + 1e-13 * (b - a)) continue;
        // min/max of the adjacent lines keeps every segment under (over) a
        // single tangent line even after clamping.
        const double v0 = lines[j](xs);
        const double v1 = lines[j + 1](xs);
        out.breakpoints.push_back(xs);
        out.values.push_back(below ? std::min(v0, v1) : std::max(v0, v1));
    }
    if (b <= out.breakpoints.back() + 1e-13 * (b - a)) return std::nullopt;
    out.breakpoints.push_back(b);
    out.values.push_back(lines.back()(b));
    return out;
}

double envelope_gap_area(const Fn1& f, const PwlBound& env) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < env.breakpoints.size(); ++i) {
        const double u = env.breakpoints[i];
        const double v = env.breakpoints[i + 1];
        const double h = (v - u) / kQuadNodes;
        std::vector<double> ys(kQuadNodes + 1);
        for (int q = 0; q <= kQuadNodes; ++q) {
            const double x = u + h * q;
            const double t = (v - u) > 0.0 ? (x - u) / (v - u) : 0.0;
            const double e = env.values[i] + t * (env.values[i + 1] - env.values[i]);
            ys[static_cast<std::size_t>(q)] = std::abs(f(x) - e);
        }
        total += trapezoid(ys, h);
    }
    return total;
}

// k tangent lines; the first and last touch at the endpoints so the bound
// pins f there. k = 1 touches at the midpoint only (pinning is impossible
// with a single tangent). Interior touch points are area-optimized.
std::optional<PwlBound> tangent_bound(const Fn1& f, const Fn1& df, double a, double b, int k,
                                      bool below) {
    std::vector<double> touch;
    if (k == 1) {
        touch = {0.5 * (a + b)};
    } else {
        touch.resize(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j) touch[static_cast<std::size_t>(j)] = a + (b - a) * j / (k - 1);
    }

    auto env = tangent_envelope(f, df, touch, below, a, b);
    if (!env) return std::nullopt;

    if (k >= 3) {
        const double guard = 1e-9 * (b - a);
        double prev_total = envelope_gap_area(f, *env);
        for (int round = 0; round < kDescentRounds; ++round) {
            for (int j = 1; j + 1 < k; ++j) {
                const double lo = touch[static_cast<std::size_t>(j) - 1] + guard;
                const double hi = touch[static_cast<std::size_t>(j) + 1] - guard;
                if (!(lo < hi)) continue;
                auto local = [&](double x) {
                    auto t = touch;
                    t[static_cast<std::size_t>(j)] = x;
                    auto e = tangent_envelope(f, df, t, below, a, b);
                    return e ? envelope_gap_area(f, *e) : std::numeric_limits<double>::infinity();
                };
                touch[static_cast<std::size_t>(j)] = golden_min(lo, hi, local);
            }
            auto e = tangent_envelope(f, df, touch, below, a, b);
            if (!e) return std::nullopt;
            env = std::move(e);
            const double total = envelope_gap_area(f, *env);
            if (prev_total - total < 1e-12 * (1.0 + std::abs(total))) break;
            prev_total = total;
        }
    }
    return env;
}

ConvexityTag tag_piece(const Expr& f2, int var, Interval piece, const Fn1& f2fn) {
    std::vector<Interval> box(static_cast<std::size_t>(var), Interval(0.0));
    box[static_cast<std::size_t>(var) - 1] = piece;
    Interval s = interval_evaluate(f2, box);
    constexpr double kFlat = 1e-11;
    if (s.lo >= -kFlat && s.hi <= kFlat) return ConvexityTag::Linear;
    if (s.lo >= 0.0) return ConvexityTag::Convex;
    if (s.hi <= 0.0) return ConvexityTag::Concave;

    // The interval evaluation straddles zero from overestimation alone; the
    // piece came from root isolation, so point samples share one sign.
    double best = 0.0;
    for (int i = 1; i <= 33; ++i) {
        const double x = piece.lo + (piece.hi - piece.lo) * i / 34.0;
        const double v = f2fn(x);
        if (std::abs(v) > std::abs(best)) best = v;
    }
    if (std::abs(best) <= kFlat) return ConvexityTag::Linear;
    return best > 0.0 ? ConvexityTag::Convex : ConvexityTag::Concave;
}

}  // namespace

double PwlBound::operator()(double x) const {
    const double xc = std::clamp(x, breakpoints.front(), breakpoints.back());
    auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), xc);
    std::size_t i = static_cast<std::size_t>(it - breakpoints.begin());
    if (i == 0) i = 1;
    if (i >= breakpoints.size()) i = breakpoints.size() - 1;
    const double u = breakpoints[i - 1];
    const double v = breakpoints[i];
    const double t = v > u ? (xc - u) / (v - u) : 0.0;
    return values[i - 1] + t * (values[i] - values[i - 1]);
}

ConvexityPartition convexity_partition(const Expr& f, double a, double b) {
    if (!(a < b)) throw std::invalid_argument("convexity_partition requires a < b");
    const auto& vars = f.free_vars();
    if (vars.size() > 1)
        throw std::invalid_argument("convexity_partition requires a univariate expression");
    const int var = vars.empty() ? 1 : vars.front();

    const Expr f2 = differentiate(differentiate(f, var), var);
    const Fn1 f2fn(f2, var);

    ConvexityPartition part;
    part.endpoints.push_back(a);

    const SignChangeReport rep = find_sign_changes(f2, Interval(a, b));
    if (rep.identically_zero) {
        part.endpoints.push_back(b);
        part.tags.push_back(ConvexityTag::Linear);
        return part;
    }
    for (double r : rep.roots) {
        if (r - part.endpoints.back() < kMergeWidth) continue;  // sliver, merge left
        if (b - r < kMergeWidth) continue;                      // sliver, merge right
        part.endpoints.push_back(r);
    }
    part.endpoints.push_back(b);

    for (std::size_t i = 0; i + 1 < part.endpoints.size(); ++i)
        part.tags.push_back(
            tag_piece(f2, var, Interval(part.endpoints[i], part.endpoints[i + 1]), f2fn));
    return part;
}

PwlBound bound_convex_piece(const Expr& f, Interval piece, int k, BoundSide side) {
    if (k < 1) throw std::invalid_argument("bound_convex_piece requires k >= 1");
    const auto& vars = f.free_vars();
    if (vars.size() > 1)
        throw std::invalid_argument("bound_convex_piece requires a univariate expression");
    const int var = vars.empty() ? 1 : vars.front();
    const Fn1 fn(f, var);

    const Expr f2 = differentiate(differentiate(f, var), var);
    const Fn1 f2fn(f2, var);
    const ConvexityTag tag = tag_piece(f2, var, piece, f2fn);

    const bool chord_side = tag == ConvexityTag::Linear ||
                            (tag == ConvexityTag::Convex) == (side == BoundSide::Upper);
    if (chord_side) return chord_bound(fn, piece.lo, piece.hi, k);

    const Expr f1 = differentiate(f, var);
    const Fn1 dfn(f1, var);
    auto env = tangent_bound(fn, dfn, piece.lo, piece.hi, k, side == BoundSide::Lower);
    if (env) return *env;
    // Numerically flat piece: the chord tracks f to within the flatness,
    // which the caller's safety inflation absorbs.
    return chord_bound(fn, piece.lo, piece.hi, k);
}

BoundingSet bound_univariate(const Expr& f, double a, double b, int k,
                             std::optional<double> eps_num) {
    const auto& vars = f.free_vars();
    if (vars.size() != 1)
        throw std::invalid_argument("bound_univariate requires exactly one free variable");
    if (!(a < b)) throw std::invalid_argument("bound_univariate requires a < b");
    if (k < 1) throw std::invalid_argument("bound_univariate requires k >= 1");
    const int var = vars.front();
    const Fn1 fn(f, var);

    const ConvexityPartition part = convexity_partition(f, a, b);
    const std::size_t pieces = part.tags.size();
    std::vector<PwlBound> lo_b(pieces), up_b(pieces);
    for (std::size_t i = 0; i < pieces; ++i) {
        const Interval piece(part.endpoints[i], part.endpoints[i + 1]);
        lo_b[i] = bound_convex_piece(f, piece, k, BoundSide::Lower);
        up_b[i] = bound_convex_piece(f, piece, k, BoundSide::Upper);
    }

    std::vector<double> grid;
    for (std::size_t i = 0; i < pieces; ++i) {
        grid.insert(grid.end(), lo_b[i].breakpoints.begin(), lo_b[i].breakpoints.end());
        grid.insert(grid.end(), up_b[i].breakpoints.begin(), up_b[i].breakpoints.end());
    }
    std::sort(grid.begin(), grid.end());
    std::vector<double> axis;
    for (double v : grid)
        if (axis.empty() || v - axis.back() > 1e-12 * (1.0 + std::abs(v))) axis.push_back(v);

    // A grid value on a piece boundary takes the conservative envelope of
    // both neighbors.
    std::vector<double> lower(axis.size()), upper(axis.size());
    for (std::size_t g = 0; g < axis.size(); ++g) {
        const double x = axis[g];
        double lo = std::numeric_limits<double>::infinity();
        double up = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < pieces; ++i) {
            const double tol = 1e-12 * (1.0 + std::abs(x));
            if (x < part.endpoints[i] - tol || x > part.endpoints[i + 1] + tol) continue;
            lo = std::min(lo, lo_b[i](x));
            up = std::max(up, up_b[i](x));
        }
        lower[g] = lo;
        upper[g] = up;
    }

    double fmax = 0.0;
    for (double x : axis) fmax = std::max(fmax, std::abs(fn(x)));
    const double eps = eps_num ? *eps_num : 1e-9 * (1.0 + fmax);
    for (auto& v : lower) v -= eps;
    for (auto& v : upper) v += eps;

    BoundingSet out;
    out.vars = {var};
    out.axes = {std::move(axis)};
    out.lower = std::move(lower);
    out.upper = std::move(upper);
    out.validate();
    return out;
}

}  // namespace overtpoly

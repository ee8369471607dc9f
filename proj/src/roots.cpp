#include "overtpoly/roots.hpp"

#include <algorithm>
#include <cmath>

namespace overtpoly {

namespace {

struct Isolator {
    const Expr& e;
    int var;  // single free variable (1-based); 0 for constant expressions
    double tol;
    double zero_tol;
    std::vector<Interval> candidates;
    bool all_zeroish = true;

    Interval eval_on(Interval iv) const {
        std::vector<Interval> box(static_cast<std::size_t>(std::max(var, 1)), Interval(0.0));
        if (var >= 1) box[var - 1] = iv;
        return interval_evaluate(e, box);
    }

    double eval_at(double x) const {
        std::vector<double> pt(static_cast<std::size_t>(std::max(var, 1)), 0.0);
        if (var >= 1) pt[var - 1] = x;
        return evaluate(e, pt);
    }

    void subdivide(Interval iv) {
        const Interval r = eval_on(iv);
        if (r.lo > 0.0 || r.hi < 0.0) {
            all_zeroish = false;
            return;
        }
        if (std::abs(r.lo) > zero_tol || std::abs(r.hi) > zero_tol) all_zeroish = false;
        if (iv.width() <= tol) {
            if (candidates.size() >= 1000000)
                throw RootIsolationError("sign-indefinite region too large to isolate; shrink the piece");
            candidates.push_back(iv);
            return;
        }
        const double m = iv.mid();
        subdivide({iv.lo, m});
        subdivide({m, iv.hi});
    }
};

} // namespace

SignChangeReport find_sign_changes(const Expr& e, Interval iv, double tol) {
    SignChangeReport report;
    const auto& vars = e.free_vars();
    if (vars.size() > 1) throw std::invalid_argument("find_sign_changes requires a univariate expression");

    Isolator iso{e, vars.empty() ? 0 : vars.front(), tol, 0.0, {}, true};
    const Interval whole = iso.eval_on(iv);
    if (whole.lo > 0.0 || whole.hi < 0.0) return report;  // sign-definite everywhere

    const double scale = std::min(whole.finite() ? whole.mag() : 1.0, 1e12);
    iso.zero_tol = 1e-11 * (1.0 + scale);
    if (std::abs(whole.lo) <= iso.zero_tol && std::abs(whole.hi) <= iso.zero_tol) {
        report.identically_zero = true;
        return report;
    }

    iso.subdivide(iv);
    if (iso.candidates.empty()) return report;
    if (iso.all_zeroish) {
        report.identically_zero = true;
        return report;
    }

    // Merge adjacent candidate leaves into clusters.
    std::sort(iso.candidates.begin(), iso.candidates.end(),
              [](Interval a, Interval b) { return a.lo < b.lo; });
    std::vector<Interval> clusters;
    for (Interval c : iso.candidates) {
        if (!clusters.empty() && c.lo <= clusters.back().hi + tol)
            clusters.back().hi = std::max(clusters.back().hi, c.hi);
        else
            clusters.push_back(c);
    }

    for (Interval c : clusters) {
        if (c.width() > 1e6 * tol)
            throw RootIsolationError("unresolved root cluster of width " + std::to_string(c.width()) +
                                     "; shrink tol");
        double lo = c.lo, hi = c.hi;
        const double flo = iso.eval_at(lo);
        const double fhi = iso.eval_at(hi);
        if (flo == 0.0) {
            report.roots.push_back(lo);
            continue;
        }
        if (fhi == 0.0) {
            report.roots.push_back(hi);
            continue;
        }
        if ((flo < 0.0) != (fhi < 0.0)) {
            while (hi - lo > tol * 0.5) {
                const double m = 0.5 * (lo + hi);
                const double fm = iso.eval_at(m);
                if (fm == 0.0) {
                    lo = hi = m;
                    break;
                }
                if ((fm < 0.0) == (flo < 0.0))
                    lo = m;
                else
                    hi = m;
            }
            report.roots.push_back(0.5 * (lo + hi));
        } else {
            // Tangential contact: keep it as a root, which only adds a
            // partition point and never hurts soundness.
            report.roots.push_back(c.mid());
        }
    }
    std::sort(report.roots.begin(), report.roots.end());
    return report;
}

} // namespace overtpoly

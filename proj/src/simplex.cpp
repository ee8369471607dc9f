#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "overtpoly/solver.hpp"

namespace overtpoly {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotEps = 1e-9;
constexpr double kRatioTie = 1e-12;
constexpr double kDegenerateStep = 1e-11;

// Power-of-two scaling keeps equilibration exact in floating point.
double pow2_scale(double maxabs) {
    if (!(maxabs > 0.0) || !std::isfinite(maxabs)) return 1.0;
    return std::exp2(-std::round(std::log2(maxabs)));
}

enum class St : char { Basic, Lower, Upper, Free };

struct Tab {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;  // row-major dense tableau, kept as B^-1 A
    std::vector<double> d;  // reduced costs for the active cost vector
    std::vector<double> xB;
    std::vector<int> basis;     // row -> column
    std::vector<int> basicrow;  // column -> row, -1 when nonbasic
    std::vector<St> stat;
    std::vector<double> lo, hi;

    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

    double nonbasic_value(int j) const {
        switch (stat[j]) {
            case St::Lower: return lo[j];
            case St::Upper: return hi[j];
            default: return 0.0;
        }
    }

    double value(int j) const { return stat[j] == St::Basic ? xB[basicrow[j]] : nonbasic_value(j); }
};

void rebuild_reduced_costs(Tab& t, const std::vector<double>& c) {
    t.d = c;
    for (int i = 0; i < t.rows; ++i) {
        double cb = c[static_cast<std::size_t>(t.basis[i])];
        if (cb == 0.0) continue;
        for (int j = 0; j < t.cols; ++j) t.d[static_cast<std::size_t>(j)] -= cb * t.at(i, j);
    }
    for (int i = 0; i < t.rows; ++i) t.d[static_cast<std::size_t>(t.basis[i])] = 0.0;
}

// Rebuilds the tableau as B^-1[A0 | b0] from the original scaled data at the
// current basis, discarding error accumulated by the rank-one updates. The
// reduced-cost row is left stale; callers rebuild it. Returns false when the
// basis matrix is numerically singular.
bool refactor(Tab& t, const std::vector<double>& A0, const std::vector<double>& rhs0) {
    const int m = t.rows;
    const int n = t.cols;
    if (m == 0) return true;

    std::vector<double> B(static_cast<std::size_t>(m) * m);
    for (int r = 0; r < m; ++r)
        for (int i = 0; i < m; ++i)
            B[static_cast<std::size_t>(i) * m + r] =
                A0[static_cast<std::size_t>(i) * n + t.basis[static_cast<std::size_t>(r)]];

    // Dense LU with partial pivoting, factors stored in place.
    std::vector<int> perm(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        int p = k;
        double best = std::abs(B[static_cast<std::size_t>(k) * m + k]);
        for (int i = k + 1; i < m; ++i) {
            const double v = std::abs(B[static_cast<std::size_t>(i) * m + k]);
            if (v > best) {
                best = v;
                p = i;
            }
        }
        if (best < 1e-12) return false;
        perm[static_cast<std::size_t>(k)] = p;
        if (p != k)
            for (int j = 0; j < m; ++j)
                std::swap(B[static_cast<std::size_t>(k) * m + j], B[static_cast<std::size_t>(p) * m + j]);
        const double piv = B[static_cast<std::size_t>(k) * m + k];
        for (int i = k + 1; i < m; ++i) {
            const double f = B[static_cast<std::size_t>(i) * m + k] / piv;
            B[static_cast<std::size_t>(i) * m + k] = f;
            if (f == 0.0) continue;
            for (int j = k + 1; j < m; ++j)
                B[static_cast<std::size_t>(i) * m + j] -= f * B[static_cast<std::size_t>(k) * m + j];
        }
    }

    std::vector<double> y(static_cast<std::size_t>(m));
    const auto solve_into = [&](double* out, int stride) {
        // Rows were swapped whole during factorization, so the stored
        // multipliers live in final row order; the rhs must be permuted
        // fully before any elimination touches it.
        for (int k = 0; k < m; ++k) {
            const int p = perm[static_cast<std::size_t>(k)];
            if (p != k) std::swap(y[static_cast<std::size_t>(k)], y[static_cast<std::size_t>(p)]);
        }
        for (int k = 0; k < m; ++k) {
            for (int i = k + 1; i < m; ++i)
                y[static_cast<std::size_t>(i)] -= B[static_cast<std::size_t>(i) * m + k] * y[static_cast<std::size_t>(k)];
        }
        for (int k = m - 1; k >= 0; --k) {
            double v = y[static_cast<std::size_t>(k)];
            for (int j = k + 1; j < m; ++j)
                v -= B[static_cast<std::size_t>(k) * m + j] * y[static_cast<std::size_t>(j)];
            y[static_cast<std::size_t>(k)] = v / B[static_cast<std::size_t>(k) * m + k];
        }
        for (int i = 0; i < m; ++i) out[static_cast<std::size_t>(i) * stride] = y[static_cast<std::size_t>(i)];
    };

    for (int j = 0; j < n; ++j) {
        if (t.stat[static_cast<std::size_t>(j)] == St::Basic) continue;
        for (int i = 0; i < m; ++i) y[static_cast<std::size_t>(i)] = A0[static_cast<std::size_t>(i) * n + j];
        solve_into(&t.a[static_cast<std::size_t>(j)], n);
    }
    for (int r = 0; r < m; ++r) {
        const int bv = t.basis[static_cast<std::size_t>(r)];
        for (int i = 0; i < m; ++i) t.at(i, bv) = i == r ? 1.0 : 0.0;
    }
    for (int i = 0; i < m; ++i) {
        double v = rhs0[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) {
            if (t.stat[static_cast<std::size_t>(j)] == St::Basic) continue;
            const double xj = t.nonbasic_value(j);
            if (xj != 0.0) v -= A0[static_cast<std::size_t>(i) * n + j] * xj;
        }
        y[static_cast<std::size_t>(i)] = v;
    }
    solve_into(t.xB.data(), 1);
    return true;
}

double primal_violation(const Tab& t) {
    double worst = 0.0;
    for (int r = 0; r < t.rows; ++r) {
        const int bv = t.basis[static_cast<std::size_t>(r)];
        const double v = t.xB[static_cast<std::size_t>(r)];
        worst = std::max(worst, t.lo[static_cast<std::size_t>(bv)] - v);
        worst = std::max(worst, v - t.hi[static_cast<std::size_t>(bv)]);
    }
    return worst;
}

bool dual_feasible(const Tab& t, double tol) {
    for (int j = 0; j < t.cols; ++j) {
        const St s = t.stat[static_cast<std::size_t>(j)];
        if (s == St::Basic) continue;
        if (t.lo[static_cast<std::size_t>(j)] == t.hi[static_cast<std::size_t>(j)]) continue;
        const double dj = t.d[static_cast<std::size_t>(j)];
        if (s == St::Lower && dj < -tol) return false;
        if (s == St::Upper && dj > tol) return false;
        if (s == St::Free && std::abs(dj) > tol) return false;
    }
    return true;
}

void pivot(Tab& t, int r, int jstar, int sigma, double theta, St leave_to) {
    const double enter_value = t.nonbasic_value(jstar) + sigma * theta;
    for (int i = 0; i < t.rows; ++i) {
        if (i == r) continue;
        t.xB[static_cast<std::size_t>(i)] -= sigma * theta * t.at(i, jstar);
    }
    const int leaving = t.basis[static_cast<std::size_t>(r)];
    t.stat[static_cast<std::size_t>(leaving)] = leave_to;
    t.basicrow[static_cast<std::size_t>(leaving)] = -1;
    t.basis[static_cast<std::size_t>(r)] = jstar;
    t.stat[static_cast<std::size_t>(jstar)] = St::Basic;
    t.basicrow[static_cast<std::size_t>(jstar)] = r;
    t.xB[static_cast<std::size_t>(r)] = enter_value;

    const double p = t.at(r, jstar);
    for (int j = 0; j < t.cols; ++j) t.at(r, j) /= p;
    t.at(r, jstar) = 1.0;
    for (int i = 0; i < t.rows; ++i) {
        if (i == r) continue;
        const double f = t.at(i, jstar);
        if (f == 0.0) continue;
        for (int j = 0; j < t.cols; ++j) t.at(i, j) -= f * t.at(r, j);
        t.at(i, jstar) = 0.0;
    }
    const double fd = t.d[static_cast<std::size_t>(jstar)];
    if (fd != 0.0) {
        for (int j = 0; j < t.cols; ++j) t.d[static_cast<std::size_t>(j)] -= fd * t.at(r, j);
        t.d[static_cast<std::size_t>(jstar)] = 0.0;
    }
}

enum class LoopEnd { Optimal, Unbounded, IterLimit };

LoopEnd run_phase(Tab& t, const std::vector<double>& c, long max_pivots, double tol,
                  double pivot_eps, long& pivots) {
    rebuild_reduced_costs(t, c);
    long degen_streak = 0;
    const long bland_after = 10L * std::max(t.rows, 1);
    while (true) {
        if (pivots >= max_pivots) return LoopEnd::IterLimit;
        const bool bland = degen_streak > bland_after;

        int jstar = -1;
        int sigma = 0;
        double best = tol;
        for (int j = 0; j < t.cols; ++j) {
            const St s = t.stat[static_cast<std::size_t>(j)];
            if (s == St::Basic) continue;
            if (t.lo[static_cast<std::size_t>(j)] == t.hi[static_cast<std::size_t>(j)]) continue;
            const double dj = t.d[static_cast<std::size_t>(j)];
            double score = 0.0;
            int dir = 0;
            if (s == St::Lower && dj < -tol) {
                score = -dj;
                dir = +1;
            } else if (s == St::Upper && dj > tol) {
                score = dj;
                dir = -1;
            } else if (s == St::Free && std::abs(dj) > tol) {
                score = std::abs(dj);
                dir = dj > 0.0 ? -1 : +1;
            }
            if (dir == 0) continue;
            if (bland) {
                jstar = j;
                sigma = dir;
                break;
            }
            if (score > best) {
                best = score;
                jstar = j;
                sigma = dir;
            }
        }
        if (jstar < 0) return LoopEnd::Optimal;

        // Ratio test: entering moves by theta in direction sigma, basics by
        // -sigma*theta*w. Ties prefer a pivot row over a bound flip.
        double range = t.hi[static_cast<std::size_t>(jstar)] - t.lo[static_cast<std::size_t>(jstar)];
        if (std::isnan(range)) range = kInf;
        double theta = range;
        int row = -1;
        double row_w = 0.0;
        St leave_to = St::Lower;
        for (int i = 0; i < t.rows; ++i) {
            const double w = t.at(i, jstar);
            if (std::abs(w) <= pivot_eps) continue;
            const double sw = sigma * w;
            const int bv = t.basis[static_cast<std::size_t>(i)];
            double cand;
            St side;
            if (sw > 0.0) {
                const double b = t.lo[static_cast<std::size_t>(bv)];
                if (b == -kInf) continue;
                cand = (t.xB[static_cast<std::size_t>(i)] - b) / sw;
                side = St::Lower;
            } else {
                const double b = t.hi[static_cast<std::size_t>(bv)];
                if (b == kInf) continue;
                cand = (b - t.xB[static_cast<std::size_t>(i)]) / (-sw);
                side = St::Upper;
            }
            if (cand < 0.0) cand = 0.0;
            bool take = false;
            if (cand < theta - kRatioTie) {
                take = true;
            } else if (cand <= theta + kRatioTie) {
                if (row < 0) {
                    take = true;
                } else if (bland) {
                    take = bv < t.basis[static_cast<std::size_t>(row)];
                } else {
                    take = std::abs(w) > std::abs(row_w);
                }
            }
            if (take) {
                theta = std::min(theta, cand);
                row = i;
                row_w = w;
                leave_to = side;
            }
        }
        if (std::isinf(theta)) return LoopEnd::Unbounded;

        degen_streak = theta <= kDegenerateStep ? degen_streak + 1 : 0;
        if (row < 0) {
            for (int i = 0; i < t.rows; ++i)
                t.xB[static_cast<std::size_t>(i)] -= sigma * theta * t.at(i, jstar);
            t.stat[static_cast<std::size_t>(jstar)] =
                t.stat[static_cast<std::size_t>(jstar)] == St::Lower ? St::Upper : St::Lower;
        } else {
            pivot(t, row, jstar, sigma, theta, leave_to);
        }
        ++pivots;
    }
}

struct PhaseResult {
    LoopEnd end = LoopEnd::Optimal;
    bool restart = false;  // refreshed basis broke primal feasibility
};

// Runs one phase and trusts its optimum only after a refactorization agrees:
// the dense updates drift, and a fake optimum here would leak an unsound
// bound to callers. Pivoting resumes on the refreshed numbers until the
// reduced costs survive, the basis goes singular, or the round budget ends.
PhaseResult run_verified(Tab& t, const std::vector<double>& c, long max_pivots, double tol,
                         double feas_tol, double pivot_eps, long& pivots,
                         const std::vector<double>& A0, const std::vector<double>& rhs0) {
    for (int round = 0; round < 6; ++round) {
        const LoopEnd end = run_phase(t, c, max_pivots, tol, pivot_eps, pivots);
        if (end != LoopEnd::Optimal) return {end, false};
        if (!refactor(t, A0, rhs0)) return {LoopEnd::Optimal, false};
        const double pv = primal_violation(t);
        rebuild_reduced_costs(t, c);
        if (pv > feas_tol) return {LoopEnd::Optimal, true};
        if (dual_feasible(t, tol)) return {LoopEnd::Optimal, false};
    }
    return {LoopEnd::Optimal, false};
}

struct Row {
    std::vector<double> coef;  // dense over structural columns
    Relation rel = Relation::LessEqual;
    double rhs = 0.0;
};

}  // namespace

LpSolution solve_lp(const MilpModel& m, const LinearExpr& objective, Sense sense,
                    const SimplexOptions& opt, std::span<const double> lo_override,
                    std::span<const double> hi_override) {
    const int nstruct = static_cast<int>(m.variable_count());
    if (!lo_override.empty() && lo_override.size() != static_cast<std::size_t>(nstruct))
        throw std::invalid_argument("lo_override size does not match variable count");
    if (!hi_override.empty() && hi_override.size() != static_cast<std::size_t>(nstruct))
        throw std::invalid_argument("hi_override size does not match variable count");

    std::vector<double> lo(static_cast<std::size_t>(nstruct));
    std::vector<double> hi(static_cast<std::size_t>(nstruct));
    for (int j = 0; j < nstruct; ++j) {
        const auto& v = m.variables()[static_cast<std::size_t>(j)];
        lo[static_cast<std::size_t>(j)] =
            lo_override.empty() ? v.lo : lo_override[static_cast<std::size_t>(j)];
        hi[static_cast<std::size_t>(j)] =
            hi_override.empty() ? v.hi : hi_override[static_cast<std::size_t>(j)];
    }
    LpSolution sol;
    for (int j = 0; j < nstruct; ++j) {
        if (lo[static_cast<std::size_t>(j)] > hi[static_cast<std::size_t>(j)]) {
            sol.status = LpStatus::Infeasible;
            return sol;
        }
    }

    const int nrows = static_cast<int>(m.constraints().size());
    std::vector<Row> rows(static_cast<std::size_t>(nrows));
    for (int i = 0; i < nrows; ++i) {
        const auto& con = m.constraints()[static_cast<std::size_t>(i)];
        Row& r = rows[static_cast<std::size_t>(i)];
        r.coef.assign(static_cast<std::size_t>(nstruct), 0.0);
        for (const auto& term : con.lhs.terms)
            r.coef[static_cast<std::size_t>(term.var)] += term.coef;
        r.rel = con.rel;
        r.rhs = con.rhs - con.lhs.constant;
    }

    std::vector<double> cost(static_cast<std::size_t>(nstruct), 0.0);
    for (const auto& term : objective.terms) {
        if (term.var < 0 || term.var >= nstruct)
            throw std::invalid_argument("objective references unknown variable");
        cost[static_cast<std::size_t>(term.var)] += term.coef;
    }
    const double obj_sign = sense == Sense::Maximize ? -1.0 : 1.0;

    // Row then column equilibration by max-abs, rounded to powers of two.
    std::vector<double> rscale(static_cast<std::size_t>(nrows), 1.0);
    for (int i = 0; i < nrows; ++i) {
        double mx = 0.0;
        for (double v : rows[static_cast<std::size_t>(i)].coef) mx = std::max(mx, std::abs(v));
        const double s = pow2_scale(mx);
        rscale[static_cast<std::size_t>(i)] = s;
        for (double& v : rows[static_cast<std::size_t>(i)].coef) v *= s;
        rows[static_cast<std::size_t>(i)].rhs *= s;
    }
    std::vector<double> cscale(static_cast<std::size_t>(nstruct), 1.0);
    for (int j = 0; j < nstruct; ++j) {
        double mx = 0.0;
        for (int i = 0; i < nrows; ++i)
            mx = std::max(mx, std::abs(rows[static_cast<std::size_t>(i)].coef[static_cast<std::size_t>(j)]));
        const double s = pow2_scale(mx);
        cscale[static_cast<std::size_t>(j)] = s;
        if (s == 1.0) continue;
        for (int i = 0; i < nrows; ++i) rows[static_cast<std::size_t>(i)].coef[static_cast<std::size_t>(j)] *= s;
    }
    // x = S x': bounds shrink by s, costs grow by s.
    for (int j = 0; j < nstruct; ++j) {
        const double s = cscale[static_cast<std::size_t>(j)];
        if (std::isfinite(lo[static_cast<std::size_t>(j)])) lo[static_cast<std::size_t>(j)] /= s;
        if (std::isfinite(hi[static_cast<std::size_t>(j)])) hi[static_cast<std::size_t>(j)] /= s;
        cost[static_cast<std::size_t>(j)] *= s;
    }

    int nslack = 0;
    for (const auto& r : rows)
        if (r.rel == Relation::LessEqual) ++nslack;

    // Nonbasic start: finite lower bound, else finite upper, else free at 0.
    Tab t;
    std::vector<St> struct_stat(static_cast<std::size_t>(nstruct));
    for (int j = 0; j < nstruct; ++j) {
        if (std::isfinite(lo[static_cast<std::size_t>(j)]))
            struct_stat[static_cast<std::size_t>(j)] = St::Lower;
        else if (std::isfinite(hi[static_cast<std::size_t>(j)]))
            struct_stat[static_cast<std::size_t>(j)] = St::Upper;
        else
            struct_stat[static_cast<std::size_t>(j)] = St::Free;
    }
    std::vector<double> resid(static_cast<std::size_t>(nrows), 0.0);
    for (int i = 0; i < nrows; ++i) {
        double act = 0.0;
        for (int j = 0; j < nstruct; ++j) {
            const double v = struct_stat[static_cast<std::size_t>(j)] == St::Lower
                                 ? lo[static_cast<std::size_t>(j)]
                                 : (struct_stat[static_cast<std::size_t>(j)] == St::Upper
                                        ? hi[static_cast<std::size_t>(j)]
                                        : 0.0);
            act += rows[static_cast<std::size_t>(i)].coef[static_cast<std::size_t>(j)] * v;
        }
        resid[static_cast<std::size_t>(i)] = rows[static_cast<std::size_t>(i)].rhs - act;
    }
    std::vector<int> slack_col(static_cast<std::size_t>(nrows), -1);
    std::vector<int> art_col(static_cast<std::size_t>(nrows), -1);
    // Rows with a negative residual are negated below so the starting basis
    // is the identity; neg tracks that flip for dual recovery.
    std::vector<double> neg(static_cast<std::size_t>(nrows), 1.0);
    int col = nstruct;
    for (int i = 0; i < nrows; ++i) {
        if (rows[static_cast<std::size_t>(i)].rel == Relation::LessEqual) slack_col[static_cast<std::size_t>(i)] = col++;
    }
    const int first_art = col;
    for (int i = 0; i < nrows; ++i) {
        const bool le = rows[static_cast<std::size_t>(i)].rel == Relation::LessEqual;
        if (le && resid[static_cast<std::size_t>(i)] >= 0.0) continue;
        art_col[static_cast<std::size_t>(i)] = col++;
        if (resid[static_cast<std::size_t>(i)] < 0.0) neg[static_cast<std::size_t>(i)] = -1.0;
    }
    t.rows = nrows;
    t.cols = col;
    t.a.assign(static_cast<std::size_t>(nrows) * col, 0.0);
    t.lo.assign(static_cast<std::size_t>(col), 0.0);
    t.hi.assign(static_cast<std::size_t>(col), kInf);
    t.stat.assign(static_cast<std::size_t>(col), St::Lower);
    t.basicrow.assign(static_cast<std::size_t>(col), -1);
    t.basis.assign(static_cast<std::size_t>(nrows), -1);
    t.xB.assign(static_cast<std::size_t>(nrows), 0.0);
    for (int j = 0; j < nstruct; ++j) {
        t.lo[static_cast<std::size_t>(j)] = lo[static_cast<std::size_t>(j)];
        t.hi[static_cast<std::size_t>(j)] = hi[static_cast<std::size_t>(j)];
        t.stat[static_cast<std::size_t>(j)] = struct_stat[static_cast<std::size_t>(j)];
    }
    for (int i = 0; i < nrows; ++i) {
        const double flip = neg[static_cast<std::size_t>(i)];
        for (int j = 0; j < nstruct; ++j)
            t.at(i, j) = flip * rows[static_cast<std::size_t>(i)].coef[static_cast<std::size_t>(j)];
        if (slack_col[static_cast<std::size_t>(i)] >= 0) t.at(i, slack_col[static_cast<std::size_t>(i)]) = flip;
        if (art_col[static_cast<std::size_t>(i)] >= 0)
            t.at(i, art_col[static_cast<std::size_t>(i)]) = 1.0;
        if (art_col[static_cast<std::size_t>(i)] >= 0) {
            t.basis[static_cast<std::size_t>(i)] = art_col[static_cast<std::size_t>(i)];
            t.xB[static_cast<std::size_t>(i)] = std::abs(resid[static_cast<std::size_t>(i)]);
        } else {
            t.basis[static_cast<std::size_t>(i)] = slack_col[static_cast<std::size_t>(i)];
            t.xB[static_cast<std::size_t>(i)] = resid[static_cast<std::size_t>(i)];
        }
        t.stat[static_cast<std::size_t>(t.basis[static_cast<std::size_t>(i)])] = St::Basic;
        t.basicrow[static_cast<std::size_t>(t.basis[static_cast<std::size_t>(i)])] = i;
    }

    // Original scaled data pinned for refactorization; t0 restarts an attempt
    // from scratch when a refreshed basis turns out primal infeasible, which
    // means the pivot floor let elimination noise drive the path.
    const std::vector<double> A0 = t.a;
    std::vector<double> rhs0(static_cast<std::size_t>(nrows));
    for (int i = 0; i < nrows; ++i)
        rhs0[static_cast<std::size_t>(i)] = neg[static_cast<std::size_t>(i)] * rows[static_cast<std::size_t>(i)].rhs;
    const Tab t0 = t;

    std::vector<double> c2(static_cast<std::size_t>(col), 0.0);
    for (int j = 0; j < nstruct; ++j) c2[static_cast<std::size_t>(j)] = obj_sign * cost[static_cast<std::size_t>(j)];

    long pivots = 0;
    double pivot_eps = kPivotEps;
    bool restart = false;
    for (int attempt = 0;; ++attempt) {
        restart = false;
        if (col > first_art) {
            std::vector<double> c1(static_cast<std::size_t>(col), 0.0);
            for (int j = first_art; j < col; ++j) c1[static_cast<std::size_t>(j)] = 1.0;
            const PhaseResult end1 = run_verified(t, c1, opt.max_pivots, opt.tol, opt.feas_tol,
                                                  pivot_eps, pivots, A0, rhs0);
            if (end1.end == LoopEnd::IterLimit) {
                sol.status = LpStatus::IterationLimit;
                sol.pivots = pivots;
                return sol;
            }
            restart = end1.restart || end1.end == LoopEnd::Unbounded;
            if (!restart) {
                double art_sum = 0.0;
                for (int j = first_art; j < col; ++j) art_sum += t.value(j);
                if (art_sum > opt.feas_tol) {
                    sol.status = LpStatus::Infeasible;
                    sol.pivots = pivots;
                    return sol;
                }
                // Artificials stay with zero range; the ratio test pins them there.
                for (int j = first_art; j < col; ++j) t.hi[static_cast<std::size_t>(j)] = 0.0;
            }
        }
        if (!restart) {
            const PhaseResult end2 = run_verified(t, c2, opt.max_pivots, opt.tol, opt.feas_tol,
                                                  pivot_eps, pivots, A0, rhs0);
            sol.pivots = pivots;
            if (end2.end == LoopEnd::Unbounded) {
                sol.status = LpStatus::Unbounded;
                return sol;
            }
            if (end2.end == LoopEnd::IterLimit) {
                sol.status = LpStatus::IterationLimit;
                return sol;
            }
            restart = end2.restart;
        }
        if (!restart) break;
        if (attempt >= 2) {
            // Out of retries with the basis still inconsistent; surface a
            // numerical failure rather than an unsound optimum.
            sol.status = LpStatus::IterationLimit;
            sol.pivots = pivots;
            return sol;
        }
        t = t0;
        pivot_eps *= 100.0;
    }
    sol.pivots = pivots;

    sol.status = LpStatus::Optimal;
    sol.x.resize(static_cast<std::size_t>(nstruct));
    for (int j = 0; j < nstruct; ++j)
        sol.x[static_cast<std::size_t>(j)] = cscale[static_cast<std::size_t>(j)] * t.value(j);
    double obj = objective.constant;
    for (const auto& term : objective.terms) obj += term.coef * sol.x[static_cast<std::size_t>(term.var)];
    sol.objective = obj;
    sol.duals.resize(static_cast<std::size_t>(nrows), 0.0);
    for (int i = 0; i < nrows; ++i) {
        // Slack columns carry flip*e_i, so the flip cancels out of the dual;
        // artificial columns carry +e_i against a possibly negated row.
        double yv;
        if (slack_col[static_cast<std::size_t>(i)] >= 0) {
            yv = -t.d[static_cast<std::size_t>(slack_col[static_cast<std::size_t>(i)])];
        } else {
            yv = -t.d[static_cast<std::size_t>(art_col[static_cast<std::size_t>(i)])] *
                 neg[static_cast<std::size_t>(i)];
        }
        sol.duals[static_cast<std::size_t>(i)] = obj_sign * rscale[static_cast<std::size_t>(i)] * yv;
    }
    return sol;
}

}  // namespace overtpoly

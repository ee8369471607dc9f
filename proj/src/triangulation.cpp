#include "overtpoly/triangulation.hpp"

#include "overtpoly/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <numeric>

namespace overtpoly {

namespace {

constexpr int kInf = -1;

// Deterministic weight in [0,1) keyed to the point index (splitmix64 mix).
double hash01(int i) {
    uint64_t z = static_cast<uint64_t>(i) + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

struct Cell {
    std::vector<int> v;   // dim+1 ids; infinite cells hold kInf in the last slot
    std::vector<int> nbr; // nbr[k] shares the facet opposite v[k]
    bool alive = true;
    bool infinite = false;
};

class Builder {
public:
    Builder(const PointSet& p) : n_(p.dim()), npts_(p.count()) {
        // Normalize into ~[-0.5, 0.5]^n so the predicate thresholds are scale-free.
        std::vector<double> lo(n_, std::numeric_limits<double>::infinity());
        std::vector<double> hi(n_, -std::numeric_limits<double>::infinity());
        for (int i = 0; i < npts_; ++i)
            for (int a = 0; a < n_; ++a) {
                lo[a] = std::min(lo[a], p.point(i)[a]);
                hi[a] = std::max(hi[a], p.point(i)[a]);
            }
        double span = 0.0;
        for (int a = 0; a < n_; ++a) span = std::max(span, hi[a] - lo[a]);
        if (!(span > 0.0)) throw std::invalid_argument("point set is not full-dimensional");
        norm_.resize(static_cast<size_t>(npts_) * n_);
        for (int i = 0; i < npts_; ++i)
            for (int a = 0; a < n_; ++a)
                norm_[static_cast<size_t>(i) * n_ + a] = (p.point(i)[a] - 0.5 * (lo[a] + hi[a])) / span;
        weight_.resize(npts_);
        for (int i = 0; i < npts_; ++i) weight_[i] = 1e-10 * hash01(i);
    }

    void run() {
        std::vector<int> seed = pick_seed();
        make_initial_shell(seed);
        std::vector<char> seeded(npts_, 0);
        for (int s : seed) seeded[s] = 1;
        for (int q = 0; q < npts_; ++q)
            if (!seeded[q]) insert(q);
    }

    Triangulation compact(const PointSet& p) const {
        Triangulation t;
        t.dim = n_;
        t.points.assign(p.flat().begin(), p.flat().end());
        std::vector<int> keep;
        for (size_t c = 0; c < cells_.size(); ++c)
            if (cells_[c].alive && !cells_[c].infinite) keep.push_back(static_cast<int>(c));
        // Canonical order: vertices ascending within a simplex, simplices
        // lexicographic. Downstream encodings index simplices by position.
        std::vector<std::vector<int>> sorted(keep.size());
        std::vector<int> order(keep.size());
        std::iota(order.begin(), order.end(), 0);
        for (size_t i = 0; i < keep.size(); ++i) {
            sorted[i] = cells_[keep[i]].v;
            std::sort(sorted[i].begin(), sorted[i].end());
        }
        std::sort(order.begin(), order.end(), [&](int a, int b) { return sorted[a] < sorted[b]; });
        std::vector<int> newId(cells_.size(), -1);
        for (size_t pos = 0; pos < order.size(); ++pos) newId[keep[order[pos]]] = static_cast<int>(pos);
        for (size_t pos = 0; pos < order.size(); ++pos) {
            const Cell& c = cells_[keep[order[pos]]];
            const std::vector<int>& sv = sorted[order[pos]];
            std::vector<int> nb(sv.size(), -1);
            for (size_t j = 0; j < sv.size(); ++j) {
                for (size_t k = 0; k < c.v.size(); ++k)
                    if (c.v[k] == sv[j]) {
                        int across = c.nbr[k];
                        if (across >= 0 && cells_[across].alive && !cells_[across].infinite)
                            nb[j] = newId[across];
                        break;
                    }
            }
            t.simplices.push_back(sv);
            t.neighbors.push_back(std::move(nb));
        }
        return t;
    }

private:
    std::span<const double> pt(int i) const { return {norm_.data() + static_cast<size_t>(i) * n_, static_cast<size_t>(n_)}; }

    // Sign of det of rows (ids[i] - x), i over ids. ids.size() == n.
    int orient_sign(const std::vector<int>& ids, std::span<const double> x) const {
        std::vector<double> m(static_cast<size_t>(n_) * n_);
        for (int r = 0; r < n_; ++r)
            for (int c = 0; c < n_; ++c) m[static_cast<size_t>(r) * n_ + c] = pt(ids[r])[c] - x[c];
        return det_sign_robust(n_, m);
    }

    int orient_sign(const std::vector<int>& ids, int q) const { return orient_sign(ids, pt(q)); }

    // Strict weighted in-sphere test for a finite cell: q conflicts when the
    // lifted determinant carries the same sign as the cell's orientation.
    bool insphere_conflict(const Cell& c, int q) const {
        std::vector<int> base(c.v.begin(), c.v.end() - 1);
        std::vector<double> mo(static_cast<size_t>(n_) * n_);
        for (int r = 0; r < n_; ++r)
            for (int col = 0; col < n_; ++col)
                mo[static_cast<size_t>(r) * n_ + col] = pt(c.v[r])[col] - pt(c.v[n_])[col];
        int o = det_sign_robust(n_, mo);
        if (o == 0) return false;
        int k = n_ + 1;
        std::vector<double> m(static_cast<size_t>(k) * k);
        for (int r = 0; r < k; ++r) {
            double d2 = 0.0;
            for (int col = 0; col < n_; ++col) {
                double d = pt(c.v[r])[col] - pt(q)[col];
                m[static_cast<size_t>(r) * k + col] = d;
                d2 += d * d;
            }
            m[static_cast<size_t>(r) * k + n_] = d2 - weight_[c.v[r]] + weight_[q];
        }
        int s = det_sign_robust(k, m);
        return s == o;
    }

    // Infinite cell: conflict when q strictly sees the hull facet, or lies on
    // its plane and the finite neighbor is itself in conflict.
    bool conflict(int cellId, int q) const {
        const Cell& c = cells_[cellId];
        if (!c.infinite) return insphere_conflict(c, q);
        std::vector<int> realf(c.v.begin(), c.v.end() - 1);
        int fin = c.nbr[n_];
        const Cell& fc = cells_[fin];
        int w = -1;
        for (int u : fc.v) {
            if (std::find(realf.begin(), realf.end(), u) == realf.end()) {
                w = u;
                break;
            }
        }
        int sq = orient_sign(realf, q);
        if (sq == 0) return insphere_conflict(fc, q);
        int sw = w >= 0 ? orient_sign(realf, w) : 0;
        if (sw == 0) return insphere_conflict(fc, q);
        return sq == -sw;
    }

    std::vector<int> pick_seed() const {
        std::vector<int> seed = {0};
        std::vector<std::vector<double>> basis;
        for (int i = 1; i < npts_ && static_cast<int>(basis.size()) < n_; ++i) {
            std::vector<double> v(n_);
            double nv = 0.0;
            for (int a = 0; a < n_; ++a) {
                v[a] = pt(i)[a] - pt(0)[a];
                nv += v[a] * v[a];
            }
            nv = std::sqrt(nv);
            for (const auto& b : basis) {
                double dot = std::inner_product(b.begin(), b.end(), v.begin(), 0.0);
                for (int a = 0; a < n_; ++a) v[a] -= dot * b[a];
            }
            double nr = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
            if (nr > 1e-9 * std::max(1.0, nv)) {
                for (int a = 0; a < n_; ++a) v[a] /= nr;
                basis.push_back(std::move(v));
                seed.push_back(i);
            }
        }
        if (static_cast<int>(basis.size()) < n_)
            throw std::invalid_argument("point set is not full-dimensional");
        return seed;
    }

    void make_initial_shell(const std::vector<int>& seed) {
        Cell c0;
        c0.v = seed;
        c0.nbr.assign(n_ + 1, -1);
        cells_.push_back(c0);
        std::map<std::vector<int>, std::pair<int, int>> open;
        for (int k = 0; k <= n_; ++k) {
            Cell ic;
            for (int j = 0; j <= n_; ++j)
                if (j != k) ic.v.push_back(seed[j]);
            ic.v.push_back(kInf);
            ic.infinite = true;
            ic.nbr.assign(n_ + 1, -1);
            ic.nbr[n_] = 0;
            int id = static_cast<int>(cells_.size());
            cells_.push_back(ic);
            cells_[0].nbr[k] = id;
            for (int slot = 0; slot < n_; ++slot) {
                std::vector<int> key;
                for (int j = 0; j <= n_; ++j)
                    if (j != slot) key.push_back(cells_[id].v[j]);
                std::sort(key.begin(), key.end());
                auto it = open.find(key);
                if (it == open.end()) {
                    open[key] = {id, slot};
                } else {
                    cells_[id].nbr[slot] = it->second.first;
                    cells_[it->second.first].nbr[it->second.second] = id;
                    open.erase(it);
                }
            }
        }
        if (!open.empty()) throw std::logic_error("triangulation shell wiring failed");
    }

    // Affine independence of (real facet vertices, q) via Gram-Schmidt; used to
    // keep degenerate hull facets out of the cavity boundary.
    bool hull_facet_ok(const std::vector<int>& realPart, int q) const {
        std::vector<std::vector<double>> basis;
        for (int id : realPart) {
            std::vector<double> v(n_);
            double nv = 0.0;
            for (int a = 0; a < n_; ++a) {
                v[a] = pt(id)[a] - pt(q)[a];
                nv += v[a] * v[a];
            }
            nv = std::sqrt(nv);
            for (const auto& b : basis) {
                double dot = std::inner_product(b.begin(), b.end(), v.begin(), 0.0);
                for (int a = 0; a < n_; ++a) v[a] -= dot * b[a];
            }
            double nr = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
            if (nr <= 1e-12 * std::max(1.0, nv)) return false;
            for (int a = 0; a < n_; ++a) v[a] /= nr;
            basis.push_back(std::move(v));
        }
        return true;
    }

    void insert(int q) {
        int seedCell = -1;
        for (size_t c = 0; c < cells_.size(); ++c)
            if (cells_[c].alive && conflict(static_cast<int>(c), q)) {
                seedCell = static_cast<int>(c);
                break;
            }
        if (seedCell < 0) throw std::logic_error("no conflicting cell for inserted point");

        std::vector<char> inRegion(cells_.size(), 0);
        std::vector<char> tested(cells_.size(), 0);
        std::vector<int> region = {seedCell};
        inRegion[seedCell] = tested[seedCell] = 1;
        std::deque<int> queue = {seedCell};
        while (!queue.empty()) {
            int c = queue.front();
            queue.pop_front();
            for (int nb : cells_[c].nbr) {
                if (nb < 0 || tested[nb]) continue;
                tested[nb] = 1;
                if (conflict(nb, q)) {
                    inRegion[nb] = 1;
                    region.push_back(nb);
                    queue.push_back(nb);
                }
            }
        }

        // Boundary facets; grow the cavity across any facet whose join with q
        // would be flat, so every created cell is full-dimensional.
        struct BFacet {
            int cell, slot, outer;
        };
        std::vector<BFacet> boundary;
        for (size_t guard = 0; guard <= cells_.size() + 1; ++guard) {
            boundary.clear();
            bool grew = false;
            for (int c : region) {
                for (int k = 0; k <= n_ && !grew; ++k) {
                    int nb = cells_[c].nbr[k];
                    if (nb < 0 || inRegion[nb]) continue;
                    std::vector<int> facet;
                    for (int j = 0; j <= n_; ++j)
                        if (j != k) facet.push_back(cells_[c].v[j]);
                    bool flat;
                    if (std::find(facet.begin(), facet.end(), kInf) != facet.end()) {
                        std::vector<int> realPart;
                        for (int id : facet)
                            if (id != kInf) realPart.push_back(id);
                        flat = !hull_facet_ok(realPart, q);
                    } else {
                        flat = orient_sign(facet, q) == 0;
                    }
                    if (flat) {
                        inRegion[nb] = 1;
                        region.push_back(nb);
                        grew = true;
                    } else {
                        boundary.push_back({c, k, nb});
                    }
                }
                if (grew) break;
            }
            if (!grew) break;
            if (guard == cells_.size()) throw std::logic_error("cavity growth failed to terminate");
        }
        if (boundary.empty()) throw std::logic_error("empty cavity boundary");

        std::map<std::vector<int>, std::pair<int, int>> open;
        for (const BFacet& bf : boundary) {
            std::vector<int> facet;
            for (int j = 0; j <= n_; ++j)
                if (j != bf.slot) facet.push_back(cells_[bf.cell].v[j]);
            Cell nc;
            bool inf = std::find(facet.begin(), facet.end(), kInf) != facet.end();
            if (inf) {
                for (int id : facet)
                    if (id != kInf) nc.v.push_back(id);
                nc.v.push_back(q);
                nc.v.push_back(kInf);
                nc.infinite = true;
            } else {
                nc.v = facet;
                nc.v.push_back(q);
            }
            nc.nbr.assign(n_ + 1, -1);
            int id = static_cast<int>(cells_.size());
            int slotQ = static_cast<int>(std::find(nc.v.begin(), nc.v.end(), q) - nc.v.begin());
            nc.nbr[slotQ] = bf.outer;
            cells_.push_back(std::move(nc));
            for (int s = 0; s <= n_; ++s)
                if (cells_[bf.outer].nbr[s] == bf.cell) {
                    cells_[bf.outer].nbr[s] = id;
                    break;
                }
            for (int slot = 0; slot <= n_; ++slot) {
                if (slot == slotQ) continue;
                std::vector<int> key;
                for (int j = 0; j <= n_; ++j)
                    if (j != slot) key.push_back(cells_[id].v[j]);
                std::sort(key.begin(), key.end());
                auto it = open.find(key);
                if (it == open.end()) {
                    open[key] = {id, slot};
                } else {
                    cells_[id].nbr[slot] = it->second.first;
                    cells_[it->second.first].nbr[it->second.second] = id;
                    open.erase(it);
                }
            }
        }
        if (!open.empty()) throw std::logic_error("cavity retriangulation left unmatched facets");
        for (int c : region) cells_[c].alive = false;
    }

    int n_;
    int npts_;
    std::vector<double> norm_;
    std::vector<double> weight_;
    std::vector<Cell> cells_;
};

bool solve_theta(const Triangulation& t, int s, std::span<const double> x, std::vector<double>& theta) {
    int k = t.dim + 1;
    std::vector<double> a(static_cast<size_t>(k) * k);
    std::vector<double> b(k);
    for (int c = 0; c < k; ++c) {
        std::span<const double> v = t.point(t.simplices[s][c]);
        for (int r = 0; r < t.dim; ++r) a[static_cast<size_t>(r) * k + c] = v[r];
        a[static_cast<size_t>(t.dim) * k + c] = 1.0;
    }
    for (int r = 0; r < t.dim; ++r) b[r] = x[r];
    b[t.dim] = 1.0;
    theta.assign(k, 0.0);
    return solve_linear(k, std::move(a), b, theta);
}

} // namespace

PointSet PointSet::from_points(int dim, std::vector<double> coords) {
    if (dim <= 0) throw std::invalid_argument("point set dimension must be positive");
    if (coords.empty() || coords.size() % dim != 0)
        throw std::invalid_argument("coordinate list does not match the dimension");
    PointSet p;
    p.dim_ = dim;
    p.coords_ = std::move(coords);
    int cnt = p.count();
    std::vector<int> order(cnt);
    std::iota(order.begin(), order.end(), 0);
    auto less = [&](int a, int b) {
        return std::lexicographical_compare(p.point(a).begin(), p.point(a).end(), p.point(b).begin(), p.point(b).end());
    };
    std::sort(order.begin(), order.end(), less);
    for (int i = 1; i < cnt; ++i)
        if (std::equal(p.point(order[i - 1]).begin(), p.point(order[i - 1]).end(), p.point(order[i]).begin()))
            throw std::invalid_argument("duplicate points in point set");
    return p;
}

PointSet PointSet::grid(std::vector<std::vector<double>> axes) {
    if (axes.empty()) throw std::invalid_argument("grid needs at least one axis");
    size_t total = 1;
    for (const auto& ax : axes) {
        if (ax.size() < 2) throw std::invalid_argument("each grid axis needs at least two values");
        for (size_t i = 1; i < ax.size(); ++i)
            if (!(ax[i] > ax[i - 1])) throw std::invalid_argument("grid axis values must be strictly increasing");
        total *= ax.size();
    }
    int n = static_cast<int>(axes.size());
    std::vector<double> coords;
    coords.reserve(total * n);
    for (size_t i = 0; i < total; ++i) {
        size_t rem = i;
        std::vector<int> idx(n);
        for (int a = n - 1; a >= 0; --a) {
            idx[a] = static_cast<int>(rem % axes[a].size());
            rem /= axes[a].size();
        }
        for (int a = 0; a < n; ++a) coords.push_back(axes[a][idx[a]]);
    }
    PointSet p = from_points(n, std::move(coords));
    p.axes_ = std::move(axes);
    return p;
}

std::vector<int> PointSet::resolution() const {
    std::vector<int> r;
    for (const auto& ax : axes_) r.push_back(static_cast<int>(ax.size()));
    return r;
}

std::vector<int> grid_star(const PointSet& grid, std::span<const double> q) {
    if (!grid.is_grid()) throw std::invalid_argument("star queries need a grid point set");
    if (static_cast<int>(q.size()) != grid.dim()) throw std::invalid_argument("query dimension mismatch");
    const auto& axes = grid.axes();
    int n = grid.dim();
    std::vector<int> qidx(n, -1);
    for (int a = 0; a < n; ++a) {
        for (size_t i = 0; i < axes[a].size(); ++i) {
            if (axes[a][i] == q[a] || std::fabs(axes[a][i] - q[a]) <= 1e-12 * (1.0 + std::fabs(q[a]))) {
                qidx[a] = static_cast<int>(i);
                break;
            }
        }
        if (qidx[a] < 0) throw std::invalid_argument("query is not a grid point");
    }
    std::vector<int> out;
    int cnt = grid.count();
    for (int i = 0; i < cnt; ++i) {
        size_t rem = static_cast<size_t>(i);
        std::vector<int> idx(n);
        for (int a = n - 1; a >= 0; --a) {
            idx[a] = static_cast<int>(rem % axes[a].size());
            rem /= axes[a].size();
        }
        for (int a = 0; a < n; ++a)
            if (idx[a] == qidx[a]) {
                out.push_back(i);
                break;
            }
    }
    return out;
}

double Triangulation::simplex_volume(int s) const {
    std::vector<double> m(static_cast<size_t>(dim) * dim);
    std::span<const double> v0 = point(simplices[s][0]);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) m[static_cast<size_t>(r) * dim + c] = point(simplices[s][r + 1])[c] - v0[c];
    double d = std::fabs(det_double(dim, m));
    for (int k = 2; k <= dim; ++k) d /= k;
    return d;
}

Triangulation delaunay_triangulate(const PointSet& p) {
    if (p.dim() > 6) throw std::invalid_argument("triangulation dimension capped at 6");
    if (p.count() < p.dim() + 1) throw std::invalid_argument("point set is not full-dimensional");
    Builder b(p);
    b.run();
    return b.compact(p);
}

Barycentric locate_and_barycentric(const Triangulation& t, std::span<const double> x) {
    if (static_cast<int>(x.size()) != t.dim) throw std::invalid_argument("query dimension mismatch");
    int count = static_cast<int>(t.simplices.size());
    if (count == 0) throw std::runtime_error("empty triangulation");
    thread_local int hint = 0;
    int cur = (hint >= 0 && hint < count) ? hint : 0;
    std::vector<double> theta;
    int found = -1;
    int steps = 4 * count + 16;
    for (int it = 0; it < steps; ++it) {
        if (!solve_theta(t, cur, x, theta)) break;
        int worst = 0;
        for (int i = 1; i <= t.dim; ++i)
            if (theta[i] < theta[worst]) worst = i;
        if (theta[worst] >= 0.0) {
            found = cur;
            break;
        }
        int nb = t.neighbors[cur][worst];
        if (nb < 0) break;
        cur = nb;
    }

    // Containing set: every simplex with all coefficients >= -1e-9. Boundary
    // queries resolve to the lowest index in that set.
    int best = -1;
    if (found >= 0) {
        std::vector<char> seen(count, 0);
        std::deque<int> queue = {found};
        seen[found] = 1;
        while (!queue.empty()) {
            int s = queue.front();
            queue.pop_front();
            std::vector<double> th;
            if (!solve_theta(t, s, x, th)) continue;
            double mn = *std::min_element(th.begin(), th.end());
            if (mn < -1e-9) continue;
            if (best < 0 || s < best) best = s;
            for (int i = 0; i <= t.dim; ++i) {
                if (std::fabs(th[i]) > 1e-7) continue;
                int nb = t.neighbors[s][i];
                if (nb >= 0 && !seen[nb]) {
                    seen[nb] = 1;
                    queue.push_back(nb);
                }
            }
        }
    }
    if (best < 0) {
        double bestMin = -std::numeric_limits<double>::infinity();
        int bestLoose = -1;
        for (int s = 0; s < count; ++s) {
            std::vector<double> th;
            if (!solve_theta(t, s, x, th)) continue;
            double mn = *std::min_element(th.begin(), th.end());
            if (mn >= -1e-9) {
                best = s;
                break;
            }
            if (mn > bestMin) {
                bestMin = mn;
                bestLoose = s;
            }
        }
        if (best < 0 && bestMin >= -1e-6) best = bestLoose;
        if (best < 0) throw std::runtime_error("point lies outside the triangulated domain");
    }

    Barycentric out;
    out.simplex = best;
    solve_theta(t, best, x, out.theta);
    double sum = 0.0;
    for (double& th : out.theta) {
        if (th < 0.0) th = 0.0;
        sum += th;
    }
    if (sum > 0.0)
        for (double& th : out.theta) th /= sum;
    hint = best;
    return out;
}

} // namespace overtpoly

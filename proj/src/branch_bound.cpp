#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

#include "overtpoly/solver.hpp"

namespace overtpoly {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Node {
    double score = 0.0;  // sense-normalized objective, smaller is better
    long seq = 0;
    bool solved = false;
    std::vector<double> lo, hi;
    std::vector<double> x;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.score != b.score) return a.score > b.score;
        return a.seq > b.seq;
    }
};

double feasibility_violation(const MilpModel& m, const std::vector<double>& x) {
    double worst = 0.0;
    for (const auto& con : m.constraints()) {
        double act = con.lhs.constant;
        for (const auto& term : con.lhs.terms) act += term.coef * x[static_cast<std::size_t>(term.var)];
        const double over = con.rel == Relation::Equal ? std::abs(act - con.rhs) : act - con.rhs;
        worst = std::max(worst, over / std::max(1.0, std::abs(con.rhs)));
    }
    return worst;
}

}  // namespace

MilpResult solve_milp(const MilpModel& m, const LinearExpr& objective, Sense sense,
                      const MilpOptions& opt) {
    const auto start = std::chrono::steady_clock::now();
    const auto elapsed_s = [&start]() {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    const double s = sense == Sense::Maximize ? -1.0 : 1.0;
    const std::size_t nvars = m.variables().size();

    std::vector<int> bins;
    for (std::size_t j = 0; j < nvars; ++j)
        if (m.variables()[j].binary) bins.push_back(static_cast<int>(j));

    MilpResult res;
    res.status = MilpStatus::Infeasible;
    double inc_score = kInf;
    long seq = 0;

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;

    const auto try_incumbent = [&](const Node& node) {
        if (node.score >= inc_score) return;
        if (feasibility_violation(m, node.x) > 1e-5) return;
        inc_score = node.score;
        res.x = node.x;
    };

    // Most fractional binary, ties to the lowest index; -1 when integral.
    const auto branch_var = [&](const std::vector<double>& x) {
        int pick = -1;
        double worst = opt.integrality_tol;
        for (int j : bins) {
            const double v = x[static_cast<std::size_t>(j)];
            const double frac = std::abs(v - std::round(v));
            if (frac > worst) {
                worst = frac;
                pick = j;
            }
        }
        return pick;
    };

    const auto solve_node = [&](Node& node, long max_pivots) {
        SimplexOptions lp = opt.lp;
        lp.max_pivots = max_pivots;
        const LpSolution ls = solve_lp(m, objective, sense, lp, node.lo, node.hi);
        res.pivots += ls.pivots;
        if (ls.status == LpStatus::Unbounded)
            throw std::runtime_error("relaxation is unbounded; every variable needs finite bounds");
        if (ls.status == LpStatus::Optimal) {
            node.score = s * ls.objective;
            node.x = ls.x;
            node.solved = true;
        }
        return ls.status;
    };

    Node root;
    root.lo.resize(nvars);
    root.hi.resize(nvars);
    for (std::size_t j = 0; j < nvars; ++j) {
        root.lo[j] = m.variables()[j].lo;
        root.hi[j] = m.variables()[j].hi;
    }
    root.seq = seq++;
    const LpStatus root_status = solve_node(root, opt.lp.max_pivots);
    if (root_status == LpStatus::Infeasible) return res;
    if (root_status == LpStatus::IterationLimit)
        throw std::runtime_error("simplex hit its pivot limit on the root relaxation");
    ++res.nodes;
    double outer_score = root.score;
    if (branch_var(root.x) < 0) {
        try_incumbent(root);
        res.status = MilpStatus::Optimal;
        res.incumbent = s * inc_score;
        res.best_bound = s * root.score;
        res.gap = 0.0;
        return res;
    }
    open.push(std::move(root));

    const auto finish = [&](MilpStatus status) {
        res.status = status;
        res.incumbent = s * inc_score;
        res.best_bound = s * outer_score;
        res.gap = std::isfinite(inc_score)
                      ? (inc_score - outer_score) / std::max(1.0, std::abs(inc_score))
                      : kInf;
        return res;
    };

    while (!open.empty()) {
        outer_score = std::min(open.top().score, inc_score);
        if (std::isfinite(inc_score) &&
            inc_score - outer_score <= opt.mip_gap * std::max(1.0, std::abs(inc_score)))
            return finish(MilpStatus::Optimal);
        if (elapsed_s() > opt.time_limit_s) return finish(MilpStatus::TimeLimitWithBound);

        Node node = open.top();
        open.pop();
        if (node.score >= inc_score) continue;
        if (!node.solved) {
            // Retry a child whose relaxation ran out of pivots; give up with
            // the sound outer bound if it still cannot be solved.
            const LpStatus st = solve_node(node, 10 * opt.lp.max_pivots);
            if (st != LpStatus::Optimal) return finish(MilpStatus::TimeLimitWithBound);
            if (node.score >= inc_score) continue;
        }
        const int q = branch_var(node.x);
        if (q < 0) {
            try_incumbent(node);
            continue;
        }
        for (int side = 0; side < 2; ++side) {
            Node child;
            child.lo = node.lo;
            child.hi = node.hi;
            if (side == 0)
                child.hi[static_cast<std::size_t>(q)] = 0.0;
            else
                child.lo[static_cast<std::size_t>(q)] = 1.0;
            child.seq = seq++;
            const LpStatus st = solve_node(child, opt.lp.max_pivots);
            ++res.nodes;
            if (st == LpStatus::Infeasible) continue;
            if (st == LpStatus::IterationLimit) {
                child.score = node.score;
                child.solved = false;
                open.push(std::move(child));
                continue;
            }
            if (child.score >= inc_score) continue;
            if (branch_var(child.x) < 0) {
                try_incumbent(child);
                continue;
            }
            open.push(std::move(child));
        }
    }
    outer_score = inc_score;
    if (!std::isfinite(inc_score)) {
        res.status = MilpStatus::Infeasible;
        return res;
    }
    return finish(MilpStatus::Optimal);
}

}  // namespace overtpoly

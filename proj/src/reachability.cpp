#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "overtpoly/milp.hpp"
#include "overtpoly/network.hpp"
#include "overtpoly/reachability.hpp"
#include "overtpoly/solver.hpp"

namespace overtpoly {
namespace {

// Interval image of one step, used to seed symbolic window domains.
std::vector<Interval> interval_step(const SystemSpec& spec, const std::vector<Interval>& box) {
    const std::vector<Interval> u = output_interval(spec.controller, box);
    std::vector<Interval> out(static_cast<std::size_t>(spec.n));
    for (int i = 0; i < spec.n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        const Interval f = interval_evaluate(spec.dynamics[k], box);
        const Interval rate = f + u[k] + spec.noise[k];
        out[k] = box[k] + rate * Interval(spec.delta);
    }
    return out;
}

MilpResult dispatch_solve(const MilpModel& m, const LinearExpr& obj, Sense sense,
                          const ReachOptions& opt) {
    if (opt.backend == SolverBackend::External) return solve_external(m, obj, sense, opt.external_cmd);
    MilpOptions mo;
    mo.time_limit_s = opt.time_limit_s;
    mo.mip_gap = opt.mip_gap;
    return solve_milp(m, obj, sense, mo);
}

// Solves the window model and returns one box per step in the window.
std::vector<StepRecord> advance_window(const SystemSpec& spec, const std::vector<Interval>& entry,
                                       int width, const ReachOptions& opt, int t0) {
    // domains[s] bounds the state entering step s; the extra entry bounds the
    // state leaving the last step and intersects the reported boxes below.
    std::vector<std::vector<Interval>> domains;
    domains.push_back(entry);
    for (int s = 1; s <= width; ++s) domains.push_back(interval_step(spec, domains.back()));

    BoundOptions bo;
    bo.divisions = opt.divisions;
    std::vector<std::vector<BoundingSet>> enclosures(static_cast<std::size_t>(width));
    for (int s = 0; s < width; ++s) {
        for (int i = 0; i < spec.n; ++i) {
            const Expr& f = spec.dynamics[static_cast<std::size_t>(i)];
            if (f.free_vars().empty()) {
                enclosures[static_cast<std::size_t>(s)].push_back(BoundingSet{});
                continue;
            }
            std::vector<Interval> padded = domains[static_cast<std::size_t>(s)];
            for (Interval& iv : padded) iv = Interval(iv.lo - opt.domain_pad, iv.hi + opt.domain_pad);
            enclosures[static_cast<std::size_t>(s)].push_back(
                bound_expression(decompose_to_syntax_tree(f), padded, bo));
        }
    }

    const StepGraph g = build_step_graph(
        spec, std::span<const std::vector<Interval>>(domains.data(), static_cast<std::size_t>(width)),
        enclosures, t0);

    std::vector<StepRecord> records;
    for (int s = 0; s < width; ++s) {
        const auto started = std::chrono::steady_clock::now();
        StepRecord rec;
        rec.mode = width > 1 ? StepMode::Symbolic : StepMode::Concrete;
        rec.window = width > 1 ? width : 0;
        rec.box.resize(static_cast<std::size_t>(spec.n));
        for (int i = 0; i < spec.n; ++i) {
            const std::size_t k = static_cast<std::size_t>(i);
            double bound[2];
            for (int side = 0; side < 2; ++side) {
                const LinearExpr& obj = side == 0 ? g.next_lower[static_cast<std::size_t>(s)][k]
                                                  : g.next_upper[static_cast<std::size_t>(s)][k];
                const MilpResult r =
                    dispatch_solve(g.model, obj, side == 0 ? Sense::Minimize : Sense::Maximize, opt);
                if (r.status == MilpStatus::Infeasible)
                    throw std::runtime_error(
                        "step model infeasible at t=" + std::to_string(t0 + s + 1) + " dimension " +
                        std::to_string(i + 1) + "; this indicates an encoding bug");
                bound[side] = r.best_bound;
                rec.max_gap = std::max(rec.max_gap, std::isfinite(r.gap) ? r.gap : 0.0);
                rec.pivots += r.pivots;
            }
            if (bound[0] > bound[1] + 1e-6)
                throw std::runtime_error("lower bound exceeds upper bound at t=" +
                                         std::to_string(t0 + s + 1) + " dimension " +
                                         std::to_string(i + 1));
            rec.box[k] = Interval(std::min(bound[0], bound[1]), std::max(bound[0], bound[1]));
            if (width > 1) {
                // Inside a window the per-step solves see enclosures built over
                // pre-pass domains, not the boxes a concrete run would use, so
                // they may poke past the (sound) interval image; intersecting
                // keeps symbolic steps at least as tight as the pre-pass.
                const Interval pre = domains[static_cast<std::size_t>(s + 1)][k];
                const double ilo = std::max(rec.box[k].lo, pre.lo);
                const double ihi = std::min(rec.box[k].hi, pre.hi);
                if (ilo <= ihi) rec.box[k] = Interval(ilo, ihi);
            }
        }
        rec.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                           started)
                     .count();
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace

std::vector<Interval> next_set(const SystemSpec& spec, const std::vector<Interval>& box,
                               const ReachOptions& opt, StepRecord* record) {
    spec.validate();
    if (static_cast<int>(box.size()) != spec.n)
        throw std::invalid_argument("state box size does not match dimension");
    std::vector<StepRecord> recs = advance_window(spec, box, 1, opt, 0);
    if (record != nullptr) *record = recs.front();
    return recs.front().box;
}

ReachTrajectory compute_trajectory(const SystemSpec& spec, const ReachOptions& opt) {
    spec.validate();
    if (opt.symbolic_window < 1) throw std::invalid_argument("window width must be at least 1");
    ReachTrajectory traj;
    StepRecord initial;
    initial.mode = StepMode::Initial;
    initial.box = spec.init;
    traj.steps.push_back(std::move(initial));
    int t = 1;
    while (t <= spec.horizon) {
        const int width = std::min(opt.symbolic_window, spec.horizon - t + 1);
        std::vector<StepRecord> recs =
            advance_window(spec, traj.steps.back().box, width, opt, t - 1);
        for (StepRecord& rec : recs) traj.steps.push_back(std::move(rec));
        t += width;
    }
    return traj;
}

std::vector<Verdict> check_reach_avoid(const ReachTrajectory& traj, const SystemSpec& spec) {
    std::vector<Verdict> verdicts;
    const int last = static_cast<int>(traj.steps.size()) - 1;

    if (spec.goal) {
        Verdict v;
        v.property = PropertyKind::Reach;
        v.status = VerdictStatus::FalsifiedCandidate;
        bool any_overlap = false;
        for (int t = 0; t <= last; ++t) {
            const auto& box = traj.steps[static_cast<std::size_t>(t)].box;
            if (box_contains(*spec.goal, box)) {
                v.status = VerdictStatus::Verified;
                v.witness_step = t;
                v.witness_box = box;
                v.detail = "goal contains the step box";
                break;
            }
            if (boxes_intersect(*spec.goal, box)) any_overlap = true;
        }
        if (v.status == VerdictStatus::FalsifiedCandidate && any_overlap) {
            v.status = VerdictStatus::Unknown;
            v.detail = "some boxes overlap the goal without fitting inside it";
        } else if (v.status == VerdictStatus::FalsifiedCandidate) {
            v.detail = "no step box intersects the goal";
        }
        verdicts.push_back(std::move(v));
    }

    if (!spec.avoid.empty()) {
        Verdict v;
        v.property = PropertyKind::Avoid;
        v.status = VerdictStatus::Verified;
        v.detail = "every step clears every active region";
        for (int t = 0; t <= last && v.status == VerdictStatus::Verified; ++t) {
            const auto& box = traj.steps[static_cast<std::size_t>(t)].box;
            for (const AvoidRegion& region : spec.avoid) {
                if (t < region.t_from || t > region.t_to) continue;
                if (!avoid_region_clear(region, box)) {
                    v.status = VerdictStatus::FalsifiedCandidate;
                    v.witness_step = t;
                    v.witness_box = box;
                    v.detail = "step box meets an active avoid region";
                    break;
                }
            }
        }
        verdicts.push_back(std::move(v));
    }
    return verdicts;
}

double box_volume(std::span<const Interval> box) {
    double vol = 1.0;
    for (const Interval& iv : box) vol *= iv.width();
    return vol;
}

}  // namespace overtpoly

#pragma once

#include <span>
#include <string>
#include <vector>

#include "overtpoly/interval.hpp"
#include "overtpoly/system.hpp"

namespace overtpoly {

enum class SolverBackend { Builtin, External };

struct ReachOptions {
    int divisions = 2;        // PWL segments per convexity piece
    int symbolic_window = 1;  // 1 runs every step concrete
    SolverBackend backend = SolverBackend::Builtin;
    std::string external_cmd;
    double time_limit_s = 600.0;  // per MILP solve
    double mip_gap = 1e-9;
    double domain_pad = 1e-9;  // enclosure domains widen past the state box
};

enum class StepMode { Initial, Concrete, Symbolic };

struct StepRecord {
    StepMode mode = StepMode::Initial;
    int window = 0;  // width of the enclosing symbolic window, 0 otherwise
    std::vector<Interval> box;
    double max_gap = 0.0;
    double ms = 0.0;
    long pivots = 0;
};

struct ReachTrajectory {
    std::vector<StepRecord> steps;  // steps[t] holds the box at time t
};

// One concrete step: 2n MILP solves over enclosures built on the current
// box. Bounds come from the solver's outer bound, so a time limit widens
// the box instead of breaking soundness. An infeasible model is an
// encoding bug and raises.
std::vector<Interval> next_set(const SystemSpec& spec, const std::vector<Interval>& box,
                               const ReachOptions& opt = {}, StepRecord* record = nullptr);

// Walks the horizon in consecutive windows of opt.symbolic_window steps
// (the last window may be shorter). Window state domains come from an
// interval pre-pass from the entry box; each step in the window is then
// bounded by 2n solves on the shared window model.
ReachTrajectory compute_trajectory(const SystemSpec& spec, const ReachOptions& opt = {});

enum class PropertyKind { Reach, Avoid };
enum class VerdictStatus { Verified, FalsifiedCandidate, Unknown };

struct Verdict {
    PropertyKind property = PropertyKind::Avoid;
    VerdictStatus status = VerdictStatus::Unknown;
    int witness_step = -1;
    std::vector<Interval> witness_box;
    std::string detail;
};

// Avoid: verified only when every step clears every active region; any
// overlap is a falsified candidate because the boxes over-approximate.
// Reach: verified when some box fits inside the goal; falsified candidate
// when every box misses the goal entirely; unknown otherwise.
std::vector<Verdict> check_reach_avoid(const ReachTrajectory& traj, const SystemSpec& spec);

double box_volume(std::span<const Interval> box);

}  // namespace overtpoly

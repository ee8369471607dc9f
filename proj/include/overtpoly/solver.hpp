#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "overtpoly/milp.hpp"

namespace overtpoly {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpSolution {
    LpStatus status = LpStatus::IterationLimit;
    double objective = 0.0;
    std::vector<double> x;      // structural variables, model order
    std::vector<double> duals;  // one per constraint row
    long pivots = 0;
};

struct SimplexOptions {
    long max_pivots = 100000;
    double tol = 1e-9;       // reduced-cost optimality tolerance
    double feas_tol = 1e-7;  // row feasibility tolerance
};

// Two-phase primal simplex on the dense tableau with bounded variables;
// binaries are relaxed to [0,1]. lo/hi overrides replace variable bounds by
// index when nonempty (branch-and-bound uses this to fix binaries).
LpSolution solve_lp(const MilpModel& m, const LinearExpr& objective, Sense sense,
                    const SimplexOptions& opt = {}, std::span<const double> lo_override = {},
                    std::span<const double> hi_override = {});

enum class MilpStatus { Optimal, Infeasible, TimeLimitWithBound };

struct MilpResult {
    MilpStatus status = MilpStatus::Infeasible;
    double incumbent = 0.0;
    double best_bound = 0.0;
    double gap = 0.0;
    std::vector<double> x;
    long nodes = 0;
    long pivots = 0;
};

struct MilpOptions {
    double time_limit_s = 600.0;
    double mip_gap = 1e-6;
    double integrality_tol = 1e-6;
    SimplexOptions lp;
};

// Best-first branch-and-bound on the most fractional binary, ties to the
// lowest index. On time limit the result carries the incumbent and the best
// outstanding bound; treating that bound as the optimum stays sound.
MilpResult solve_milp(const MilpModel& m, const LinearExpr& objective, Sense sense,
                      const MilpOptions& opt = {});

// CPLEX-LP text: objective, Subject To, Bounds (every variable listed),
// Binaries, End. Coefficients carry 17 significant digits. Bracketed
// variable names are sanitized to parentheses.
std::string export_lp_text(const MilpModel& m, const LinearExpr& objective, Sense sense);

struct ParsedSolution {
    std::string status;
    double objective = 0.0;
    std::optional<double> bound;
    std::map<std::string, double> values;
};

// Adapter contract: "status <optimal|infeasible|timelimit>", "objective
// <v>", optional "bound <v>", then "var <name> <value>" lines.
ParsedSolution parse_solution_text(const std::string& text);

// Runs `cmd LPFILE SOLFILE` on the exported model and maps the solution
// back. A missing or failing solver raises; there is no silent fallback.
MilpResult solve_external(const MilpModel& m, const LinearExpr& objective, Sense sense,
                          const std::string& solver_cmd);

}  // namespace overtpoly

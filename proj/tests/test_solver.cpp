#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "overtpoly/solver.hpp"

using namespace overtpoly;

namespace {

// Enumerates candidate vertices from every n-subset of row/bound
// hyperplanes; with finite variable bounds the optimum sits on one of them.
struct VertexOracle {
    int n;
    std::vector<std::vector<double>> rows;  // coefficient vectors
    std::vector<Relation> rels;
    std::vector<double> rhs;
    std::vector<double> lo, hi;

    bool feasible(const std::vector<double>& x) const {
        for (int j = 0; j < n; ++j)
            if (x[j] < lo[j] - 1e-7 || x[j] > hi[j] + 1e-7) return false;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            double act = 0.0;
            for (int j = 0; j < n; ++j) act += rows[r][j] * x[j];
            if (rels[r] == Relation::Equal && std::abs(act - rhs[r]) > 1e-7) return false;
            if (rels[r] == Relation::LessEqual && act > rhs[r] + 1e-7) return false;
        }
        return true;
    }

    // Returns the best objective over feasible vertices, NaN when none is.
    double best(const std::vector<double>& c, Sense sense) const {
        std::vector<std::vector<double>> planes;  // coeffs then rhs
        std::vector<int> eq_rows;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            std::vector<double> p = rows[r];
            p.push_back(rhs[r]);
            if (rels[r] == Relation::Equal) eq_rows.push_back(static_cast<int>(planes.size()));
            planes.push_back(std::move(p));
        }
        for (int j = 0; j < n; ++j) {
            std::vector<double> p(n + 1, 0.0);
            p[j] = 1.0;
            p[n] = lo[j];
            planes.push_back(p);
            p[n] = hi[j];
            planes.push_back(std::move(p));
        }
        double best_val = std::numeric_limits<double>::quiet_NaN();
        const int m = static_cast<int>(planes.size());
        std::vector<int> pick;
        const auto consider = [&](const std::vector<int>& active) {
            std::vector<double> a(static_cast<std::size_t>(n) * n);
            std::vector<double> b(static_cast<std::size_t>(n));
            for (int r = 0; r < n; ++r) {
                for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(r) * n + j] = planes[active[r]][j];
                b[r] = planes[active[r]][n];
            }
            // Gaussian elimination with partial pivoting.
            for (int col = 0; col < n; ++col) {
                int piv = -1;
                double mag = 1e-9;
                for (int r = col; r < n; ++r) {
                    const double v = std::abs(a[static_cast<std::size_t>(r) * n + col]);
                    if (v > mag) {
                        mag = v;
                        piv = r;
                    }
                }
                if (piv < 0) return;
                for (int j = 0; j < n; ++j)
                    std::swap(a[static_cast<std::size_t>(col) * n + j], a[static_cast<std::size_t>(piv) * n + j]);
                std::swap(b[col], b[piv]);
                for (int r = 0; r < n; ++r) {
                    if (r == col) continue;
                    const double f = a[static_cast<std::size_t>(r) * n + col] / a[static_cast<std::size_t>(col) * n + col];
                    if (f == 0.0) continue;
                    for (int j = 0; j < n; ++j)
                        a[static_cast<std::size_t>(r) * n + j] -= f * a[static_cast<std::size_t>(col) * n + j];
                    b[r] -= f * b[col];
                }
            }
            std::vector<double> x(static_cast<std::size_t>(n));
            for (int r = 0; r < n; ++r) x[r] = b[r] / a[static_cast<std::size_t>(r) * n + r];
            for (double v : x)
                if (!std::isfinite(v)) return;
            if (!feasible(x)) return;
            double val = 0.0;
            for (int j = 0; j < n; ++j) val += c[j] * x[j];
            if (std::isnan(best_val) || (sense == Sense::Maximize ? val > best_val : val < best_val))
                best_val = val;
        };
        // Every equality row must be active; fill the rest combinatorially.
        std::vector<int> rest;
        for (int p = 0; p < m; ++p)
            if (std::find(eq_rows.begin(), eq_rows.end(), p) == eq_rows.end()) rest.push_back(p);
        const int need = n - static_cast<int>(eq_rows.size());
        if (need < 0) return best_val;
        const std::function<void(int, int)> rec = [&](int start, int left) {
            if (left == 0) {
                std::vector<int> active = eq_rows;
                active.insert(active.end(), pick.begin(), pick.end());
                consider(active);
                return;
            }
            for (int p = start; p + left <= static_cast<int>(rest.size()); ++p) {
                pick.push_back(rest[p]);
                rec(p + 1, left - 1);
                pick.pop_back();
            }
        };
        rec(0, need);
        return best_val;
    }
};

MilpModel oracle_to_model(const VertexOracle& o) {
    MilpModel m;
    for (int j = 0; j < o.n; ++j)
        m.add_variable("x" + std::to_string(j), o.lo[j], o.hi[j]);
    for (std::size_t r = 0; r < o.rows.size(); ++r) {
        LinearExpr lhs;
        for (int j = 0; j < o.n; ++j)
            if (o.rows[r][j] != 0.0) lhs.add(j, o.rows[r][j]);
        m.add_constraint(std::move(lhs), o.rels[r], o.rhs[r]);
    }
    return m;
}

std::string source_dir() { return OVERTPOLY_SOURCE_DIR; }

bool adapter_available() {
    static const int rc = std::system("python3 -c 'import scipy.optimize' >/dev/null 2>&1");
    return rc == 0;
}

std::string adapter_cmd() { return "python3 " + source_dir() + "/tools/lp_solve_adapter.py"; }

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("single variable maximum lands on the tight row") {
    MilpModel m;
    const int x = m.add_variable("x", 0.0, 10.0);
    m.add_constraint(LinearExpr{}.add(x, 1.0), Relation::LessEqual, 3.0);
    const LpSolution s = solve_lp(m, LinearExpr{}.add(x, 1.0), Sense::Maximize);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(s.x[0] == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("shared budget splits across two variables") {
    MilpModel m;
    const int x = m.add_variable("x", 0.0, 1.0);
    const int y = m.add_variable("y", 0.0, 1.0);
    m.add_constraint(LinearExpr{}.add(x, 1.0).add(y, 1.0), Relation::LessEqual, 1.0);
    const LpSolution s = solve_lp(m, LinearExpr{}.add(x, 1.0).add(y, 1.0), Sense::Maximize);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("free variables enter from zero and follow equalities") {
    MilpModel m;
    const double inf = std::numeric_limits<double>::infinity();
    const int x = m.add_variable("x", -inf, inf);
    const int y = m.add_variable("y", -inf, inf);
    m.add_constraint(LinearExpr{}.add(x, 1.0).add(y, 1.0), Relation::Equal, 1.0);
    m.add_constraint(LinearExpr{}.add(x, 1.0).add(y, -1.0), Relation::Equal, 0.5);
    const LpSolution s = solve_lp(m, LinearExpr{}.add(x, 1.0), Sense::Minimize);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.x[0] == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(s.x[1] == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("objective constant rides along") {
    MilpModel m;
    const int x = m.add_variable("x", -2.0, 5.0);
    LinearExpr obj;
    obj.add(x, 2.0);
    obj.constant = 7.0;
    const LpSolution s = solve_lp(m, obj, Sense::Minimize);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("a ray without limit reports unbounded") {
    MilpModel m;
    const int x = m.add_variable("x", 0.0, std::numeric_limits<double>::infinity());
    const LpSolution s = solve_lp(m, LinearExpr{}.add(x, 1.0), Sense::Maximize);
    CHECK(s.status == LpStatus::Unbounded);
}

TEST_CASE("contradictory row and bound report infeasible") {
    MilpModel m;
    const int x = m.add_variable("x", 0.0, 4.0);
    m.add_constraint(LinearExpr{}.add(x, 1.0), Relation::LessEqual, -1.0);
    const LpSolution s = solve_lp(m, LinearExpr{}.add(x, 1.0), Sense::Minimize);
    CHECK(s.status == LpStatus::Infeasible);
}

TEST_CASE("duplicated rows stay degenerate but terminate") {
    MilpModel m;
    const int x = m.add_variable("x", 0.0, 1.0);
    const int y = m.add_variable("y", 0.0, 1.0);
    for (int k = 0; k < 6; ++k)
        m.add_constraint(LinearExpr{}.add(x, 1.0).add(y, 1.0), Relation::LessEqual, 1.0);
    const LpSolution s = solve_lp(m, LinearExpr{}.add(x, 2.0).add(y, 1.0), Sense::Maximize);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("random bounded programs match vertex enumeration") {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> coef(-3.0, 3.0);
    std::uniform_int_distribution<int> dims(1, 3);
    std::uniform_int_distribution<int> nrows(0, 5);
    std::uniform_int_distribution<int> relpick(0, 3);
    int infeasible_seen = 0;
    for (int trial = 0; trial < 120; ++trial) {
        VertexOracle o;
        o.n = dims(rng);
        for (int j = 0; j < o.n; ++j) {
            const double a = coef(rng), b = coef(rng);
            o.lo.push_back(std::min(a, b));
            o.hi.push_back(std::max(a, b) + 0.1);
        }
        const int rows = nrows(rng);
        for (int r = 0; r < rows; ++r) {
            std::vector<double> row(static_cast<std::size_t>(o.n));
            for (double& v : row) v = coef(rng);
            o.rows.push_back(row);
            o.rels.push_back(relpick(rng) == 0 ? Relation::Equal : Relation::LessEqual);
            o.rhs.push_back(coef(rng));
        }
        std::vector<double> c(static_cast<std::size_t>(o.n));
        for (double& v : c) v = coef(rng);
        const Sense sense = trial % 2 == 0 ? Sense::Minimize : Sense::Maximize;

        const double expect = o.best(c, sense);
        LinearExpr obj;
        for (int j = 0; j < o.n; ++j) obj.add(j, c[j]);
        const LpSolution s = solve_lp(oracle_to_model(o), obj, sense);
        CAPTURE(trial);
        if (std::isnan(expect)) {
            CHECK(s.status == LpStatus::Infeasible);
            ++infeasible_seen;
        } else {
            REQUIRE(s.status == LpStatus::Optimal);
            CHECK(s.objective == doctest::Approx(expect).epsilon(1e-6));
            CHECK(o.feasible(s.x));
        }
    }
    CHECK(infeasible_seen > 5);  // the corpus must exercise both outcomes
}

TEST_CASE("optimal duals satisfy complementary slackness") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    for (int trial = 0; trial < 40; ++trial) {
        MilpModel m;
        const int n = 3;
        for (int j = 0; j < n; ++j) m.add_variable("x" + std::to_string(j), -1.0, 2.0);
        std::vector<std::vector<double>> rows;
        std::vector<double> rhs;
        for (int r = 0; r < 4; ++r) {
            LinearExpr lhs;
            std::vector<double> row;
            for (int j = 0; j < n; ++j) {
                const double v = coef(rng);
                row.push_back(v);
                lhs.add(j, v);
            }
            const double b = coef(rng) + 2.0;
            rows.push_back(row);
            rhs.push_back(b);
            m.add_constraint(std::move(lhs), Relation::LessEqual, b);
        }
        LinearExpr obj;
        for (int j = 0; j < n; ++j) obj.add(j, coef(rng));
        const LpSolution s = solve_lp(m, obj, Sense::Minimize);
        REQUIRE(s.status == LpStatus::Optimal);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            double act = 0.0;
            for (int j = 0; j < n; ++j) act += rows[r][j] * s.x[static_cast<std::size_t>(j)];
            CHECK(std::abs(s.duals[r] * (rhs[r] - act)) <= 1e-6);
        }
    }
}

TEST_CASE("knapsack picks the better binary") {
    MilpModel m;
    const int a = m.add_binary("a");
    const int b = m.add_binary("b");
    m.add_constraint(LinearExpr{}.add(a, 1.0).add(b, 1.0), Relation::LessEqual, 1.0);
    const MilpResult r = solve_milp(m, LinearExpr{}.add(a, 3.0).add(b, 2.0), Sense::Maximize);
    REQUIRE(r.status == MilpStatus::Optimal);
    CHECK(r.incumbent == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.x[1] == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("pure binary programs match exhaustive enumeration") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    std::uniform_int_distribution<int> sizes(2, 10);
    int infeasible_seen = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const int k = sizes(rng);
        MilpModel m;
        for (int j = 0; j < k; ++j) m.add_binary("d" + std::to_string(j));
        std::vector<std::vector<double>> rows;
        std::vector<double> rhs;
        for (int r = 0; r < 3; ++r) {
            LinearExpr lhs;
            std::vector<double> row;
            for (int j = 0; j < k; ++j) {
                const double v = coef(rng);
                row.push_back(v);
                lhs.add(j, v);
            }
            const double b = coef(rng) - 1.0;
            rows.push_back(row);
            rhs.push_back(b);
            m.add_constraint(std::move(lhs), Relation::LessEqual, b);
        }
        std::vector<double> c(static_cast<std::size_t>(k));
        LinearExpr obj;
        for (int j = 0; j < k; ++j) {
            c[static_cast<std::size_t>(j)] = coef(rng);
            obj.add(j, c[static_cast<std::size_t>(j)]);
        }
        double best = std::numeric_limits<double>::quiet_NaN();
        for (int mask = 0; mask < (1 << k); ++mask) {
            bool ok = true;
            for (std::size_t r = 0; r < rows.size() && ok; ++r) {
                double act = 0.0;
                for (int j = 0; j < k; ++j)
                    if (mask & (1 << j)) act += rows[r][static_cast<std::size_t>(j)];
                ok = act <= rhs[r] + 1e-12;
            }
            if (!ok) continue;
            double val = 0.0;
            for (int j = 0; j < k; ++j)
                if (mask & (1 << j)) val += c[static_cast<std::size_t>(j)];
            if (std::isnan(best) || val < best) best = val;
        }
        const MilpResult r = solve_milp(m, obj, Sense::Minimize);
        CAPTURE(trial);
        if (std::isnan(best)) {
            CHECK(r.status == MilpStatus::Infeasible);
            ++infeasible_seen;
        } else {
            REQUIRE(r.status == MilpStatus::Optimal);
            CHECK(r.incumbent == doctest::Approx(best).epsilon(1e-7));
            CHECK(r.best_bound <= best + 1e-7);
        }
    }
    CHECK(infeasible_seen > 0);
}

TEST_CASE("branch and bound is deterministic") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    MilpModel m;
    LinearExpr obj;
    for (int j = 0; j < 8; ++j) obj.add(m.add_binary("d" + std::to_string(j)), coef(rng));
    LinearExpr lhs;
    for (int j = 0; j < 8; ++j) lhs.add(j, 1.0);
    m.add_constraint(std::move(lhs), Relation::LessEqual, 4.0);
    const MilpResult a = solve_milp(m, obj, Sense::Minimize);
    const MilpResult b = solve_milp(m, obj, Sense::Minimize);
    REQUIRE(a.status == MilpStatus::Optimal);
    CHECK(a.incumbent == b.incumbent);
    CHECK(a.x == b.x);
    CHECK(a.nodes == b.nodes);
}

TEST_CASE("without binaries the tree solver equals the relaxation") {
    MilpModel m;
    const int x = m.add_variable("x", 0.0, 2.0);
    const int y = m.add_variable("y", 0.0, 2.0);
    m.add_constraint(LinearExpr{}.add(x, 1.0).add(y, 2.0), Relation::LessEqual, 2.5);
    const LinearExpr obj = LinearExpr{}.add(x, 1.0).add(y, 1.0);
    const MilpResult r = solve_milp(m, obj, Sense::Maximize);
    const LpSolution s = solve_lp(m, obj, Sense::Maximize);
    REQUIRE(r.status == MilpStatus::Optimal);
    CHECK(r.incumbent == doctest::Approx(s.objective).epsilon(1e-12));
    CHECK(r.nodes == 1);
}

TEST_CASE("a zero time limit still yields a sound outer bound") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    MilpModel m;
    LinearExpr obj;
    const int k = 10;
    for (int j = 0; j < k; ++j) obj.add(m.add_binary("d" + std::to_string(j)), coef(rng));
    LinearExpr lhs;
    for (int j = 0; j < k; ++j) lhs.add(j, coef(rng));
    m.add_constraint(lhs, Relation::LessEqual, 0.3);
    MilpOptions opt;
    opt.time_limit_s = 0.0;
    const MilpResult limited = solve_milp(m, obj, Sense::Minimize, opt);
    const MilpResult full = solve_milp(m, obj, Sense::Minimize);
    REQUIRE(full.status == MilpStatus::Optimal);
    if (limited.status == MilpStatus::TimeLimitWithBound)
        CHECK(limited.best_bound <= full.incumbent + 1e-9);
}

TEST_CASE("exported text carries sections and sanitized names") {
    MilpModel m;
    const int x = m.add_variable("x[0][1]", -1.0, 2.0);
    const int d = m.add_binary("d[0]");
    const int f = m.add_variable("f", -std::numeric_limits<double>::infinity(),
                                 std::numeric_limits<double>::infinity());
    m.add_constraint(LinearExpr{}.add(x, 1.0 / 3.0).add(d, -1.0).add(f, 1.0), Relation::LessEqual,
                     0.5, "row[0]");
    m.add_constraint(LinearExpr{}.add(x, 1.0), Relation::Equal, 1.0);
    const std::string text = export_lp_text(m, LinearExpr{}.add(x, 1.0).add(d, 2.0), Sense::Maximize);
    CHECK(text.find("Maximize") != std::string::npos);
    CHECK(text.find("Subject To") != std::string::npos);
    CHECK(text.find("Bounds") != std::string::npos);
    CHECK(text.find("Binaries") != std::string::npos);
    CHECK(text.find("End") != std::string::npos);
    CHECK(text.find("x(0)(1)") != std::string::npos);
    CHECK(text.find("row(0)") != std::string::npos);
    CHECK(text.find('[') == std::string::npos);
    CHECK(text.find("0.33333333333333331") != std::string::npos);
    CHECK(text.find(" f free") != std::string::npos);
}

TEST_CASE("solution files parse and malformed lines are rejected") {
    const ParsedSolution ps = parse_solution_text(
        "# comment\nstatus optimal\nobjective 2.5\nvar x 1\nvar y -0.25\n");
    CHECK(ps.status == "optimal");
    CHECK(ps.objective == doctest::Approx(2.5));
    CHECK(ps.values.at("y") == doctest::Approx(-0.25));

    CHECK_THROWS_WITH_AS(parse_solution_text("status optimal\nobjective 1\nvar x\n"),
                         doctest::Contains("line 3"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_solution_text("objective 1\n"), doctest::Contains("no status"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_solution_text("status sideways\n"), doctest::Contains("unknown status"),
                         std::runtime_error);
}

TEST_CASE("external adapter agrees with the builtin tree search") {
    if (!adapter_available()) {
        MESSAGE("scipy not importable; skipping external adapter cross-check");
        return;
    }
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    for (int trial = 0; trial < 12; ++trial) {
        MilpModel m;
        LinearExpr obj;
        const int nx = 3, nd = 3;
        for (int j = 0; j < nx; ++j)
            obj.add(m.add_variable("x[" + std::to_string(j) + "]", -1.5, 1.5), coef(rng));
        for (int j = 0; j < nd; ++j) obj.add(m.add_binary("d[" + std::to_string(j) + "]"), coef(rng));
        for (int r = 0; r < 3; ++r) {
            LinearExpr lhs;
            for (int j = 0; j < nx + nd; ++j) lhs.add(j, coef(rng));
            m.add_constraint(std::move(lhs), Relation::LessEqual, coef(rng) + 1.5);
        }
        obj.constant = 0.25;
        const Sense sense = trial % 2 == 0 ? Sense::Minimize : Sense::Maximize;
        const MilpResult mine = solve_milp(m, obj, sense);
        CAPTURE(trial);
        const MilpResult theirs = solve_external(m, obj, sense, adapter_cmd());
        if (mine.status == MilpStatus::Infeasible) {
            CHECK(theirs.status == MilpStatus::Infeasible);
            continue;
        }
        REQUIRE(theirs.status == MilpStatus::Optimal);
        CHECK(theirs.incumbent == doctest::Approx(mine.incumbent).epsilon(1e-6));
    }
}

TEST_CASE("external solve rejects a missing command") {
    MilpModel m;
    m.add_variable("x", 0.0, 1.0);
    CHECK_THROWS_WITH_AS(solve_external(m, LinearExpr{}.add(0, 1.0), Sense::Minimize, ""),
                         doctest::Contains("no command"), std::runtime_error);
    CHECK_THROWS_AS(
        solve_external(m, LinearExpr{}.add(0, 1.0), Sense::Minimize, "/nonexistent/solver"),
        std::runtime_error);
}

}  // TEST_SUITE

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#ifdef _WIN32
#include <process.h>
#else
#include <unistd.h>
#endif

#include "overtpoly/solver.hpp"

namespace overtpoly {
namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// CPLEX-LP names cannot contain brackets; parentheses survive round trips
// and keep the mapping bijective.
std::string sanitize(const std::string& name) {
    std::string out = name;
    for (char& c : out) {
        if (c == '[') c = '(';
        if (c == ']') c = ')';
    }
    return out;
}

void append_terms(std::string& out, const LinearExpr& expr, const MilpModel& m) {
    int on_line = 0;
    bool first = true;
    for (const auto& term : expr.terms) {
        if (term.coef == 0.0) continue;
        if (on_line == 8) {
            out += "\n   ";
            on_line = 0;
        }
        const double a = std::abs(term.coef);
        if (first) {
            out += term.coef < 0.0 ? "- " : "";
            first = false;
        } else {
            out += term.coef < 0.0 ? " - " : " + ";
        }
        out += fmt17(a);
        out += ' ';
        out += sanitize(m.variables()[static_cast<std::size_t>(term.var)].name);
        ++on_line;
    }
    if (first) {
        out += "0 ";
        out += m.variable_count() > 0 ? sanitize(m.variables()[0].name) : std::string("x");
    }
}

struct TempFiles {
    std::filesystem::path lp, sol;
    ~TempFiles() {
        std::error_code ec;
        std::filesystem::remove(lp, ec);
        std::filesystem::remove(sol, ec);
    }
};

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    out += '\'';
    return out;
}

}  // namespace

std::string export_lp_text(const MilpModel& m, const LinearExpr& objective, Sense sense) {
    std::string out;
    out += "\\ overtpoly model export\n";
    if (objective.constant != 0.0)
        out += "\\ objective constant " + fmt17(objective.constant) + "\n";
    out += sense == Sense::Maximize ? "Maximize\n" : "Minimize\n";
    out += " obj: ";
    append_terms(out, objective, m);
    out += "\nSubject To\n";
    int row = 0;
    for (const auto& con : m.constraints()) {
        std::string name = con.name.empty() ? "c" + std::to_string(row) : sanitize(con.name);
        out += " " + name + ": ";
        LinearExpr lhs = con.lhs;
        const double rhs = con.rhs - lhs.constant;
        lhs.constant = 0.0;
        append_terms(out, lhs, m);
        out += con.rel == Relation::Equal ? " = " : " <= ";
        out += fmt17(rhs);
        out += '\n';
        ++row;
    }
    out += "Bounds\n";
    for (const auto& v : m.variables()) {
        const std::string name = sanitize(v.name);
        const bool lo_fin = std::isfinite(v.lo);
        const bool hi_fin = std::isfinite(v.hi);
        if (lo_fin && hi_fin && v.lo == v.hi)
            out += " " + name + " = " + fmt17(v.lo) + "\n";
        else if (lo_fin && hi_fin)
            out += " " + fmt17(v.lo) + " <= " + name + " <= " + fmt17(v.hi) + "\n";
        else if (lo_fin)
            out += " " + name + " >= " + fmt17(v.lo) + "\n";
        else if (hi_fin)
            out += " -infinity <= " + name + " <= " + fmt17(v.hi) + "\n";
        else
            out += " " + name + " free\n";
    }
    bool any_bin = false;
    for (const auto& v : m.variables()) {
        if (!v.binary) continue;
        if (!any_bin) {
            out += "Binaries\n";
            any_bin = true;
        }
        out += " " + sanitize(v.name) + "\n";
    }
    out += "End\n";
    return out;
}

ParsedSolution parse_solution_text(const std::string& text) {
    ParsedSolution ps;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool have_status = false;
    bool have_objective = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream tok(line);
        std::string head;
        if (!(tok >> head) || head[0] == '#') continue;
        const auto fail = [&](const std::string& why) {
            throw std::runtime_error("malformed solution line " + std::to_string(lineno) + " (" +
                                     why + "): " + line);
        };
        if (head == "status") {
            if (!(tok >> ps.status)) fail("missing status value");
            if (ps.status != "optimal" && ps.status != "infeasible" && ps.status != "timelimit")
                fail("unknown status");
            have_status = true;
        } else if (head == "objective") {
            if (!(tok >> ps.objective)) fail("missing objective value");
            have_objective = true;
        } else if (head == "bound") {
            double b;
            if (!(tok >> b)) fail("missing bound value");
            ps.bound = b;
        } else if (head == "var") {
            std::string name;
            double v;
            if (!(tok >> name >> v)) fail("expected var NAME VALUE");
            ps.values[name] = v;
        } else {
            fail("unknown directive");
        }
    }
    if (!have_status) throw std::runtime_error("solution file has no status line");
    if (ps.status != "infeasible" && !have_objective)
        throw std::runtime_error("solution file has no objective line");
    return ps;
}

MilpResult solve_external(const MilpModel& m, const LinearExpr& objective, Sense sense,
                          const std::string& solver_cmd) {
    if (solver_cmd.empty())
        throw std::runtime_error("external solver requested but no command configured");

    static int counter = 0;
    const std::string stem = "overtpoly_" + std::to_string(::getpid()) + "_" +
                             std::to_string(counter++);
    TempFiles tmp;
    tmp.lp = std::filesystem::temp_directory_path() / (stem + ".lp");
    tmp.sol = std::filesystem::temp_directory_path() / (stem + ".sol");
    {
        std::ofstream out(tmp.lp);
        out << export_lp_text(m, objective, sense);
        if (!out.good()) throw std::runtime_error("cannot write " + tmp.lp.string());
    }
    const std::string cmd =
        solver_cmd + " " + shell_quote(tmp.lp.string()) + " " + shell_quote(tmp.sol.string());
    const int rc = std::system(cmd.c_str());
    if (rc != 0)
        throw std::runtime_error("external solver exited with code " + std::to_string(rc) +
                                 ": " + solver_cmd);
    std::ifstream in(tmp.sol);
    if (!in.good())
        throw std::runtime_error("external solver produced no solution file: " + tmp.sol.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const ParsedSolution ps = parse_solution_text(buf.str());

    MilpResult res;
    if (ps.status == "infeasible") {
        res.status = MilpStatus::Infeasible;
        return res;
    }
    res.status = ps.status == "optimal" ? MilpStatus::Optimal : MilpStatus::TimeLimitWithBound;
    if (res.status == MilpStatus::TimeLimitWithBound && !ps.bound)
        throw std::runtime_error("timelimit solution is missing its bound line");

    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t j = 0; j < m.variables().size(); ++j)
        index[sanitize(m.variables()[j].name)] = j;
    res.x.assign(m.variables().size(), 0.0);
    for (const auto& [name, value] : ps.values) {
        const auto it = index.find(name);
        if (it == index.end())
            throw std::runtime_error("solution names unknown variable: " + name);
        res.x[it->second] = value;
    }
    // The LP file cannot carry the objective constant; add it back here.
    res.incumbent = ps.objective + objective.constant;
    res.best_bound = ps.bound ? *ps.bound + objective.constant : res.incumbent;
    res.gap = std::abs(res.incumbent - res.best_bound) / std::max(1.0, std::abs(res.incumbent));
    return res;
}

}  // namespace overtpoly

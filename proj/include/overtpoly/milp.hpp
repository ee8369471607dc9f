#pragma once

#include <span>
#include <string>
#include <vector>

#include "overtpoly/bounding_set.hpp"
#include "overtpoly/system.hpp"
#include "overtpoly/triangulation.hpp"

namespace overtpoly {

enum class Sense { Minimize, Maximize };
enum class Relation { LessEqual, Equal };

struct LinearTerm {
    int var = -1;
    double coef = 0.0;
};

struct LinearExpr {
    std::vector<LinearTerm> terms;
    double constant = 0.0;

    LinearExpr& add(int var, double coef) {
        terms.push_back({var, coef});
        return *this;
    }
};

struct MilpVariable {
    std::string name;
    double lo = 0.0;
    double hi = 0.0;
    bool binary = false;
};

struct MilpConstraint {
    std::string name;
    LinearExpr lhs;  // constants on the lhs are folded into rhs when solving
    Relation rel = Relation::LessEqual;
    double rhs = 0.0;
};

class MilpModel {
public:
    int add_variable(std::string name, double lo, double hi);
    int add_binary(std::string name);
    void add_constraint(LinearExpr lhs, Relation rel, double rhs, std::string name = "");

    const std::vector<MilpVariable>& variables() const { return vars_; }
    const std::vector<MilpConstraint>& constraints() const { return cons_; }
    int variable_count() const { return static_cast<int>(vars_.size()); }

private:
    std::vector<MilpVariable> vars_;
    std::vector<MilpConstraint> cons_;
};

// Handles into the model for one encoded enclosure: the shared state vars
// (one per axis of the bounding set), the surface triple, and the simplex
// selection variables.
struct EnclosureVars {
    std::vector<int> x;
    int y_lower = -1;
    int y_upper = -1;
    int y = -1;
    std::vector<int> lambda;
    std::vector<int> binaries;
};

// Aggregated convex combination encoding of the enclosure: one lambda per
// grid point, one binary per simplex, exactly one simplex active, lambda
// support restricted to the active simplex's vertices, x tied to the lambda
// mix, surface bounds tied to L and U. t and i tag variable names.
EnclosureVars encode_enclosure(MilpModel& m, const BoundingSet& b, const Triangulation& tri,
                               std::span<const int> state_vars, int t, int i);

struct NetworkVars {
    std::vector<int> inputs;
    std::vector<int> outputs;  // masked outputs point at fixed variables
};

// Big-M ReLU encoding with sign fixing: neurons whose pre-activation bound
// is one-signed become linear; only straddling neurons get a binary.
NetworkVars encode_relu_network(MilpModel& m, const NeuralNetwork& net,
                                const std::vector<std::vector<Interval>>& pre_bounds,
                                std::span<const int> input_vars, int t);

// Vertices are (t, i) with i = 0 the controller and i in [1..n] the state
// dimension enclosure models; edge lists hold vertex indices.
struct DependencyGraph {
    struct Vertex {
        int t = 0;
        int i = 0;
    };
    std::vector<Vertex> vertices;
    std::vector<std::pair<int, int>> state_edges;
    std::vector<std::pair<int, int>> temporal_edges;

    int vertex_index(int t, int i) const;
};

// Window of consecutive steps assembled into one model. Steps are indexed
// relative to the window; step s states live in x[s] bounded by domains[s].
// next_lower/next_upper[s][i] are the update expressions with the surface
// variable replaced by its lower/upper envelope; coupling between steps uses
// the free surface variable.
struct StepGraph {
    MilpModel model;
    DependencyGraph graph;
    std::vector<std::vector<int>> x;
    std::vector<std::vector<LinearExpr>> next_lower;
    std::vector<std::vector<LinearExpr>> next_upper;
};

// enclosures[s][i] is the bounding set for dynamics i over domains[s];
// constant transition functions pass a corner-grid set with L = U and are
// folded into the update expressions without an enclosure model.
StepGraph build_step_graph(const SystemSpec& spec,
                           std::span<const std::vector<Interval>> domains,
                           const std::vector<std::vector<BoundingSet>>& enclosures, int t0);

}  // namespace overtpoly

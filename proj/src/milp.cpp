#include "overtpoly/milp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace overtpoly {

namespace {

std::string tag2(const char* base, int t, int i) {
    return std::string(base) + "[" + std::to_string(t) + "][" + std::to_string(i) + "]";
}

std::string tag3(const char* base, int t, int i, int j) {
    return tag2(base, t, i) + "[" + std::to_string(j) + "]";
}

}  // namespace

int MilpModel::add_variable(std::string name, double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("variable '" + name + "' has lo > hi");
    vars_.push_back({std::move(name), lo, hi, false});
    return static_cast<int>(vars_.size()) - 1;
}

int MilpModel::add_binary(std::string name) {
    vars_.push_back({std::move(name), 0.0, 1.0, true});
    return static_cast<int>(vars_.size()) - 1;
}

void MilpModel::add_constraint(LinearExpr lhs, Relation rel, double rhs, std::string name) {
    for (const LinearTerm& term : lhs.terms)
        if (term.var < 0 || term.var >= variable_count())
            throw std::invalid_argument("constraint references an undeclared variable");
    cons_.push_back({std::move(name), std::move(lhs), rel, rhs});
}

int DependencyGraph::vertex_index(int t, int i) const {
    for (std::size_t k = 0; k < vertices.size(); ++k)
        if (vertices[k].t == t && vertices[k].i == i) return static_cast<int>(k);
    throw std::out_of_range("no dependency graph vertex (" + std::to_string(t) + ", " +
                            std::to_string(i) + ")");
}

EnclosureVars encode_enclosure(MilpModel& m, const BoundingSet& b, const Triangulation& tri,
                               std::span<const int> state_vars, int t, int i) {
    b.validate();
    if (tri.simplices.empty()) throw std::invalid_argument("empty triangulation");
    const PointSet grid = b.grid();
    const int tri_points =
        tri.dim > 0 ? static_cast<int>(tri.points.size()) / tri.dim : 0;
    if (tri_points != grid.count())
        throw std::invalid_argument("triangulation does not cover the bounding set grid");
    if (static_cast<int>(state_vars.size()) != b.dim())
        throw std::invalid_argument("state variable count does not match bounding set dimension");

    const std::size_t d = b.grid_size();
    const std::size_t msimp = tri.simplices.size();

    EnclosureVars out;
    out.x.assign(state_vars.begin(), state_vars.end());
    out.lambda.reserve(d);
    for (std::size_t j = 0; j < d; ++j)
        out.lambda.push_back(m.add_variable(tag3("lambda", t, i, static_cast<int>(j)), 0.0, 1.0));
    out.binaries.reserve(msimp);
    for (std::size_t k = 0; k < msimp; ++k)
        out.binaries.push_back(m.add_binary(tag3("b", t, i, static_cast<int>(k))));

    const auto [lmin, lmax] = std::minmax_element(b.lower.begin(), b.lower.end());
    const auto [umin, umax] = std::minmax_element(b.upper.begin(), b.upper.end());
    out.y_lower = m.add_variable(tag2("ylo", t, i), *lmin, *lmax);
    out.y_upper = m.add_variable(tag2("yhi", t, i), *umin, *umax);
    out.y = m.add_variable(tag2("y", t, i), *lmin, *umax);

    LinearExpr sum_lambda;
    for (int v : out.lambda) sum_lambda.add(v, 1.0);
    m.add_constraint(std::move(sum_lambda), Relation::Equal, 1.0, tag2("cc1_lambda", t, i));

    LinearExpr sum_b;
    for (int v : out.binaries) sum_b.add(v, 1.0);
    m.add_constraint(std::move(sum_b), Relation::Equal, 1.0, tag2("cc1_b", t, i));

    // cc2: lambda_j can be nonzero only at vertices of the active simplex.
    std::vector<std::vector<int>> simplices_at(d);
    for (std::size_t k = 0; k < msimp; ++k)
        for (int vid : tri.simplices[k])
            simplices_at[static_cast<std::size_t>(vid)].push_back(static_cast<int>(k));
    for (std::size_t j = 0; j < d; ++j) {
        LinearExpr e;
        e.add(out.lambda[j], 1.0);
        for (int k : simplices_at[j]) e.add(out.binaries[static_cast<std::size_t>(k)], -1.0);
        m.add_constraint(std::move(e), Relation::LessEqual, 0.0,
                         tag3("cc2", t, i, static_cast<int>(j)));
    }

    // cc3: x = sum lambda_j p_j, one row per axis.
    for (int a = 0; a < b.dim(); ++a) {
        LinearExpr e;
        for (std::size_t j = 0; j < d; ++j)
            e.add(out.lambda[j], grid.point(static_cast<int>(j))[static_cast<std::size_t>(a)]);
        e.add(state_vars[static_cast<std::size_t>(a)], -1.0);
        m.add_constraint(std::move(e), Relation::Equal, 0.0, tag3("cc3", t, i, a));
    }

    // cc4: surface bounds are the lambda mixes of L and U.
    LinearExpr elo, ehi;
    for (std::size_t j = 0; j < d; ++j) {
        elo.add(out.lambda[j], b.lower[j]);
        ehi.add(out.lambda[j], b.upper[j]);
    }
    elo.add(out.y_lower, -1.0);
    ehi.add(out.y_upper, -1.0);
    m.add_constraint(std::move(elo), Relation::Equal, 0.0, tag2("cc4_lo", t, i));
    m.add_constraint(std::move(ehi), Relation::Equal, 0.0, tag2("cc4_hi", t, i));

    // cc5: the surface lies inside the enclosure.
    LinearExpr c5a, c5b;
    c5a.add(out.y_lower, 1.0).add(out.y, -1.0);
    c5b.add(out.y, 1.0).add(out.y_upper, -1.0);
    m.add_constraint(std::move(c5a), Relation::LessEqual, 0.0, tag2("cc5_lo", t, i));
    m.add_constraint(std::move(c5b), Relation::LessEqual, 0.0, tag2("cc5_hi", t, i));

    return out;
}

NetworkVars encode_relu_network(MilpModel& m, const NeuralNetwork& net,
                                const std::vector<std::vector<Interval>>& pre_bounds,
                                std::span<const int> input_vars, int t) {
    net.validate();
    if (static_cast<int>(input_vars.size()) != net.input_dim())
        throw std::invalid_argument("input variable count does not match network input dimension");
    if (pre_bounds.size() != net.layers.size())
        throw std::invalid_argument("pre-activation bounds do not cover every layer");

    NetworkVars out;
    out.inputs.assign(input_vars.begin(), input_vars.end());

    std::vector<int> prev(input_vars.begin(), input_vars.end());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const Layer& layer = net.layers[l];
        if (pre_bounds[l].size() != static_cast<std::size_t>(layer.out_dim()))
            throw std::invalid_argument("pre-activation bounds do not match layer width");
        std::vector<int> post(static_cast<std::size_t>(layer.out_dim()));
        for (std::size_t j = 0; j < post.size(); ++j) {
            const Interval pb = pre_bounds[l][j];
            const int a = m.add_variable(tag3("n", t, static_cast<int>(l), static_cast<int>(j)),
                                         pb.lo, pb.hi);
            LinearExpr aff;
            for (std::size_t k = 0; k < layer.weights[j].size(); ++k)
                aff.add(prev[k], layer.weights[j][k]);
            aff.add(a, -1.0);
            m.add_constraint(std::move(aff), Relation::Equal, -layer.bias[j],
                             tag3("aff", t, static_cast<int>(l), static_cast<int>(j)));

            if (layer.act == Activation::Identity) {
                post[j] = a;
                continue;
            }
            const std::string rname = tag3("r", t, static_cast<int>(l), static_cast<int>(j));
            if (pb.hi <= 0.0) {
                post[j] = m.add_variable(rname, 0.0, 0.0);
            } else if (pb.lo >= 0.0) {
                const int r = m.add_variable(rname, pb.lo, pb.hi);
                LinearExpr eq;
                eq.add(r, 1.0).add(a, -1.0);
                m.add_constraint(std::move(eq), Relation::Equal, 0.0,
                                 tag3("act", t, static_cast<int>(l), static_cast<int>(j)));
                post[j] = r;
            } else {
                const int r = m.add_variable(rname, 0.0, pb.hi);
                const int ind =
                    m.add_binary(tag3("d", t, static_cast<int>(l), static_cast<int>(j)));
                LinearExpr upper_active;  // r <= a - l(1 - d)
                upper_active.add(r, 1.0).add(a, -1.0).add(ind, -pb.lo);
                m.add_constraint(std::move(upper_active), Relation::LessEqual, -pb.lo,
                                 tag3("relu_u", t, static_cast<int>(l), static_cast<int>(j)));
                LinearExpr lower;  // r >= a
                lower.add(a, 1.0).add(r, -1.0);
                m.add_constraint(std::move(lower), Relation::LessEqual, 0.0,
                                 tag3("relu_l", t, static_cast<int>(l), static_cast<int>(j)));
                LinearExpr off;  // r <= u * d
                off.add(r, 1.0).add(ind, -pb.hi);
                m.add_constraint(std::move(off), Relation::LessEqual, 0.0,
                                 tag3("relu_o", t, static_cast<int>(l), static_cast<int>(j)));
                post[j] = r;
            }
        }
        prev = std::move(post);
    }

    out.outputs = prev;
    for (std::size_t i = 0; i < out.outputs.size(); ++i) {
        if (!net.const_mask[i]) continue;
        const double c = net.const_values[i];
        out.outputs[i] = m.add_variable(tag2("uc", t, static_cast<int>(i)), c, c);
    }
    return out;
}

StepGraph build_step_graph(const SystemSpec& spec,
                           std::span<const std::vector<Interval>> domains,
                           const std::vector<std::vector<BoundingSet>>& enclosures, int t0) {
    spec.validate();
    if (domains.empty()) throw std::invalid_argument("window must cover at least one step");
    if (enclosures.size() != domains.size())
        throw std::invalid_argument("one enclosure row per window step required");
    const int n = spec.n;
    const int w = static_cast<int>(domains.size());

    StepGraph g;
    for (int s = 0; s < w; ++s) {
        for (int i = 0; i <= n; ++i) g.graph.vertices.push_back({t0 + s, i});
        for (int i = 1; i <= n; ++i) {
            g.graph.state_edges.push_back(
                {g.graph.vertex_index(t0 + s, i), g.graph.vertex_index(t0 + s, 0)});
            if (s > 0)
                g.graph.temporal_edges.push_back(
                    {g.graph.vertex_index(t0 + s - 1, i), g.graph.vertex_index(t0 + s, i)});
        }
    }

    MilpModel& m = g.model;
    std::vector<LinearExpr> prev_coupling;  // update with the free surface var
    for (int s = 0; s < w; ++s) {
        if (static_cast<int>(domains[s].size()) != n)
            throw std::invalid_argument("window domain size does not match dimension");
        std::vector<int> xs(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const Interval dom = domains[s][static_cast<std::size_t>(i)];
            xs[static_cast<std::size_t>(i)] =
                m.add_variable(tag2("x", t0 + s, i + 1), dom.lo, dom.hi);
        }
        if (s > 0) {
            // Temporal coupling: this step's state is the previous update.
            for (int i = 0; i < n; ++i) {
                LinearExpr e = prev_coupling[static_cast<std::size_t>(i)];
                e.add(xs[static_cast<std::size_t>(i)], -1.0);
                const double rhs = -e.constant;
                e.constant = 0.0;
                m.add_constraint(std::move(e), Relation::Equal, rhs, tag2("step", t0 + s, i + 1));
            }
        }
        g.x.push_back(xs);

        const auto pre = propagate_preactivation_bounds(spec.controller, domains[s]);
        const NetworkVars u = encode_relu_network(m, spec.controller, pre, xs, t0 + s);

        std::vector<LinearExpr> lows(static_cast<std::size_t>(n));
        std::vector<LinearExpr> highs(static_cast<std::size_t>(n));
        std::vector<LinearExpr> frees(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const std::size_t k = static_cast<std::size_t>(i);
            const int eps =
                m.add_variable(tag2("eps", t0 + s, i + 1), spec.noise[k].lo, spec.noise[k].hi);
            LinearExpr base;
            base.add(xs[k], 1.0).add(u.outputs[k], spec.delta).add(eps, spec.delta);

            const Expr& f = spec.dynamics[k];
            if (f.free_vars().empty()) {
                const std::vector<double> none;
                base.constant += evaluate(f, none) * spec.delta;
                lows[k] = base;
                highs[k] = base;
                frees[k] = base;
                continue;
            }
            const BoundingSet& b = enclosures[static_cast<std::size_t>(s)][k];
            std::vector<int> state_vars;
            for (int label : b.vars) {
                if (label < 1 || label > n)
                    throw std::invalid_argument("enclosure variable outside the state space");
                state_vars.push_back(xs[static_cast<std::size_t>(label - 1)]);
            }
            const Triangulation tri = delaunay_triangulate(b.grid());
            const EnclosureVars enc = encode_enclosure(m, b, tri, state_vars, t0 + s, i + 1);
            lows[k] = base;
            lows[k].add(enc.y_lower, spec.delta);
            highs[k] = base;
            highs[k].add(enc.y_upper, spec.delta);
            frees[k] = base;
            frees[k].add(enc.y, spec.delta);
        }
        g.next_lower.push_back(std::move(lows));
        g.next_upper.push_back(std::move(highs));
        prev_coupling = std::move(frees);
    }
    return g;
}

}  // namespace overtpoly

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "overtpoly/bounding_set.hpp"
#include "overtpoly/univariate.hpp"

using namespace overtpoly;

namespace {

// Constant cube: |f| <= 5 over [-5,5]^2.
BoundingSet cube_b1() {
    BoundingSet b;
    b.vars = {1, 2};
    b.axes = {{-5.0, 5.0}, {-5.0, 5.0}};
    b.lower.assign(4, -5.0);
    b.upper.assign(4, 5.0);
    return b;
}

std::vector<std::vector<double>> sorted(std::vector<std::vector<double>> v) {
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

TEST_SUITE("bounding-set") {

TEST_CASE("polyhedron vertices of the constant cube are its eight corners") {
    const auto verts = sorted(polyhedron_vertices(cube_b1()));
    REQUIRE(verts.size() == 8);
    std::vector<std::vector<double>> expected;
    for (double x : {-5.0, 5.0})
        for (double y : {-5.0, 5.0})
            for (double z : {-5.0, 5.0}) expected.push_back({x, y, z});
    CHECK(verts == sorted(expected));
}

TEST_CASE("identity bounds merge duplicate vertices") {
    BoundingSet b;
    b.vars = {1};
    b.axes = {{0.0, 1.0}};
    b.lower = {0.0, 1.0};
    b.upper = {0.0, 1.0};
    const auto verts = polyhedron_vertices(b);
    const std::vector<std::vector<double>> expected = {{0.0, 0.0}, {1.0, 1.0}};
    CHECK(verts == expected);
}

TEST_CASE("cos bound vertices pair the grid with both envelopes") {
    const auto b = bound_univariate(parse_expression("cos(x1)"), -1.0, 1.0, 2);
    const auto verts = polyhedron_vertices(b);
    REQUIRE(verts.size() == 2 * b.axes[0].size());
    CHECK(verts[0][0] == -1.0);
    CHECK(verts[0][1] == b.lower.front());
    CHECK(verts[0][1] <= std::cos(1.0));
    CHECK(verts[b.axes[0].size()][1] >= std::cos(1.0));
}

TEST_CASE("lifting the cube gives a hypercube constant along the new axis") {
    const auto b = cube_b1();
    LiftSpec spec;
    spec.vars = {1, 2, 3};
    spec.pad_lo = {0.0, 0.0, -5.0};
    spec.pad_hi = {0.0, 0.0, 5.0};
    const auto up = lift(b, spec);
    CHECK(up.vars == spec.vars);
    CHECK(up.grid_size() == 8);
    const std::vector<double> axis3 = {-5.0, 5.0};
    CHECK(up.axes[2] == axis3);
    for (double v : up.lower) CHECK(v == -5.0);
    for (double v : up.upper) CHECK(v == 5.0);
    CHECK(polyhedron_vertices(up).size() == 16);
}

TEST_CASE("lift keeps source values on every slice of the new axes") {
    const auto b = bound_univariate(parse_expression("cos(x3)"), -1.0, 1.0, 2);
    LiftSpec spec;
    spec.vars = {3, 4};
    spec.pad_lo = {0.0, -1.0};
    spec.pad_hi = {0.0, 1.0};
    const auto up = lift(b, spec);
    REQUIRE(up.axes[0] == b.axes[0]);
    const std::size_t cols = up.axes[1].size();
    for (std::size_t i = 0; i < b.axes[0].size(); ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            CHECK(up.lower[i * cols + j] == b.lower[i]);
            CHECK(up.upper[i * cols + j] == b.upper[i]);
        }
    }
}

TEST_CASE("lift validation") {
    const auto b = cube_b1();
    LiftSpec bad_pad;
    bad_pad.vars = {1, 2, 3};
    bad_pad.pad_lo = {0.0, 0.0, 5.0};
    bad_pad.pad_hi = {0.0, 0.0, -5.0};
    CHECK_THROWS_AS(lift(b, bad_pad), std::invalid_argument);

    LiftSpec not_superset;
    not_superset.vars = {1, 3};
    not_superset.pad_lo = {0.0, -1.0};
    not_superset.pad_hi = {0.0, 1.0};
    CHECK_THROWS_AS(lift(b, not_superset), std::invalid_argument);

    LiftSpec same;
    same.vars = {1, 2};
    same.pad_lo = {0.0, 0.0};
    same.pad_hi = {0.0, 0.0};
    CHECK_THROWS_AS(lift(b, same), std::invalid_argument);
}

TEST_CASE("grid expansion interpolates new points and keeps old ones") {
    const auto b = cube_b1();
    const auto tri = delaunay_triangulate(b.grid());
    const std::vector<double> q = {0.0, 0.0};
    const auto e = expand_and_interpolate(b, tri, q);
    const std::vector<double> axis = {-5.0, 0.0, 5.0};
    CHECK(e.axes[0] == axis);
    CHECK(e.axes[1] == axis);
    REQUIRE(e.grid_size() == 9);
    for (std::size_t i = 0; i < 9; ++i) {
        CHECK(e.lower[i] == doctest::Approx(-5.0).epsilon(1e-12));
        CHECK(e.upper[i] == doctest::Approx(5.0).epsilon(1e-12));
    }

    const std::vector<double> existing = {-5.0, 5.0};
    const auto same = expand_and_interpolate(b, tri, existing);
    CHECK(same.axes == b.axes);
    CHECK(same.lower == b.lower);
}

TEST_CASE("one-dimensional insertion is linear interpolation") {
    BoundingSet b;
    b.vars = {1};
    b.axes = {{0.0, 2.0}};
    b.lower = {0.0, 2.0};
    b.upper = {1.0, 3.0};
    const auto tri = delaunay_triangulate(b.grid());
    const std::vector<double> q = {1.0};
    const auto e = expand_and_interpolate(b, tri, q);
    const std::vector<double> axis = {0.0, 1.0, 2.0};
    REQUIRE(e.axes[0] == axis);
    CHECK(e.lower[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.upper[1] == doctest::Approx(2.0).epsilon(1e-12));

    const std::vector<double> outside = {3.0};
    CHECK_THROWS_AS(expand_and_interpolate(b, tri, outside), std::invalid_argument);
}

TEST_CASE("expansion adds exactly the star of the inserted point") {
    BoundingSet b;
    b.vars = {1, 2};
    b.axes = {{0.0, 1.0, 2.0}, {0.0, 1.0}};
    b.lower.assign(6, 0.0);
    b.upper.assign(6, 1.0);
    const auto tri = delaunay_triangulate(b.grid());
    const std::vector<double> q = {0.5, 0.7};
    const auto e = expand_and_interpolate(b, tri, q);

    const PointSet old_grid = b.grid();
    std::vector<std::vector<double>> old_pts;
    for (int i = 0; i < old_grid.count(); ++i) {
        auto p = old_grid.point(i);
        old_pts.push_back({p.begin(), p.end()});
    }
    const PointSet new_grid = e.grid();
    std::vector<std::vector<double>> added;
    for (int i = 0; i < new_grid.count(); ++i) {
        auto p = new_grid.point(i);
        std::vector<double> v(p.begin(), p.end());
        if (std::find(old_pts.begin(), old_pts.end(), v) == old_pts.end()) added.push_back(v);
    }
    std::vector<std::vector<double>> star_minus_old;
    for (int id : grid_star(new_grid, q)) {
        auto p = new_grid.point(id);
        std::vector<double> v(p.begin(), p.end());
        if (std::find(old_pts.begin(), old_pts.end(), v) == old_pts.end())
            star_minus_old.push_back(v);
    }
    CHECK(sorted(added) == sorted(star_minus_old));
    CHECK(added.size() == e.grid_size() - b.grid_size());
}

TEST_CASE("interpolation preserves enclosure") {
    const auto b = cube_b1();
    const Expr f = parse_expression("x2*cos(x1)");
    REQUIRE(check_enclosure_sampled(b, f, 10000, 1).ok(1e-12));

    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> dist(-5.0, 5.0);
    for (int trial = 0; trial < 100; ++trial) {
        const auto tri = delaunay_triangulate(b.grid());
        const std::vector<double> q = {dist(rng), dist(rng)};
        const auto e = expand_and_interpolate(b, tri, q);
        const auto rep = check_enclosure_sampled(e, f, 2000, static_cast<std::uint64_t>(trial));
        INFO("q = (", q[0], ", ", q[1], ") low=", rep.max_lower_violation,
             " high=", rep.max_upper_violation);
        CHECK(rep.ok(1e-9));
    }

    // Chained insertions stay sound as well.
    BoundingSet chained = b;
    for (int step = 0; step < 8; ++step) {
        const auto tri = delaunay_triangulate(chained.grid());
        const std::vector<double> q = {dist(rng), dist(rng)};
        chained = expand_and_interpolate(chained, tri, q);
    }
    CHECK(check_enclosure_sampled(chained, f, 10000, 7).ok(1e-9));
}

TEST_CASE("alignment yields the merged product grid") {
    const Expr fc = parse_expression("cos(x3)");
    const Expr fi = parse_expression("x4");
    const auto bf = bound_univariate(fc, -1.0, 1.0, 2);
    const auto bg = bound_univariate(fi, -1.0, 1.0, 1);
    const auto [af, ag] = align_domains(bf, bg);

    const std::vector<int> both = {3, 4};
    CHECK(af.vars == both);
    CHECK(ag.vars == both);
    CHECK(af.axes == ag.axes);
    CHECK(af.axes[0] == bf.axes[0]);
    CHECK(af.axes[1] == bg.axes[0]);
    CHECK(check_enclosure_sampled(af, fc, 10000, 2).ok(1e-9));
    CHECK(check_enclosure_sampled(ag, fi, 10000, 3).ok(1e-9));
}

TEST_CASE("aligning a set with itself is the identity") {
    const auto b = bound_univariate(parse_expression("sin(x1)"), -1.0, 1.0, 2);
    const auto [a1, a2] = align_domains(b, b);
    CHECK(a1.axes == b.axes);
    CHECK(a1.lower == b.lower);
    CHECK(a1.upper == b.upper);
    CHECK(a2.axes == b.axes);
    CHECK(a2.lower == b.lower);
}

TEST_CASE("alignment of disjoint univariate pairs re-verifies by sampling") {
    const Expr f = parse_expression("sin(x1)");
    const Expr g = parse_expression("exp(x2)");
    const auto bf = bound_univariate(f, -1.0, 1.0, 2);
    const auto bg = bound_univariate(g, 0.0, 1.0, 3);
    const auto [af, ag] = align_domains(bf, bg);
    CHECK(af.axes == ag.axes);
    CHECK(check_enclosure_sampled(af, f, 10000, 4).ok(1e-9));
    CHECK(check_enclosure_sampled(ag, g, 10000, 5).ok(1e-9));
}

TEST_CASE("composition on constant cubes") {
    const auto b = cube_b1();
    const auto sum = compose(b, b, BinOp::Add);
    const auto diff = compose(b, b, BinOp::Sub);
    const auto prod = compose(b, b, BinOp::Mul);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(sum.lower[i] == -10.0);
        CHECK(sum.upper[i] == 10.0);
        CHECK(diff.lower[i] == -10.0);
        CHECK(diff.upper[i] == 10.0);
        CHECK(prod.lower[i] == -25.0);
        CHECK(prod.upper[i] == 25.0);
    }
}

TEST_CASE("product of the cos and identity bounds matches the known corner") {
    const auto bf = bound_univariate(parse_expression("cos(x3)"), -1.0, 1.0, 2);
    const auto bg = bound_univariate(parse_expression("x4"), -1.0, 1.0, 1);
    const auto [af, ag] = align_domains(bf, bg);
    const auto prod = compose(af, ag, BinOp::Mul);

    REQUIRE(prod.axes[0].front() == -1.0);
    REQUIRE(prod.axes[1].front() == -1.0);
    // Grid corner (x3, x4) = (-1, -1) carries the composite's lowest vertex.
    CHECK(std::abs(prod.lower.front() - (-0.54)) < 0.011);
    CHECK(check_enclosure_sampled(prod, parse_expression("x4*cos(x3)"), 10000, 6).ok(1e-9));
}

TEST_CASE("covarying product stays sound") {
    // Pointwise products of exact identity bounds would claim x1*x2 = 1 on
    // the whole diagonal; the composed set must keep the origin enclosed.
    const auto bf = bound_univariate(parse_expression("x1"), -1.0, 1.0, 1, 0.0);
    const auto bg = bound_univariate(parse_expression("x2"), -1.0, 1.0, 1, 0.0);
    const auto [af, ag] = align_domains(bf, bg);
    const auto prod = compose(af, ag, BinOp::Mul);
    for (std::size_t i = 0; i < prod.grid_size(); ++i) {
        CHECK(prod.lower[i] <= -1.0 + 1e-12);
        CHECK(prod.upper[i] >= 1.0 - 1e-12);
    }
    CHECK(check_enclosure_sampled(prod, parse_expression("x1*x2"), 10000, 8).ok(1e-12));
}

TEST_CASE("division by a sign-definite denominator") {
    const auto bf = bound_univariate(parse_expression("x1"), -5.0, 5.0, 1, 0.0);
    BoundingSet bg;  // encloses x2 + 10 over [-5, 5]
    bg.vars = {2};
    bg.axes = {{-5.0, 5.0}};
    bg.lower = {5.0, 15.0};
    bg.upper = {5.0, 15.0};
    const auto [af, ag] = align_domains(bf, bg);
    const auto quot = compose(af, ag, BinOp::Div);

    // Row-major: axis x1 is slowest; x1 = -5 rows take [-1, -1/3].
    CHECK(quot.lower[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(quot.upper[0] == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
    CHECK(quot.lower[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(quot.upper[2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(check_enclosure_sampled(quot, parse_expression("x1/(x2+10)"), 10000, 9).ok(1e-9));
}

TEST_CASE("division by a zero-straddling denominator reports the grid point") {
    const auto b = cube_b1();
    CHECK_THROWS_WITH_AS(compose(b, b, BinOp::Div),
                         doctest::Contains("grid point"), DomainError);
}

TEST_CASE("composition soundness fuzz across operators") {
    struct Pair {
        const char* f;
        double fa, fb;
        const char* g;
        double ga, gb;
        BinOp op;
    };
    const Pair cases[] = {
        {"sin(x1)", -1.0, 1.0, "cos(x2)", -1.0, 1.0, BinOp::Add},
        {"sin(x1)", -1.0, 1.0, "cos(x2)", -1.0, 1.0, BinOp::Sub},
        {"sin(x1)", -1.0, 1.0, "cos(x2)", -1.0, 1.0, BinOp::Mul},
        {"sin(x1)", -1.0, 1.0, "cos(x2)", -1.0, 1.0, BinOp::Div},
        {"x1", -2.0, 2.0, "x2", -1.0, 3.0, BinOp::Add},
        {"x1", -2.0, 2.0, "x2", -1.0, 3.0, BinOp::Mul},
        {"exp(x1)", -1.0, 1.0, "2 + sin(x2)", -1.0, 1.0, BinOp::Div},
        {"atan(x1)", -2.0, 2.0, "x2*x2", -1.0, 1.0, BinOp::Sub},
        {"0.5*x1 - 1", -1.0, 1.0, "cos(x2)", -1.0, 1.0, BinOp::Mul},
        {"x1*x1*x1", -1.0, 1.0, "log(x2)", 0.5, 3.0, BinOp::Add},
        {"sin(x1)", -1.0, 1.0, "x1", -1.0, 1.0, BinOp::Mul},
        {"sin(x1)", -1.0, 1.0, "x1", -1.0, 1.0, BinOp::Sub},
        {"exp(x1)", 0.0, 1.0, "exp(x1)", 0.0, 1.0, BinOp::Div},
    };
    std::uint64_t seed = 50;
    for (const auto& c : cases) {
        const Expr f = parse_expression(c.f);
        const Expr g = parse_expression(c.g);
        const auto bf = bound_univariate(f, c.fa, c.fb, 2);
        const auto bg = bound_univariate(g, c.ga, c.gb, 2);
        const auto [af, ag] = align_domains(bf, bg);
        const auto comp = compose(af, ag, c.op);
        const auto rep = check_enclosure_sampled(comp, Expr::binary(c.op, f, g), 10000, seed++);
        INFO(std::string(c.f), " op ", std::string(c.g), " low=", rep.max_lower_violation,
             " high=", rep.max_upper_violation);
        CHECK(rep.ok(1e-9));
    }
}

TEST_CASE("compose rejects mismatched grids") {
    const auto a = cube_b1();
    BoundingSet b = a;
    b.axes[0] = {-5.0, 4.0};
    CHECK_THROWS_AS(compose(a, b, BinOp::Add), std::invalid_argument);
    BoundingSet c = a;
    c.vars = {1, 3};
    CHECK_THROWS_AS(compose(a, c, BinOp::Add), std::invalid_argument);
}

TEST_CASE("bound_expression reproduces the two-variable product enclosure") {
    const Expr e = parse_expression("x4*cos(x3)");
    const std::vector<Interval> box = {Interval(-1.0, 1.0), Interval(-1.0, 1.0),
                                       Interval(-1.0, 1.0), Interval(-1.0, 1.0)};
    const auto b = bound_expression(decompose_to_syntax_tree(e), box);
    const std::vector<int> vars = {3, 4};
    CHECK(b.vars == vars);
    CHECK(std::abs(b.lower.front() - (-0.54)) < 0.011);
    CHECK(check_enclosure_sampled(b, e, 10000, 10).ok(1e-9));
}

TEST_CASE("constant expressions bound over the box corner grid") {
    const std::vector<Interval> box = {Interval(-1.0, 1.0), Interval(0.0, 2.0)};
    const auto b = bound_expression(decompose_to_syntax_tree(parse_expression("0")), box);
    const std::vector<int> vars = {1, 2};
    CHECK(b.vars == vars);
    CHECK(b.grid_size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(b.lower[i] == 0.0);
        CHECK(b.upper[i] == 0.0);
    }
}

TEST_CASE("sum of univariate terms is enclosed") {
    const Expr e = parse_expression("sin(x1)+cos(x2)");
    const std::vector<Interval> box = {Interval(0.0, 1.0), Interval(0.0, 1.0)};
    const auto b = bound_expression(decompose_to_syntax_tree(e), box);
    CHECK(check_enclosure_sampled(b, e, 10000, 11).ok(1e-9));
}

TEST_CASE("constant scaling keeps the univariate tightness") {
    const std::vector<Interval> box = {Interval(-1.0, 1.0)};
    const auto scaled =
        bound_expression(decompose_to_syntax_tree(parse_expression("0.1*sin(x1)")), box);
    const auto plain = bound_univariate(parse_expression("sin(x1)"), -1.0, 1.0, 2);
    double scaled_gap = 0.0, plain_gap = 0.0;
    for (std::size_t i = 0; i < scaled.grid_size(); ++i)
        scaled_gap = std::max(scaled_gap, scaled.upper[i] - scaled.lower[i]);
    for (std::size_t i = 0; i < plain.grid_size(); ++i)
        plain_gap = std::max(plain_gap, plain.upper[i] - plain.lower[i]);
    CHECK(scaled_gap <= 0.1 * plain_gap + 1e-9);
    CHECK(check_enclosure_sampled(scaled, parse_expression("0.1*sin(x1)"), 10000, 12).ok(1e-9));
}

TEST_CASE("nested rational expression is enclosed end to end") {
    const Expr e = parse_expression("x1*cos(x2) - 0.5*x2/(2 + sin(x1))");
    const std::vector<Interval> box = {Interval(-1.0, 1.0), Interval(-1.0, 1.0)};
    const auto b = bound_expression(decompose_to_syntax_tree(e), box);
    const auto rep = check_enclosure_sampled(b, e, 10000, 13);
    INFO("low=", rep.max_lower_violation, " high=", rep.max_upper_violation);
    CHECK(rep.ok(1e-9));
}

TEST_CASE("bound_expression validation") {
    const auto tree = decompose_to_syntax_tree(parse_expression("x3"));
    const std::vector<Interval> small = {Interval(0.0, 1.0), Interval(0.0, 1.0)};
    CHECK_THROWS_AS(bound_expression(tree, small), std::invalid_argument);
    CHECK_THROWS_AS(bound_expression(tree, {}), std::invalid_argument);
    const std::vector<Interval> flat = {Interval(0.0, 0.0)};
    CHECK_THROWS_AS(
        bound_expression(decompose_to_syntax_tree(parse_expression("x1")), flat),
        std::invalid_argument);
}

TEST_CASE("sampled check flags a deliberately broken lower bound") {
    BoundingSet b;
    b.vars = {1};
    b.axes = {{-1.0, 1.0}};
    b.lower = {0.1, 0.1};
    b.upper = {1.0, 1.0};
    const auto rep = check_enclosure_sampled(b, parse_expression("sin(x1)"), 10000, 14);
    CHECK_FALSE(rep.ok(1e-9));
    CHECK(rep.max_lower_violation > 0.4);
    CHECK(rep.max_upper_violation <= 1e-12);
}

TEST_CASE("exact linear bounds sample with zero violation") {
    const auto b = bound_univariate(parse_expression("x1"), -1.0, 1.0, 1, 0.0);
    const auto rep = check_enclosure_sampled(b, parse_expression("x1"), 10000, 15);
    CHECK(rep.max_lower_violation <= 1e-14);
    CHECK(rep.max_upper_violation <= 1e-14);
}

TEST_CASE("json dump round-trips the fields") {
    BoundingSet b;
    b.vars = {1};
    b.axes = {{0.0, 1.0}};
    b.lower = {0.0, 1.0};
    b.upper = {1.0, 2.0};
    const auto j = nlohmann::json::parse(to_json(b));
    CHECK(j["n"] == 1);
    CHECK(j["axes"][0][1] == 1.0);
    CHECK(j["L"][0] == 0.0);
    CHECK(j["L"][1] == 1.0);
    CHECK(j["U"][1] == 2.0);
}

TEST_CASE("validate rejects malformed sets") {
    BoundingSet b = cube_b1();
    b.lower[0] = 6.0;  // above upper
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);

    BoundingSet c = cube_b1();
    c.axes[0] = {5.0, -5.0};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);

    BoundingSet d = cube_b1();
    d.lower.pop_back();
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);

    BoundingSet e = cube_b1();
    e.vars = {2, 1};
    CHECK_THROWS_AS(e.validate(), std::invalid_argument);
}

}  // TEST_SUITE

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "overtpoly/expr.hpp"
#include "overtpoly/interval.hpp"
#include "overtpoly/network.hpp"

namespace overtpoly {

// Unsafe-region entry active for steps t_from..t_to inclusive. Box form:
// polarity Inside marks the box itself unsafe, Outside marks its complement
// unsafe. Halfspace form: the safe region is {lhs >= rhs}; polarity Outside
// marks its complement unsafe, Inside marks the halfspace itself unsafe.
struct AvoidRegion {
    enum class Polarity { Inside, Outside };

    int t_from = 0;
    int t_to = 0;
    Polarity polarity = Polarity::Inside;
    std::optional<std::vector<Interval>> box;
    struct Halfspace {
        Expr lhs;
        double rhs;
    };
    std::optional<Halfspace> halfspace;
};

// Discrete-time neural feedback system. Per step, dimension i advances by
// x_i + (f_i(x) + u(x)_i + eps_i) * delta with eps drawn from the noise box.
struct SystemSpec {
    std::string name;
    int n = 0;
    std::vector<Interval> init;
    std::vector<Expr> dynamics;
    std::vector<Interval> noise;
    NeuralNetwork controller;
    double delta = 0.0;
    int horizon = 0;
    std::optional<std::vector<Interval>> goal;
    std::vector<AvoidRegion> avoid;

    void validate() const;
};

// One exact transition; eps must lie in spec.noise (unchecked).
std::vector<double> next_state_exact(const SystemSpec& spec, std::span<const double> x,
                                     std::span<const double> eps);

// True when the step box certainly misses the region's unsafe set. The
// halfspace test uses interval evaluation, exact for linear expressions.
bool avoid_region_clear(const AvoidRegion& region, std::span<const Interval> box);

bool box_contains(std::span<const Interval> outer, std::span<const Interval> inner);
bool boxes_intersect(std::span<const Interval> a, std::span<const Interval> b);

}  // namespace overtpoly

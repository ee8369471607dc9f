#include "overtpoly/system.hpp"

#include <cmath>
#include <stdexcept>

namespace overtpoly {

void SystemSpec::validate() const {
    if (n < 1) throw std::invalid_argument("system dimension must be positive");
    if (static_cast<int>(init.size()) != n)
        throw std::invalid_argument("initial box size does not match dimension");
    if (static_cast<int>(dynamics.size()) != n)
        throw std::invalid_argument("transition function count does not match dimension");
    if (static_cast<int>(noise.size()) != n)
        throw std::invalid_argument("noise box size does not match dimension");
    for (const Interval& iv : init)
        if (!iv.finite()) throw std::invalid_argument("initial box must be finite");
    for (const Interval& iv : noise)
        if (!iv.finite()) throw std::invalid_argument("noise box must be finite");
    if (!(delta > 0.0)) throw std::invalid_argument("step size must be positive");
    if (horizon < 0) throw std::invalid_argument("horizon must be nonnegative");
    controller.validate();
    if (controller.input_dim() != n || controller.output_dim() != n)
        throw std::invalid_argument("controller must map the state space to itself");
    for (const Expr& f : dynamics)
        if (f.max_var() > n)
            throw std::invalid_argument("transition function reads past the state dimension");
    if (goal) {
        if (static_cast<int>(goal->size()) != n)
            throw std::invalid_argument("goal box size does not match dimension");
    }
    for (const AvoidRegion& r : avoid) {
        if (r.t_from < 0 || r.t_to < r.t_from)
            throw std::invalid_argument("avoid region has an empty step range");
        if (r.box.has_value() == r.halfspace.has_value())
            throw std::invalid_argument("avoid region needs exactly one of box or halfspace");
        if (r.box && static_cast<int>(r.box->size()) != n)
            throw std::invalid_argument("avoid box size does not match dimension");
        if (r.halfspace && r.halfspace->lhs.max_var() > n)
            throw std::invalid_argument("avoid halfspace reads past the state dimension");
    }
}

std::vector<double> next_state_exact(const SystemSpec& spec, std::span<const double> x,
                                     std::span<const double> eps) {
    const std::vector<double> u = spec.controller.forward(x);
    std::vector<double> out(static_cast<std::size_t>(spec.n));
    for (int i = 0; i < spec.n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        out[k] = x[k] + (evaluate(spec.dynamics[k], x) + u[k] + eps[k]) * spec.delta;
    }
    return out;
}

bool box_contains(std::span<const Interval> outer, std::span<const Interval> inner) {
    for (std::size_t i = 0; i < outer.size(); ++i)
        if (inner[i].lo < outer[i].lo || inner[i].hi > outer[i].hi) return false;
    return true;
}

bool boxes_intersect(std::span<const Interval> a, std::span<const Interval> b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].hi < b[i].lo || b[i].hi < a[i].lo) return false;
    return true;
}

bool avoid_region_clear(const AvoidRegion& region, std::span<const Interval> box) {
    if (region.box) {
        if (region.polarity == AvoidRegion::Polarity::Inside)
            return !boxes_intersect(box, *region.box);
        return box_contains(*region.box, box);
    }
    const Interval v = interval_evaluate(region.halfspace->lhs, box);
    if (region.polarity == AvoidRegion::Polarity::Outside) return v.lo >= region.halfspace->rhs;
    return v.hi < region.halfspace->rhs;
}

}  // namespace overtpoly

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace overtpoly {

// Thrown when an elementary function is applied outside its natural domain
// over the whole interval, or a scalar evaluation hits a singularity.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Closed nonempty interval [lo, hi]. Endpoints may be infinite.
// Arithmetic is outward-inflated by a 1e-12 relative epsilon per operation;
// true directed rounding is not needed at this scale.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double point) : lo(point), hi(point) {}
    Interval(double l, double h) : lo(l), hi(h) { assert(!(l > h)); }

    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    double mag() const { return std::max(std::abs(lo), std::abs(hi)); }
    bool contains(double x) const { return lo <= x && x <= hi; }
    bool contains_zero() const { return lo <= 0.0 && 0.0 <= hi; }
    bool finite() const { return std::isfinite(lo) && std::isfinite(hi); }
};

namespace detail {
constexpr double kOutwardEps = 1e-12;

inline Interval inflate(Interval v) {
    const double pad = kOutwardEps * (1.0 + std::max(std::abs(v.lo), std::abs(v.hi)));
    if (std::isfinite(v.lo)) v.lo -= pad;
    if (std::isfinite(v.hi)) v.hi += pad;
    return v;
}
} // namespace detail

inline Interval operator+(Interval a, Interval b) {
    return detail::inflate({a.lo + b.lo, a.hi + b.hi});
}

inline Interval operator-(Interval a, Interval b) {
    return detail::inflate({a.lo - b.hi, a.hi - b.lo});
}

inline Interval operator-(Interval a) { return {-a.hi, -a.lo}; }

inline Interval operator*(Interval a, Interval b) {
    const double c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    double lo = c[0], hi = c[0];
    for (double v : c) {
        // 0 * inf from unbounded operands is treated as 0.
        if (std::isnan(v)) v = 0.0;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return detail::inflate({lo, hi});
}

inline Interval operator/(Interval a, Interval b) {
    if (b.contains_zero()) {
        // Documented behavior: quotient by a zero-straddling interval is unbounded.
        constexpr double inf = std::numeric_limits<double>::infinity();
        return {-inf, inf};
    }
    return a * Interval{1.0 / b.hi, 1.0 / b.lo};
}

inline Interval hull(Interval a, Interval b) {
    return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

inline Interval exp(Interval a) { return detail::inflate({std::exp(a.lo), std::exp(a.hi)}); }

inline Interval log(Interval a) {
    if (a.hi <= 0.0) throw DomainError("log of a non-positive interval");
    // Partial violation keeps soundness with an unbounded lower endpoint.
    const double lo = a.lo > 0.0 ? std::log(a.lo) : -std::numeric_limits<double>::infinity();
    return detail::inflate({lo, std::log(a.hi)});
}

inline Interval atan(Interval a) { return detail::inflate({std::atan(a.lo), std::atan(a.hi)}); }

inline Interval asin(Interval a) {
    if (a.lo > 1.0 || a.hi < -1.0) throw DomainError("asin outside [-1, 1]");
    if (a.lo < -1.0 || a.hi > 1.0) throw DomainError("asin applied to an interval exceeding [-1, 1]");
    return detail::inflate({std::asin(a.lo), std::asin(a.hi)});
}

inline Interval acos(Interval a) {
    if (a.lo > 1.0 || a.hi < -1.0) throw DomainError("acos outside [-1, 1]");
    if (a.lo < -1.0 || a.hi > 1.0) throw DomainError("acos applied to an interval exceeding [-1, 1]");
    return detail::inflate({std::acos(a.hi), std::acos(a.lo)});
}

inline Interval sin(Interval a) {
    constexpr double pi = 3.14159265358979323846;
    if (a.width() >= 2.0 * pi) return {-1.0, 1.0};
    double lo = std::min(std::sin(a.lo), std::sin(a.hi));
    double hi = std::max(std::sin(a.lo), std::sin(a.hi));
    // Interior extrema at pi/2 + 2k*pi (max) and -pi/2 + 2k*pi (min).
    const double kmax = std::ceil((a.lo - pi / 2) / (2 * pi));
    if (pi / 2 + 2 * pi * kmax <= a.hi) hi = 1.0;
    const double kmin = std::ceil((a.lo + pi / 2) / (2 * pi));
    if (-pi / 2 + 2 * pi * kmin <= a.hi) lo = -1.0;
    Interval r = detail::inflate({lo, hi});
    r.lo = std::max(r.lo, -1.0);
    r.hi = std::min(r.hi, 1.0);
    return r;
}

inline Interval cos(Interval a) {
    constexpr double pi = 3.14159265358979323846;
    return sin(Interval{a.lo + pi / 2, a.hi + pi / 2});
}

inline Interval tan(Interval a) {
    constexpr double pi = 3.14159265358979323846;
    // Unbounded when the interval straddles a pole at pi/2 + k*pi.
    const double k = std::ceil((a.lo - pi / 2) / pi);
    if (pi / 2 + pi * k <= a.hi) {
        constexpr double inf = std::numeric_limits<double>::infinity();
        return {-inf, inf};
    }
    return detail::inflate({std::tan(a.lo), std::tan(a.hi)});
}

} // namespace overtpoly

#include "overtpoly/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace overtpoly {

namespace {

// Knuth two-sum: a + b = s + err exactly.
inline DD two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}

inline DD quick_two_sum(double a, double b) {
    double s = a + b;
    return {s, b - (s - a)};
}

// a * b = p + err exactly via fused multiply-add.
inline DD two_prod(double a, double b) {
    double p = a * b;
    double err = std::fma(a, b, -p);
    return {p, err};
}

} // namespace

DD dd_from(double x) { return {x, 0.0}; }

DD dd_add(DD a, DD b) {
    DD s = two_sum(a.hi, b.hi);
    DD t = two_sum(a.lo, b.lo);
    s.lo += t.hi;
    s = quick_two_sum(s.hi, s.lo);
    s.lo += t.lo;
    return quick_two_sum(s.hi, s.lo);
}

DD dd_sub(DD a, DD b) { return dd_add(a, {-b.hi, -b.lo}); }

DD dd_mul(DD a, DD b) {
    DD p = two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return quick_two_sum(p.hi, p.lo);
}

DD dd_div(DD a, DD b) {
    double q1 = a.hi / b.hi;
    DD r = dd_sub(a, dd_mul(dd_from(q1), b));
    double q2 = r.hi / b.hi;
    r = dd_sub(r, dd_mul(dd_from(q2), b));
    double q3 = r.hi / b.hi;
    DD q = quick_two_sum(q1, q2);
    return dd_add(q, dd_from(q3));
}

double dd_abs_hi(DD a) { return std::fabs(a.hi); }

double det_double(int k, std::span<const double> m) {
    std::vector<double> a(m.begin(), m.end());
    double det = 1.0;
    for (int c = 0; c < k; ++c) {
        int piv = c;
        for (int r = c + 1; r < k; ++r)
            if (std::fabs(a[r * k + c]) > std::fabs(a[piv * k + c])) piv = r;
        if (a[piv * k + c] == 0.0) return 0.0;
        if (piv != c) {
            for (int j = 0; j < k; ++j) std::swap(a[piv * k + j], a[c * k + j]);
            det = -det;
        }
        det *= a[c * k + c];
        for (int r = c + 1; r < k; ++r) {
            double f = a[r * k + c] / a[c * k + c];
            for (int j = c; j < k; ++j) a[r * k + j] -= f * a[c * k + j];
        }
    }
    return det;
}

DD det_dd(int k, std::span<const double> m) {
    std::vector<DD> a(m.size());
    for (size_t i = 0; i < m.size(); ++i) a[i] = dd_from(m[i]);
    DD det = dd_from(1.0);
    int sign = 1;
    for (int c = 0; c < k; ++c) {
        int piv = c;
        for (int r = c + 1; r < k; ++r)
            if (dd_abs_hi(a[r * k + c]) > dd_abs_hi(a[piv * k + c])) piv = r;
        if (a[piv * k + c].hi == 0.0 && a[piv * k + c].lo == 0.0) return dd_from(0.0);
        if (piv != c) {
            for (int j = 0; j < k; ++j) std::swap(a[piv * k + j], a[c * k + j]);
            sign = -sign;
        }
        det = dd_mul(det, a[c * k + c]);
        for (int r = c + 1; r < k; ++r) {
            DD f = dd_div(a[r * k + c], a[c * k + c]);
            for (int j = c; j < k; ++j) a[r * k + j] = dd_sub(a[r * k + j], dd_mul(f, a[c * k + j]));
        }
    }
    if (sign < 0) det = dd_sub(dd_from(0.0), det);
    return det;
}

int det_sign_robust(int k, std::span<const double> m) {
    double scale = 1.0;
    for (int r = 0; r < k; ++r) {
        double row = 0.0;
        for (int c = 0; c < k; ++c) row = std::max(row, std::fabs(m[r * k + c]));
        scale *= std::max(row, 1e-300);
    }
    double d = det_double(k, m);
    if (std::fabs(d) > 1e-7 * scale) return d > 0 ? 1 : -1;
    DD dd = det_dd(k, m);
    if (dd_abs_hi(dd) <= 1e-26 * scale) return 0;
    return dd.hi > 0 ? 1 : -1;
}

bool solve_linear(int k, std::vector<double> a, std::span<const double> b, std::span<double> out) {
    std::vector<double> x(b.begin(), b.end());
    for (int c = 0; c < k; ++c) {
        int piv = c;
        for (int r = c + 1; r < k; ++r)
            if (std::fabs(a[r * k + c]) > std::fabs(a[piv * k + c])) piv = r;
        if (std::fabs(a[piv * k + c]) < 1e-300) return false;
        if (piv != c) {
            for (int j = 0; j < k; ++j) std::swap(a[piv * k + j], a[c * k + j]);
            std::swap(x[piv], x[c]);
        }
        for (int r = c + 1; r < k; ++r) {
            double f = a[r * k + c] / a[c * k + c];
            if (f == 0.0) continue;
            for (int j = c; j < k; ++j) a[r * k + j] -= f * a[c * k + j];
            x[r] -= f * x[c];
        }
    }
    for (int r = k - 1; r >= 0; --r) {
        double s = x[r];
        for (int j = r + 1; j < k; ++j) s -= a[r * k + j] * out[j];
        out[r] = s / a[r * k + r];
    }
    return true;
}

} // namespace overtpoly

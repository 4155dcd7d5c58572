#pragma once

#include <cmath>

namespace twoway::testkit {

/// Error-compensated double-double value (hi + lo, |lo| <= ulp(hi)/2).
/// Only what the CCD cubic-coefficient formation needs.
struct DD {
    double hi = 0.0, lo = 0.0;

    DD() = default;
    DD(double v) : hi(v), lo(0.0) {}
    DD(double h, double l) : hi(h), lo(l) {}

    double value() const { return hi + lo; }
    int sign() const {
        if (hi > 0.0 || (hi == 0.0 && lo > 0.0)) return 1;
        if (hi < 0.0 || (hi == 0.0 && lo < 0.0)) return -1;
        return 0;
    }
};

inline DD two_sum(double a, double b) {
    const double s = a + b;
    const double bb = s - a;
    return {s, (a - (s - bb)) + (b - bb)};
}

inline DD two_prod(double a, double b) {
    const double p = a * b;
    return {p, std::fma(a, b, -p)};
}

inline DD quick_two_sum(double a, double b) {  // requires |a| >= |b|
    const double s = a + b;
    return {s, b - (s - a)};
}

inline DD operator+(const DD& a, const DD& b) {
    DD s = two_sum(a.hi, b.hi);
    s.lo += a.lo + b.lo;
    return quick_two_sum(s.hi, s.lo);
}

inline DD operator-(const DD& a, const DD& b) { return a + DD(-b.hi, -b.lo); }

inline DD operator*(const DD& a, const DD& b) {
    DD p = two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return quick_two_sum(p.hi, p.lo);
}

struct DD3 {
    DD x, y, z;
};

inline DD3 dd_sub(const DD3& a, const DD3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }

inline DD3 dd_cross(const DD3& a, const DD3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline DD dd_dot(const DD3& a, const DD3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

}  // namespace twoway::testkit

#pragma once

#include <cmath>

namespace tdbem {

// f(a + e1 h1 + e2 h2) with e1^2 = e2^2 = 0: carries two first derivatives and their mixed second derivative.
struct HyperDual {
    double v = 0.0, d1 = 0.0, d2 = 0.0, d12 = 0.0;

    constexpr HyperDual() = default;
    constexpr HyperDual(double value) : v(value) {}  // NOLINT(google-explicit-constructor)
    constexpr HyperDual(double value, double a, double b, double ab) : v(value), d1(a), d2(b), d12(ab) {}

    HyperDual& operator+=(const HyperDual& o) {
        v += o.v;
        d1 += o.d1;
        d2 += o.d2;
        d12 += o.d12;
        return *this;
    }
    HyperDual& operator-=(const HyperDual& o) {
        v -= o.v;
        d1 -= o.d1;
        d2 -= o.d2;
        d12 -= o.d12;
        return *this;
    }
    HyperDual& operator*=(const HyperDual& o) { return *this = *this * o; }

    friend HyperDual operator+(HyperDual a, const HyperDual& b) { return a += b; }
    friend HyperDual operator-(HyperDual a, const HyperDual& b) { return a -= b; }
    friend HyperDual operator-(const HyperDual& a) { return {-a.v, -a.d1, -a.d2, -a.d12}; }
    friend HyperDual operator*(const HyperDual& a, const HyperDual& b) {
        return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + a.v * b.d2,
                a.d12 * b.v + a.d1 * b.d2 + a.d2 * b.d1 + a.v * b.d12};
    }
    friend HyperDual operator*(double s, const HyperDual& a) { return {s * a.v, s * a.d1, s * a.d2, s * a.d12}; }
    friend HyperDual operator*(const HyperDual& a, double s) { return s * a; }
    friend HyperDual operator/(const HyperDual& a, const HyperDual& b) { return a * inverse(b); }
    friend HyperDual operator/(const HyperDual& a, double s) { return (1.0 / s) * a; }

    friend bool operator<(const HyperDual& a, const HyperDual& b) { return a.v < b.v; }
    friend bool operator>(const HyperDual& a, const HyperDual& b) { return a.v > b.v; }
    friend bool operator<=(const HyperDual& a, const HyperDual& b) { return a.v <= b.v; }
    friend bool operator>=(const HyperDual& a, const HyperDual& b) { return a.v >= b.v; }

    // Chain rule for a scalar function with value f0, slope f1 and curvature f2 at v.
    HyperDual apply(double f0, double f1, double f2) const { return {f0, f1 * d1, f1 * d2, f1 * d12 + f2 * d1 * d2}; }

    friend HyperDual inverse(const HyperDual& a) {
        const double i = 1.0 / a.v;
        return a.apply(i, -i * i, 2.0 * i * i * i);
    }
};

inline double value(double x) { return x; }
inline double value(const HyperDual& x) { return x.v; }

inline HyperDual sqrt(const HyperDual& a) {
    const double r = std::sqrt(a.v);
    return a.apply(r, 0.5 / r, -0.25 / (r * a.v));
}

inline HyperDual atan(const HyperDual& a) {
    const double q = 1.0 / (1.0 + a.v * a.v);
    return a.apply(std::atan(a.v), q, -2.0 * a.v * q * q);
}

inline HyperDual asinh(const HyperDual& a) {
    const double q = 1.0 / std::sqrt(1.0 + a.v * a.v);
    return a.apply(std::asinh(a.v), q, -a.v * q * q * q);
}

inline HyperDual log(const HyperDual& a) { return a.apply(std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v)); }

// Integer power.
inline HyperDual pow(const HyperDual& a, int n) {
    if (n == 0) return HyperDual(1.0);
    const double pm2 = n >= 2 ? std::pow(a.v, n - 2) : 0.0;
    const double pm1 = n >= 1 ? std::pow(a.v, n - 1) : 0.0;
    return a.apply(std::pow(a.v, n), n * pm1, n * (n - 1) * pm2);
}

inline HyperDual abs(const HyperDual& a) { return a.v < 0.0 ? -a : a; }

}  // namespace tdbem

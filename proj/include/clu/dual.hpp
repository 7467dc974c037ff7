#pragma once

#include <cmath>

namespace clu {

/// First-order dual number: value plus one directional derivative.
/// Running the gradient kernels on Dual scalars yields exact
/// Hessian-vector products (forward-over-reverse differentiation).
struct Dual {
    double v = 0.0;
    double d = 0.0;

    Dual() = default;
    Dual(double value) : v(value) {}  // NOLINT(google-explicit-constructor)
    Dual(double value, double deriv) : v(value), d(deriv) {}

    Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
    Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
    Dual& operator*=(const Dual& o) { d = d * o.v + v * o.d; v *= o.v; return *this; }
};

inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator-(const Dual& a) { return {-a.v, -a.d}; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator/(const Dual& a, const Dual& b) {
    const double inv = 1.0 / b.v;
    return {a.v * inv, (a.d - a.v * b.d * inv) * inv};
}

inline bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
inline bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }

inline Dual exp(const Dual& a) {
    const double e = std::exp(a.v);
    return {e, a.d * e};
}

inline Dual log(const Dual& a) { return {std::log(a.v), a.d / a.v}; }

inline Dual tanh(const Dual& a) {
    const double t = std::tanh(a.v);
    return {t, a.d * (1.0 - t * t)};
}

/// Scalar-generic accessors so kernels can be written once for
/// double and Dual.
inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.v; }

}  // namespace clu

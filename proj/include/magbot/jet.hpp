#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace magbot {

/// Forward-mode dual number carrying N directional derivatives.
///
/// Only the operations the dipole model needs are provided: arithmetic,
/// sqrt, sin and cos. Comparisons look at the value part only.
template <std::size_t N>
struct Jet {
    double a = 0.0;
    std::array<double, N> v{};

    constexpr Jet() = default;
    constexpr Jet(double value) : a(value) {}  // NOLINT: implicit lift of constants
    constexpr Jet(double value, std::size_t seed) : a(value) { v[seed] = 1.0; }

    explicit constexpr operator double() const { return a; }

    constexpr Jet& operator+=(const Jet& o) {
        a += o.a;
        for (std::size_t i = 0; i < N; ++i) v[i] += o.v[i];
        return *this;
    }
    constexpr Jet& operator-=(const Jet& o) {
        a -= o.a;
        for (std::size_t i = 0; i < N; ++i) v[i] -= o.v[i];
        return *this;
    }
    constexpr Jet& operator*=(const Jet& o) {
        for (std::size_t i = 0; i < N; ++i) v[i] = v[i] * o.a + a * o.v[i];
        a *= o.a;
        return *this;
    }
    constexpr Jet& operator/=(const Jet& o) {
        const double inv = 1.0 / o.a;
        const double q = a * inv;
        for (std::size_t i = 0; i < N; ++i) v[i] = (v[i] - q * o.v[i]) * inv;
        a = q;
        return *this;
    }

    friend constexpr Jet operator+(Jet l, const Jet& r) { return l += r; }
    friend constexpr Jet operator-(Jet l, const Jet& r) { return l -= r; }
    friend constexpr Jet operator*(Jet l, const Jet& r) { return l *= r; }
    friend constexpr Jet operator/(Jet l, const Jet& r) { return l /= r; }
    friend constexpr Jet operator-(Jet j) {
        j.a = -j.a;
        for (auto& d : j.v) d = -d;
        return j;
    }

    friend constexpr bool operator<(const Jet& l, const Jet& r) { return l.a < r.a; }
    friend constexpr bool operator>(const Jet& l, const Jet& r) { return l.a > r.a; }
    friend constexpr bool operator<=(const Jet& l, const Jet& r) { return l.a <= r.a; }
    friend constexpr bool operator>=(const Jet& l, const Jet& r) { return l.a >= r.a; }
};

template <std::size_t N>
Jet<N> sqrt(const Jet<N>& x) {
    Jet<N> r;
    r.a = std::sqrt(x.a);
    const double d = 0.5 / r.a;
    for (std::size_t i = 0; i < N; ++i) r.v[i] = x.v[i] * d;
    return r;
}

template <std::size_t N>
Jet<N> sin(const Jet<N>& x) {
    Jet<N> r;
    r.a = std::sin(x.a);
    const double d = std::cos(x.a);
    for (std::size_t i = 0; i < N; ++i) r.v[i] = x.v[i] * d;
    return r;
}

template <std::size_t N>
Jet<N> cos(const Jet<N>& x) {
    Jet<N> r;
    r.a = std::cos(x.a);
    const double d = -std::sin(x.a);
    for (std::size_t i = 0; i < N; ++i) r.v[i] = x.v[i] * d;
    return r;
}

/// Value part of a scalar, for code templated on double or Jet.
inline double value_of(double x) { return x; }
template <std::size_t N>
double value_of(const Jet<N>& x) { return x.a; }

}  // namespace magbot

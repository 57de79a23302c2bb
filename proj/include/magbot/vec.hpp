#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace magbot {

/// Fixed 3-vector. The scalar is a template parameter so the same code runs
/// on plain doubles and on forward-mode jets.
template <class T = double>
struct Vec3 {
    T x{}, y{}, z{};

    constexpr Vec3() = default;
    constexpr Vec3(T x_, T y_, T z_) : x(x_), y(y_), z(z_) {}

    template <class U>
    static constexpr Vec3 from(const Vec3<U>& v) { return {T(v.x), T(v.y), T(v.z)}; }

    constexpr T& operator[](std::size_t i) { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr const T& operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(const T& s) { x *= s; y *= s; z *= s; return *this; }

    friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr Vec3 operator*(Vec3 a, const T& s) { return a *= s; }
    friend constexpr Vec3 operator*(const T& s, Vec3 a) { return a *= s; }
    friend constexpr Vec3 operator/(const Vec3& a, const T& s) { return {a.x / s, a.y / s, a.z / s}; }
    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

template <class T>
constexpr T dot(const Vec3<T>& a, const Vec3<T>& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

template <class T>
constexpr Vec3<T> cross(const Vec3<T>& a, const Vec3<T>& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

template <class T>
T norm(const Vec3<T>& a) {
    using std::sqrt;
    return sqrt(dot(a, a));
}

template <class T>
bool all_finite(const Vec3<T>& a) {
    return std::isfinite(double(a.x)) && std::isfinite(double(a.y)) && std::isfinite(double(a.z));
}

/// Row-major 3x3 matrix.
template <class T = double>
struct Mat3 {
    std::array<T, 9> a{};

    static constexpr Mat3 zero() { return {}; }
    static constexpr Mat3 identity() {
        Mat3 m;
        m(0, 0) = T(1); m(1, 1) = T(1); m(2, 2) = T(1);
        return m;
    }
    static constexpr Mat3 outer(const Vec3<T>& u, const Vec3<T>& v) {
        Mat3 m;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) m(i, j) = u[i] * v[j];
        return m;
    }
    static constexpr Mat3 from_columns(const Vec3<T>& c0, const Vec3<T>& c1, const Vec3<T>& c2) {
        Mat3 m;
        for (std::size_t i = 0; i < 3; ++i) { m(i, 0) = c0[i]; m(i, 1) = c1[i]; m(i, 2) = c2[i]; }
        return m;
    }

    constexpr T& operator()(std::size_t r, std::size_t c) { return a[3 * r + c]; }
    constexpr const T& operator()(std::size_t r, std::size_t c) const { return a[3 * r + c]; }

    constexpr Mat3 transposed() const {
        Mat3 t;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) t(i, j) = (*this)(j, i);
        return t;
    }
    constexpr T trace() const { return a[0] + a[4] + a[8]; }

    constexpr Mat3& operator+=(const Mat3& o) { for (std::size_t i = 0; i < 9; ++i) a[i] += o.a[i]; return *this; }
    constexpr Mat3& operator-=(const Mat3& o) { for (std::size_t i = 0; i < 9; ++i) a[i] -= o.a[i]; return *this; }
    constexpr Mat3& operator*=(const T& s) { for (auto& v : a) v *= s; return *this; }

    friend constexpr Mat3 operator+(Mat3 l, const Mat3& r) { return l += r; }
    friend constexpr Mat3 operator-(Mat3 l, const Mat3& r) { return l -= r; }
    friend constexpr Mat3 operator*(Mat3 m, const T& s) { return m *= s; }
    friend constexpr Mat3 operator*(const T& s, Mat3 m) { return m *= s; }

    friend constexpr Vec3<T> operator*(const Mat3& m, const Vec3<T>& v) {
        return {m(0, 0) * v.x + m(0, 1) * v.y + m(0, 2) * v.z,
                m(1, 0) * v.x + m(1, 1) * v.y + m(1, 2) * v.z,
                m(2, 0) * v.x + m(2, 1) * v.y + m(2, 2) * v.z};
    }
    friend constexpr Mat3 operator*(const Mat3& l, const Mat3& r) {
        Mat3 p;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) {
                T s{};
                for (std::size_t k = 0; k < 3; ++k) s += l(i, k) * r(k, j);
                p(i, j) = s;
            }
        return p;
    }
};

/// Frobenius norm.
template <class T>
T norm(const Mat3<T>& m) {
    using std::sqrt;
    T s{};
    for (const auto& v : m.a) s += v * v;
    return sqrt(s);
}

/// Rodrigues rotation about a unit axis.
inline Mat3<double> axis_angle(const Vec3<double>& unit_axis, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    const auto& k = unit_axis;
    Mat3<double> K;
    K(0, 1) = -k.z; K(0, 2) = k.y;
    K(1, 0) = k.z;  K(1, 2) = -k.x;
    K(2, 0) = -k.y; K(2, 1) = k.x;
    return Mat3<double>::identity() + s * K + (1.0 - c) * (K * K);
}

}  // namespace magbot

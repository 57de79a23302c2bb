#pragma once

// Point-dipole magnetics: fields, field Jacobians, wrenches on an embedded
// magnet and the reduction to its five controllable components.

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "magbot/jet.hpp"
#include "magbot/vec.hpp"

namespace magbot {

inline constexpr double kMu0 = 4.0e-7 * std::numbers::pi;  // H/m
inline constexpr double kGravity = 9.81;                    // m/s^2

/// Below this source-to-point distance the dipole model is rejected.
inline constexpr double kMinSeparation = 1.0e-3;  // m

class SingularityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

template <class T = double>
struct Dipole {
    Vec3<T> position;  // m
    Vec3<T> moment;    // A m^2

    template <class U>
    static Dipole from(const Dipole<U>& d) {
        return {Vec3<T>::from(d.position), Vec3<T>::from(d.moment)};
    }
};

/// Axially magnetized cylinder; only used to derive a dipole moment.
struct CylMagnet {
    double diameter = 0.0;   // m
    double length = 0.0;     // m
    double remanence = 0.0;  // T

    double volume() const { return std::numbers::pi * 0.25 * diameter * diameter * length; }
};

/// |m| = Br V / mu0.
inline double moment_from_cylinder(const CylMagnet& mag) { return mag.remanence * mag.volume() / kMu0; }

template <class T = double>
struct Wrench6 {
    Vec3<T> torque;  // N m
    Vec3<T> force;   // N
};

/// Wrench in the magnet frame (x along magnetization) with the roll torque dropped.
template <class T = double>
struct Wrench5 {
    T tau_y{}, tau_z{};    // N m
    T f_x{}, f_y{}, f_z{};  // N

    static constexpr std::size_t size() { return 5; }
    constexpr T& operator[](std::size_t i) {
        switch (i) {
            case 0: return tau_y;
            case 1: return tau_z;
            case 2: return f_x;
            case 3: return f_y;
            default: return f_z;
        }
    }
    constexpr const T& operator[](std::size_t i) const { return const_cast<Wrench5&>(*this)[i]; }
    static constexpr bool is_torque(std::size_t i) { return i < 2; }
};

/// U = (w1, w2): robot 1 first, then robot 2. Flat index 0..9.
template <class T = double>
struct WrenchStack {
    Wrench5<T> w1, w2;

    static constexpr std::size_t size() { return 10; }
    constexpr T& operator[](std::size_t i) { return i < 5 ? w1[i] : w2[i - 5]; }
    constexpr const T& operator[](std::size_t i) const { return i < 5 ? w1[i] : w2[i - 5]; }
    static constexpr bool is_torque(std::size_t i) { return Wrench5<T>::is_torque(i % 5); }

    std::array<double, 10> values() const {
        std::array<double, 10> out{};
        for (std::size_t i = 0; i < 10; ++i) out[i] = value_of((*this)[i]);
        return out;
    }
    static WrenchStack from_values(const std::array<double, 10>& u) {
        WrenchStack s;
        for (std::size_t i = 0; i < 10; ++i) s[i] = T(u[i]);
        return s;
    }
};

namespace detail {

template <class T>
T checked_distance(const Vec3<T>& r) {
    const T n = norm(r);
    if (!(value_of(n) >= kMinSeparation))
        throw SingularityError("dipole evaluated " + std::to_string(value_of(n)) +
                               " m from its source (minimum " + std::to_string(kMinSeparation) + " m)");
    return n;
}

}  // namespace detail

/// Field of a point dipole. r points from the dipole to the evaluation point.
template <class T>
Vec3<T> dipole_field(const Dipole<T>& source, const Vec3<T>& point) {
    const Vec3<T> r = point - source.position;
    const T n = detail::checked_distance(r);
    const Vec3<T> u = r / n;
    const T k = T(kMu0 / (4.0 * std::numbers::pi)) / (n * n * n);
    return k * (T(3.0) * dot(u, source.moment) * u - source.moment);
}

/// Field Jacobian dB_i/dx_j of a point dipole. Symmetric and traceless.
template <class T>
Mat3<T> dipole_gradient(const Dipole<T>& source, const Vec3<T>& point) {
    const Vec3<T> r = point - source.position;
    const T n = detail::checked_distance(r);
    const Vec3<T> u = r / n;
    const Vec3<T>& m = source.moment;
    const T um = dot(u, m);
    const T k = T(3.0 * kMu0 / (4.0 * std::numbers::pi)) / (n * n * n * n);
    Mat3<T> g = Mat3<T>::outer(m, u) + Mat3<T>::outer(u, m) +
                um * (Mat3<T>::identity() - T(5.0) * Mat3<T>::outer(u, u));
    return k * g;
}

template <class T>
Vec3<T> field_at(std::span<const Dipole<T>> sources, const Vec3<T>& point) {
    Vec3<T> b;
    for (const auto& s : sources) b += dipole_field(s, point);
    return b;
}

template <class T>
Mat3<T> gradient_at(std::span<const Dipole<T>> sources, const Vec3<T>& point) {
    Mat3<T> g;
    for (const auto& s : sources) g += dipole_gradient(s, point);
    return g;
}

/// Torque m x B and force B_grad^T m on a magnet in the global frame.
template <class T>
Wrench6<T> wrench_global(const Vec3<T>& moment, const Vec3<T>& field, const Mat3<T>& field_grad) {
    return {cross(moment, field), field_grad.transposed() * moment};
}

template <class T>
Wrench6<T> wrench_global(const Dipole<T>& ipm, const Vec3<T>& field, const Mat3<T>& field_grad) {
    return wrench_global(ipm.moment, field, field_grad);
}

/// Rotation R with R * x_hat = dir, taken as the minimal rotation about
/// x_hat cross dir. The antipode dir = -x_hat maps to a half turn about z.
inline Mat3<double> magnet_frame(const Vec3<double>& dir) {
    const double len = norm(dir);
    if (!(len > 1e-15)) throw std::domain_error("magnet frame requested for a zero-length direction");
    const Vec3<double> m = dir / len;
    const Vec3<double> v{0.0, -m.z, m.y};  // x_hat cross m
    const double c = m.x;
    if (1.0 + c < 1e-14) {
        Mat3<double> r;
        r(0, 0) = -1.0; r(1, 1) = -1.0; r(2, 2) = 1.0;
        return r;
    }
    Mat3<double> K;
    K(0, 1) = -v.z; K(0, 2) = v.y;
    K(1, 0) = v.z;  K(1, 2) = -v.x;
    K(2, 0) = -v.y; K(2, 1) = v.x;
    return Mat3<double>::identity() + K + (1.0 / (1.0 + c)) * (K * K);
}

namespace detail {

template <class T>
Vec3<T> apply_transpose(const Mat3<double>& r, const Vec3<T>& v) {
    return {T(r(0, 0)) * v.x + T(r(1, 0)) * v.y + T(r(2, 0)) * v.z,
            T(r(0, 1)) * v.x + T(r(1, 1)) * v.y + T(r(2, 1)) * v.z,
            T(r(0, 2)) * v.x + T(r(1, 2)) * v.y + T(r(2, 2)) * v.z};
}

}  // namespace detail

/// Express a global wrench in the frame of a magnet with the given
/// magnetization direction and drop the roll torque.
template <class T>
Wrench5<T> reduce_wrench(const Wrench6<T>& w, const Vec3<double>& moment_dir) {
    const Mat3<double> r = magnet_frame(moment_dir);
    const Vec3<T> tau = detail::apply_transpose(r, w.torque);
    const Vec3<T> f = detail::apply_transpose(r, w.force);
    return {tau.y, tau.z, f.x, f.y, f.z};
}

/// Same rotation as reduce_wrench but keeps the roll component, for checks.
inline Wrench6<double> to_magnet_frame(const Wrench6<double>& w, const Vec3<double>& moment_dir) {
    const Mat3<double> r = magnet_frame(moment_dir);
    return {detail::apply_transpose(r, w.torque), detail::apply_transpose(r, w.force)};
}

/// Inverse of reduce_wrench with zero roll torque.
inline Wrench6<double> lift_wrench(const Wrench5<double>& w, const Vec3<double>& moment_dir) {
    const Mat3<double> r = magnet_frame(moment_dir);
    return {r * Vec3<double>{0.0, w.tau_y, w.tau_z}, r * Vec3<double>{w.f_x, w.f_y, w.f_z}};
}

/// Global wrench on `ipm` from the external sources plus, optionally, the
/// other embedded magnet.
template <class T>
Wrench6<T> wrench_on(std::span<const Dipole<T>> epms, const Dipole<double>& ipm, const Dipole<double>* other) {
    const Vec3<T> p = Vec3<T>::from(ipm.position);
    Vec3<T> b = field_at(epms, p);
    Mat3<T> g = gradient_at(epms, p);
    if (other != nullptr) {
        const Dipole<T> o = Dipole<T>::from(*other);
        b += dipole_field(o, p);
        g += dipole_gradient(o, p);
    }
    return wrench_global(Vec3<T>::from(ipm.moment), b, g);
}

/// Stacked five-component wrenches on both embedded magnets.
template <class T>
WrenchStack<T> wrench_stack(std::span<const Dipole<T>> epms, const Dipole<double>& ipm1, const Dipole<double>& ipm2,
                            bool inter_agent = true) {
    WrenchStack<T> u;
    u.w1 = reduce_wrench(wrench_on(epms, ipm1, inter_agent ? &ipm2 : nullptr), ipm1.moment);
    u.w2 = reduce_wrench(wrench_on(epms, ipm2, inter_agent ? &ipm1 : nullptr), ipm2.moment);
    return u;
}

/// Force on b due to a.
template <class T>
Vec3<T> dipole_force_between(const Dipole<T>& a, const Dipole<T>& b) {
    return dipole_gradient(a, b.position).transposed() * b.moment;
}

/// Torque on b due to a.
template <class T>
Vec3<T> dipole_torque_between(const Dipole<T>& a, const Dipole<T>& b) {
    return cross(b.moment, dipole_field(a, b.position));
}

}  // namespace magbot

namespace magbot {

/// Split the volume of `ref_count` copies of `ref` into `n` equal cylinders
/// with length equal to diameter.
inline std::vector<CylMagnet> split_cylinder_volume(const CylMagnet& ref, int ref_count, int n) {
    if (n < 1 || ref_count < 1) throw std::invalid_argument("magnet counts must be positive");
    const double each = ref.volume() * ref_count / n;
    const double dia = std::cbrt(4.0 * each / std::numbers::pi);
    return std::vector<CylMagnet>(static_cast<std::size_t>(n), CylMagnet{dia, dia, ref.remanence});
}

}  // namespace magbot

#pragma once

// EPM pose parameterization: spherical position (azimuth, elevation, radius)
// and moment direction (azimuth, elevation), five numbers per magnet.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "magbot/magnetics.hpp"

namespace magbot {

template <class T>
Vec3<T> spherical_to_position(const T& azimuth, const T& elevation, const T& radius) {
    using std::cos;
    using std::sin;
    const T cb = cos(elevation);
    return {radius * cb * cos(azimuth), radius * cb * sin(azimuth), radius * sin(elevation)};
}

template <class T>
Vec3<T> angles_to_moment(const T& azimuth, const T& elevation, double moment_norm) {
    return spherical_to_position(azimuth, elevation, T(moment_norm));
}

/// Flat optimization vector, laid out (alpha, beta, r, a, b) per EPM.
class EpmPoseVector {
public:
    static constexpr std::size_t kPerEpm = 5;
    enum Slot : std::size_t { kAzimuth = 0, kElevation = 1, kRadius = 2, kMomentAzimuth = 3, kMomentElevation = 4 };

    EpmPoseVector() = default;
    explicit EpmPoseVector(std::size_t n_epms) : v_(n_epms * kPerEpm, 0.0) {}
    explicit EpmPoseVector(std::vector<double> values) : v_(std::move(values)) {
        if (v_.size() % kPerEpm != 0) throw std::invalid_argument("pose vector length must be a multiple of 5");
    }

    std::size_t n_epms() const { return v_.size() / kPerEpm; }
    std::size_t size() const { return v_.size(); }

    double& operator()(std::size_t epm, Slot s) { return v_[epm * kPerEpm + s]; }
    double operator()(std::size_t epm, Slot s) const { return v_[epm * kPerEpm + s]; }
    double& operator[](std::size_t i) { return v_[i]; }
    double operator[](std::size_t i) const { return v_[i]; }

    std::span<double> values() { return v_; }
    std::span<const double> values() const { return v_; }
    const std::vector<double>& raw() const { return v_; }

    friend bool operator==(const EpmPoseVector&, const EpmPoseVector&) = default;

private:
    std::vector<double> v_;
};

/// One EPM from its five parameters.
template <class T>
Dipole<T> unpack_one(std::span<const T> five, double moment_norm) {
    return {spherical_to_position(five[0], five[1], five[2]), angles_to_moment(five[3], five[4], moment_norm)};
}

inline std::vector<Dipole<double>> unpack(const EpmPoseVector& x, std::span<const double> moment_norms) {
    if (moment_norms.size() != x.n_epms())
        throw std::invalid_argument("pose vector describes " + std::to_string(x.n_epms()) + " EPMs but " +
                                    std::to_string(moment_norms.size()) + " moment norms were given");
    std::vector<Dipole<double>> out;
    out.reserve(x.n_epms());
    for (std::size_t i = 0; i < x.n_epms(); ++i)
        out.push_back(unpack_one<double>(x.values().subspan(i * 5, 5), moment_norms[i]));
    return out;
}

/// Principal-branch inverse of unpack: azimuths in (-pi, pi], elevations in [-pi/2, pi/2].
inline EpmPoseVector pack(std::span<const Dipole<double>> epms) {
    EpmPoseVector x(epms.size());
    for (std::size_t i = 0; i < epms.size(); ++i) {
        const auto& p = epms[i].position;
        const auto& m = epms[i].moment;
        const double r = norm(p), mn = norm(m);
        x(i, EpmPoseVector::kRadius) = r;
        x(i, EpmPoseVector::kAzimuth) = std::atan2(p.y, p.x);
        x(i, EpmPoseVector::kElevation) = std::asin(std::clamp(p.z / r, -1.0, 1.0));
        x(i, EpmPoseVector::kMomentAzimuth) = std::atan2(m.y, m.x);
        x(i, EpmPoseVector::kMomentElevation) = std::asin(std::clamp(m.z / mn, -1.0, 1.0));
    }
    return x;
}

}  // namespace magbot

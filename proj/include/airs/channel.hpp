#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "airs/linalg.hpp"

namespace airs {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

inline double distance(const Vec3& a, const Vec3& b) {
    double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// Azimuth in [-pi, pi], elevation measured from the +z axis in [0, pi].
struct Angles {
    double azimuth = 0.0;
    double elevation = 0.0;

    void validate() const {
        if (!std::isfinite(azimuth) || !std::isfinite(elevation))
            throw InvalidInputError("Angles: non-finite");
        const double pi = std::numbers::pi;
        if (azimuth < -pi - 1e-12 || azimuth > pi + 1e-12)
            throw InvalidInputError("Angles: azimuth out of range");
        if (elevation < -1e-12 || elevation > pi + 1e-12)
            throw InvalidInputError("Angles: elevation out of range");
    }
};

/// Look direction from an array toward a point.
inline Angles angles_toward(const Vec3& array_pos, const Vec3& point) {
    double dx = point.x - array_pos.x;
    double dy = point.y - array_pos.y;
    double dz = point.z - array_pos.z;
    double r = std::sqrt(dx * dx + dy * dy + dz * dz);
    if (r <= 0.0) throw InvalidInputError("angles_toward: coincident points");
    Angles a;
    a.azimuth = std::atan2(dy, dx);
    a.elevation = std::acos(std::clamp(dz / r, -1.0, 1.0));
    return a;
}

/// Rectangular array with half-wavelength spacing by default.
struct ArraySpec {
    int n_h = 1;
    int n_v = 1;
    double spacing_over_wavelength = 0.5;

    int total() const { return n_h * n_v; }

    void validate() const {
        if (n_h < 1 || n_v < 1) throw InvalidInputError("ArraySpec: element counts must be >= 1");
        if (!(spacing_over_wavelength > 0.0))
            throw InvalidInputError("ArraySpec: spacing must be > 0");
    }
};

/// Near-square factorization: the horizontal count is ceil(sqrt(total))
/// shrunk to the nearest divisor.
inline ArraySpec make_array(int total) {
    if (total < 1) throw InvalidInputError("make_array: total must be >= 1");
    int h = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(total))));
    while (h > 1 && total % h != 0) --h;
    ArraySpec a;
    a.n_h = h;
    a.n_v = total / h;
    return a;
}

namespace detail {
/// Geometric phase progression: entry l is exp(j pi (l-1) x), l = 1..len.
inline CVec phase_progression(double x, int len) {
    CVec v(static_cast<std::size_t>(len));
    for (int l = 0; l < len; ++l) {
        double phi = std::numbers::pi * static_cast<double>(l) * x;
        v[static_cast<std::size_t>(l)] = cdouble{std::cos(phi), std::sin(phi)};
    }
    return v;
}
}  // namespace detail

/// Planar-array steering vector: horizontal progression driven by
/// sin(az) sin(el), vertical by cos(el), combined horizontal-major.
inline CVec steering_vector(const Angles& angles, const ArraySpec& array) {
    angles.validate();
    array.validate();
    double c = 2.0 * array.spacing_over_wavelength;
    double xh = c * std::sin(angles.azimuth) * std::sin(angles.elevation);
    double xv = c * std::cos(angles.elevation);
    return kron(detail::phase_progression(xh, array.n_h),
                detail::phase_progression(xv, array.n_v));
}

/// Free-space power gain at the given distance relative to the unit
/// reference distance.
inline double pathloss_gain(double distance_m, double beta) {
    if (!(distance_m > 0.0)) throw InvalidInputError("pathloss_gain: distance must be > 0");
    if (!(beta > 0.0)) throw InvalidInputError("pathloss_gain: beta must be > 0");
    return beta / (distance_m * distance_m);
}

/// Rank-one line-of-sight channel: matrix == gain * rx_steer * tx_steerᴴ.
struct LosChannel {
    CMat matrix;
    double gain_amplitude = 0.0;
    CVec rx_steer;
    CVec tx_steer;

    std::size_t rx_dim() const { return matrix.rows(); }
    std::size_t tx_dim() const { return matrix.cols(); }
};

inline LosChannel build_los_channel(double gain_amplitude, const Angles& rx_angles,
                                    const ArraySpec& rx_array, const Angles& tx_angles,
                                    const ArraySpec& tx_array) {
    if (!(gain_amplitude >= 0.0) || !std::isfinite(gain_amplitude))
        throw InvalidInputError("build_los_channel: gain must be finite and >= 0");
    LosChannel ch;
    ch.gain_amplitude = gain_amplitude;
    ch.rx_steer = steering_vector(rx_angles, rx_array);
    ch.tx_steer = steering_vector(tx_angles, tx_array);
    ch.matrix = gain_amplitude * outer(ch.rx_steer, ch.tx_steer);
    return ch;
}

/// Channel between a transmit array at tx_pos and a receive array at
/// rx_pos, with free-space gain from their separation.
inline LosChannel build_link(double beta, const Vec3& tx_pos, int tx_total, const Vec3& rx_pos,
                             int rx_total) {
    double g = std::sqrt(pathloss_gain(distance(tx_pos, rx_pos), beta));
    return build_los_channel(g, angles_toward(rx_pos, tx_pos), make_array(rx_total),
                             angles_toward(tx_pos, rx_pos), make_array(tx_total));
}

/// Channel between a single-antenna endpoint and an array, as the
/// array-side vector.
inline CVec build_link_vector(double beta, const Vec3& point_pos, const Vec3& array_pos,
                              int array_total) {
    double g = std::sqrt(pathloss_gain(distance(point_pos, array_pos), beta));
    CVec s = steering_vector(angles_toward(array_pos, point_pos), make_array(array_total));
    return g * s;
}

/// Node layout: BS at the origin, one surface right above it, the other
/// above the user area at ground distance d.
struct Geometry {
    Vec3 bs{0.0, 0.0, 0.0};
    Vec3 bs_airs{0.0, 0.0, 0.0};
    Vec3 user_airs{0.0, 0.0, 0.0};
    Vec3 user_center{0.0, 0.0, 0.0};
    Vec3 pirs{0.0, 0.0, 0.0};
    double d = 0.0;
    double h = 0.0;

    static Geometry standard(double d, double h) {
        if (!(d > 0.0) || !(h > 0.0)) throw InvalidInputError("Geometry: d and h must be > 0");
        Geometry g;
        g.d = d;
        g.h = h;
        g.bs = {0.0, 0.0, 0.0};
        g.bs_airs = {0.0, 0.0, h};
        g.user_airs = {0.0, d, h};
        g.user_center = {0.0, d, 0.0};
        g.pirs = {0.0, 0.0, h};
        return g;
    }
};

}  // namespace airs

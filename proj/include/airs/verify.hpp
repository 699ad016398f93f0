#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "airs/channel.hpp"
#include "airs/linalg.hpp"
#include "airs/rng.hpp"

namespace airs::verify {

/// Raw-matrix rate computations used to cross-check the closed forms.
/// These build the actual channel matrices, align the reflection phases
/// element by element, saturate the amplification budget, apply matched
/// transmit/receive beamformers, and evaluate the SINR definition
/// directly. They share no code with the closed-form rate expressions.

inline CVec unit_phase_from(const CVec& reference) {
    CVec v(reference.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double phi = std::arg(reference[i]);
        v[i] = cdouble{std::cos(phi), std::sin(phi)};
    }
    return v;
}

/// Uplink single-reflection rate: user -> surface (n elements) -> BS.
inline double ul_rate_matrix(double p_user, double p_f, int m, int n, double beta,
                             const Vec3& bs, const Vec3& airs, const Vec3& user,
                             double sigma_f, double sigma_0) {
    LosChannel g = build_link(beta, bs, m, airs, n);
    CVec h = build_link_vector(beta, user, airs, n);

    // Element-wise alignment of the cascade onto the surface's BS-side
    // steering direction.
    CVec v(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        double phi = std::arg(g.rx_steer[i]) - std::arg(h[i]);
        v[i] = cdouble{std::cos(phi), std::sin(phi)};
    }
    CVec vh = v.hadamard(h);
    double alpha =
        std::sqrt(p_f / (p_user * vh.squared_norm() + sigma_f * static_cast<double>(n)));

    CVec t = g.matrix.adjoint() * vh;  // effective channel at the BS
    CVec u = t.normalized();

    CVec gu = g.matrix * u;
    cdouble s{0.0, 0.0};
    for (std::size_t i = 0; i < gu.size(); ++i) s += std::conj(gu[i]) * vh[i];
    double signal = p_user * alpha * alpha * std::norm(s);
    double amp_noise = 0.0;
    for (std::size_t i = 0; i < gu.size(); ++i) amp_noise += std::norm(v[i]) * std::norm(gu[i]);
    double den = alpha * alpha * sigma_f * amp_noise + sigma_0 * u.squared_norm();
    return std::log2(1.0 + signal / den);
}

/// Downlink single-reflection rate: BS -> surface (n elements) -> user.
inline double dl_rate_matrix(double p_b, double p_f, int m, int n, double beta, const Vec3& bs,
                             const Vec3& airs, const Vec3& user, double sigma_f,
                             double sigma_0) {
    LosChannel g = build_link(beta, bs, m, airs, n);
    CVec h = build_link_vector(beta, user, airs, n);

    CVec v(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        double phi = std::arg(h[i]) - std::arg(g.rx_steer[i]);
        v[i] = cdouble{std::cos(phi), std::sin(phi)};
    }

    CVec q = g.matrix.adjoint() * v.conj().hadamard(h);
    CVec w = q.normalized();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] *= std::sqrt(p_b);

    CVec gw = g.matrix * w;
    double alpha = std::sqrt(
        p_f / (v.hadamard(gw).squared_norm() + sigma_f * static_cast<double>(n)));

    cdouble s{0.0, 0.0};
    for (std::size_t i = 0; i < gw.size(); ++i) s += std::conj(h[i]) * v[i] * gw[i];
    double signal = alpha * alpha * std::norm(s);
    double amp_noise = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) amp_noise += std::norm(h[i]) * std::norm(v[i]);
    double den = alpha * alpha * sigma_f * amp_noise + sigma_0;
    return std::log2(1.0 + signal / den);
}

/// Passive-reflection rate through a unit-amplitude surface: no
/// amplification stage, so the only noise is at the receiver. The same
/// expression serves both directions with the corresponding transmit
/// power.
inline double pirs_rate_matrix(double p_tx, int m, int n, double beta, const Vec3& bs,
                               const Vec3& pirs, const Vec3& user, double sigma_0) {
    LosChannel g = build_link(beta, bs, m, pirs, n);
    CVec h = build_link_vector(beta, user, pirs, n);
    CVec v(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        double phi = std::arg(g.rx_steer[i]) - std::arg(h[i]);
        v[i] = cdouble{std::cos(phi), std::sin(phi)};
    }
    CVec vh = v.hadamard(h);
    CVec t = g.matrix.adjoint() * vh;
    CVec u = t.normalized();
    cdouble s = hdot(u, t);
    double signal = p_tx * std::norm(s);
    return std::log2(1.0 + signal / sigma_0);
}

}  // namespace airs::verify

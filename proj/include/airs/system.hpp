#pragma once

#include <cmath>

#include "airs/channel.hpp"
#include "airs/errors.hpp"

namespace airs {

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Scenario constants. All powers are milliwatts; dBm/dB conversion
/// happens only at the configuration boundary.
struct SystemParams {
    double p_u_mw = 0.0;      // user transmit power budget
    double p_b_mw = 0.0;      // BS transmit power budget
    double p_f_mw = 0.0;      // surface amplification power budget
    double sigma_f_mw = 0.0;  // amplification noise power
    double sigma_0_mw = 0.0;  // receiver noise power
    int m = 1;                // BS antennas
    int n_total = 2;          // total active elements
    double epsilon = 0.5;     // downlink priority weight
    int k_users = 1;
    double beta = 1e-3;       // reference power gain at 1 m
    Geometry geometry;

    void validate() const {
        if (!(p_u_mw > 0.0 && p_b_mw > 0.0 && p_f_mw > 0.0))
            throw InvalidInputError("SystemParams: transmit powers must be > 0");
        if (!(sigma_f_mw > 0.0 && sigma_0_mw > 0.0))
            throw InvalidInputError("SystemParams: noise powers must be > 0");
        if (!(epsilon >= 0.0 && epsilon <= 1.0))
            throw InvalidInputError("SystemParams: epsilon must be in [0, 1]");
        if (m < 1) throw InvalidInputError("SystemParams: m must be >= 1");
        if (n_total < 2) throw InvalidInputError("SystemParams: n_total must be >= 2");
        if (k_users < 1) throw InvalidInputError("SystemParams: k_users must be >= 1");
        if (!(beta > 0.0)) throw InvalidInputError("SystemParams: beta must be > 0");
        if (!(geometry.d > 0.0 && geometry.h > 0.0))
            throw InvalidInputError("SystemParams: geometry d and h must be > 0");
    }

    /// Hop gain between a node and the surface right above it.
    double h1_sq() const { return beta / (geometry.h * geometry.h); }
    /// Hop gain across the ground distance, surface elevated by h.
    double h2_sq() const {
        return beta / (geometry.d * geometry.d + geometry.h * geometry.h);
    }

    /// Reference desk-scale scenario: 15/20/-5 dBm transmit, amplification
    /// and surface powers, -80 dBm noise, -30 dB reference gain, 200 m
    /// cell, 10 m surface height.
    static SystemParams defaults() {
        SystemParams p;
        p.p_u_mw = dbm_to_mw(15.0);
        p.p_b_mw = dbm_to_mw(20.0);
        p.p_f_mw = dbm_to_mw(-5.0);
        p.sigma_f_mw = dbm_to_mw(-80.0);
        p.sigma_0_mw = dbm_to_mw(-80.0);
        p.m = 4;
        p.n_total = 100;
        p.epsilon = 0.4;
        p.k_users = 1;
        p.beta = db_to_linear(-30.0);
        p.geometry = Geometry::standard(200.0, 10.0);
        return p;
    }
};

}  // namespace airs

#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include "airs/system.hpp"

namespace airs {

enum class DeploymentSide { BsSide, UserSide };
enum class DeploymentScheme { BsSide, UserSide, DistributedOpt };

inline const char* to_string(DeploymentScheme s) {
    switch (s) {
        case DeploymentScheme::BsSide: return "bs-side";
        case DeploymentScheme::UserSide: return "user-side";
        default: return "distributed-opt";
    }
}

inline double log2_1p(double snr) { return std::log2(1.0 + snr); }

/// SNR of an amplified reflection link carrying user -> surface -> BS,
/// with the surface amplification budget saturated and a matched receive
/// combiner at the BS. Gains are power gains of the two hops.
inline double snr_uplink(double p_user_mw, double p_f_mw, int m, double n_elements,
                         double g_airs_bs, double g_user_airs, double sigma_f_mw,
                         double sigma_0_mw) {
    double num = p_user_mw * p_f_mw * m * n_elements * g_airs_bs * g_user_airs;
    double den = m * p_f_mw * g_airs_bs * sigma_f_mw + p_user_mw * g_user_airs * sigma_0_mw +
                 sigma_f_mw * sigma_0_mw;
    return num / den;
}

/// SNR of an amplified reflection link carrying BS -> surface -> user,
/// with a matched transmit beamformer at the BS and the amplification
/// budget saturated.
inline double snr_downlink(double p_b_mw, double p_f_mw, int m, double n_elements,
                           double g_bs_airs, double g_airs_user, double sigma_f_mw,
                           double sigma_0_mw) {
    double num = p_b_mw * p_f_mw * m * n_elements * g_bs_airs * g_airs_user;
    double den = p_f_mw * g_airs_user * sigma_f_mw + m * p_b_mw * g_bs_airs * sigma_0_mw +
                 sigma_f_mw * sigma_0_mw;
    return num / den;
}

/// Coefficients of the distributed two-surface weighted sum rate:
/// uplink SNR = p_u f1 n_u / f2, downlink SNR = p_b f1 n_d / f3.
/// w1 and w2 bound the weight interval where the optimal element split
/// is interior.
struct WsrCoefficients {
    double f1 = 0.0;
    double f2 = 0.0;
    double f3 = 0.0;
    double w1 = 0.0;
    double w2 = 0.0;
};

inline WsrCoefficients wsr_coefficients(const SystemParams& p) {
    p.validate();
    double h1 = p.h1_sq();
    double h2 = p.h2_sq();
    WsrCoefficients c;
    c.f1 = p.m * p.p_f_mw * h1 * h2;
    c.f2 = p.m * p.p_f_mw * h1 * p.sigma_f_mw + p.p_u_mw * h2 * p.sigma_0_mw +
           p.sigma_f_mw * p.sigma_0_mw;
    c.f3 = p.p_f_mw * h1 * p.sigma_f_mw + p.m * p.p_b_mw * h2 * p.sigma_0_mw +
           p.sigma_f_mw * p.sigma_0_mw;
    double n = static_cast<double>(p.n_total);
    double denom = p.p_b_mw * p.p_u_mw * c.f1 * n + p.p_b_mw * c.f2 + p.p_u_mw * c.f3;
    c.w1 = p.p_u_mw * c.f3 / denom;
    c.w2 = (p.p_b_mw * p.p_u_mw * c.f1 * n + p.p_u_mw * c.f3) / denom;
    return c;
}

struct RateSplit {
    double wsr = 0.0;      // (1-eps) ul_rate + eps dl_rate, bps/Hz
    double ul_rate = 0.0;  // bps/Hz
    double dl_rate = 0.0;  // bps/Hz
    double snr_ul = 0.0;
    double snr_dl = 0.0;
};

/// Weighted sum rate of the distributed pair with n_u elements serving
/// uplink and n_d serving downlink.
inline RateSplit wsr_distributed(const SystemParams& p, double n_u, double n_d) {
    if (n_u < 0.0 || n_d < 0.0)
        throw InvalidInputError("wsr_distributed: element counts must be >= 0");
    WsrCoefficients c = wsr_coefficients(p);
    RateSplit r;
    r.snr_ul = p.p_u_mw * c.f1 * n_u / c.f2;
    r.snr_dl = p.p_b_mw * c.f1 * n_d / c.f3;
    r.ul_rate = log2_1p(r.snr_ul);
    r.dl_rate = log2_1p(r.snr_dl);
    r.wsr = (1.0 - p.epsilon) * r.ul_rate + p.epsilon * r.dl_rate;
    return r;
}

struct AllocationResult {
    double x_d_continuous = 0.0;
    int n_u = 0;
    int n_d = 0;
    double wsr_bpshz = 0.0;
};

namespace detail {
/// Pick the better of floor/ceil around the continuous split; ties go to
/// the smaller downlink count.
inline AllocationResult round_allocation(const SystemParams& p, double x_d) {
    int n = p.n_total;
    double xc = std::clamp(x_d, 0.0, static_cast<double>(n));
    int lo = std::clamp(static_cast<int>(std::floor(xc)), 0, n);
    int hi = std::clamp(static_cast<int>(std::ceil(xc)), 0, n);
    double wsr_lo = wsr_distributed(p, n - lo, lo).wsr;
    double wsr_hi = (hi == lo) ? wsr_lo : wsr_distributed(p, n - hi, hi).wsr;
    AllocationResult r;
    r.x_d_continuous = xc;
    if (wsr_hi > wsr_lo + 1e-12 * std::max(1.0, std::abs(wsr_lo))) {
        r.n_d = hi;
        r.wsr_bpshz = wsr_hi;
    } else {
        r.n_d = lo;
        r.wsr_bpshz = wsr_lo;
    }
    r.n_u = n - r.n_d;
    return r;
}
}  // namespace detail

/// Closed-form optimal element split between the two surfaces: the
/// continuous optimum is a three-branch expression in the downlink weight,
/// then rounded to the better adjacent integer.
inline AllocationResult allocate_elements_optimal(const SystemParams& p) {
    WsrCoefficients c = wsr_coefficients(p);
    double n = static_cast<double>(p.n_total);
    double x_d;
    if (p.epsilon <= c.w1) {
        x_d = 0.0;
    } else if (p.epsilon >= c.w2) {
        x_d = n;
    } else {
        double denom = p.p_b_mw * p.p_u_mw * c.f1 * n + p.p_b_mw * c.f2 + p.p_u_mw * c.f3;
        x_d = (p.epsilon * denom - p.p_u_mw * c.f3) / (p.p_b_mw * p.p_u_mw * c.f1);
    }
    return detail::round_allocation(p, x_d);
}

/// High-SNR element split: the downlink share is simply the downlink
/// weight times the total. Only defined on the open weight interval.
inline double allocate_elements_near_optimal(double epsilon, int n_total) {
    if (n_total < 2) throw InvalidInputError("allocate_elements_near_optimal: n_total must be >= 2");
    if (epsilon <= 0.0 || epsilon >= 1.0)
        throw BoundaryError(
            "allocate_elements_near_optimal: boundary weight; use the closed-form branch "
            "that assigns all elements to one side");
    return epsilon * static_cast<double>(n_total);
}

/// Weighted sum rate with a single surface of all n elements placed above
/// the BS or above the user, serving both directions.
inline RateSplit wsr_single_airs(const SystemParams& p, DeploymentSide side, int n_elements = -1) {
    p.validate();
    double h1 = p.h1_sq();
    double h2 = p.h2_sq();
    double n = static_cast<double>(n_elements < 0 ? p.n_total : n_elements);
    RateSplit r;
    if (side == DeploymentSide::BsSide) {
        // Short hop to the BS, long hop to the user, in both directions.
        r.snr_ul = snr_uplink(p.p_u_mw, p.p_f_mw, p.m, n, h1, h2, p.sigma_f_mw, p.sigma_0_mw);
        r.snr_dl = snr_downlink(p.p_b_mw, p.p_f_mw, p.m, n, h1, h2, p.sigma_f_mw, p.sigma_0_mw);
    } else {
        r.snr_ul = snr_uplink(p.p_u_mw, p.p_f_mw, p.m, n, h2, h1, p.sigma_f_mw, p.sigma_0_mw);
        r.snr_dl = snr_downlink(p.p_b_mw, p.p_f_mw, p.m, n, h2, h1, p.sigma_f_mw, p.sigma_0_mw);
    }
    r.ul_rate = log2_1p(r.snr_ul);
    r.dl_rate = log2_1p(r.snr_dl);
    r.wsr = (1.0 - p.epsilon) * r.ul_rate + p.epsilon * r.dl_rate;
    return r;
}

/// Deployment selector: outside the interior-weight interval the
/// distributed split degenerates, so only the two single-surface schemes
/// compete; inside, all three do.
inline std::pair<DeploymentScheme, double> best_deployment(const SystemParams& p) {
    WsrCoefficients c = wsr_coefficients(p);
    double r_bs = wsr_single_airs(p, DeploymentSide::BsSide).wsr;
    double r_ue = wsr_single_airs(p, DeploymentSide::UserSide).wsr;
    DeploymentScheme best = r_bs >= r_ue ? DeploymentScheme::BsSide : DeploymentScheme::UserSide;
    double best_wsr = std::max(r_bs, r_ue);
    if (p.epsilon > c.w1 && p.epsilon < c.w2) {
        double r_dis = allocate_elements_optimal(p).wsr_bpshz;
        if (r_dis > best_wsr) {
            best = DeploymentScheme::DistributedOpt;
            best_wsr = r_dis;
        }
    }
    return {best, best_wsr};
}

/// Passive-surface baseline: unit-amplitude reflection, no amplification
/// noise, so the received SNR scales with the square of the element count.
inline RateSplit wsr_pirs_baseline(const SystemParams& p, int n_elements = -1) {
    p.validate();
    double n = static_cast<double>(n_elements < 0 ? p.n_total : n_elements);
    double g_a = pathloss_gain(distance(p.geometry.bs, p.geometry.pirs), p.beta);
    double g_b = pathloss_gain(distance(p.geometry.pirs, p.geometry.user_center), p.beta);
    RateSplit r;
    r.snr_ul = p.p_u_mw * p.m * n * n * g_a * g_b / p.sigma_0_mw;
    r.snr_dl = p.p_b_mw * p.m * n * n * g_a * g_b / p.sigma_0_mw;
    r.ul_rate = log2_1p(r.snr_ul);
    r.dl_rate = log2_1p(r.snr_dl);
    r.wsr = (1.0 - p.epsilon) * r.ul_rate + p.epsilon * r.dl_rate;
    return r;
}

}  // namespace airs

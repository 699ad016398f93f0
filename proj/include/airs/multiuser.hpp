#pragma once

#include <vector>

#include "airs/single_user.hpp"

namespace airs {

/// Per-user hop gains: user k to the BS-side surface, and the user-side
/// surface to user k.
struct UserLinkGains {
    std::vector<double> h_u_sq;
    std::vector<double> h_d_sq;

    std::size_t size() const { return h_u_sq.size(); }

    void validate() const {
        if (h_u_sq.size() != h_d_sq.size() || h_u_sq.empty())
            throw InvalidInputError("UserLinkGains: inconsistent or empty");
        for (std::size_t k = 0; k < h_u_sq.size(); ++k)
            if (!(h_u_sq[k] > 0.0) || !(h_d_sq[k] > 0.0))
                throw InvalidInputError("UserLinkGains: gains must be > 0");
    }
};

inline UserLinkGains user_link_gains(const SystemParams& p, const std::vector<Vec3>& users) {
    UserLinkGains g;
    g.h_u_sq.reserve(users.size());
    g.h_d_sq.reserve(users.size());
    for (const auto& u : users) {
        g.h_u_sq.push_back(pathloss_gain(distance(u, p.geometry.bs_airs), p.beta));
        g.h_d_sq.push_back(pathloss_gain(distance(u, p.geometry.user_airs), p.beta));
    }
    g.validate();
    return g;
}

struct UserRates {
    std::vector<double> ul;  // bps/Hz, includes the 1/K slot share
    std::vector<double> dl;
    double ul_sum = 0.0;
    double dl_sum = 0.0;
    double wsr = 0.0;
};

/// Per-user rates when each user gets its own slot and a dedicated
/// surface configuration during it. The BS-side surface serves uplink
/// with n_u elements, the user-side surface serves downlink with n_d.
inline UserRates rates_user_adaptive(const SystemParams& p, const UserLinkGains& gains, int n_u,
                                     int n_d) {
    p.validate();
    gains.validate();
    if (n_u + n_d != p.n_total)
        throw InvalidInputError("rates_user_adaptive: n_u + n_d must equal n_total");
    if (n_u < 0 || n_d < 0) throw InvalidInputError("rates_user_adaptive: negative counts");
    const double k = static_cast<double>(gains.size());
    const double h1 = p.h1_sq();
    const double h2 = p.h2_sq();
    UserRates r;
    r.ul.reserve(gains.size());
    r.dl.reserve(gains.size());
    for (std::size_t i = 0; i < gains.size(); ++i) {
        double snr_u = snr_uplink(p.p_u_mw, p.p_f_mw, p.m, n_u, h1, gains.h_u_sq[i],
                                  p.sigma_f_mw, p.sigma_0_mw);
        double snr_d = snr_downlink(p.p_b_mw, p.p_f_mw, p.m, n_d, h2, gains.h_d_sq[i],
                                    p.sigma_f_mw, p.sigma_0_mw);
        r.ul.push_back(log2_1p(snr_u) / k);
        r.dl.push_back(log2_1p(snr_d) / k);
        r.ul_sum += r.ul.back();
        r.dl_sum += r.dl.back();
    }
    r.wsr = (1.0 - p.epsilon) * r.ul_sum + p.epsilon * r.dl_sum;
    return r;
}

/// Exhaustive split search over n_d in {1, ..., N-1}; both surfaces stay
/// non-empty and the total element budget is used with equality. Ties go
/// to the smallest n_d.
inline AllocationResult allocate_elements_search(const SystemParams& p,
                                                 const UserLinkGains& gains) {
    if (p.n_total < 2) throw InvalidInputError("allocate_elements_search: n_total must be >= 2");
    AllocationResult best;
    bool have = false;
    for (int n_d = 1; n_d <= p.n_total - 1; ++n_d) {
        double wsr = rates_user_adaptive(p, gains, p.n_total - n_d, n_d).wsr;
        if (!have || wsr > best.wsr_bpshz) {
            best.n_d = n_d;
            best.n_u = p.n_total - n_d;
            best.wsr_bpshz = wsr;
            best.x_d_continuous = static_cast<double>(n_d);
            have = true;
        }
    }
    return best;
}

}  // namespace airs

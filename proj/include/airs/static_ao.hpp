#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "airs/multiuser.hpp"
#include "airs/qcqp.hpp"
#include "airs/system.hpp"

namespace airs {

enum class QcqpMethod { CoordinateAscent, Sdr };
enum class RateObjective { WeightedSum, UplinkOnly, DownlinkOnly };

/// Direction weights applied to the two rate sums in the optimization
/// objective. The fixed single-direction modes optimize the raw direction
/// sum so they stay meaningful at the weight endpoints.
struct LinkWeights {
    double ul = 0.0;
    double dl = 0.0;
};

inline LinkWeights objective_weights(RateObjective obj, double epsilon) {
    switch (obj) {
        case RateObjective::UplinkOnly: return {1.0, 0.0};
        case RateObjective::DownlinkOnly: return {0.0, 1.0};
        default: return {1.0 - epsilon, epsilon};
    }
}

/// Channels of the shared-phase configuration: both surfaces carry
/// n_side elements and one phase vector drives both.
struct StaticChannels {
    LosChannel g_u;            // BS -> BS-side surface, n_side x m
    LosChannel g_d;            // BS -> user-side surface, n_side x m
    std::vector<CVec> h_u;     // user k -> BS-side surface
    std::vector<CVec> h_d;     // user-side surface -> user k
    int n_side = 0;
    int m = 0;

    int users() const { return static_cast<int>(h_u.size()); }
};

/// Splits the element budget evenly across the two surfaces; the shared
/// phase vector requires equal counts, so the total must be even.
inline StaticChannels build_static_channels(const SystemParams& p,
                                            const std::vector<Vec3>& users) {
    p.validate();
    if (p.n_total % 2 != 0)
        throw InvalidInputError("build_static_channels: n_total must be even");
    if (users.empty()) throw InvalidInputError("build_static_channels: no users");
    StaticChannels ch;
    ch.n_side = p.n_total / 2;
    ch.m = p.m;
    ch.g_u = build_link(p.beta, p.geometry.bs, p.m, p.geometry.bs_airs, ch.n_side);
    ch.g_d = build_link(p.beta, p.geometry.bs, p.m, p.geometry.user_airs, ch.n_side);
    for (const auto& u : users) {
        ch.h_u.push_back(build_link_vector(p.beta, u, p.geometry.bs_airs, ch.n_side));
        ch.h_d.push_back(build_link_vector(p.beta, u, p.geometry.user_airs, ch.n_side));
    }
    return ch;
}

/// Full variable set of the shared-phase design.
struct StaticBeamState {
    std::vector<CVec> w;  // BS transmit beamformers, dim m, ||w||^2 <= p_b
    std::vector<CVec> u;  // BS receive beamformers, unit norm
    CVec phase;           // shared unit-modulus reflection vector
    double alpha_u = 0.0;
    double alpha_d = 0.0;
    std::vector<double> p;  // user transmit powers, mW
};

struct StaticRates {
    std::vector<double> ul;
    std::vector<double> dl;
    double ul_sum = 0.0;
    double dl_sum = 0.0;
    double wsr = 0.0;  // (1-eps) ul_sum + eps dl_sum
};

namespace detail {

inline CVec phase_times(const CVec& phase, const CVec& x) { return phase.hadamard(x); }

/// uᴴ Gᴴ diag(phase) h
inline cdouble cascade_scalar(const LosChannel& g, const CVec& u, const CVec& phase,
                              const CVec& h) {
    CVec gu = g.matrix * u;  // G u, dim n_side
    cdouble s{0.0, 0.0};
    for (std::size_t i = 0; i < gu.size(); ++i) s += std::conj(gu[i]) * phase[i] * h[i];
    return s;
}

}  // namespace detail

/// Exact per-user rates of the shared-phase configuration.
inline StaticRates rates_static(const StaticBeamState& st, const StaticChannels& ch,
                                const SystemParams& p) {
    const int k_users = ch.users();
    const double k = static_cast<double>(k_users);
    StaticRates r;
    for (int k_i = 0; k_i < k_users; ++k_i) {
        const auto idx = static_cast<std::size_t>(k_i);
        // Uplink: user -> BS-side surface -> BS.
        cdouble s_ul = detail::cascade_scalar(ch.g_u, st.u[idx], st.phase, ch.h_u[idx]);
        double sig_ul = st.p[idx] * st.alpha_u * st.alpha_u * std::norm(s_ul);
        CVec gu = ch.g_u.matrix * st.u[idx];
        double amp_noise_ul = 0.0;
        for (std::size_t i = 0; i < gu.size(); ++i)
            amp_noise_ul += std::norm(std::conj(st.phase[i]) * gu[i]);
        double den_ul = st.alpha_u * st.alpha_u * p.sigma_f_mw * amp_noise_ul +
                        p.sigma_0_mw * st.u[idx].squared_norm();
        double rate_ul = log2_1p(sig_ul / den_ul) / k;

        // Downlink: BS -> user-side surface -> user.
        CVec gw = ch.g_d.matrix * st.w[idx];
        cdouble s_dl{0.0, 0.0};
        for (std::size_t i = 0; i < gw.size(); ++i)
            s_dl += std::conj(ch.h_d[idx][i]) * st.phase[i] * gw[i];
        double sig_dl = st.alpha_d * st.alpha_d * std::norm(s_dl);
        double amp_noise_dl = 0.0;
        for (std::size_t i = 0; i < st.phase.size(); ++i)
            amp_noise_dl += std::norm(std::conj(ch.h_d[idx][i]) * st.phase[i]);
        double den_dl =
            st.alpha_d * st.alpha_d * p.sigma_f_mw * amp_noise_dl + p.sigma_0_mw;
        double rate_dl = log2_1p(sig_dl / den_dl) / k;

        r.ul.push_back(rate_ul);
        r.dl.push_back(rate_dl);
        r.ul_sum += rate_ul;
        r.dl_sum += rate_dl;
    }
    r.wsr = (1.0 - p.epsilon) * r.ul_sum + p.epsilon * r.dl_sum;
    return r;
}

inline double weighted_rate(const StaticRates& r, LinkWeights w) {
    return w.ul * r.ul_sum + w.dl * r.dl_sum;
}

/// Matched receive combiners on the effective uplink channels. On
/// rank-one forward channels the amplified-noise covariance is aligned
/// with the effective channel, so matching it is the exact optimum.
inline std::vector<CVec> mrc_receive_update(const StaticChannels& ch, const CVec& phase) {
    std::vector<CVec> u;
    CMat g_adj = ch.g_u.matrix.adjoint();  // m x n_side
    for (int k = 0; k < ch.users(); ++k) {
        CVec t = g_adj * detail::phase_times(phase, ch.h_u[static_cast<std::size_t>(k)]);
        double nt = t.norm();
        if (nt <= 0.0)
            throw DegenerateChannelError("mrc_receive_update: zero effective channel");
        for (std::size_t i = 0; i < t.size(); ++i) t[i] /= nt;
        u.push_back(std::move(t));
    }
    return u;
}

/// Transmit beamformer for user k under the BS power budget and the
/// surface amplification headroom. The beam objective is rank-one, so
/// the optimizer is the matched direction at the largest feasible power.
inline CVec transmit_update(const StaticChannels& ch, const CVec& phase, double alpha_d,
                            const SystemParams& p, int k) {
    const auto idx = static_cast<std::size_t>(k);
    double headroom =
        p.p_f_mw - alpha_d * alpha_d * p.sigma_f_mw * static_cast<double>(ch.n_side);
    if (!(headroom > 0.0))
        throw InfeasibleError("transmit_update: amplification headroom exhausted; "
                              "alpha_d must shrink");
    // q = G_dᴴ diag(phase)ᴴ h_d
    CVec ph = phase.conj().hadamard(ch.h_d[idx]);
    CVec q = ch.g_d.matrix.adjoint() * ph;
    double nq = q.norm();
    if (nq <= 0.0) throw DegenerateChannelError("transmit_update: zero effective channel");
    CVec dir(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) dir[i] = q[i] / nq;
    CVec gd_dir = ch.g_d.matrix * dir;
    double load = alpha_d * alpha_d * gd_dir.squared_norm();  // dirᴴ Q̃ dir
    double power = p.p_b_mw;
    if (load > 0.0) power = std::min(power, headroom / load);
    CVec w(dir.size());
    double s = std::sqrt(power);
    for (std::size_t i = 0; i < dir.size(); ++i) w[i] = s * dir[i];
    return w;
}

/// Largest uplink amplification factor feasible for every user; the
/// binding user's constraint holds with equality.
inline double alpha_uplink_update(const StaticChannels& ch, const CVec& phase,
                                  const SystemParams& p, const std::vector<double>& powers) {
    double best = 0.0;
    bool have = false;
    double ns = static_cast<double>(ch.n_side);
    for (int k = 0; k < ch.users(); ++k) {
        const auto idx = static_cast<std::size_t>(k);
        double load = detail::phase_times(phase, ch.h_u[idx]).squared_norm();
        double a = std::sqrt(p.p_f_mw / (powers[idx] * load + p.sigma_f_mw * ns));
        if (!have || a < best) {
            best = a;
            have = true;
        }
    }
    return best;
}

/// Downlink counterpart, bound by the strongest beamformed load.
inline double alpha_downlink_update(const StaticChannels& ch, const CVec& phase,
                                    const std::vector<CVec>& w, const SystemParams& p) {
    double best = 0.0;
    bool have = false;
    double ns = static_cast<double>(ch.n_side);
    for (int k = 0; k < ch.users(); ++k) {
        CVec gw = ch.g_d.matrix * w[static_cast<std::size_t>(k)];
        double load = detail::phase_times(phase, gw).squared_norm();
        double a = std::sqrt(p.p_f_mw / (load + p.sigma_f_mw * ns));
        if (!have || a < best) {
            best = a;
            have = true;
        }
    }
    return best;
}

/// Auxiliary multipliers of the two rate transforms.
struct AuxiliaryDuals {
    std::vector<double> mu_bar, mu_tilde;
    std::vector<cdouble> eta_bar, eta_tilde;
};

namespace detail {

struct LinkTerms {
    cdouble signal;      // uᴴ Gᴴ diag(v) h (uplink) or h ᴴdiag(v) G w (downlink)
    double noise;        // amplified-noise plus receiver-noise power
    double signal_pow;   // direction power factor: p_k (ul) or 1 (dl)
    double alpha;
};

inline LinkTerms uplink_terms(const StaticBeamState& st, const StaticChannels& ch,
                              const SystemParams& p, int k) {
    const auto idx = static_cast<std::size_t>(k);
    LinkTerms t;
    t.signal = cascade_scalar(ch.g_u, st.u[idx], st.phase, ch.h_u[idx]);
    CVec gu = ch.g_u.matrix * st.u[idx];
    double amp = phase_times(st.phase.conj(), gu).squared_norm();
    t.noise = st.alpha_u * st.alpha_u * p.sigma_f_mw * amp + p.sigma_0_mw;
    t.signal_pow = st.p[idx];
    t.alpha = st.alpha_u;
    return t;
}

inline LinkTerms downlink_terms(const StaticBeamState& st, const StaticChannels& ch,
                                const SystemParams& p, int k) {
    const auto idx = static_cast<std::size_t>(k);
    LinkTerms t;
    CVec gw = ch.g_d.matrix * st.w[idx];
    cdouble s{0.0, 0.0};
    for (std::size_t i = 0; i < gw.size(); ++i)
        s += std::conj(ch.h_d[idx][i]) * st.phase[i] * gw[i];
    t.signal = s;
    double amp = phase_times(st.phase, ch.h_d[idx].conj()).squared_norm();
    t.noise = st.alpha_d * st.alpha_d * p.sigma_f_mw * amp + p.sigma_0_mw;
    t.signal_pow = 1.0;
    t.alpha = st.alpha_d;
    return t;
}

}  // namespace detail

/// Multipliers of the log-detaching transform: each equals the current
/// per-user SINR of its direction.
inline AuxiliaryDuals duals_mu_update(const StaticBeamState& st, const StaticChannels& ch,
                                      const SystemParams& p) {
    AuxiliaryDuals d;
    for (int k = 0; k < ch.users(); ++k) {
        auto ul = detail::uplink_terms(st, ch, p, k);
        auto dl = detail::downlink_terms(st, ch, p, k);
        d.mu_bar.push_back(ul.signal_pow * ul.alpha * ul.alpha * std::norm(ul.signal) /
                           ul.noise);
        d.mu_tilde.push_back(dl.signal_pow * dl.alpha * dl.alpha * std::norm(dl.signal) /
                             dl.noise);
    }
    return d;
}

/// Multipliers of the ratio transform, given the log multipliers.
inline void duals_eta_update(const StaticBeamState& st, const StaticChannels& ch,
                             const SystemParams& p, AuxiliaryDuals& d) {
    d.eta_bar.clear();
    d.eta_tilde.clear();
    for (int k = 0; k < ch.users(); ++k) {
        const auto idx = static_cast<std::size_t>(k);
        auto ul = detail::uplink_terms(st, ch, p, k);
        cdouble num_ul = std::sqrt(1.0 + d.mu_bar[idx]) * std::sqrt(ul.signal_pow) *
                         ul.alpha * ul.signal;
        double den_ul = ul.signal_pow * ul.alpha * ul.alpha * std::norm(ul.signal) + ul.noise;
        d.eta_bar.push_back(num_ul / den_ul);

        auto dl = detail::downlink_terms(st, ch, p, k);
        cdouble num_dl = std::sqrt(1.0 + d.mu_tilde[idx]) * dl.alpha * dl.signal;
        double den_dl = dl.alpha * dl.alpha * std::norm(dl.signal) + dl.noise;
        d.eta_tilde.push_back(num_dl / den_dl);
    }
}

/// Surrogate with the logs detached: concave in each multiplier and equal
/// to the weighted rate objective at the optimal multipliers.
inline double lagrangian_surrogate(const StaticBeamState& st, const StaticChannels& ch,
                                   const SystemParams& p, const AuxiliaryDuals& d,
                                   LinkWeights wts) {
    const double k = static_cast<double>(ch.users());
    const double ln2 = std::log(2.0);
    double cu = wts.ul / (k * ln2);
    double cd = wts.dl / (k * ln2);
    double total = 0.0;
    for (int ki = 0; ki < ch.users(); ++ki) {
        const auto idx = static_cast<std::size_t>(ki);
        auto ul = detail::uplink_terms(st, ch, p, ki);
        double s_ul = ul.signal_pow * ul.alpha * ul.alpha * std::norm(ul.signal);
        total += cu * (std::log(1.0 + d.mu_bar[idx]) - d.mu_bar[idx] +
                       (1.0 + d.mu_bar[idx]) * s_ul / (s_ul + ul.noise));
        auto dl = detail::downlink_terms(st, ch, p, ki);
        double s_dl = dl.alpha * dl.alpha * std::norm(dl.signal);
        total += cd * (std::log(1.0 + d.mu_tilde[idx]) - d.mu_tilde[idx] +
                       (1.0 + d.mu_tilde[idx]) * s_dl / (s_dl + dl.noise));
    }
    return total;
}

/// Surrogate with the ratios expanded into concave quadratics; equals the
/// log-detached surrogate at the optimal ratio multipliers.
inline double quadratic_surrogate(const StaticBeamState& st, const StaticChannels& ch,
                                  const SystemParams& p, const AuxiliaryDuals& d,
                                  LinkWeights wts) {
    const double k = static_cast<double>(ch.users());
    const double ln2 = std::log(2.0);
    double cu = wts.ul / (k * ln2);
    double cd = wts.dl / (k * ln2);
    double total = 0.0;
    for (int ki = 0; ki < ch.users(); ++ki) {
        const auto idx = static_cast<std::size_t>(ki);
        auto ul = detail::uplink_terms(st, ch, p, ki);
        double s_ul = ul.signal_pow * ul.alpha * ul.alpha * std::norm(ul.signal);
        total += cu * (std::log(1.0 + d.mu_bar[idx]) - d.mu_bar[idx] +
                       2.0 * std::sqrt(1.0 + d.mu_bar[idx]) *
                           std::real(std::conj(d.eta_bar[idx]) * std::sqrt(ul.signal_pow) *
                                     ul.alpha * ul.signal) -
                       std::norm(d.eta_bar[idx]) * (s_ul + ul.noise));
        auto dl = detail::downlink_terms(st, ch, p, ki);
        double s_dl = dl.alpha * dl.alpha * std::norm(dl.signal);
        total += cd * (std::log(1.0 + d.mu_tilde[idx]) - d.mu_tilde[idx] +
                       2.0 * std::sqrt(1.0 + d.mu_tilde[idx]) *
                           std::real(std::conj(d.eta_tilde[idx]) * dl.alpha * dl.signal) -
                       std::norm(d.eta_tilde[idx]) * (s_dl + dl.noise));
    }
    return total;
}

struct AssembledForm {
    QuadraticForm qf;
    double constant = 0.0;  // phase-independent part of the quadratic surrogate
};

/// Rewrites the quadratic surrogate as -vᴴ A v + 2 Re{vᴴ b} + constant in
/// the shared phase vector v.
inline AssembledForm assemble_quadratic_form(const StaticBeamState& st,
                                             const StaticChannels& ch, const SystemParams& p,
                                             const AuxiliaryDuals& d, LinkWeights wts) {
    const std::size_t n = static_cast<std::size_t>(ch.n_side);
    const double k = static_cast<double>(ch.users());
    const double ln2 = std::log(2.0);
    double cu = wts.ul / (k * ln2);
    double cd = wts.dl / (k * ln2);

    AssembledForm out;
    out.qf.a = CMat(n, n);
    out.qf.b = CVec(n);

    for (int ki = 0; ki < ch.users(); ++ki) {
        const auto idx = static_cast<std::size_t>(ki);
        // Uplink: signal is (G u)ᴴ diag(v) h_u = sum_n conj(gu_n) v_n h_n.
        CVec gu = ch.g_u.matrix * st.u[idx];
        CVec a_ul(n);
        std::vector<double> gu_abs2(n);
        for (std::size_t i = 0; i < n; ++i) {
            a_ul[i] = gu[i] * std::conj(ch.h_u[idx][i]);
            gu_abs2[i] = std::norm(gu[i]);
        }
        double au2 = st.alpha_u * st.alpha_u;
        double w_ul = cu * std::norm(d.eta_bar[idx]) * au2;
        out.qf.a.add_scaled_outer(w_ul * st.p[idx], a_ul);
        out.qf.a.add_scaled_diag(w_ul * p.sigma_f_mw, gu_abs2);
        cdouble b_ul = cu * std::sqrt(1.0 + d.mu_bar[idx]) * std::sqrt(st.p[idx]) *
                       st.alpha_u * d.eta_bar[idx];
        for (std::size_t i = 0; i < n; ++i) out.qf.b[i] += b_ul * a_ul[i];

        // Downlink: signal is h_dᴴ diag(v) (G w) = sum_n conj(h_n) v_n gw_n.
        CVec gw = ch.g_d.matrix * st.w[idx];
        CVec a_dl(n);
        std::vector<double> hd_abs2(n);
        for (std::size_t i = 0; i < n; ++i) {
            a_dl[i] = ch.h_d[idx][i] * std::conj(gw[i]);
            hd_abs2[i] = std::norm(ch.h_d[idx][i]);
        }
        double ad2 = st.alpha_d * st.alpha_d;
        double w_dl = cd * std::norm(d.eta_tilde[idx]) * ad2;
        out.qf.a.add_scaled_outer(w_dl, a_dl);
        out.qf.a.add_scaled_diag(w_dl * p.sigma_f_mw, hd_abs2);
        cdouble b_dl = cd * std::sqrt(1.0 + d.mu_tilde[idx]) * st.alpha_d * d.eta_tilde[idx];
        for (std::size_t i = 0; i < n; ++i) out.qf.b[i] += b_dl * a_dl[i];

        out.constant +=
            cu * (std::log(1.0 + d.mu_bar[idx]) - d.mu_bar[idx] -
                  std::norm(d.eta_bar[idx]) * p.sigma_0_mw) +
            cd * (std::log(1.0 + d.mu_tilde[idx]) - d.mu_tilde[idx] -
                  std::norm(d.eta_tilde[idx]) * p.sigma_0_mw);
    }
    return out;
}

/// Phase vector aligning the uplink cascade of user k element by element.
inline CVec ul_aligned_phase(const StaticChannels& ch, int k) {
    const auto idx = static_cast<std::size_t>(k);
    CVec v(static_cast<std::size_t>(ch.n_side));
    for (std::size_t i = 0; i < v.size(); ++i) {
        double phi = std::arg(ch.g_u.rx_steer[i]) - std::arg(ch.h_u[idx][i]);
        v[i] = cdouble{std::cos(phi), std::sin(phi)};
    }
    return v;
}

/// Phase vector aligning the downlink cascade of user k element by element.
inline CVec dl_aligned_phase(const StaticChannels& ch, int k) {
    const auto idx = static_cast<std::size_t>(k);
    CVec v(static_cast<std::size_t>(ch.n_side));
    for (std::size_t i = 0; i < v.size(); ++i) {
        double phi = std::arg(ch.h_d[idx][i]) - std::arg(ch.g_d.rx_steer[i]);
        v[i] = cdouble{std::cos(phi), std::sin(phi)};
    }
    return v;
}

struct InnerTrace {
    std::vector<double> objective;  // weighted objective after each iteration
    std::vector<double> ldt_gap;    // |log-detached surrogate - objective|
    std::vector<double> qt_gap;     // |quadratic surrogate - log-detached surrogate|
    int iterations = 0;
};

/// Inner phase loop: refresh both multiplier sets, assemble the phase
/// quadratic, solve it, and accept the candidate only if the true
/// weighted objective does not decrease. The accepted trace is monotone
/// by construction.
inline InnerTrace phase_inner_loop(StaticBeamState& st, const StaticChannels& ch,
                                   const SystemParams& p, QcqpMethod method, double tol,
                                   RngStream& rng, LinkWeights wts, int max_iter = 30,
                                   int num_randomizations = 200) {
    InnerTrace trace;
    double current = weighted_rate(rates_static(st, ch, p), wts);
    for (int it = 0; it < max_iter; ++it) {
        AuxiliaryDuals duals = duals_mu_update(st, ch, p);
        double f1 = lagrangian_surrogate(st, ch, p, duals, wts);
        trace.ldt_gap.push_back(std::abs(f1 - current));
        duals_eta_update(st, ch, p, duals);
        double f2 = quadratic_surrogate(st, ch, p, duals, wts);
        trace.qt_gap.push_back(std::abs(f2 - f1));

        AssembledForm form = assemble_quadratic_form(st, ch, p, duals, wts);
        CVec candidate = st.phase;
        if (method == QcqpMethod::CoordinateAscent) {
            try {
                candidate = solve_coordinate_ascent(form.qf, st.phase, 1e-12, 400).v;
            } catch (const ConvergenceError&) {
                // Safeguard below keeps the current phase in that case.
            }
        } else {
            try {
                candidate = solve_sdr(form.qf, default_sdr_rank(ch.n_side),
                                      num_randomizations, rng)
                                .v;
            } catch (const ConvergenceError&) {
                // Factorization stalled; fall back to the ascent path.
                try {
                    candidate = solve_coordinate_ascent(form.qf, st.phase, 1e-12, 400).v;
                } catch (const ConvergenceError&) {
                }
            }
        }

        StaticBeamState trial = st;
        trial.phase = candidate;
        double cand_value = weighted_rate(rates_static(trial, ch, p), wts);
        if (cand_value > current) st.phase = candidate;
        double improved = std::max(cand_value, current) - current;
        current = std::max(cand_value, current);
        trace.objective.push_back(current);
        trace.iterations = it + 1;
        if (improved < tol) break;
    }
    return trace;
}

struct AoOptions {
    double tol = 1e-4;        // outer stop threshold, bps/Hz
    int max_outer = 50;
    double inner_tol = 1e-5;  // inner stop threshold, bps/Hz
    int max_inner = 30;
    QcqpMethod method = QcqpMethod::Sdr;
    int num_randomizations = 200;
    std::uint64_t seed = 1;
    RateObjective objective = RateObjective::WeightedSum;
    double user_power_mw = 0.0;  // 0 selects the full user budget
};

struct AoResult {
    StaticBeamState state;
    StaticRates rates;
    double wsr = 0.0;
    std::vector<double> outer_trace;       // weighted objective per outer iteration
    std::vector<double> inner_objectives;  // concatenated inner traces
    std::vector<double> inner_ldt_gaps;
    std::vector<double> inner_qt_gaps;
    int outer_iterations = 0;
    bool converged = false;
};

namespace detail {

/// Joint fixed point of the transmit beams and the downlink amplification
/// factor at a fixed phase; both block updates are exact, so the downlink
/// sum rate is monotone over the iteration.
inline void converge_transmit_and_alpha_d(StaticBeamState& st, const StaticChannels& ch,
                                          const SystemParams& p, int max_iter = 60,
                                          double rel_tol = 1e-12) {
    for (int it = 0; it < max_iter; ++it) {
        double before = st.alpha_d;
        for (int k = 0; k < ch.users(); ++k)
            st.w[static_cast<std::size_t>(k)] = transmit_update(ch, st.phase, st.alpha_d, p, k);
        st.alpha_d = alpha_downlink_update(ch, st.phase, st.w, p);
        if (std::abs(st.alpha_d - before) <= rel_tol * std::max(1.0, std::abs(before))) break;
    }
}

}  // namespace detail

/// Deterministic warm start: align the priority direction of the first
/// user, take matched transmit beams at full power, then saturate both
/// amplification budgets.
inline StaticBeamState initial_state(const StaticChannels& ch, const SystemParams& p,
                                     const AoOptions& opt) {
    StaticBeamState st;
    LinkWeights wts = objective_weights(opt.objective, p.epsilon);
    bool dl_priority = wts.dl >= wts.ul;
    st.phase = dl_priority ? dl_aligned_phase(ch, 0) : ul_aligned_phase(ch, 0);
    double p_user = opt.user_power_mw > 0.0 ? opt.user_power_mw : p.p_u_mw;
    if (p_user > p.p_u_mw + 1e-12 * p.p_u_mw)
        throw InvalidInputError("initial_state: user power above budget");
    st.p.assign(static_cast<std::size_t>(ch.users()), p_user);

    // Matched transmit beams at full BS power.
    for (int k = 0; k < ch.users(); ++k) {
        const auto idx = static_cast<std::size_t>(k);
        CVec ph = st.phase.conj().hadamard(ch.h_d[idx]);
        CVec q = ch.g_d.matrix.adjoint() * ph;
        double nq = q.norm();
        if (nq <= 0.0) throw DegenerateChannelError("initial_state: zero downlink cascade");
        CVec w(q.size());
        double s = std::sqrt(p.p_b_mw);
        for (std::size_t i = 0; i < q.size(); ++i) w[i] = s * q[i] / nq;
        st.w.push_back(std::move(w));
    }
    st.alpha_d = alpha_downlink_update(ch, st.phase, st.w, p);
    st.alpha_u = alpha_uplink_update(ch, st.phase, p, st.p);
    st.u = mrc_receive_update(ch, st.phase);
    return st;
}

/// Two-layer alternating optimization over receive beams, transmit beams,
/// both amplification factors, and the shared phase. Every block update
/// is the exact optimum of its subproblem and phase candidates pass a
/// non-decrease safeguard, so the outer trace is monotone. Non-convergence
/// within the iteration budget returns the best state with a flag rather
/// than throwing.
inline AoResult run_alternating_optimization(const SystemParams& p, const StaticChannels& ch,
                                             const AoOptions& opt = {}) {
    p.validate();
    LinkWeights wts = objective_weights(opt.objective, p.epsilon);
    RngStream rng(opt.seed, 0x5d0f);

    AoResult res;
    res.state = initial_state(ch, p, opt);
    double current = weighted_rate(rates_static(res.state, ch, p), wts);
    res.outer_trace.push_back(current);

    for (int it = 0; it < opt.max_outer; ++it) {
        StaticBeamState snapshot = res.state;
        if (opt.objective != RateObjective::DownlinkOnly)
            res.state.u = mrc_receive_update(ch, res.state.phase);
        if (opt.objective != RateObjective::UplinkOnly) {
            for (int k = 0; k < ch.users(); ++k)
                res.state.w[static_cast<std::size_t>(k)] =
                    transmit_update(ch, res.state.phase, res.state.alpha_d, p, k);
        }
        if (opt.objective != RateObjective::DownlinkOnly)
            res.state.alpha_u = alpha_uplink_update(ch, res.state.phase, p, res.state.p);
        if (opt.objective != RateObjective::UplinkOnly)
            res.state.alpha_d = alpha_downlink_update(ch, res.state.phase, res.state.w, p);

        InnerTrace inner = phase_inner_loop(res.state, ch, p, opt.method, opt.inner_tol, rng,
                                            wts, opt.max_inner, opt.num_randomizations);
        res.inner_objectives.insert(res.inner_objectives.end(), inner.objective.begin(),
                                    inner.objective.end());
        res.inner_ldt_gaps.insert(res.inner_ldt_gaps.end(), inner.ldt_gap.begin(),
                                  inner.ldt_gap.end());
        res.inner_qt_gaps.insert(res.inner_qt_gaps.end(), inner.qt_gap.begin(),
                                 inner.qt_gap.end());

        double next = weighted_rate(rates_static(res.state, ch, p), wts);
        res.outer_iterations = it + 1;
        if (next < current) {
            // Numerical dip; keep the previous iterate and stop.
            res.state = std::move(snapshot);
            res.outer_trace.push_back(current);
            res.converged = true;
            break;
        }
        res.outer_trace.push_back(next);
        double improvement = next - current;
        current = next;
        if (improvement < opt.tol) {
            res.converged = true;
            break;
        }
    }

    res.rates = rates_static(res.state, ch, p);
    res.wsr = res.rates.wsr;
    return res;
}

/// Largest relative violation over the beam power, combiner norm,
/// unit-modulus, and both amplification constraints.
inline double max_constraint_violation(const StaticBeamState& st, const StaticChannels& ch,
                                       const SystemParams& p) {
    double v = 0.0;
    double ns = static_cast<double>(ch.n_side);
    for (int k = 0; k < ch.users(); ++k) {
        const auto idx = static_cast<std::size_t>(k);
        v = std::max(v, (st.w[idx].squared_norm() - p.p_b_mw) / p.p_b_mw);
        v = std::max(v, std::abs(st.u[idx].squared_norm() - 1.0));
        double ul_load = st.alpha_u * st.alpha_u *
                         (st.p[idx] * detail::phase_times(st.phase, ch.h_u[idx]).squared_norm() +
                          p.sigma_f_mw * ns);
        v = std::max(v, (ul_load - p.p_f_mw) / p.p_f_mw);
        CVec gw = ch.g_d.matrix * st.w[idx];
        double dl_load = st.alpha_d * st.alpha_d *
                         (detail::phase_times(st.phase, gw).squared_norm() + p.sigma_f_mw * ns);
        v = std::max(v, (dl_load - p.p_f_mw) / p.p_f_mw);
    }
    for (std::size_t i = 0; i < st.phase.size(); ++i)
        v = std::max(v, std::abs(std::abs(st.phase[i]) - 1.0));
    return v;
}

/// Closed-form uplink blocks at a fixed phase: matched combiners and the
/// saturated uplink amplification factor.
inline void apply_uplink_closed_forms(StaticBeamState& st, const StaticChannels& ch,
                                      const SystemParams& p) {
    st.u = mrc_receive_update(ch, st.phase);
    st.alpha_u = alpha_uplink_update(ch, st.phase, p, st.p);
}

/// Closed-form downlink blocks at a fixed phase.
inline void apply_downlink_closed_forms(StaticBeamState& st, const StaticChannels& ch,
                                        const SystemParams& p) {
    detail::converge_transmit_and_alpha_d(st, ch, p);
}

}  // namespace airs

#include "catch2/catch_amalgamated.hpp"

#include <numbers>

#include "airs/experiments.hpp"
#include "airs/static_ao.hpp"
#include "oracles.hpp"

using namespace airs;

namespace {

SystemParams small_params(int n_total, int k_users, int m) {
    SystemParams p = SystemParams::defaults();
    p.n_total = n_total;
    p.k_users = k_users;
    p.m = m;
    return p;
}

StaticChannels channels_for(const SystemParams& p, std::uint64_t seed) {
    RngStream rng(seed, 0);
    std::vector<Vec3> users =
        p.k_users == 1 ? std::vector<Vec3>{p.geometry.user_center} : place_users(rng, p, 5.0);
    return build_static_channels(p, users);
}

StaticBeamState baseline_state(const SystemParams& p, const StaticChannels& ch) {
    AoOptions opt;
    return initial_state(ch, p, opt);
}

}  // namespace

TEST_CASE("vanishing uplink amplification kills the uplink rates") {
    SystemParams p = small_params(16, 2, 4);
    StaticChannels ch = channels_for(p, 11);
    StaticBeamState st = baseline_state(p, ch);
    st.alpha_u = 1e-12;
    StaticRates r = rates_static(st, ch, p);
    for (double v : r.ul) CHECK(v < 1e-9);
}

TEST_CASE("per-link aligned phase reproduces the closed forms for one user") {
    SystemParams p = small_params(64, 1, 4);
    StaticChannels ch = channels_for(p, 1);
    int ns = ch.n_side;

    StaticBeamState st = baseline_state(p, ch);
    st.phase = ul_aligned_phase(ch, 0);
    apply_uplink_closed_forms(st, ch, p);
    StaticRates r = rates_static(st, ch, p);
    double want_ul = log2_1p(snr_uplink(p.p_u_mw, p.p_f_mw, p.m, ns, p.h1_sq(), p.h2_sq(),
                                        p.sigma_f_mw, p.sigma_0_mw));
    CHECK(r.ul[0] == Catch::Approx(want_ul).epsilon(1e-9));

    st.phase = dl_aligned_phase(ch, 0);
    apply_downlink_closed_forms(st, ch, p);
    StaticRates r2 = rates_static(st, ch, p);
    double want_dl = log2_1p(snr_downlink(p.p_b_mw, p.p_f_mw, p.m, ns, p.h2_sq(), p.h1_sq(),
                                          p.sigma_f_mw, p.sigma_0_mw));
    CHECK(r2.dl[0] == Catch::Approx(want_dl).epsilon(1e-9));
}

TEST_CASE("positive finite rates at a random state") {
    SystemParams p = small_params(32, 3, 4);
    StaticChannels ch = channels_for(p, 5);
    StaticBeamState st = baseline_state(p, ch);
    RngStream rng(77, 0);
    st.phase = oracles::random_phase_vector(rng, static_cast<std::size_t>(ch.n_side));
    st.alpha_d = alpha_downlink_update(ch, st.phase, st.w, p);
    StaticRates r = rates_static(st, ch, p);
    for (int k = 0; k < 3; ++k) {
        CHECK(r.ul[static_cast<std::size_t>(k)] >= 0.0);
        CHECK(std::isfinite(r.ul[static_cast<std::size_t>(k)]));
        CHECK(r.dl[static_cast<std::size_t>(k)] >= 0.0);
        CHECK(std::isfinite(r.dl[static_cast<std::size_t>(k)]));
    }
}

TEST_CASE("single-antenna receive beam is the unit scalar") {
    SystemParams p = small_params(16, 2, 1);
    StaticChannels ch = channels_for(p, 3);
    StaticBeamState st = baseline_state(p, ch);
    auto u = mrc_receive_update(ch, st.phase);
    for (const auto& uk : u) {
        REQUIRE(uk.size() == 1);
        CHECK(std::abs(std::abs(uk[0]) - 1.0) < 1e-12);
    }
}

TEST_CASE("receive beams are unit norm") {
    SystemParams p = small_params(32, 4, 6);
    StaticChannels ch = channels_for(p, 7);
    StaticBeamState st = baseline_state(p, ch);
    auto u = mrc_receive_update(ch, st.phase);
    for (const auto& uk : u) CHECK(uk.norm() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("matched combiner beats random probes") {
    SystemParams p = small_params(16, 1, 4);
    StaticChannels ch = channels_for(p, 9);
    StaticBeamState st = baseline_state(p, ch);
    RngStream rng(123, 0);
    st.phase = oracles::random_phase_vector(rng, static_cast<std::size_t>(ch.n_side));
    st.u = mrc_receive_update(ch, st.phase);
    st.alpha_u = alpha_uplink_update(ch, st.phase, p, st.p);
    double best = rates_static(st, ch, p).ul[0];
    for (int t = 0; t < 1000; ++t) {
        StaticBeamState probe = st;
        probe.u[0] = oracles::random_unit_vector(rng, static_cast<std::size_t>(p.m));
        CHECK(best >= rates_static(probe, ch, p).ul[0] - 1e-12);
    }
}

TEST_CASE("unconstrained amplifier limit gives full-power matched transmit") {
    SystemParams p = small_params(16, 1, 4);
    StaticChannels ch = channels_for(p, 13);
    StaticBeamState st = baseline_state(p, ch);
    CVec w = transmit_update(ch, st.phase, 1e-9, p, 0);
    CHECK(w.squared_norm() == Catch::Approx(p.p_b_mw).epsilon(1e-12));
}

TEST_CASE("binding amplification constraint is met with equality") {
    SystemParams p = small_params(16, 1, 4);
    StaticChannels ch = channels_for(p, 13);
    StaticBeamState st = baseline_state(p, ch);
    // Push the amplification factor high enough that the surface budget
    // binds before the BS power does.
    double ns = static_cast<double>(ch.n_side);
    double alpha_cap = std::sqrt(p.p_f_mw / (p.sigma_f_mw * ns));
    double alpha = 0.999 * alpha_cap;
    CVec w = transmit_update(ch, st.phase, alpha, p, 0);
    double headroom = p.p_f_mw - alpha * alpha * p.sigma_f_mw * ns;
    CVec gw = ch.g_d.matrix * w;
    double load = alpha * alpha * gw.squared_norm();
    CHECK(load == Catch::Approx(headroom).epsilon(1e-9));
    CHECK(w.squared_norm() < p.p_b_mw);
}

TEST_CASE("transmit beam matches the dual-grid oracle") {
    SystemParams p = small_params(32, 2, 4);
    StaticChannels ch = channels_for(p, 17);
    StaticBeamState st = baseline_state(p, ch);
    for (int k = 0; k < 2; ++k) {
        double alpha = st.alpha_d;
        CVec w = transmit_update(ch, st.phase, alpha, p, k);
        CVec ph = st.phase.conj().hadamard(ch.h_d[static_cast<std::size_t>(k)]);
        CVec q = ch.g_d.matrix.adjoint() * ph;
        double obj = std::norm(hdot(q, w));

        // Oracle: regularized directions w(rho) = (I + rho Qt)^{-1} q,
        // scaled onto the feasible boundary, scanned over a log grid.
        double ns = static_cast<double>(ch.n_side);
        double headroom = p.p_f_mw - alpha * alpha * p.sigma_f_mw * ns;
        double best = 0.0;
        for (int g = 0; g <= 10000; ++g) {
            double rho = std::pow(10.0, -8.0 + 16.0 * g / 10000.0);
            CMat sys = CMat::identity(static_cast<std::size_t>(p.m));
            CMat gd_h = ch.g_d.matrix.adjoint() * ch.g_d.matrix;
            sys += cdouble{rho * alpha * alpha, 0.0} * gd_h;
            CVec dir = oracles::solve_linear(sys, q);
            double npow = dir.squared_norm();
            if (npow <= 0.0) continue;
            CVec gd_dir = ch.g_d.matrix * dir;
            double load = alpha * alpha * gd_dir.squared_norm();
            double scale2 = std::min(p.p_b_mw / npow, load > 0.0 ? headroom / load : 1e300);
            best = std::max(best, scale2 * std::norm(hdot(q, dir)));
        }
        CHECK(obj >= best * (1.0 - 1e-6));
    }
}

TEST_CASE("uplink amplification reduces to the one-user closed form") {
    SystemParams p = small_params(40, 1, 4);
    StaticChannels ch = channels_for(p, 19);
    StaticBeamState st = baseline_state(p, ch);
    double ns = static_cast<double>(ch.n_side);
    double a = alpha_uplink_update(ch, st.phase, p, st.p);
    double want = std::sqrt(p.p_f_mw / (ns * (p.p_u_mw * p.h2_sq() + p.sigma_f_mw)));
    CHECK(a == Catch::Approx(want).epsilon(1e-12));
}

TEST_CASE("identical users make every amplification constraint tight") {
    SystemParams p = small_params(24, 3, 4);
    std::vector<Vec3> users(3, p.geometry.user_center);
    StaticChannels ch = build_static_channels(p, users);
    StaticBeamState st = baseline_state(p, ch);
    double ns = static_cast<double>(ch.n_side);
    double a = alpha_uplink_update(ch, st.phase, p, st.p);
    for (int k = 0; k < 3; ++k) {
        double load =
            a * a *
            (st.p[static_cast<std::size_t>(k)] *
                 st.phase.hadamard(ch.h_u[static_cast<std::size_t>(k)]).squared_norm() +
             p.sigma_f_mw * ns);
        CHECK(load == Catch::Approx(p.p_f_mw).epsilon(1e-12));
    }
}

TEST_CASE("amplification updates agree with a golden-section scan") {
    SystemParams p = small_params(32, 3, 4);
    StaticChannels ch = channels_for(p, 23);
    StaticBeamState st = baseline_state(p, ch);
    RngStream rng(31, 0);
    st.phase = oracles::random_phase_vector(rng, static_cast<std::size_t>(ch.n_side));
    st.u = mrc_receive_update(ch, st.phase);

    auto ul_sum_at = [&](double alpha) {
        StaticBeamState s = st;
        s.alpha_u = alpha;
        return rates_static(s, ch, p).ul_sum;
    };
    double a_max = alpha_uplink_update(ch, st.phase, p, st.p);
    double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 1e-9 * a_max, hi = a_max;
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    for (int it = 0; it < 200; ++it) {
        if (ul_sum_at(c) < ul_sum_at(d)) lo = c;
        else hi = d;
        c = hi - gr * (hi - lo);
        d = lo + gr * (hi - lo);
    }
    double golden = ul_sum_at(0.5 * (lo + hi));
    CHECK(ul_sum_at(a_max) >= golden - 1e-6 * std::max(1.0, golden));

    auto dl_sum_at = [&](double alpha) {
        StaticBeamState s = st;
        s.alpha_d = alpha;
        return rates_static(s, ch, p).dl_sum;
    };
    double ad_max = alpha_downlink_update(ch, st.phase, st.w, p);
    lo = 1e-9 * ad_max;
    hi = ad_max;
    c = hi - gr * (hi - lo);
    d = lo + gr * (hi - lo);
    for (int it = 0; it < 200; ++it) {
        if (dl_sum_at(c) < dl_sum_at(d)) lo = c;
        else hi = d;
        c = hi - gr * (hi - lo);
        d = lo + gr * (hi - lo);
    }
    double golden_d = dl_sum_at(0.5 * (lo + hi));
    CHECK(dl_sum_at(ad_max) >= golden_d - 1e-6 * std::max(1.0, golden_d));
}

TEST_CASE("zero beams give zero transform multipliers") {
    SystemParams p = small_params(16, 2, 4);
    StaticChannels ch = channels_for(p, 29);
    StaticBeamState st = baseline_state(p, ch);
    st.alpha_u = 0.0;
    for (auto& wk : st.w)
        for (std::size_t i = 0; i < wk.size(); ++i) wk[i] = 0.0;
    AuxiliaryDuals d = duals_mu_update(st, ch, p);
    for (double v : d.mu_bar) CHECK(v == 0.0);
    for (double v : d.mu_tilde) CHECK(v == 0.0);
    duals_eta_update(st, ch, p, d);
    for (auto e : d.eta_bar) CHECK(std::abs(e) == 0.0);
    for (auto e : d.eta_tilde) CHECK(std::abs(e) == 0.0);
}

TEST_CASE("transform surrogates are tight at their optimal multipliers") {
    SystemParams p = small_params(32, 3, 4);
    StaticChannels ch = channels_for(p, 31);
    StaticBeamState st = baseline_state(p, ch);
    LinkWeights wts = objective_weights(RateObjective::WeightedSum, p.epsilon);
    StaticRates r = rates_static(st, ch, p);
    double objective = weighted_rate(r, wts);

    AuxiliaryDuals d = duals_mu_update(st, ch, p);
    double f1 = lagrangian_surrogate(st, ch, p, d, wts);
    CHECK(f1 == Catch::Approx(objective).margin(1e-9 * (1.0 + std::abs(objective))));

    duals_eta_update(st, ch, p, d);
    double f2 = quadratic_surrogate(st, ch, p, d, wts);
    CHECK(f2 == Catch::Approx(f1).margin(1e-9 * (1.0 + std::abs(f1))));

    // Concavity probes: +/-10% perturbations strictly decrease.
    for (std::size_t k = 0; k < d.mu_bar.size(); ++k) {
        for (double fac : {0.9, 1.1}) {
            AuxiliaryDuals pert = d;
            pert.mu_bar[k] = d.mu_bar[k] * fac;
            CHECK(lagrangian_surrogate(st, ch, p, pert, wts) < f1);
            AuxiliaryDuals pert2 = d;
            pert2.mu_tilde[k] = d.mu_tilde[k] * fac;
            CHECK(lagrangian_surrogate(st, ch, p, pert2, wts) < f1);
            AuxiliaryDuals pert3 = d;
            pert3.eta_bar[k] = d.eta_bar[k] * fac;
            CHECK(quadratic_surrogate(st, ch, p, pert3, wts) < f2);
            AuxiliaryDuals pert4 = d;
            pert4.eta_tilde[k] = d.eta_tilde[k] * fac;
            CHECK(quadratic_surrogate(st, ch, p, pert4, wts) < f2);
        }
    }
}

TEST_CASE("zero ratio multipliers assemble the zero form") {
    SystemParams p = small_params(16, 2, 4);
    StaticChannels ch = channels_for(p, 37);
    StaticBeamState st = baseline_state(p, ch);
    AuxiliaryDuals d = duals_mu_update(st, ch, p);
    d.eta_bar.assign(2, cdouble{0.0, 0.0});
    d.eta_tilde.assign(2, cdouble{0.0, 0.0});
    LinkWeights wts{0.6, 0.4};
    AssembledForm f = assemble_quadratic_form(st, ch, p, d, wts);
    CHECK(f.qf.a.frobenius_norm() == 0.0);
    CHECK(f.qf.b.norm() == 0.0);
}

TEST_CASE("scalar assembly matches the hand computation") {
    SystemParams p = small_params(2, 1, 1);
    StaticChannels ch = channels_for(p, 41);
    REQUIRE(ch.n_side == 1);
    StaticBeamState st = baseline_state(p, ch);
    AuxiliaryDuals d = duals_mu_update(st, ch, p);
    duals_eta_update(st, ch, p, d);
    LinkWeights wts{1.0 - p.epsilon, p.epsilon};
    AssembledForm f = assemble_quadratic_form(st, ch, p, d, wts);

    double ln2 = std::log(2.0);
    cdouble gu = (ch.g_u.matrix * st.u[0])[0];
    cdouble hu = ch.h_u[0][0];
    cdouble gw = (ch.g_d.matrix * st.w[0])[0];
    cdouble hd = ch.h_d[0][0];
    double cu = wts.ul / ln2, cd = wts.dl / ln2;
    double a_want =
        cu * std::norm(d.eta_bar[0]) * st.alpha_u * st.alpha_u *
            (st.p[0] * std::norm(gu * std::conj(hu)) + p.sigma_f_mw * std::norm(gu)) +
        cd * std::norm(d.eta_tilde[0]) * st.alpha_d * st.alpha_d *
            (std::norm(hd * std::conj(gw)) + p.sigma_f_mw * std::norm(hd));
    CHECK(std::real(f.qf.a(0, 0)) == Catch::Approx(a_want).epsilon(1e-12));
    cdouble b_want = cu * std::sqrt(1.0 + d.mu_bar[0]) * std::sqrt(st.p[0]) * st.alpha_u *
                         d.eta_bar[0] * gu * std::conj(hu) +
                     cd * std::sqrt(1.0 + d.mu_tilde[0]) * st.alpha_d * d.eta_tilde[0] * hd *
                         std::conj(gw);
    CHECK(std::abs(f.qf.b[0] - b_want) < 1e-12 * (1.0 + std::abs(b_want)));
}

TEST_CASE("assembled form reproduces the quadratic surrogate identity") {
    SystemParams p = small_params(24, 2, 4);
    StaticChannels ch = channels_for(p, 43);
    StaticBeamState st = baseline_state(p, ch);
    RngStream rng(47, 0);
    AuxiliaryDuals d = duals_mu_update(st, ch, p);
    duals_eta_update(st, ch, p, d);
    LinkWeights wts{1.0 - p.epsilon, p.epsilon};
    AssembledForm f = assemble_quadratic_form(st, ch, p, d, wts);
    CHECK(f.qf.a.is_hermitian(1e-12));
    for (int t = 0; t < 100; ++t) {
        CVec v = oracles::random_phase_vector(rng, static_cast<std::size_t>(ch.n_side));
        StaticBeamState probe = st;
        probe.phase = v;
        double direct = quadratic_surrogate(probe, ch, p, d, wts);
        double via_form = quadratic_objective(f.qf, v) + f.constant;
        CHECK(via_form == Catch::Approx(direct).margin(1e-9 * (1.0 + std::abs(direct))));
    }
}

TEST_CASE("inner loop exits immediately from a converged point") {
    SystemParams p = small_params(16, 2, 4);
    StaticChannels ch = channels_for(p, 53);
    StaticBeamState st = baseline_state(p, ch);
    LinkWeights wts{1.0 - p.epsilon, p.epsilon};
    RngStream rng(1, 0);
    phase_inner_loop(st, ch, p, QcqpMethod::CoordinateAscent, 1e-10, rng, wts, 60);
    InnerTrace second =
        phase_inner_loop(st, ch, p, QcqpMethod::CoordinateAscent, 1e-10, rng, wts, 60);
    CHECK(second.iterations == 1);
}

TEST_CASE("inner trace is monotone under both solvers") {
    for (QcqpMethod method : {QcqpMethod::CoordinateAscent, QcqpMethod::Sdr}) {
        SystemParams p = small_params(24, 2, 4);
        StaticChannels ch = channels_for(p, 59);
        StaticBeamState st = baseline_state(p, ch);
        LinkWeights wts{1.0 - p.epsilon, p.epsilon};
        RngStream rng(2, 0);
        InnerTrace tr = phase_inner_loop(st, ch, p, method, 1e-8, rng, wts, 40);
        for (std::size_t i = 1; i < tr.objective.size(); ++i)
            CHECK(tr.objective[i] >= tr.objective[i - 1]);
    }
}

TEST_CASE("one-user convergence reaches the better aligned candidate") {
    for (double eps : {0.3, 0.7}) {
        SystemParams p = small_params(16, 1, 2);
        p.epsilon = eps;
        StaticChannels ch = channels_for(p, 61);

        auto aligned_value = [&](const CVec& phase) {
            StaticBeamState st = baseline_state(p, ch);
            st.phase = phase;
            apply_uplink_closed_forms(st, ch, p);
            apply_downlink_closed_forms(st, ch, p);
            return rates_static(st, ch, p).wsr;
        };
        double best_aligned = std::max(aligned_value(ul_aligned_phase(ch, 0)),
                                       aligned_value(dl_aligned_phase(ch, 0)));

        AoOptions opt;
        opt.seed = 3;
        AoResult res = run_alternating_optimization(p, ch, opt);
        CHECK(res.wsr >= 0.99 * best_aligned);
    }
}

TEST_CASE("alternating optimization is deterministic per seed") {
    SystemParams p = small_params(16, 2, 4);
    StaticChannels ch = channels_for(p, 67);
    AoOptions opt;
    opt.seed = 99;
    AoResult a = run_alternating_optimization(p, ch, opt);
    AoResult b = run_alternating_optimization(p, ch, opt);
    REQUIRE(a.outer_trace.size() == b.outer_trace.size());
    for (std::size_t i = 0; i < a.outer_trace.size(); ++i)
        CHECK(a.outer_trace[i] == b.outer_trace[i]);
    for (std::size_t i = 0; i < a.state.phase.size(); ++i)
        CHECK(a.state.phase[i] == b.state.phase[i]);
    CHECK(a.wsr == b.wsr);
}

TEST_CASE("outer trace is monotone and the final state feasible") {
    for (QcqpMethod method : {QcqpMethod::CoordinateAscent, QcqpMethod::Sdr}) {
        SystemParams p = small_params(32, 4, 4);
        StaticChannels ch = channels_for(p, 71);
        AoOptions opt;
        opt.method = method;
        opt.seed = 5;
        AoResult res = run_alternating_optimization(p, ch, opt);
        for (std::size_t i = 1; i < res.outer_trace.size(); ++i)
            CHECK(res.outer_trace[i] >= res.outer_trace[i - 1]);
        CHECK(max_constraint_violation(res.state, ch, p) <= 1e-9);
        CHECK(res.converged);
    }
}

TEST_CASE("small-instance result is near the exhaustive phase grid") {
    SystemParams p = small_params(8, 1, 2);  // four elements per surface
    StaticChannels ch = channels_for(p, 73);
    REQUIRE(ch.n_side == 4);

    double best = 0.0;
    const int grid = 8;
    for (int a = 0; a < grid; ++a)
        for (int b = 0; b < grid; ++b)
            for (int c = 0; c < grid; ++c)
                for (int d = 0; d < grid; ++d) {
                    auto ph = [&](int q) {
                        double t = 2.0 * std::numbers::pi * q / grid;
                        return cdouble{std::cos(t), std::sin(t)};
                    };
                    StaticBeamState st = baseline_state(p, ch);
                    st.phase = CVec{ph(a), ph(b), ph(c), ph(d)};
                    apply_uplink_closed_forms(st, ch, p);
                    apply_downlink_closed_forms(st, ch, p);
                    best = std::max(best, rates_static(st, ch, p).wsr);
                }

    AoOptions opt;
    opt.seed = 17;
    AoResult res = run_alternating_optimization(p, ch, opt);
    CHECK(res.wsr >= 0.95 * best);
}

TEST_CASE("full user power maximizes the converged rate") {
    SystemParams p = small_params(16, 2, 4);
    StaticChannels ch = channels_for(p, 79);
    double best_at_full = 0.0;
    double best_other = 0.0;
    for (double frac : {0.25, 0.5, 0.75, 1.0}) {
        AoOptions opt;
        opt.seed = 7;
        opt.user_power_mw = frac * p.p_u_mw;
        AoResult res = run_alternating_optimization(p, ch, opt);
        if (frac == 1.0) best_at_full = res.wsr;
        else best_other = std::max(best_other, res.wsr);
    }
    CHECK(best_at_full >= best_other - 1e-9);
}

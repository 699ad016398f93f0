#include "catch2/catch_amalgamated.hpp"

#include "airs/single_user.hpp"
#include "airs/verify.hpp"
#include "oracles.hpp"

using namespace airs;

namespace {

double q1(const SystemParams& p, const WsrCoefficients& c, double x) {
    double n = static_cast<double>(p.n_total);
    double denom = p.p_b_mw * p.p_u_mw * c.f1 * n + p.p_b_mw * c.f2 + p.p_u_mw * c.f3;
    return -p.p_b_mw * p.p_u_mw * c.f1 * x + p.epsilon * denom - p.p_u_mw * c.f3;
}

int exhaustive_best_nd(const SystemParams& p) {
    double best = -1.0;
    int best_nd = 0;
    for (int nd = 0; nd <= p.n_total; ++nd) {
        double w = wsr_distributed(p, p.n_total - nd, nd).wsr;
        if (w > best) {
            best = w;
            best_nd = nd;
        }
    }
    return best_nd;
}

}  // namespace

TEST_CASE("coefficients vanish with the noise floor") {
    SystemParams p = SystemParams::defaults();
    WsrCoefficients base = wsr_coefficients(p);
    p.sigma_f_mw = 1e-30;
    p.sigma_0_mw = 1e-30;
    WsrCoefficients c = wsr_coefficients(p);
    CHECK(c.f1 == Catch::Approx(base.f1));
    CHECK(c.f2 > 0.0);
    CHECK(c.f3 > 0.0);
    CHECK(c.f2 < 1e-25);
    CHECK(c.f3 < 1e-25);
}

TEST_CASE("reference-scenario coefficient values") {
    SystemParams p = SystemParams::defaults();
    WsrCoefficients c = wsr_coefficients(p);
    CHECK(std::abs(c.f1 - 3.154e-13) <= 0.001e-13);
    CHECK(std::abs(c.f2 - 1.345e-13) <= 0.001e-13);
    CHECK(0.0 < c.w1);
    CHECK(c.w1 < c.w2);
    CHECK(c.w2 < 1.0);
}

TEST_CASE("coefficient linearity in the antenna count") {
    SystemParams p = SystemParams::defaults();
    WsrCoefficients a = wsr_coefficients(p);
    p.m *= 2;
    WsrCoefficients b = wsr_coefficients(p);
    CHECK(b.f1 == Catch::Approx(2.0 * a.f1).epsilon(1e-12));
    // first term of f2 doubles, the other two stay put
    double first_a = a.f2 - p.p_u_mw * p.h2_sq() * p.sigma_0_mw - p.sigma_f_mw * p.sigma_0_mw;
    double first_b = b.f2 - p.p_u_mw * p.h2_sq() * p.sigma_0_mw - p.sigma_f_mw * p.sigma_0_mw;
    CHECK(first_b == Catch::Approx(2.0 * first_a).epsilon(1e-12));
}

TEST_CASE("no elements means zero rate") {
    SystemParams p = SystemParams::defaults();
    RateSplit r = wsr_distributed(p, 0.0, 0.0);
    CHECK(r.wsr == 0.0);
    CHECK(r.ul_rate == 0.0);
    CHECK(r.dl_rate == 0.0);
}

TEST_CASE("zero downlink weight reduces to the uplink term") {
    SystemParams p = SystemParams::defaults();
    p.epsilon = 0.0;
    for (double nd : {0.0, 13.0, 100.0}) {
        RateSplit r = wsr_distributed(p, 60.0, nd);
        CHECK(r.wsr == Catch::Approx(r.ul_rate));
    }
}

TEST_CASE("distributed rates match the raw-matrix route") {
    SystemParams p = SystemParams::defaults();
    RateSplit r = wsr_distributed(p, 50.0, 50.0);
    double ul = verify::ul_rate_matrix(p.p_u_mw, p.p_f_mw, p.m, 50, p.beta, p.geometry.bs,
                                       p.geometry.bs_airs, p.geometry.user_center,
                                       p.sigma_f_mw, p.sigma_0_mw);
    double dl = verify::dl_rate_matrix(p.p_b_mw, p.p_f_mw, p.m, 50, p.beta, p.geometry.bs,
                                       p.geometry.user_airs, p.geometry.user_center,
                                       p.sigma_f_mw, p.sigma_0_mw);
    CHECK(r.ul_rate == Catch::Approx(ul).epsilon(1e-9));
    CHECK(r.dl_rate == Catch::Approx(dl).epsilon(1e-9));
}

TEST_CASE("closed-form rates equal matrix rates across random scenarios") {
    RngStream rng(31, 0);
    for (int t = 0; t < 60; ++t) {
        SystemParams p = oracles::random_params(rng);
        int n_d = static_cast<int>(rng.uniform() * (p.n_total + 1));
        int n_u = p.n_total - n_d;
        RateSplit r = wsr_distributed(p, n_u, n_d);
        if (n_u > 0) {
            double ul = verify::ul_rate_matrix(p.p_u_mw, p.p_f_mw, p.m, n_u, p.beta,
                                               p.geometry.bs, p.geometry.bs_airs,
                                               p.geometry.user_center, p.sigma_f_mw,
                                               p.sigma_0_mw);
            CHECK(r.ul_rate == Catch::Approx(ul).epsilon(1e-9));
        }
        if (n_d > 0) {
            double dl = verify::dl_rate_matrix(p.p_b_mw, p.p_f_mw, p.m, n_d, p.beta,
                                               p.geometry.bs, p.geometry.user_airs,
                                               p.geometry.user_center, p.sigma_f_mw,
                                               p.sigma_0_mw);
            CHECK(r.dl_rate == Catch::Approx(dl).epsilon(1e-9));
        }
    }
}

TEST_CASE("boundary weights pin the split to one side") {
    SystemParams p = SystemParams::defaults();
    p.epsilon = 0.0;
    AllocationResult a = allocate_elements_optimal(p);
    CHECK(a.x_d_continuous == 0.0);
    CHECK(a.n_d == 0);
    CHECK(a.n_u == p.n_total);

    p.epsilon = 1.0;
    a = allocate_elements_optimal(p);
    CHECK(a.x_d_continuous == static_cast<double>(p.n_total));
    CHECK(a.n_d == p.n_total);
    CHECK(a.n_u == 0);
}

TEST_CASE("closed-form split equals exhaustive search") {
    RngStream rng(47, 0);
    for (int t = 0; t < 100; ++t) {
        SystemParams p = oracles::random_params(rng);
        p.n_total = 2 + static_cast<int>(rng.uniform() * 62.0);
        AllocationResult a = allocate_elements_optimal(p);
        int best_nd = exhaustive_best_nd(p);
        if (a.n_d != best_nd) {
            // Only acceptable when both splits achieve the same rate.
            double wa = wsr_distributed(p, p.n_total - a.n_d, a.n_d).wsr;
            double wb = wsr_distributed(p, p.n_total - best_nd, best_nd).wsr;
            CHECK(wa == Catch::Approx(wb).margin(1e-12));
        } else {
            CHECK(a.n_d == best_nd);
        }
        CHECK(a.n_u + a.n_d == p.n_total);
    }
}

TEST_CASE("interior split is a stationary point") {
    SystemParams p = SystemParams::defaults();
    WsrCoefficients c = wsr_coefficients(p);
    REQUIRE(p.epsilon > c.w1);
    REQUIRE(p.epsilon < c.w2);
    AllocationResult a = allocate_elements_optimal(p);
    double x = a.x_d_continuous;
    REQUIRE(x > 0.0);
    REQUIRE(x < static_cast<double>(p.n_total));
    CHECK(q1(p, c, x - 1e-3) > 0.0);
    CHECK(q1(p, c, x + 1e-3) < 0.0);
    CHECK(std::abs(q1(p, c, x)) < 1e-6 * std::abs(q1(p, c, 0.0)));
}

TEST_CASE("rate grows with elements on either side") {
    SystemParams p = SystemParams::defaults();
    double prev_u = -1.0, prev_d = -1.0;
    for (int n = 0; n <= 40; n += 4) {
        double wu = wsr_distributed(p, n, 10.0).wsr;
        double wd = wsr_distributed(p, 10.0, n).wsr;
        CHECK(wu > prev_u);
        CHECK(wd > prev_d);
        prev_u = wu;
        prev_d = wd;
    }
}

TEST_CASE("proportional split values") {
    CHECK(allocate_elements_near_optimal(0.4, 100) == Catch::Approx(40.0));
    CHECK(allocate_elements_near_optimal(0.5, 64) == Catch::Approx(32.0));
    CHECK_THROWS_AS(allocate_elements_near_optimal(0.0, 100), BoundaryError);
    CHECK_THROWS_AS(allocate_elements_near_optimal(1.0, 100), BoundaryError);
}

TEST_CASE("proportional split is near optimal at high amplification power") {
    SystemParams p = SystemParams::defaults();
    p.p_f_mw = 10.0;
    p.p_u_mw = 100.0;
    p.p_b_mw = 100.0;
    for (double eps : {0.2, 0.4, 0.6, 0.8}) {
        for (int n : {32, 64, 128}) {
            p.epsilon = eps;
            p.n_total = n;
            int nd = static_cast<int>(std::llround(allocate_elements_near_optimal(eps, n)));
            double w_near = wsr_distributed(p, n - nd, nd).wsr;
            int best_nd = exhaustive_best_nd(p);
            double w_best = wsr_distributed(p, n - best_nd, best_nd).wsr;
            CHECK(w_near >= 0.98 * w_best);
        }
    }
}

TEST_CASE("single-surface schemes coincide when the hop gains match") {
    SystemParams p = SystemParams::defaults();
    p.geometry = Geometry::standard(1e-6, 10.0);  // d -> 0 makes both hops equal
    RateSplit bs = wsr_single_airs(p, DeploymentSide::BsSide);
    RateSplit ue = wsr_single_airs(p, DeploymentSide::UserSide);
    CHECK(bs.wsr == Catch::Approx(ue.wsr).epsilon(1e-9));
}

TEST_CASE("distributed with every element uplink equals the BS-side scheme at zero weight") {
    SystemParams p = SystemParams::defaults();
    p.epsilon = 0.0;
    double dis = wsr_distributed(p, p.n_total, 0.0).wsr;
    double bs = wsr_single_airs(p, DeploymentSide::BsSide).wsr;
    CHECK(dis == Catch::Approx(bs).epsilon(1e-9));

    p.epsilon = 1.0;
    double dis_d = wsr_distributed(p, 0.0, p.n_total).wsr;
    double ue = wsr_single_airs(p, DeploymentSide::UserSide).wsr;
    CHECK(dis_d == Catch::Approx(ue).epsilon(1e-9));
}

TEST_CASE("single-surface rates match the raw-matrix route") {
    SystemParams p = SystemParams::defaults();
    p.n_total = 100;
    RateSplit bs = wsr_single_airs(p, DeploymentSide::BsSide);
    double bs_ul = verify::ul_rate_matrix(p.p_u_mw, p.p_f_mw, p.m, 100, p.beta, p.geometry.bs,
                                          p.geometry.bs_airs, p.geometry.user_center,
                                          p.sigma_f_mw, p.sigma_0_mw);
    double bs_dl = verify::dl_rate_matrix(p.p_b_mw, p.p_f_mw, p.m, 100, p.beta, p.geometry.bs,
                                          p.geometry.bs_airs, p.geometry.user_center,
                                          p.sigma_f_mw, p.sigma_0_mw);
    CHECK(bs.ul_rate == Catch::Approx(bs_ul).epsilon(1e-9));
    CHECK(bs.dl_rate == Catch::Approx(bs_dl).epsilon(1e-9));

    RateSplit ue = wsr_single_airs(p, DeploymentSide::UserSide);
    double ue_ul = verify::ul_rate_matrix(p.p_u_mw, p.p_f_mw, p.m, 100, p.beta, p.geometry.bs,
                                          p.geometry.user_airs, p.geometry.user_center,
                                          p.sigma_f_mw, p.sigma_0_mw);
    double ue_dl = verify::dl_rate_matrix(p.p_b_mw, p.p_f_mw, p.m, 100, p.beta, p.geometry.bs,
                                          p.geometry.user_airs, p.geometry.user_center,
                                          p.sigma_f_mw, p.sigma_0_mw);
    CHECK(ue.ul_rate == Catch::Approx(ue_ul).epsilon(1e-9));
    CHECK(ue.dl_rate == Catch::Approx(ue_dl).epsilon(1e-9));
}

TEST_CASE("selector never returns an interior split at boundary weights") {
    SystemParams p = SystemParams::defaults();
    p.epsilon = 0.0;
    auto [scheme, wsr] = best_deployment(p);
    CHECK(scheme != DeploymentScheme::DistributedOpt);
    CHECK(wsr > 0.0);
}

TEST_CASE("selector agrees with the three-way brute force inside the window") {
    RngStream rng(53, 0);
    for (int t = 0; t < 40; ++t) {
        SystemParams p = oracles::random_params(rng);
        p.n_total = 100 + 2 * static_cast<int>(rng.uniform() * 60.0);
        WsrCoefficients c = wsr_coefficients(p);
        p.epsilon = c.w1 + (c.w2 - c.w1) * (0.2 + 0.6 * rng.uniform());
        auto [scheme, wsr] = best_deployment(p);
        double r_bs = wsr_single_airs(p, DeploymentSide::BsSide).wsr;
        double r_ue = wsr_single_airs(p, DeploymentSide::UserSide).wsr;
        double r_dis = allocate_elements_optimal(p).wsr_bpshz;
        double want = std::max({r_bs, r_ue, r_dis});
        CHECK(wsr == Catch::Approx(want).epsilon(1e-12));
        (void)scheme;
    }
}

TEST_CASE("interior window widens with power and array growth") {
    SystemParams base = SystemParams::defaults();
    auto width = [](const SystemParams& p) {
        WsrCoefficients c = wsr_coefficients(p);
        return c.w2 - c.w1;
    };
    double w0 = width(base);

    SystemParams p = base;
    p.m *= 2;
    CHECK(width(p) > w0);
    p = base;
    p.n_total *= 2;
    CHECK(width(p) > w0);
    p = base;
    p.p_f_mw *= 2.0;
    CHECK(width(p) > w0);
    p = base;
    p.p_u_mw *= 2.0;
    CHECK(width(p) > w0);
    p = base;
    p.p_b_mw *= 2.0;
    CHECK(width(p) > w0);
}

TEST_CASE("passive baseline scaling") {
    SystemParams p = SystemParams::defaults();
    RateSplit z = wsr_pirs_baseline(p, 0);
    CHECK(z.wsr == 0.0);

    RateSplit r1 = wsr_pirs_baseline(p, 50);
    RateSplit r2 = wsr_pirs_baseline(p, 100);
    CHECK(r2.snr_ul == Catch::Approx(4.0 * r1.snr_ul).epsilon(1e-12));
    CHECK(r2.snr_dl == Catch::Approx(4.0 * r1.snr_dl).epsilon(1e-12));
}

TEST_CASE("passive baseline matches the raw-matrix route") {
    SystemParams p = SystemParams::defaults();
    RateSplit r = wsr_pirs_baseline(p);
    double ul = verify::pirs_rate_matrix(p.p_u_mw, p.m, p.n_total, p.beta, p.geometry.bs,
                                         p.geometry.pirs, p.geometry.user_center,
                                         p.sigma_0_mw);
    double dl = verify::pirs_rate_matrix(p.p_b_mw, p.m, p.n_total, p.beta, p.geometry.bs,
                                         p.geometry.pirs, p.geometry.user_center,
                                         p.sigma_0_mw);
    CHECK(r.ul_rate == Catch::Approx(ul).epsilon(1e-9));
    CHECK(r.dl_rate == Catch::Approx(dl).epsilon(1e-9));
}

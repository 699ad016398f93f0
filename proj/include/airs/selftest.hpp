#pragma once

#include <functional>
#include <string>
#include <vector>

#include "airs/experiments.hpp"
#include "airs/verify.hpp"

namespace airs {

/// Built-in verification battery behind the `selftest` CLI subcommand:
/// each check recomputes a library result through an independent route
/// (raw matrices, exhaustive search, direct identities) and reports the
/// worst deviation it saw. Results are written through the standard CSV
/// path, so reruns with the same seed are byte-identical.
struct SelftestOutput {
    std::vector<ResultRecord> records;
    std::string csv_path;
    std::string csv_content;
    bool all_ok = true;
};

namespace detail {

struct CheckResult {
    std::string name;
    double metric = 0.0;
    bool pass = false;
};

inline SystemParams random_scenario(RngStream& rng) {
    SystemParams p;
    p.p_u_mw = dbm_to_mw(5.0 + 20.0 * rng.uniform());
    p.p_b_mw = dbm_to_mw(10.0 + 20.0 * rng.uniform());
    p.p_f_mw = dbm_to_mw(-10.0 + 15.0 * rng.uniform());
    p.sigma_f_mw = dbm_to_mw(-90.0 + 15.0 * rng.uniform());
    p.sigma_0_mw = dbm_to_mw(-90.0 + 15.0 * rng.uniform());
    p.m = 1 + static_cast<int>(rng.uniform() * 8.0);
    p.n_total = 4 + 2 * static_cast<int>(rng.uniform() * 60.0);
    p.epsilon = rng.uniform();
    p.k_users = 1;
    p.beta = db_to_linear(-35.0 + 10.0 * rng.uniform());
    p.geometry = Geometry::standard(80.0 + 300.0 * rng.uniform(), 5.0 + 20.0 * rng.uniform());
    return p;
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

inline std::vector<CheckResult> run_checks(std::uint64_t seed) {
    std::vector<CheckResult> out;

    {  // Stream determinism: same (seed, stream) replays identically.
        RngStream a(seed, 7), b(seed, 7);
        double diff = 0.0;
        for (int i = 0; i < 64; ++i)
            if (a.next_u64() != b.next_u64()) diff += 1.0;
        out.push_back({"rng-determinism", diff, diff == 0.0});
    }

    {  // Steering entries stay on the unit circle.
        RngStream rng(seed, 11);
        double worst = 0.0;
        for (int t = 0; t < 50; ++t) {
            Angles an{(-1.0 + 2.0 * rng.uniform()) * 3.14159, rng.uniform() * 3.14159};
            ArraySpec ar = make_array(1 + static_cast<int>(rng.uniform() * 64.0));
            CVec s = steering_vector(an, ar);
            for (std::size_t i = 0; i < s.size(); ++i)
                worst = std::max(worst, std::abs(std::abs(s[i]) - 1.0));
        }
        out.push_back({"steering-unit-modulus", worst, worst < 1e-14});
    }

    {  // Rank-one channel: Frobenius norm factorizes exactly.
        RngStream rng(seed, 13);
        double worst = 0.0;
        for (int t = 0; t < 50; ++t) {
            double g = rng.uniform() * 2.0;
            Angles ra{(-1.0 + 2.0 * rng.uniform()) * 3.0, rng.uniform() * 3.0};
            Angles ta{(-1.0 + 2.0 * rng.uniform()) * 3.0, rng.uniform() * 3.0};
            ArraySpec rs = make_array(1 + static_cast<int>(rng.uniform() * 32.0));
            ArraySpec ts = make_array(1 + static_cast<int>(rng.uniform() * 8.0));
            LosChannel ch = build_los_channel(g, ra, rs, ta, ts);
            double f2 = ch.matrix.frobenius_norm();
            double want = g * std::sqrt(static_cast<double>(rs.total()) *
                                        static_cast<double>(ts.total()));
            worst = std::max(worst, std::abs(f2 - want) / std::max(1e-300, want));
        }
        out.push_back({"los-rank-one-frobenius", worst, worst < 1e-12});
    }

    {  // Closed-form rates against the raw-matrix route.
        RngStream rng(seed, 17);
        double worst = 0.0;
        for (int t = 0; t < 20; ++t) {
            SystemParams p = random_scenario(rng);
            int n_d = 1 + static_cast<int>(rng.uniform() * (p.n_total - 1));
            int n_u = p.n_total - n_d;
            RateSplit r = wsr_distributed(p, n_u, n_d);
            double ul = verify::ul_rate_matrix(p.p_u_mw, p.p_f_mw, p.m, n_u, p.beta,
                                               p.geometry.bs, p.geometry.bs_airs,
                                               p.geometry.user_center, p.sigma_f_mw,
                                               p.sigma_0_mw);
            double dl = verify::dl_rate_matrix(p.p_b_mw, p.p_f_mw, p.m, n_d, p.beta,
                                               p.geometry.bs, p.geometry.user_airs,
                                               p.geometry.user_center, p.sigma_f_mw,
                                               p.sigma_0_mw);
            worst = std::max(worst, rel_err(r.ul_rate, ul));
            worst = std::max(worst, rel_err(r.dl_rate, dl));
        }
        out.push_back({"closed-form-vs-matrix", worst, worst < 1e-9});
    }

    {  // Closed-form integer split against exhaustive search.
        RngStream rng(seed, 19);
        int mismatches = 0;
        for (int t = 0; t < 10; ++t) {
            SystemParams p = random_scenario(rng);
            p.n_total = 8 + 2 * static_cast<int>(rng.uniform() * 12.0);
            AllocationResult a = allocate_elements_optimal(p);
            double best = -1.0;
            int best_nd = 0;
            for (int nd = 0; nd <= p.n_total; ++nd) {
                double w = wsr_distributed(p, p.n_total - nd, nd).wsr;
                if (w > best) {
                    best = w;
                    best_nd = nd;
                }
            }
            if (a.n_d != best_nd && rel_err(a.wsr_bpshz, best) > 1e-12) ++mismatches;
        }
        out.push_back({"allocation-exhaustive", static_cast<double>(mismatches),
                       mismatches == 0});
    }

    {  // Lifted-form identity on random instances.
        RngStream rng(seed, 23);
        double worst = 0.0;
        for (int t = 0; t < 10; ++t) {
            int n = 3 + static_cast<int>(rng.uniform() * 4.0);
            CMat g(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
            for (std::size_t i = 0; i < g.rows(); ++i)
                for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) = rng.complex_normal();
            CMat a = g * g.adjoint();
            CVec b(static_cast<std::size_t>(n));
            for (std::size_t i = 0; i < b.size(); ++i) b[i] = rng.complex_normal();
            QuadraticForm qf{a, b};
            HomogenizedForm hom = homogenize(qf);
            for (int probe = 0; probe < 10; ++probe) {
                CVec v(static_cast<std::size_t>(n));
                for (std::size_t i = 0; i < v.size(); ++i) {
                    double phi = 2.0 * 3.14159265358979 * rng.uniform();
                    v[i] = cdouble{std::cos(phi), std::sin(phi)};
                }
                CVec vb(static_cast<std::size_t>(n + 1));
                for (std::size_t i = 0; i < v.size(); ++i) vb[i] = v[i];
                vb[static_cast<std::size_t>(n)] = 1.0;
                double lifted = std::real(hdot(vb, hom.q_hat * vb));
                double direct = std::real(hdot(v, a * v)) - 2.0 * std::real(hdot(v, b));
                worst = std::max(worst, std::abs(lifted - direct) /
                                            std::max(1.0, std::abs(direct)));
            }
        }
        out.push_back({"qcqp-lift-identity", worst, worst < 1e-12});
    }

    {  // Coordinate ascent against a dense phase grid at n = 3.
        RngStream rng(seed, 29);
        double worst = 0.0;
        for (int t = 0; t < 3; ++t) {
            CMat g(3, 3);
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = 0; j < 3; ++j) g(i, j) = rng.complex_normal();
            CMat a = g * g.adjoint();
            CVec b(3);
            for (std::size_t i = 0; i < 3; ++i) b[i] = 4.0 * rng.complex_normal();
            QuadraticForm qf{a, b};
            CVec v0{cdouble{1, 0}, cdouble{1, 0}, cdouble{1, 0}};
            double got = solve_coordinate_ascent(qf, v0, 1e-12, 500).objective;
            double best = -1e300;
            const int grid = 24;
            for (int i = 0; i < grid; ++i)
                for (int j = 0; j < grid; ++j)
                    for (int l = 0; l < grid; ++l) {
                        auto ph = [&](int q) {
                            double t2 = 2.0 * 3.14159265358979 * q / grid;
                            return cdouble{std::cos(t2), std::sin(t2)};
                        };
                        CVec v{ph(i), ph(j), ph(l)};
                        best = std::max(best, quadratic_objective(qf, v));
                    }
            worst = std::max(worst, (best - got) / std::max(1.0, std::abs(best)));
        }
        out.push_back({"qcqp-ascent-vs-grid", worst, worst < 0.01});
    }

    {  // Small alternating run: monotone trace, feasible state, tight
       // surrogates.
        SystemParams p = SystemParams::defaults();
        p.n_total = 16;
        p.k_users = 2;
        p.validate();
        RngStream placement(seed, 0x5eed);
        std::vector<Vec3> users = place_users(placement, p, 5.0);
        StaticChannels ch = build_static_channels(p, users);
        AoOptions opt;
        opt.seed = seed;
        AoResult ao = run_alternating_optimization(p, ch, opt);
        double dip = 0.0;
        for (std::size_t i = 1; i < ao.outer_trace.size(); ++i)
            dip = std::min(dip, ao.outer_trace[i] - ao.outer_trace[i - 1]);
        double feas = max_constraint_violation(ao.state, ch, p);
        double gap = 0.0;
        for (double g2 : ao.inner_ldt_gaps) gap = std::max(gap, g2);
        for (double g2 : ao.inner_qt_gaps) gap = std::max(gap, g2);
        bool ok = dip >= -1e-9 && feas <= 1e-9 && gap <= 1e-9 * (1.0 + std::abs(ao.wsr));
        out.push_back({"ao-monotone-feasible-tight", std::max({-dip, feas, gap}), ok});
    }

    {  // CSV rendering is a pure function of the records.
        std::vector<ResultRecord> rs(2);
        rs[0] = {"demo", 1.0, seed, 1.25, 1.0, 2.0, 3, 4, 5, 0.0, ""};
        rs[1] = {"demo", 2.0, seed, 2.5, 2.0, 3.0, 4, 5, 6, 0.0, ""};
        std::string r1 = render_csv(rs);
        std::string r2 = render_csv(rs);
        out.push_back({"csv-render-determinism", r1 == r2 ? 0.0 : 1.0, r1 == r2});
    }

    return out;
}

}  // namespace detail

inline SelftestOutput run_selftest(const std::string& out_dir, std::uint64_t seed) {
    SelftestOutput out;
    auto checks = detail::run_checks(seed);
    for (const auto& c : checks) {
        ResultRecord r;
        r.scheme = "selftest-" + c.name;
        r.sweep_value = 0.0;
        r.seed = seed;
        r.wsr_bpshz = c.metric;
        r.error = c.pass ? "" : "check failed";
        out.records.push_back(std::move(r));
        if (!c.pass) out.all_ok = false;
    }
    out.csv_content = detail::render_csv(out.records);
    std::filesystem::path csv = std::filesystem::path(out_dir) / "selftest.csv";
    detail::write_file_atomic(csv, out.csv_content);
    out.csv_path = csv.string();
    return out;
}

}  // namespace airs

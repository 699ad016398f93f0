#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "airs/linalg.hpp"
#include "airs/rng.hpp"

namespace airs {

/// Maximization target -vᴴ A v + 2 Re{vᴴ b} over unit-modulus vectors,
/// with A Hermitian positive semidefinite.
struct QuadraticForm {
    CMat a;
    CVec b;

    std::size_t dim() const { return b.size(); }

    void validate() const {
        if (a.rows() != a.cols() || a.rows() != b.size())
            throw InvalidInputError("QuadraticForm: shape mismatch");
        a.ensure_finite("QuadraticForm.a");
        b.ensure_finite("QuadraticForm.b");
        if (!a.is_hermitian(1e-12)) throw InvalidInputError("QuadraticForm: a is not Hermitian");
    }
};

inline double quadratic_objective(const QuadraticForm& qf, const CVec& v) {
    return -std::real(hdot(v, qf.a * v)) + 2.0 * std::real(hdot(v, qf.b));
}

/// Lifted form over v̄ = [v; 1]: v̄ᴴ q_hat v̄ == vᴴ A v - 2 Re{vᴴ b}.
struct HomogenizedForm {
    CMat q_hat;
};

inline HomogenizedForm homogenize(const QuadraticForm& qf) {
    qf.validate();
    const std::size_t n = qf.dim();
    HomogenizedForm h;
    h.q_hat = CMat(n + 1, n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) h.q_hat(i, j) = qf.a(i, j);
        h.q_hat(i, n) = -qf.b[i];
        h.q_hat(n, i) = -std::conj(qf.b[i]);
    }
    h.q_hat(n, n) = 0.0;
    return h;
}

/// Strip the lifting variable: entries of the first block rotated by the
/// inverse phase of the last one. Invariant under a global phase of the
/// input.
inline CVec dehomogenize(const CVec& v_bar) {
    if (v_bar.size() < 2) throw InvalidInputError("dehomogenize: need at least 2 entries");
    const std::size_t n = v_bar.size() - 1;
    CVec v(n);
    for (std::size_t i = 0; i < n; ++i) {
        cdouble z = v_bar[i] * std::conj(v_bar[n]);
        double a = std::abs(z);
        v[i] = a > 0.0 ? z / a : cdouble{1.0, 0.0};
    }
    return v;
}

struct AscentResult {
    CVec v;
    double objective = 0.0;
    std::vector<double> trace;  // objective after every single-coordinate update
    int sweeps = 0;
};

/// Cyclic exact coordinate ascent: each coordinate moves to the phase of
/// its local linear term, which is the per-coordinate optimum, so the
/// objective never decreases. Stops when a full sweep improves by less
/// than tol.
inline AscentResult solve_coordinate_ascent(const QuadraticForm& qf, CVec v0, double tol,
                                            int max_iter) {
    qf.validate();
    const std::size_t n = qf.dim();
    if (v0.size() != n) throw InvalidInputError("solve_coordinate_ascent: v0 size mismatch");
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(std::abs(v0[i]) - 1.0) > 1e-9)
            throw InvalidInputError("solve_coordinate_ascent: v0 must be unit-modulus");

    AscentResult res;
    res.v = std::move(v0);
    res.objective = quadratic_objective(qf, res.v);
    res.trace.push_back(res.objective);

    for (int sweep = 0; sweep < max_iter; ++sweep) {
        double before = res.objective;
        for (std::size_t i = 0; i < n; ++i) {
            cdouble c = qf.b[i];
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) c -= qf.a(i, j) * res.v[j];
            double mag = std::abs(c);
            if (mag >= 1e-15) res.v[i] = c / mag;
            res.objective = quadratic_objective(qf, res.v);
            res.trace.push_back(res.objective);
        }
        res.sweeps = sweep + 1;
        if (res.objective - before < tol) return res;
    }
    throw ConvergenceError("solve_coordinate_ascent: sweep budget exhausted",
                           res.trace.size() >= 2
                               ? res.trace.back() - res.trace[res.trace.size() - 2]
                               : 0.0,
                           res.trace);
}

struct SdrResult {
    CVec v;
    double objective = 0.0;
    double relaxation_value = 0.0;  // upper-bound estimate from the lifted problem
};

inline int default_sdr_rank(int n) {
    return std::max(2, static_cast<int>(std::ceil(std::sqrt(2.0 * (n + 1)))));
}

namespace detail {

/// tr(q R Rᴴ) for a row-major factor R with unit-norm rows.
inline double factor_trace(const CMat& q, const std::vector<CVec>& rows) {
    const std::size_t n = q.rows();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            // q_ij * <row_i, row_j>ᴴ contribution: q_ij * (row_j ⋅ conj(row_i))
            cdouble inner{0.0, 0.0};
            for (std::size_t t = 0; t < rows[i].size(); ++t)
                inner += rows[j][t] * std::conj(rows[i][t]);
            s += std::real(q(i, j) * inner);
        }
    return s;
}

}  // namespace detail

/// Lifted relaxation of the unit-modulus maximization, solved on the
/// low-rank factor V = R Rᴴ with unit-norm rows by projected gradient
/// descent with backtracking, followed by Gaussian randomization and a
/// coordinate-ascent polish of the best rounded candidate.
inline SdrResult solve_sdr(const QuadraticForm& qf, int rank, int num_randomizations,
                           RngStream& rng) {
    qf.validate();
    if (rank < 2) throw InvalidInputError("solve_sdr: rank must be >= 2");
    if (num_randomizations < 1) throw InvalidInputError("solve_sdr: need >= 1 randomizations");
    const std::size_t n = qf.dim();
    const std::size_t d = n + 1;
    HomogenizedForm hom = homogenize(qf);
    const CMat& q = hom.q_hat;

    // Factor rows on the unit sphere.
    std::vector<CVec> rows(d, CVec(static_cast<std::size_t>(rank)));
    for (auto& r : rows) {
        for (std::size_t t = 0; t < r.size(); ++t) r[t] = rng.complex_normal();
        r = r.normalized();
    }

    auto project_rows = [](std::vector<CVec>& rs) {
        for (auto& r : rs) {
            double nr = r.norm();
            if (nr > 0.0)
                for (std::size_t t = 0; t < r.size(); ++t) r[t] /= nr;
            else
                r[0] = 1.0;
        }
    };

    auto gradient = [&](const std::vector<CVec>& rs) {
        // d tr(q R Rᴴ) / d conj(R) = q R, row i = sum_j q(i,j) row_j
        std::vector<CVec> g(d, CVec(static_cast<std::size_t>(rank)));
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                cdouble qij = q(i, j);
                if (qij == cdouble{0.0, 0.0}) continue;
                for (std::size_t t = 0; t < g[i].size(); ++t) g[i][t] += qij * rs[j][t];
            }
        return g;
    };

    double value = detail::factor_trace(q, rows);
    double qscale = std::max(q.frobenius_norm(), 1e-300);
    double step = 1.0 / qscale;
    constexpr int kMaxIter = 5000;
    constexpr double kRelTol = 1e-12;
    int flat_steps = 0;
    bool converged = false;
    for (int it = 0; it < kMaxIter; ++it) {
        auto g = gradient(rows);
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            std::vector<CVec> trial = rows;
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t t = 0; t < trial[i].size(); ++t)
                    trial[i][t] -= step * g[i][t];
            project_rows(trial);
            double trial_value = detail::factor_trace(q, trial);
            if (trial_value < value) {
                rows = std::move(trial);
                double drop = value - trial_value;
                value = trial_value;
                accepted = true;
                step *= 1.25;
                flat_steps = drop <= kRelTol * (1.0 + std::abs(value)) ? flat_steps + 1 : 0;
                break;
            }
            step *= 0.5;
        }
        if (!accepted || flat_steps >= 3) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw ConvergenceError("solve_sdr: factor iteration budget exhausted", value);

    // Covariance of the relaxed solution, with the unit diagonal imposed
    // exactly for the sampler.
    CMat v_mat(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            cdouble inner{0.0, 0.0};
            for (std::size_t t = 0; t < rows[i].size(); ++t)
                inner += rows[i][t] * std::conj(rows[j][t]);
            v_mat(i, j) = (i == j) ? cdouble{1.0, 0.0} : inner;
        }

    SdrResult res;
    res.relaxation_value = -value;

    // One shared factor for all randomization draws.
    CMat chol = cholesky_psd(v_mat, 1e-12);
    bool have = false;
    for (int s = 0; s < num_randomizations; ++s) {
        CVec z(d);
        for (std::size_t i = 0; i < d; ++i) z[i] = rng.complex_normal();
        CVec v_bar(d);
        for (std::size_t i = 0; i < d; ++i) {
            cdouble zi{0.0, 0.0};
            for (std::size_t j = 0; j <= i; ++j) zi += chol(i, j) * z[j];
            double a = std::abs(zi);
            v_bar[i] = a > 0.0 ? zi / a : cdouble{1.0, 0.0};
        }
        CVec cand = dehomogenize(v_bar);
        double obj = quadratic_objective(qf, cand);
        if (!have || obj > res.objective) {
            res.v = cand;
            res.objective = obj;
            have = true;
        }
    }

    // Per-coordinate stationarity polish; the ascent is monotone, so a
    // budget overrun just keeps the best rounded candidate.
    try {
        AscentResult polished = solve_coordinate_ascent(qf, res.v, 1e-12, 500);
        if (polished.objective >= res.objective) {
            res.v = polished.v;
            res.objective = polished.objective;
        }
    } catch (const ConvergenceError&) {
    }
    return res;
}

}  // namespace airs

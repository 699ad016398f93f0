#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "airs/errors.hpp"

namespace airs {

using cdouble = std::complex<double>;

inline bool is_finite(cdouble z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

/// Dense complex column vector.
class CVec {
public:
    CVec() = default;
    explicit CVec(std::size_t n) : d_(n, cdouble{0.0, 0.0}) {}
    CVec(std::initializer_list<cdouble> init) : d_(init) { ensure_finite("CVec init"); }
    explicit CVec(std::vector<cdouble> data) : d_(std::move(data)) { ensure_finite("CVec data"); }

    std::size_t size() const { return d_.size(); }
    cdouble& operator[](std::size_t i) { return d_[i]; }
    const cdouble& operator[](std::size_t i) const { return d_[i]; }
    const std::vector<cdouble>& data() const { return d_; }

    double squared_norm() const {
        double s = 0.0;
        for (const auto& z : d_) s += std::norm(z);
        return s;
    }
    double norm() const { return std::sqrt(squared_norm()); }

    CVec conj() const {
        CVec r(size());
        for (std::size_t i = 0; i < size(); ++i) r[i] = std::conj(d_[i]);
        return r;
    }

    CVec& operator+=(const CVec& o) {
        check_same_size(o, "operator+=");
        for (std::size_t i = 0; i < size(); ++i) d_[i] += o[i];
        return *this;
    }
    CVec& operator-=(const CVec& o) {
        check_same_size(o, "operator-=");
        for (std::size_t i = 0; i < size(); ++i) d_[i] -= o[i];
        return *this;
    }
    CVec& operator*=(cdouble s) {
        for (auto& z : d_) z *= s;
        return *this;
    }

    friend CVec operator+(CVec a, const CVec& b) { return a += b; }
    friend CVec operator-(CVec a, const CVec& b) { return a -= b; }
    friend CVec operator*(cdouble s, CVec a) { return a *= s; }

    /// Elementwise product.
    CVec hadamard(const CVec& o) const {
        check_same_size(o, "hadamard");
        CVec r(size());
        for (std::size_t i = 0; i < size(); ++i) r[i] = d_[i] * o[i];
        return r;
    }

    CVec normalized() const {
        double n = norm();
        if (n <= 0.0 || !std::isfinite(n))
            throw InvalidInputError("CVec::normalized: zero or non-finite norm");
        CVec r(size());
        for (std::size_t i = 0; i < size(); ++i) r[i] = d_[i] / n;
        return r;
    }

    void ensure_finite(const std::string& where) const {
        for (const auto& z : d_)
            if (!is_finite(z)) throw InvalidInputError(where + ": non-finite entry");
    }

private:
    void check_same_size(const CVec& o, const std::string& where) const {
        if (o.size() != size()) throw InvalidInputError("CVec::" + where + ": size mismatch");
    }

    std::vector<cdouble> d_;
};

/// aᴴ b
inline cdouble hdot(const CVec& a, const CVec& b) {
    if (a.size() != b.size()) throw InvalidInputError("hdot: size mismatch");
    cdouble s{0.0, 0.0};
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

/// Kronecker product of two vectors, a-major ordering.
inline CVec kron(const CVec& a, const CVec& b) {
    CVec r(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i * b.size() + j] = a[i] * b[j];
    return r;
}

/// Dense complex matrix, row-major.
class CMat {
public:
    CMat() = default;
    CMat(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), d_(rows * cols, cdouble{0.0, 0.0}) {}

    static CMat identity(std::size_t n) {
        CMat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    cdouble& operator()(std::size_t i, std::size_t j) { return d_[i * cols_ + j]; }
    const cdouble& operator()(std::size_t i, std::size_t j) const { return d_[i * cols_ + j]; }

    CMat adjoint() const {
        CMat r(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
        return r;
    }

    CMat& operator+=(const CMat& o) {
        check_same_shape(o, "operator+=");
        for (std::size_t i = 0; i < d_.size(); ++i) d_[i] += o.d_[i];
        return *this;
    }
    CMat& operator-=(const CMat& o) {
        check_same_shape(o, "operator-=");
        for (std::size_t i = 0; i < d_.size(); ++i) d_[i] -= o.d_[i];
        return *this;
    }
    CMat& operator*=(cdouble s) {
        for (auto& z : d_) z *= s;
        return *this;
    }
    friend CMat operator+(CMat a, const CMat& b) { return a += b; }
    friend CMat operator-(CMat a, const CMat& b) { return a -= b; }
    friend CMat operator*(cdouble s, CMat a) { return a *= s; }

    CVec operator*(const CVec& v) const {
        if (v.size() != cols_) throw InvalidInputError("CMat*CVec: size mismatch");
        CVec r(rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            cdouble s{0.0, 0.0};
            for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * v[j];
            r[i] = s;
        }
        return r;
    }

    CMat operator*(const CMat& o) const {
        if (o.rows_ != cols_) throw InvalidInputError("CMat*CMat: shape mismatch");
        CMat r(rows_, o.cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) {
                cdouble a = (*this)(i, k);
                if (a == cdouble{0.0, 0.0}) continue;
                for (std::size_t j = 0; j < o.cols_; ++j) r(i, j) += a * o(k, j);
            }
        return r;
    }

    /// this += coeff * u uᴴ
    void add_scaled_outer(double coeff, const CVec& u) {
        if (u.size() != rows_ || rows_ != cols_)
            throw InvalidInputError("add_scaled_outer: shape mismatch");
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                (*this)(i, j) += coeff * u[i] * std::conj(u[j]);
    }

    /// this(i,i) += coeff * values[i]
    void add_scaled_diag(double coeff, const std::vector<double>& values) {
        if (values.size() != rows_ || rows_ != cols_)
            throw InvalidInputError("add_scaled_diag: shape mismatch");
        for (std::size_t i = 0; i < rows_; ++i) (*this)(i, i) += coeff * values[i];
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (const auto& z : d_) s += std::norm(z);
        return std::sqrt(s);
    }

    double max_abs() const {
        double s = 0.0;
        for (const auto& z : d_) s = std::max(s, std::abs(z));
        return s;
    }

    /// Largest elementwise deviation from m(i,j) == conj(m(j,i)).
    double hermitian_error() const {
        double e = 0.0;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                e = std::max(e, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
        return e;
    }

    bool is_hermitian(double rel_tol = 1e-12) const {
        if (rows_ != cols_) return false;
        double scale = std::max(max_abs(), 1e-300);
        return hermitian_error() <= rel_tol * scale;
    }

    void ensure_finite(const std::string& where) const {
        for (const auto& z : d_)
            if (!is_finite(z)) throw InvalidInputError(where + ": non-finite entry");
    }

private:
    void check_same_shape(const CMat& o, const std::string& where) const {
        if (o.rows_ != rows_ || o.cols_ != cols_)
            throw InvalidInputError("CMat::" + where + ": shape mismatch");
    }

    std::size_t rows_ = 0, cols_ = 0;
    std::vector<cdouble> d_;
};

/// u vᴴ
inline CMat outer(const CVec& u, const CVec& v) {
    CMat m(u.size(), v.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * std::conj(v[j]);
    return m;
}

struct EigResult {
    double value = 0.0;
    CVec vector;
};

/// Principal (largest algebraic) eigenpair of a Hermitian matrix by
/// shifted power iteration. The shift by the Frobenius norm makes the
/// iterated operator positive semidefinite, so the dominant-magnitude
/// eigenvalue of the shifted matrix is the largest algebraic one of the
/// original.
inline EigResult hermitian_principal_eig(const CMat& m, double tol) {
    if (m.rows() != m.cols()) throw InvalidInputError("hermitian_principal_eig: not square");
    if (tol <= 0.0) throw InvalidInputError("hermitian_principal_eig: tol must be > 0");
    m.ensure_finite("hermitian_principal_eig");
    if (!m.is_hermitian(1e-12))
        throw InvalidInputError("hermitian_principal_eig: matrix is not Hermitian");

    const std::size_t n = m.rows();
    const double frob = m.frobenius_norm();
    if (frob == 0.0) {
        CVec v(n);
        if (n > 0) v[0] = 1.0;
        return {0.0, v};
    }

    CVec v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = cdouble{1.0 + 0.01 * static_cast<double>(i),
                       0.001 * static_cast<double>(i % 3)};
    v = v.normalized();

    constexpr int kMaxIter = 10000;
    constexpr double kRelChange = 1e-12;
    double lambda = 0.0;
    for (int it = 0; it < kMaxIter; ++it) {
        CVec y = m * v;
        for (std::size_t i = 0; i < n; ++i) y[i] += frob * v[i];
        double ny = y.norm();
        if (ny == 0.0) {
            // Start vector lies in the nullspace of the shifted operator;
            // restart from a different direction.
            for (std::size_t i = 0; i < n; ++i)
                v[i] = cdouble{std::cos(1.7 * static_cast<double>(i + 1)),
                               std::sin(0.9 * static_cast<double>(i + 1))};
            v = v.normalized();
            continue;
        }
        for (std::size_t i = 0; i < n; ++i) v[i] = y[i] / ny;
        double lambda_new = std::real(hdot(v, m * v));
        if (it > 0 && std::abs(lambda_new - lambda) <= kRelChange * std::max(1.0, std::abs(lambda_new))) {
            lambda = lambda_new;
            break;
        }
        lambda = lambda_new;
    }

    CVec r = m * v;
    for (std::size_t i = 0; i < n; ++i) r[i] -= lambda * v[i];
    double residual = r.norm();
    if (residual > tol * frob)
        throw ConvergenceError("hermitian_principal_eig: residual above tolerance", residual);
    return {lambda, v};
}

/// Cholesky-type factor L (lower triangular, L Lᴴ == m) of a positive
/// semidefinite matrix. A pivot below -tol relative to the diagonal scale
/// rejects the input; pivots in [-tol, 0] are treated as exact zeros.
inline CMat cholesky_psd(const CMat& m, double tol = 1e-12) {
    if (m.rows() != m.cols()) throw InvalidInputError("cholesky_psd: not square");
    m.ensure_finite("cholesky_psd");
    if (!m.is_hermitian(1e-10)) throw InvalidInputError("cholesky_psd: matrix is not Hermitian");
    const std::size_t n = m.rows();
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(m(i, i)));
    if (scale == 0.0) scale = 1.0;

    CMat l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = std::real(m(j, j));
        for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
        if (d < -tol * scale)
            throw InvalidInputError("cholesky_psd: matrix is not positive semidefinite");
        if (d <= tol * scale) {
            // Semidefinite direction: zero pivot, zero column.
            l(j, j) = 0.0;
            continue;
        }
        double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            cdouble s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
            l(i, j) = s / ljj;
        }
    }
    return l;
}

}  // namespace airs

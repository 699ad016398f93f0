#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "airs/linalg.hpp"

namespace airs {

/// Counter-based random stream. A draw is a pure function of
/// (seed, stream_id, counter), so identical streams replay identical
/// sequences and distinct stream ids never share state. Workers each own
/// a stream derived from the run seed.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : seed_(seed), stream_(stream_id) {
        key_ = mix(mix(seed + 0x9E3779B97F4A7C15ULL) ^
                   (stream_id * 0xBF58476D1CE4E5B9ULL + 0x94D049BB133111EBULL));
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }

    /// Fresh stream over the same seed; counter starts at zero.
    RngStream derive(std::uint64_t stream_id) const { return RngStream(seed_, stream_id); }

    std::uint64_t next_u64() {
        return mix(key_ ^ (counter_++ * 0xD6E8FEB86659FD93ULL + 0x2545F4914F6CDD1DULL));
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard real normal via Box-Muller; pairs are cached.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        auto [a, b] = normal_pair();
        cached_ = b;
        have_cached_ = true;
        return a;
    }

    /// Circularly-symmetric complex normal with unit variance, E|z|^2 = 1.
    cdouble complex_normal() {
        auto [a, b] = normal_pair();
        constexpr double inv_sqrt2 = 0.7071067811865475244;
        return cdouble{a * inv_sqrt2, b * inv_sqrt2};
    }

private:
    std::pair<double, double> normal_pair() {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double t = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(t), r * std::sin(t)};
    }

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_, stream_;
    std::uint64_t counter_ = 0;
    std::uint64_t key_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

/// Draw L z with L a Cholesky-type factor of cov and z i.i.d. unit
/// circularly-symmetric complex normal. Deterministic given the stream.
inline CVec sample_complex_gaussian(const CMat& cov, RngStream& rng) {
    CMat l = cholesky_psd(cov, 1e-12);
    CVec z(cov.rows());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = rng.complex_normal();
    CVec r(cov.rows());
    for (std::size_t i = 0; i < cov.rows(); ++i) {
        cdouble s{0.0, 0.0};
        for (std::size_t j = 0; j <= i; ++j) s += l(i, j) * z[j];
        r[i] = s;
    }
    return r;
}

}  // namespace airs

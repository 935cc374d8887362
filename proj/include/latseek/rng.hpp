#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

#include "latseek/errors.hpp"

namespace latseek {

/// Mix two 64-bit values into one (splitmix64 finalizer). Used to derive
/// per-trial seeds from (base_seed, trial_id) so that any trial of a sweep
/// is reproducible in isolation.
inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

/// Seedable random stream keyed by (seed, stream_id).
///
/// Core generator is PCG32 (O'Neill): 64-bit LCG state with the stream id
/// selecting the increment, XSH-RR output. Identical (seed, stream_id)
/// reproduce the identical bit sequence on any platform; distinct stream
/// ids give statistically independent streams without jump-ahead.
///
/// Real-valued draws (uniform, gaussian, geometric) are built only from
/// these integer outputs plus libm calls, so they are reproducible
/// run-to-run on a given platform.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0)
        : seed_(seed), stream_(stream_id) {
        inc_ = (stream_id << 1u) | 1u;
        state_ = 0u;
        next_u32();
        state_ += seed;
        next_u32();
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }

    std::uint32_t next_u32() {
        const std::uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        const auto rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /// Uniform double in [0, 1), 53 random mantissa bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in (0, 1].
    double uniform_pos() { return 1.0 - uniform01(); }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    /// Unbiased uniform index in [0, n). n must be >= 1.
    std::uint64_t uniform_index(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n; // 2^64 mod n
        for (;;) {
            const std::uint64_t x = next_u64();
            if (x >= threshold) return x % n;
        }
    }

    /// Pair of independent standard normals (Box-Muller).
    std::pair<double, double> gauss2() {
        const double u1 = uniform_pos();
        const double u2 = uniform01();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * kPi * u2;
        return {mag * std::cos(ang), mag * std::sin(ang)};
    }

    /// Geometric draw on {1, 2, ...} with success probability 1/mean,
    /// so E = mean and Var = mean*(mean-1). Inversion sampling.
    std::int64_t geometric(double mean) {
        if (!(mean >= 1.0)) throw InvalidMean("geometric: mean must be >= 1");
        if (mean == 1.0) return 1;
        const double s = 1.0 / mean;
        const double u = uniform_pos();
        const double k = std::ceil(std::log(u) / std::log1p(-s));
        if (!(k >= 1.0)) return 1;
        if (k >= 9.2e18) return std::int64_t{1} << 62; // unreachable in practice
        return static_cast<std::int64_t>(k);
    }

    /// Exact binomial draw. Small n by Bernoulli summation, moderate n*p by
    /// CDF inversion (BINV), large n*p by halving n and adding two
    /// independent draws, which keeps the inversion start value f0=(1-p)^n
    /// away from underflow.
    std::int64_t binomial(std::int64_t n, double p) {
        if (n <= 0 || p <= 0.0) return 0;
        if (p >= 1.0) return n;
        if (p > 0.5) return n - binomial(n, 1.0 - p);
        if (n <= 32) {
            std::int64_t k = 0;
            for (std::int64_t t = 0; t < n; ++t)
                if (uniform01() < p) ++k;
            return k;
        }
        const double np = static_cast<double>(n) * p;
        if (np <= 50.0) {
            const double q = 1.0 - p;
            const double ratio = p / q;
            double f = std::exp(static_cast<double>(n) * std::log1p(-p));
            double u = uniform01();
            std::int64_t k = 0;
            while (u > f && k < n) {
                u -= f;
                ++k;
                f *= ratio * static_cast<double>(n - k + 1) / static_cast<double>(k);
            }
            return k;
        }
        const std::int64_t half = n / 2;
        return binomial(half, p) + binomial(n - half, p);
    }

    /// Split a count over the four move directions with probabilities p.
    /// Conserves the total exactly (last bucket takes the remainder).
    std::array<std::int64_t, 4> multinomial4(std::int64_t n, const std::array<double, 4>& p) {
        std::array<std::int64_t, 4> out{0, 0, 0, 0};
        std::int64_t rem = n;
        double psum = 1.0;
        for (int l = 0; l < 3 && rem > 0; ++l) {
            double cond = p[static_cast<std::size_t>(l)] / psum;
            if (cond > 1.0) cond = 1.0;
            if (cond < 0.0) cond = 0.0;
            out[static_cast<std::size_t>(l)] = binomial(rem, cond);
            rem -= out[static_cast<std::size_t>(l)];
            psum -= p[static_cast<std::size_t>(l)];
            if (psum <= 0.0) psum = 1e-300;
        }
        out[3] = rem;
        return out;
    }

private:
    static constexpr double kPi = 3.14159265358979323846;

    std::uint64_t state_ = 0;
    std::uint64_t inc_ = 1;
    std::uint64_t seed_ = 0;
    std::uint64_t stream_ = 0;
};

inline std::int64_t sample_geometric(RngStream& stream, double mean) {
    return stream.geometric(mean);
}

} // namespace latseek

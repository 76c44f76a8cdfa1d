#pragma once

// Counter-based RNG (Philox4x32-10, Salmon et al., SC'11).  Stateless: the
// value stream is a pure function of (seed, sample index, stream id), so
// parallel workers can draw non-overlapping substreams deterministically and
// results never depend on the worker count.

#include <array>
#include <cmath>
#include <cstdint>

#include "nsreg/vec.hpp"

namespace nsreg {

namespace detail {

inline void philox_round(std::array<std::uint32_t, 4>& x, std::uint32_t k0, std::uint32_t k1) {
    constexpr std::uint64_t M0 = 0xD2511F53ull;
    constexpr std::uint64_t M1 = 0xCD9E8D57ull;
    const std::uint64_t p0 = M0 * x[0];
    const std::uint64_t p1 = M1 * x[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    x = {hi1 ^ x[1] ^ k0, lo1, hi0 ^ x[3] ^ k1, lo0};
}

inline std::array<std::uint32_t, 4> philox4x32(std::uint64_t key, std::array<std::uint32_t, 4> ctr) {
    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    for (int round = 0; round < 10; ++round) {
        philox_round(ctr, k0, k1);
        k0 += 0x9E3779B9u;
        k1 += 0xBB67AE85u;
    }
    return ctr;
}

} // namespace detail

/// One sample's private random stream: counter = (index lo, index hi, stream, call).
class CounterStream {
public:
    CounterStream(std::uint64_t seed, std::uint64_t index, std::uint32_t stream)
        : seed_(seed), index_(index), stream_(stream) {}

    /// Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        std::uint64_t u = next_u64();
        return static_cast<double>(u >> 11) * 0x1.0p-53;
    }

    /// Uniform in (0, 1] — safe under log().
    double next_positive() { return 1.0 - next_double(); }

    void next_gaussian_pair(double& g0, double& g1) {
        const double u1 = next_positive();
        const double u2 = next_double();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        g0 = rad * std::cos(2.0 * M_PI * u2);
        g1 = rad * std::sin(2.0 * M_PI * u2);
    }

    /// Isotropic unit direction in dim dimensions.
    Vec direction(int dim) {
        Vec g(dim);
        for (int i = 0; i + 1 < dim; i += 2) next_gaussian_pair(g[i], g[i + 1]);
        if (dim % 2) {
            double a, b;
            next_gaussian_pair(a, b);
            g[dim - 1] = a;
        }
        double n = g.norm();
        if (n < 1e-300) { // astronomically rare; fall back to an axis
            g = Vec::zero(dim);
            g[0] = 1.0;
            return g;
        }
        return g / n;
    }

    std::uint64_t next_u64() {
        if (pos_ >= 2) refill();
        std::uint64_t v = (static_cast<std::uint64_t>(buf_[2 * pos_ + 1]) << 32) | buf_[2 * pos_];
        ++pos_;
        return v;
    }

private:
    void refill() {
        buf_ = detail::philox4x32(seed_, {static_cast<std::uint32_t>(index_),
                                          static_cast<std::uint32_t>(index_ >> 32), stream_, call_++});
        pos_ = 0;
    }

    std::uint64_t seed_;
    std::uint64_t index_;
    std::uint32_t stream_;
    std::uint32_t call_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 2;
};

/// Single deterministic u64 for (seed, index, stream) — handy for probe layouts.
inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t index, std::uint32_t stream) {
    auto b = detail::philox4x32(seed, {static_cast<std::uint32_t>(index),
                                       static_cast<std::uint32_t>(index >> 32), stream, 0});
    return (static_cast<std::uint64_t>(b[1]) << 32) | b[0];
}

} // namespace nsreg

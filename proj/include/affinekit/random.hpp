#pragma once

#include "affinekit/matcore.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>

namespace affinekit {

/// Counter-based generator: output k is splitmix64(seed + k * golden_gamma).
/// Streams are fully determined by (seed, counter), so results do not depend
/// on the standard library's distribution implementations.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()() { return mix(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (both variates used).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

    [[nodiscard]] std::uint64_t counter() const { return counter_; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Entries uniform in [lo, hi].
inline Mat random_matrix(CounterRng& rng, int n, double lo = -1.0, double hi = 1.0) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = rng.uniform(lo, hi);
    return m;
}

inline Vec random_vector(CounterRng& rng, int n, double lo = -1.0, double hi = 1.0) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
    return v;
}

/// Entries in [-1, 1], resampled until |det| > min_abs_det.
inline Mat random_invertible(CounterRng& rng, int n, double min_abs_det = 0.1) {
    for (;;) {
        Mat m = random_matrix(rng, n);
        if (std::abs(m.determinant()) > min_abs_det) return m;
    }
}

/// As random_invertible, restricted to det > min_det.
inline Mat random_gl_plus(CounterRng& rng, int n, double min_det = 0.1) {
    for (;;) {
        Mat m = random_matrix(rng, n);
        if (m.determinant() > min_det) return m;
    }
}

}  // namespace affinekit

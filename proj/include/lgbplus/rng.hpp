#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "errors.hpp"

namespace lgbplus {

// ============================================================================
// Deterministic stream derivation
//
// Every random decision in the library draws from a stream addressed by a
// StreamKey = (base seed, purpose, a, b). The mapping is a fixed splitmix64
// chain, so identical keys give identical streams on every run and every
// platform. Typical addressing:
//   subsampling        (seed, purpose::subsample,      step, 0)
//   feature subsets    (seed, purpose::feature_subset, step, 0)
//   VI permutations    (seed, purpose::permutation,    group, repeat)
//   ensemble members   (seed, purpose::member,         member, 0)
// ============================================================================

namespace purpose {
inline constexpr std::uint64_t subsample       = 1;
inline constexpr std::uint64_t feature_subset  = 2;
inline constexpr std::uint64_t permutation     = 3;
inline constexpr std::uint64_t member          = 4;
inline constexpr std::uint64_t dgp_calibration = 5;
inline constexpr std::uint64_t dgp_train_x     = 6;
inline constexpr std::uint64_t dgp_test_x      = 7;
inline constexpr std::uint64_t dgp_train_noise = 8;
inline constexpr std::uint64_t dgp_test_noise  = 9;
inline constexpr std::uint64_t bench_fit       = 10;
inline constexpr std::uint64_t generic         = 11;
} // namespace purpose

struct StreamKey {
    std::uint64_t base = 0;
    std::uint64_t purpose = purpose::generic;
    std::uint64_t a = 0;
    std::uint64_t b = 0;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
} // namespace detail

inline std::uint64_t derive_seed(const StreamKey& key) {
    std::uint64_t h = detail::mix64(key.base ^ 0x8c5fab65a1c3e4d7ULL);
    h = detail::mix64(h ^ key.purpose);
    h = detail::mix64(h ^ key.a);
    h = detail::mix64(h ^ key.b);
    return h;
}

// Seed for ensemble member e. Member 0 reuses the base seed so a size-1
// ensemble is identical to a single fit.
inline std::uint64_t member_seed(std::uint64_t base_seed, int member) {
    if (member == 0) return base_seed;
    return derive_seed({base_seed, purpose::member,
                        static_cast<std::uint64_t>(member), 0});
}

// splitmix64 generator over a derived stream.
class Rng {
public:
    explicit Rng(const StreamKey& key) : state_(derive_seed(key)) {}
    explicit Rng(std::uint64_t raw_seed) : state_(raw_seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Unbiased integer in [0, n).
    std::uint64_t uniform_below(std::uint64_t n) {
        if (n == 0) throw InternalError("uniform_below: n must be positive");
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t v = next_u64();
            if (v >= threshold) return v % n;
        }
    }

    // Uniform in [0, 1).
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; consumes two uniforms per draw.
    double normal() {
        const double u1 =
            (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; // (0,1]
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
    }

    // Uniform without-replacement sample of k elements from {0..n-1},
    // returned sorted ascending.
    std::vector<int> sample_without_replacement(int n, int k) {
        if (k < 0 || k > n)
            throw InternalError("sample_without_replacement: bad k");
        std::vector<int> pool(static_cast<std::size_t>(n));
        std::iota(pool.begin(), pool.end(), 0);
        for (int i = 0; i < k; ++i) {
            const int j =
                i + static_cast<int>(uniform_below(static_cast<std::uint64_t>(n - i)));
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        }
        pool.resize(static_cast<std::size_t>(k));
        std::sort(pool.begin(), pool.end());
        return pool;
    }

    // Random permutation of {0..n-1} (Fisher-Yates).
    std::vector<int> permutation(int n) {
        std::vector<int> p(static_cast<std::size_t>(n));
        std::iota(p.begin(), p.end(), 0);
        for (int i = n - 1; i > 0; --i) {
            const int j =
                static_cast<int>(uniform_below(static_cast<std::uint64_t>(i + 1)));
            std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
        }
        return p;
    }

private:
    std::uint64_t state_;
};

} // namespace lgbplus

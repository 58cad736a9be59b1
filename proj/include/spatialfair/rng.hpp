#pragma once

// Seeded random streams with bit-identical output on every platform.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The standard distributions are not, so all draws below go through
// explicit conversions. Independent streams (one per simulated world, one per
// random partitioning, ...) are derived from a master seed and a stream index
// with splitmix64, so results never depend on thread scheduling.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace spatialfair {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Seed of stream `index` under master seed `seed`. `domain` separates the
// stream families (worlds, partitionings, k-means, ...) drawn from one seed.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t domain, std::uint64_t index) {
    return splitmix64(splitmix64(seed ^ splitmix64(domain)) + index);
}

namespace stream_domain {
inline constexpr std::uint64_t worlds = 0x776f726c64ULL;
inline constexpr std::uint64_t partitionings = 0x7061727473ULL;
inline constexpr std::uint64_t kmeans = 0x6b6d65616e73ULL;
inline constexpr std::uint64_t synth = 0x73796e7468ULL;
}  // namespace stream_domain

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) {
        const double v = lo + (hi - lo) * uniform();
        return v < hi ? v : std::nextafter(hi, lo);
    }

    // Uniform integer in [lo, hi], unbiased by rejection.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(engine_());
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t r;
        do {
            r = engine_();
        } while (r >= limit);
        return lo + static_cast<std::int64_t>(r % span);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller; one draw per call.
    double normal(double mean, double sd) {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    template <class It>
    void shuffle(It first, It last) {
        const auto n = last - first;
        for (decltype(last - first) i = n - 1; i > 0; --i) {
            const auto j = uniform_int(0, static_cast<std::int64_t>(i));
            std::swap(first[i], first[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace spatialfair

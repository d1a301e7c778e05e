#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace conflictlens {

// All randomness in the library flows through Rng. std::mt19937_64 is fully
// specified by the standard, and every sampler below is written out
// explicitly (no std:: distributions), so a given seed produces the same
// stream on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n). Modulo bias is negligible at these ranges.
    std::uint64_t uniform_index(std::uint64_t n) { return engine_() % n; }

    bool bernoulli(double p) { return uniform01() < p; }

    // Box-Muller, one value per call (two uniforms consumed).
    double normal01() {
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal01(); }

    // Normal restricted to (lo, hi) by rejection.
    double truncated_normal(double mean, double sd, double lo, double hi) {
        for (;;) {
            const double x = normal(mean, sd);
            if (x > lo && x < hi) return x;
        }
    }

    // Marsaglia-Tsang; shape < 1 handled via the boost trick.
    double gamma(double shape, double scale) {
        if (shape < 1.0) {
            const double u = uniform01();
            return gamma(shape + 1.0, scale) * std::pow(u > 0.0 ? u : 0x1.0p-53, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal01();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
        }
    }

    // Index drawn from an (unnormalized is fine) discrete distribution.
    std::size_t categorical(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform01() * total;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            u -= weights[i];
            if (u < 0.0) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

    // Fisher-Yates, in place.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

namespace detail {

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace detail

// Derives the seed of a named sub-stream (split, smote, forest, boost, tune,
// ...) from the single user-supplied seed, so each component can be
// reproduced in isolation.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) {
    return detail::splitmix64(seed ^ detail::fnv1a64(stream));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index) {
    return detail::splitmix64(derive_seed(seed, stream) + 0x632be59bd9b4e019ull * (index + 1));
}

}  // namespace conflictlens

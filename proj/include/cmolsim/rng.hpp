#pragma once

// Deterministic seeded randomness. One master seed expands into named
// sub-streams (device, mismatch, stdp, shapes, ...) so each source of
// randomness replays independently of the others. All samplers are
// implemented on top of the raw mt19937_64 output instead of the standard
// <random> distributions, whose bit streams are implementation-defined.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace cmolsim {

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view name) {
    return splitmix64(master ^ fnv1a64(name));
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ (index + 1));
}

class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    // Forks derive from this stream's seed, not from its current state, so a
    // fork is reproducible no matter how much of the parent has been consumed.
    RngStream fork(std::string_view name) const { return RngStream(derive_seed(seed_, name)); }
    RngStream fork(std::uint64_t index) const { return RngStream(derive_seed(seed_, index)); }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // Unbiased integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        if (n == 0)
            throw std::invalid_argument("RngStream::below: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r = engine_();
        while (r >= limit)
            r = engine_();
        return r % n;
    }

    // Standard normal via Box-Muller; consumes exactly two uniforms per call.
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    // Log-normal parameterized by its median and log-space sigma.
    double lognormal_median(double median, double log_sigma) {
        if (!(median > 0.0))
            throw std::invalid_argument("lognormal_median: median must be positive");
        return std::exp(std::log(median) + log_sigma * normal());
    }

    // Gaussian resampled until it lands inside [lo, hi].
    double truncated_normal(double mean, double sigma, double lo, double hi) {
        if (!(lo <= hi))
            throw std::invalid_argument("truncated_normal: empty interval");
        for (int i = 0; i < 100000; ++i) {
            const double x = normal(mean, sigma);
            if (x >= lo && x <= hi)
                return x;
        }
        throw std::runtime_error("truncated_normal: acceptance region too unlikely");
    }

    // k distinct indices drawn uniformly from [0, n), in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        if (k > n)
            throw std::invalid_argument("sample_without_replacement: k > n");
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i)
            pool[i] = i;
        std::vector<std::size_t> out;
        out.reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(below(n - i));
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
        return out;
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace cmolsim

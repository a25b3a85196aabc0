#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace swarmtab {

// Deterministic random stream. mt19937_64 word output is fully specified by
// the C++ standard, and every floating-point draw below is derived from raw
// 64-bit words, so streams are identical across platforms and standard
// library implementations (std::uniform_real_distribution et al. are not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
        const std::uint64_t limit = max - max % n;
        for (;;) {
            std::uint64_t v = gen_();
            if (v < limit) return v % n;
        }
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Standard normal via Box-Muller; draws exactly two uniforms per call.
    double normal() {
        double u1 = 1.0 - uniform(); // (0, 1], keeps log finite
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Independent child stream; derived from the original seed and a tag, so
    // splitting does not consume state from this stream.
    Rng split(std::uint64_t tag) const { return Rng(mix(seed_, tag)); }

    std::uint64_t seed() const { return seed_; }

    // SplitMix64 finalizer over seed ^ tag.
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t tag) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

} // namespace swarmtab

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>

namespace qspec::rng {

// SplitMix64 finalizer; used both for seed derivation and label hashing.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_label(std::string_view label) {
    // FNV-1a 64
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// Stream derivation scheme: every random stream in the toolkit is
// identified by (top-level seed, textual label, integer index). The
// derived 64-bit value seeds a std::mt19937_64, whose output sequence
// is fully specified by the standard, so runs are reproducible across
// platforms. Distribution sampling below is hand-rolled for the same
// reason (std:: distributions are implementation-defined).
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label, std::uint64_t index) {
    return mix64(mix64(seed ^ hash_label(label)) + index);
}

class Stream {
  public:
    explicit Stream(std::uint64_t derived_seed) : eng_(derived_seed) {}
    Stream(std::uint64_t seed, std::string_view label, std::uint64_t index = 0)
        : eng_(derive_seed(seed, label, index)) {}

    std::uint64_t bits() { return eng_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // polar Box-Muller; second deviate cached
    double normal() {
        if (have_cache_) {
            have_cache_ = false;
            return cache_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        cache_ = v * m;
        have_cache_ = true;
        return u * m;
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    double exponential(double mean) {
        double u;
        do {
            u = uniform();
        } while (u <= 0.0);
        return -mean * std::log(u);
    }

    // Exact Poisson sampling: Knuth multiplication for chunks of mean
    // <= 30 (additivity of independent Poisson variates handles larger
    // means without underflow).
    long poisson(double mean) {
        if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean must be >= 0");
        long total = 0;
        while (mean > 30.0) {
            total += poisson_knuth(30.0);
            mean -= 30.0;
        }
        return total + poisson_knuth(mean);
    }

  private:
    long poisson_knuth(double mean) {
        if (mean <= 0.0) return 0;
        const double limit = std::exp(-mean);
        long k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        return k - 1;
    }

    std::mt19937_64 eng_;
    double cache_ = 0.0;
    bool have_cache_ = false;
};

} // namespace qspec::rng

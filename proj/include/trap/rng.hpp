#pragma once

#include <cmath>
#include <cstdint>
#include <string>

namespace trap {

/// Deterministic generator with a fixed cross-platform bit stream
/// (splitmix64). std::uniform_real_distribution is implementation
/// defined, so all draws are derived from raw 64-bit words here.
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller; consumes two words per pair.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        // avoid log(0)
        if (u1 < 1e-300) u1 = 1e-300;
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Uniform integer in [0, n).
    uint64_t below(uint64_t n) { return next_u64() % n; }

  private:
    uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// FNV-1a, used for seed derivation tags and file checksums.
inline uint64_t fnv1a(const void* bytes, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

/// Stage/item seed derivation: master seed mixed with a tag through
/// splitmix. Recorded in run manifests so every stage is reproducible
/// in isolation.
inline uint64_t derive_seed(uint64_t master, const std::string& tag) {
    Rng r(master ^ fnv1a(tag));
    return r.next_u64();
}

inline uint64_t derive_seed(uint64_t master, const std::string& tag, uint64_t index) {
    Rng r(master ^ fnv1a(tag) ^ (0x9e3779b97f4a7c15ull * (index + 1)));
    return r.next_u64();
}

}  // namespace trap

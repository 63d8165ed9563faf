#pragma once

#include <cmath>
#include <cstdint>

namespace mflab {

/// Deterministic splittable PRNG. The stream is a pure function of
/// (seed, stream_id), so parallel trials can draw independent,
/// reproducible randomness regardless of scheduling.
class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream_id = 0)
        : state_(mix(mix(seed) ^ mix(stream_id ^ 0x9e3779b97f4a7c15ull))) {}

    std::uint64_t next_u64() {
        // splitmix64 step
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; platform-independent.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // modulo bias is negligible for the n used here (n << 2^64)
        return next_u64() % n;
    }

    Rng split(std::uint64_t task_index) const {
        return Rng(state_, task_index ^ 0xd1b54a32d192ed03ull);
    }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace mflab

#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace rprae {

// Splittable deterministic RNG. Every stream is identified by the 64-bit
// seed it was born with; split() derives an independent child stream from
// (parent seed, label) without consuming parent state, so the stream tree
// depends only on seeds and labels, never on draw order.
//
// Core generator is splitmix64; gaussian() uses Box-Muller (cosine branch).
// No std::random engines or distributions anywhere, so sequences are
// bit-stable across platforms and standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), state_(mix(seed ^ kStreamSalt)) {}

    Rng split(std::string_view label) const { return Rng(mix(seed_ ^ fnv1a(label))); }

    Rng split(std::uint64_t index) const { return Rng(mix(seed_ ^ mix(index ^ kIndexSalt))); }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    // [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    double gaussian(double mean = 0.0, double sd = 1.0) {
        // u1 in (0, 1] so the log is finite.
        double u1 = 1.0 - next_double();
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sd * r * std::cos(2.0 * kPi * u2);
    }

    // [0, n), n > 0. Multiply-high keeps the map deterministic and nearly unbiased.
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

  private:
    static constexpr std::uint64_t kStreamSalt = 0x5851f42d4c957f2dull;
    static constexpr std::uint64_t kIndexSalt = 0xd6e8feb86659fd93ull;
    static constexpr double kPi = 3.14159265358979323846;

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    static std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
        return h;
    }

    std::uint64_t seed_;
    std::uint64_t state_;
};

}  // namespace rprae

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace osub {

// A seeded random stream. Child streams are derived by hashing the parent seed
// with a tag, so a replicate's randomness depends only on (master seed, path)
// and never on scheduling.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

    static RngStream derive(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
        std::uint64_t s = master;
        for (std::uint64_t tag : path) s = combine(s, tag);
        return RngStream(s);
    }

    RngStream child(std::uint64_t tag) const { return RngStream(combine(seed_, tag)); }

    std::uint64_t seed() const noexcept { return seed_; }
    std::mt19937_64& engine() noexcept { return engine_; }

    // Uniform on [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer on [0, n).
    std::uint64_t below(std::uint64_t n) {
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
    }

private:
    // splitmix64 finaliser
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    static std::uint64_t combine(std::uint64_t seed, std::uint64_t tag) {
        return mix(seed ^ mix(tag + 0x632be59bd9b4e019ULL));
    }

    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace osub

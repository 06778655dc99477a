#pragma once

#include <cstdint>

namespace soclearn {

// Counter-based generator: every draw is a pure function of
// (run seed, time step, stream), so agents can be sampled in any order or in
// parallel and still reproduce the same sample path. The mixing function is the
// SplitMix64 finalizer applied to a keyed counter.
class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t seed) : seed_(seed) {}

    constexpr std::uint64_t bits(std::uint64_t step, std::uint64_t stream) const {
        std::uint64_t x = mix(seed_ ^ 0x6a09e667f3bcc909ULL);
        x = mix(x ^ (step * 0x9e3779b97f4a7c15ULL));
        x = mix(x ^ (stream * 0xbf58476d1ce4e5b9ULL + 0x94d049bb133111ebULL));
        return x;
    }

    // Uniform on [0, 1) with 53 random bits.
    constexpr double uniform(std::uint64_t step, std::uint64_t stream) const {
        return static_cast<double>(bits(step, stream) >> 11) * 0x1.0p-53;
    }

    constexpr std::uint64_t seed() const { return seed_; }

private:
    static constexpr std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
};

} // namespace soclearn

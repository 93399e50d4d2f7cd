#pragma once

// Random streams for the simulator.
//
// Generator: xoshiro256** (Blackman & Vigna). A stream is identified by a
// 256-bit key (master seed, path index, asset index, domain tag) that is
// mapped bijectively onto the generator state, so distinct keys always give
// distinct initial states.
//
// Uniform variates use the top 53 bits, shifted by half an ulp so that the
// result lies in the open interval (0, 1). Normal variates use the
// Box-Muller transform, returning the cosine branch first and caching the
// sine branch for the next call.
//
// Results are reproducible run-to-run on one platform. Bit identity across
// platforms additionally depends on the libm implementations of log, cos,
// sin and sqrt.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace fbmarb {

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Identifies one independent random stream.
struct StreamKey {
    std::uint64_t master_seed = 0;
    std::uint64_t path_index = 0;
    std::uint64_t asset_index = 0;
    std::uint64_t domain = 0;  // separates unrelated consumers sharing a seed
};

class RandomStream {
public:
    using result_type = std::uint64_t;

    explicit RandomStream(const StreamKey& key) noexcept {
        // Forward then backward chaining of the SplitMix64 finalizer: every
        // step is invertible, so the key-to-state map is a bijection, and every
        // state word depends on every key word.
        std::uint64_t w0 = splitmix64_mix(key.master_seed ^ 0x9e3779b97f4a7c15ULL);
        std::uint64_t w1 = splitmix64_mix(key.path_index + w0);
        std::uint64_t w2 = splitmix64_mix(key.asset_index + w1);
        std::uint64_t w3 = splitmix64_mix(key.domain + w2);
        w2 = splitmix64_mix(w2 + w3);
        w1 = splitmix64_mix(w1 + w2);
        w0 = splitmix64_mix(w0 + w1);
        state_ = {w0, w1, w2, w3};
        if ((w0 | w1 | w2 | w3) == 0) state_[3] = 0x6a09e667f3bcc909ULL;
    }

    explicit RandomStream(std::uint64_t seed) noexcept : RandomStream(StreamKey{seed, 0, 0, 0}) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double radius = std::sqrt(-2.0 * std::log(uniform()));
        const double angle = 2.0 * std::numbers::pi * uniform();
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace fbmarb

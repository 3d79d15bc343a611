#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace taml {

/// Deterministic 64-bit PRNG: splitmix64 expands the seed into the state of
/// a xoshiro256** generator. The algorithm is fixed so that seeded streams
/// reproduce bit-for-bit across platforms and implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& s : state_) s = splitmix64(x);
    }

    /// Independent stream for a (seed, stream-id) pair; used to hand each
    /// concurrent task its own generator.
    static Rng derive(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t x = seed;
        std::uint64_t a = splitmix64(x);
        x = stream ^ 0x9E3779B97F4A7C15ULL;
        std::uint64_t b = splitmix64(x);
        return Rng(a ^ (b + 0x632BE59BD9B4E019ULL));
    }

    std::uint64_t next_u64() {
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

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        if (!(lo < hi)) throw std::invalid_argument("rng uniform requires lo < hi");
        const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        return lo + u * (hi - lo);
    }

    /// Uniform integer in [0, n); multiply-shift mapping of one raw draw.
    std::int64_t next_int(std::int64_t n) {
        if (n <= 0) throw std::invalid_argument("rng next_int requires n > 0");
        const auto wide = static_cast<__uint128_t>(next_u64()) * static_cast<__uint128_t>(n);
        return static_cast<std::int64_t>(wide >> 64);
    }

    /// Standard normal via Box-Muller; consumes exactly two raw draws.
    double normal() {
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;        // [0, 1)
        constexpr double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
};

}  // namespace taml

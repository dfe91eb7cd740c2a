#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace genprior {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/**
 * Counter-based generator: the i-th output is mix64(key + i * golden),
 * so any output is a pure function of (key, i). Only integer arithmetic is
 * involved, which makes streams identical on every platform.
 *
 * Independent streams are derived from (seed, stream id) with for_stream().
 */
class CounterRng
{
public:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

    explicit constexpr CounterRng(std::uint64_t seed) noexcept : key_(mix64(seed)) {}

    static constexpr CounterRng for_stream(std::uint64_t seed, std::uint64_t stream) noexcept
    {
        CounterRng rng(0);
        rng.key_ = mix64(mix64(seed) ^ mix64(stream * 0xD1B54A32D192ED03ull + 1));
        return rng;
    }

    constexpr std::uint64_t next_u64() noexcept
    {
        ++counter_;
        return mix64(key_ + counter_ * kGolden);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    constexpr double uniform01() noexcept
    {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    constexpr double uniform(double lo, double hi) noexcept
    {
        return lo + (hi - lo) * uniform01();
    }

    /// Unbiased integer in [0, n) (Lemire's multiply-and-reject). n must be > 0.
    constexpr std::uint64_t uniform_index(std::uint64_t n) noexcept
    {
        __uint128_t m = static_cast<__uint128_t>(next_u64()) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                m = static_cast<__uint128_t>(next_u64()) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Standard normal via Box-Muller (one value per call, two draws).
    double normal() noexcept
    {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    constexpr std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace genprior

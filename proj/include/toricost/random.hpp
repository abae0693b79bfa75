#pragma once

#include <cstdint>

namespace toricost
{

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Counter-based stream: the i-th sample of a run owns stream i, so the
/// values it sees do not depend on how indices are split across workers.
class CounterRng
{
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
        : state_(mix64(seed ^ mix64(stream + 0x632BE59BD9B4E019ull)))
    {
    }

    std::uint64_t next() noexcept
    {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept
    {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

/// Derive an independent seed for a named sub-purpose of a run.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose) noexcept
{
    return mix64(seed + mix64(purpose));
}

}  // namespace toricost

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace slicesim::sim
{
/// splitmix64 finalizer; used to derive per-entity seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// FNV-1a over the stream label, so the label maps to the same 64-bit value
/// on every platform.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept
{
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s)
    {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

constexpr std::uint64_t derive_stream_seed(std::uint64_t seed, std::string_view stream_id) noexcept
{
    return splitmix64(seed ^ splitmix64(fnv1a64(stream_id)));
}

/// Deterministic random stream keyed by (global seed, stream label). Adding a
/// stream never perturbs the draws of another one.
class RngStream
{
  public:
    RngStream(std::uint64_t seed, std::string_view stream_id)
        : seed_(seed), engine_(derive_stream_seed(seed, stream_id))
    {
    }

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of precision.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [lo, hi], inclusive. Rejection sampling keeps it
    /// unbiased without relying on std distributions (implementation-defined).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi)
    {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0)
        {
            return static_cast<std::int64_t>(engine_());
        }
        const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % span);
        std::uint64_t v;
        do
        {
            v = engine_();
        } while (v >= limit);
        return lo + static_cast<std::int64_t>(v % span);
    }

  private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};
} // namespace slicesim::sim

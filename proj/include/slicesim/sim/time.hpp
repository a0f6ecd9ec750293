#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>

namespace slicesim::sim
{
/// Simulated time in integer microseconds since simulation start. Also used
/// for durations; there is no floating-point time anywhere in the engine.
struct SimTime
{
    std::uint64_t us{0};

    constexpr auto operator<=>(const SimTime&) const = default;

    constexpr SimTime& operator+=(SimTime d) noexcept
    {
        us += d.us;
        return *this;
    }
    constexpr double to_ms() const noexcept { return static_cast<double>(us) / 1000.0; }
    constexpr double to_s() const noexcept { return static_cast<double>(us) / 1e6; }
};

constexpr SimTime operator+(SimTime a, SimTime b) noexcept { return SimTime{a.us + b.us}; }

constexpr SimTime operator-(SimTime a, SimTime b)
{
    if (b.us > a.us)
    {
        throw std::underflow_error("SimTime subtraction would go negative");
    }
    return SimTime{a.us - b.us};
}

constexpr SimTime operator*(SimTime a, std::uint64_t k) noexcept { return SimTime{a.us * k}; }

constexpr SimTime micros(std::uint64_t n) noexcept { return SimTime{n}; }
constexpr SimTime millis(std::uint64_t n) noexcept { return SimTime{n * 1000}; }
constexpr SimTime seconds(std::uint64_t n) noexcept { return SimTime{n * 1000000}; }

/// 30 kHz numerology slot length.
inline constexpr SimTime kSlot = micros(500);

/// First slot boundary at or after t.
constexpr SimTime next_slot_boundary(SimTime t) noexcept
{
    const auto rem = t.us % kSlot.us;
    return rem == 0 ? t : SimTime{t.us + (kSlot.us - rem)};
}
} // namespace slicesim::sim

#pragma once

#include <cstdint>
#include <string>
#include <type_traits>

namespace slicesim
{
// Packed S-NSSAI (sst << 24 | sd).
enum class SliceId : std::uint32_t {};
enum class UeId : std::uint32_t {};

template <typename E>
constexpr auto raw(E e) noexcept
{
    return static_cast<std::underlying_type_t<E>>(e);
}

std::string to_string(SliceId id);
std::string to_string(UeId id);
} // namespace slicesim

#include "slicesim/ids.hpp"

#include <fmt/format.h>

namespace slicesim
{
std::string to_string(SliceId id)
{
    const auto v = raw(id);
    return fmt::format("{}:{:06x}", v >> 24, v & 0xFFFFFFu);
}

std::string to_string(UeId id) { return fmt::format("ue{}", raw(id)); }
} // namespace slicesim

#pragma once

#include "slicesim/radio/radio.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

// Wire format (all integers big-endian):
//
//   header  : version u8 | msg_type u8 | txn_id u32 | payload_len u32   (10 bytes)
//   payload : IE*, each tag u16 | len u16 | value[len]
//
// payload_len is the exact payload byte count. An empty IE list is legal.

namespace slicesim::e2
{
using Bytes = std::vector<std::uint8_t>;

inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 10;
inline constexpr std::size_t kIeHeaderSize = 4;
inline constexpr std::size_t kMaxIeValue = 0xFFFF;

enum class MsgType : std::uint8_t
{
    SetupRequest = 1,
    SetupResponse = 2,
    SubscriptionRequest = 3,
    SubscriptionResponse = 4,
    Indication = 5,
    ControlRequest = 6,
    ControlAck = 7,
    Failure = 8,
};

bool is_known(MsgType t) noexcept;
const char* to_string(MsgType t) noexcept;

namespace tag
{
inline constexpr std::uint16_t NodeId = 1;
inline constexpr std::uint16_t RanFunctionList = 2;
inline constexpr std::uint16_t ReportPeriod = 3;
inline constexpr std::uint16_t KpiPayload = 4;
inline constexpr std::uint16_t ControlAction = 5;
inline constexpr std::uint16_t Cause = 6;
inline constexpr std::uint16_t AppliedAt = 7;
} // namespace tag

struct Ie
{
    std::uint16_t tag{0};
    Bytes value;
    bool operator==(const Ie&) const = default;
};

struct E2Message
{
    std::uint8_t version{kVersion};
    MsgType msg_type{MsgType::SetupRequest};
    std::uint32_t txn_id{0};
    std::vector<Ie> ies;

    const Ie* find(std::uint16_t t) const;
    bool operator==(const E2Message&) const = default;
};

class IeTooLarge : public std::length_error
{
  public:
    using std::length_error::length_error;
};

class InvalidMessage : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

Bytes encode(const E2Message& msg);

enum class DecodeError
{
    Truncated,      // fewer than 10 header bytes
    LengthMismatch, // payload_len disagrees with the bytes present
    IeOverrun,      // an IE header or value runs past the payload
    BadVersion,
    UnknownMsgType, // structurally valid; message returned but flagged
};

const char* to_string(DecodeError e) noexcept;

struct DecodeResult
{
    std::optional<E2Message> message;
    std::optional<DecodeError> error;

    bool ok() const noexcept { return message.has_value() && !error.has_value(); }
};

/// Never throws; any byte string yields a message or a typed error.
DecodeResult decode(std::span<const std::uint8_t> bytes) noexcept;

// IE value helpers ---------------------------------------------------------

Bytes be_u32(std::uint32_t v);
Bytes be_u64(std::uint64_t v);
std::optional<std::uint32_t> read_u32(std::span<const std::uint8_t> v);
std::optional<std::uint64_t> read_u64(std::span<const std::uint8_t> v);
Bytes text(std::string_view s);
std::string as_text(std::span<const std::uint8_t> v);

/// RanFunctionList: u16 function ids, back to back.
Bytes function_list(std::span<const std::uint16_t> ids);
std::optional<std::vector<std::uint16_t>> read_function_list(std::span<const std::uint8_t> v);

// KPI payload --------------------------------------------------------------

enum class Metric : std::uint8_t
{
    DlThroughput = 1,
    UlThroughput = 2,
    Connected = 3,
    PrbUsage = 4,
};

enum class ScopeKind : std::uint8_t
{
    Cell = 0,
    Slice = 1,
    Ue = 2,
};

struct KpiEntry
{
    Metric metric{Metric::DlThroughput};
    ScopeKind scope_kind{ScopeKind::Cell};
    std::uint32_t scope{0};
    double value{0.0};
    bool operator==(const KpiEntry&) const = default;
};

/// u16 count, then per entry: (scope_kind << 4 | metric) u8, scope u32,
/// value i64 in milliunits. Values are rounded to the nearest milliunit.
Bytes encode_kpis(std::span<const KpiEntry> entries);
std::optional<std::vector<KpiEntry>> decode_kpis(std::span<const std::uint8_t> v);

/// Value as it survives the wire (rounded to milliunits).
double quantize(double v) noexcept;

// Control actions ----------------------------------------------------------

struct SetSliceShares
{
    std::vector<radio::SliceShare> shares;
    bool operator==(const SetSliceShares&) const = default;
};

using ControlAction = std::variant<SetSliceShares>;

/// Action type u8 (1 = SetSliceShares), count u8, then per slice: slice u32,
/// share u32 in parts per million.
Bytes encode_action(const ControlAction& action);
/// nullopt for malformed bodies and unsupported action types.
std::optional<ControlAction> decode_action(std::span<const std::uint8_t> v);

/// Multi-line human readable rendering used by `e2dump`.
std::string describe(const E2Message& msg);
std::string hex(std::span<const std::uint8_t> bytes);
std::optional<Bytes> parse_hex(std::string_view s);
} // namespace slicesim::e2

#include "slicesim/e2/codec.hpp"

#include <cctype>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace slicesim::e2
{
namespace
{
void put_u16(Bytes& out, std::uint16_t v)
{
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(Bytes& out, std::uint32_t v)
{
    for (int shift = 24; shift >= 0; shift -= 8)
    {
        out.push_back(static_cast<std::uint8_t>(v >> shift));
    }
}

void put_u64(Bytes& out, std::uint64_t v)
{
    for (int shift = 56; shift >= 0; shift -= 8)
    {
        out.push_back(static_cast<std::uint8_t>(v >> shift));
    }
}

std::uint16_t get_u16(const std::uint8_t* p) { return static_cast<std::uint16_t>((p[0] << 8) | p[1]); }

std::uint32_t get_u32(const std::uint8_t* p)
{
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

std::uint64_t get_u64(const std::uint8_t* p)
{
    return (static_cast<std::uint64_t>(get_u32(p)) << 32) | get_u32(p + 4);
}

constexpr std::size_t kKpiEntrySize = 13;
constexpr std::uint8_t kActionSetSliceShares = 1;
} // namespace

bool is_known(MsgType t) noexcept
{
    const auto v = static_cast<std::uint8_t>(t);
    return v >= 1 && v <= 8;
}

const char* to_string(MsgType t) noexcept
{
    switch (t)
    {
    case MsgType::SetupRequest:
        return "SetupRequest";
    case MsgType::SetupResponse:
        return "SetupResponse";
    case MsgType::SubscriptionRequest:
        return "SubscriptionRequest";
    case MsgType::SubscriptionResponse:
        return "SubscriptionResponse";
    case MsgType::Indication:
        return "Indication";
    case MsgType::ControlRequest:
        return "ControlRequest";
    case MsgType::ControlAck:
        return "ControlAck";
    case MsgType::Failure:
        return "Failure";
    }
    return "Unknown";
}

const char* to_string(DecodeError e) noexcept
{
    switch (e)
    {
    case DecodeError::Truncated:
        return "Truncated";
    case DecodeError::LengthMismatch:
        return "LengthMismatch";
    case DecodeError::IeOverrun:
        return "IeOverrun";
    case DecodeError::BadVersion:
        return "BadVersion";
    case DecodeError::UnknownMsgType:
        return "UnknownMsgType";
    }
    return "Unknown";
}

const Ie* E2Message::find(std::uint16_t t) const
{
    for (const auto& ie : ies)
    {
        if (ie.tag == t)
        {
            return &ie;
        }
    }
    return nullptr;
}

Bytes encode(const E2Message& msg)
{
    if (!is_known(msg.msg_type))
    {
        throw InvalidMessage(fmt::format("unknown msg_type {}", static_cast<int>(msg.msg_type)));
    }
    std::size_t payload = 0;
    for (const auto& ie : msg.ies)
    {
        if (ie.value.size() > kMaxIeValue)
        {
            throw IeTooLarge(fmt::format("IE tag {} carries {} bytes (max {})", ie.tag, ie.value.size(), kMaxIeValue));
        }
        payload += kIeHeaderSize + ie.value.size();
    }
    if (payload > std::numeric_limits<std::uint32_t>::max() - kHeaderSize)
    {
        throw InvalidMessage("encoded message exceeds 2^32 bytes");
    }
    Bytes out;
    out.reserve(kHeaderSize + payload);
    out.push_back(msg.version);
    out.push_back(static_cast<std::uint8_t>(msg.msg_type));
    put_u32(out, msg.txn_id);
    put_u32(out, static_cast<std::uint32_t>(payload));
    for (const auto& ie : msg.ies)
    {
        put_u16(out, ie.tag);
        put_u16(out, static_cast<std::uint16_t>(ie.value.size()));
        out.insert(out.end(), ie.value.begin(), ie.value.end());
    }
    return out;
}

DecodeResult decode(std::span<const std::uint8_t> bytes) noexcept
{
    DecodeResult r;
    if (bytes.size() < kHeaderSize)
    {
        r.error = DecodeError::Truncated;
        return r;
    }
    const std::uint8_t* p = bytes.data();
    const auto payload_len = static_cast<std::size_t>(get_u32(p + 6));
    if (payload_len != bytes.size() - kHeaderSize)
    {
        r.error = DecodeError::LengthMismatch;
        return r;
    }
    if (p[0] != kVersion)
    {
        r.error = DecodeError::BadVersion;
        return r;
    }
    try
    {
        E2Message msg;
        msg.version = p[0];
        msg.msg_type = static_cast<MsgType>(p[1]);
        msg.txn_id = get_u32(p + 2);
        std::size_t pos = kHeaderSize;
        while (pos < bytes.size())
        {
            if (bytes.size() - pos < kIeHeaderSize)
            {
                r.error = DecodeError::IeOverrun;
                return r;
            }
            const auto t = get_u16(p + pos);
            const auto len = static_cast<std::size_t>(get_u16(p + pos + 2));
            pos += kIeHeaderSize;
            if (bytes.size() - pos < len)
            {
                r.error = DecodeError::IeOverrun;
                return r;
            }
            msg.ies.push_back(Ie{t, Bytes(p + pos, p + pos + len)});
            pos += len;
        }
        if (!is_known(msg.msg_type))
        {
            r.error = DecodeError::UnknownMsgType;
        }
        r.message = std::move(msg);
    }
    catch (const std::bad_alloc&)
    {
        r.message.reset();
        r.error = DecodeError::LengthMismatch;
    }
    return r;
}

Bytes be_u32(std::uint32_t v)
{
    Bytes out;
    put_u32(out, v);
    return out;
}

Bytes be_u64(std::uint64_t v)
{
    Bytes out;
    put_u64(out, v);
    return out;
}

std::optional<std::uint32_t> read_u32(std::span<const std::uint8_t> v)
{
    if (v.size() != 4)
    {
        return std::nullopt;
    }
    return get_u32(v.data());
}

std::optional<std::uint64_t> read_u64(std::span<const std::uint8_t> v)
{
    if (v.size() != 8)
    {
        return std::nullopt;
    }
    return get_u64(v.data());
}

Bytes text(std::string_view s) { return Bytes(s.begin(), s.end()); }

std::string as_text(std::span<const std::uint8_t> v) { return std::string(v.begin(), v.end()); }

Bytes function_list(std::span<const std::uint16_t> ids)
{
    Bytes out;
    for (auto id : ids)
    {
        put_u16(out, id);
    }
    return out;
}

std::optional<std::vector<std::uint16_t>> read_function_list(std::span<const std::uint8_t> v)
{
    if (v.size() % 2 != 0)
    {
        return std::nullopt;
    }
    std::vector<std::uint16_t> out;
    for (std::size_t i = 0; i < v.size(); i += 2)
    {
        out.push_back(get_u16(v.data() + i));
    }
    return out;
}

double quantize(double v) noexcept { return static_cast<double>(std::llround(v * 1000.0)) / 1000.0; }

Bytes encode_kpis(std::span<const KpiEntry> entries)
{
    if (entries.size() > 0xFFFF)
    {
        throw IeTooLarge("too many KPI entries for one payload");
    }
    Bytes out;
    out.reserve(2 + entries.size() * kKpiEntrySize);
    put_u16(out, static_cast<std::uint16_t>(entries.size()));
    for (const auto& e : entries)
    {
        out.push_back(static_cast<std::uint8_t>((static_cast<std::uint8_t>(e.scope_kind) << 4) |
                                                (static_cast<std::uint8_t>(e.metric) & 0x0F)));
        put_u32(out, e.scope);
        put_u64(out, static_cast<std::uint64_t>(std::llround(e.value * 1000.0)));
    }
    return out;
}

std::optional<std::vector<KpiEntry>> decode_kpis(std::span<const std::uint8_t> v)
{
    if (v.size() < 2)
    {
        return std::nullopt;
    }
    const auto count = static_cast<std::size_t>(get_u16(v.data()));
    if (v.size() != 2 + count * kKpiEntrySize)
    {
        return std::nullopt;
    }
    std::vector<KpiEntry> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
    {
        const std::uint8_t* p = v.data() + 2 + i * kKpiEntrySize;
        const auto metric = static_cast<std::uint8_t>(p[0] & 0x0F);
        const auto kind = static_cast<std::uint8_t>(p[0] >> 4);
        if (metric < 1 || metric > 4 || kind > 2)
        {
            return std::nullopt;
        }
        KpiEntry e;
        e.metric = static_cast<Metric>(metric);
        e.scope_kind = static_cast<ScopeKind>(kind);
        e.scope = get_u32(p + 1);
        e.value = static_cast<double>(static_cast<std::int64_t>(get_u64(p + 5))) / 1000.0;
        out.push_back(e);
    }
    return out;
}

Bytes encode_action(const ControlAction& action)
{
    Bytes out;
    std::visit(
        [&](const SetSliceShares& a) {
            if (a.shares.size() > 0xFF)
            {
                throw IeTooLarge("too many slices in SetSliceShares");
            }
            out.push_back(kActionSetSliceShares);
            out.push_back(static_cast<std::uint8_t>(a.shares.size()));
            for (const auto& s : a.shares)
            {
                put_u32(out, raw(s.slice));
                put_u32(out, static_cast<std::uint32_t>(std::llround(s.share * 1e6)));
            }
        },
        action);
    return out;
}

std::optional<ControlAction> decode_action(std::span<const std::uint8_t> v)
{
    if (v.size() < 2 || v[0] != kActionSetSliceShares)
    {
        return std::nullopt;
    }
    const std::size_t count = v[1];
    if (v.size() != 2 + count * 8)
    {
        return std::nullopt;
    }
    SetSliceShares a;
    for (std::size_t i = 0; i < count; ++i)
    {
        const std::uint8_t* p = v.data() + 2 + i * 8;
        const auto ppm = get_u32(p + 4);
        if (ppm > 1000000)
        {
            return std::nullopt;
        }
        a.shares.push_back({SliceId{get_u32(p)}, static_cast<double>(ppm) / 1e6});
    }
    return a;
}

std::string hex(std::span<const std::uint8_t> bytes)
{
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes)
    {
        out += fmt::format("{:02x}", b);
    }
    return out;
}

std::optional<Bytes> parse_hex(std::string_view s)
{
    Bytes out;
    int hi = -1;
    for (char c : s)
    {
        if (std::isspace(static_cast<unsigned char>(c)) || c == ':')
        {
            continue;
        }
        int v;
        if (c >= '0' && c <= '9')
            v = c - '0';
        else if (c >= 'a' && c <= 'f')
            v = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F')
            v = c - 'A' + 10;
        else
            return std::nullopt;
        if (hi < 0)
        {
            hi = v;
        }
        else
        {
            out.push_back(static_cast<std::uint8_t>(hi << 4 | v));
            hi = -1;
        }
    }
    if (hi >= 0)
    {
        return std::nullopt;
    }
    return out;
}

namespace
{
const char* tag_name(std::uint16_t t)
{
    switch (t)
    {
    case tag::NodeId:
        return "NodeId";
    case tag::RanFunctionList:
        return "RanFunctionList";
    case tag::ReportPeriod:
        return "ReportPeriod";
    case tag::KpiPayload:
        return "KpiPayload";
    case tag::ControlAction:
        return "ControlAction";
    case tag::Cause:
        return "Cause";
    case tag::AppliedAt:
        return "AppliedAt";
    default:
        return "Unknown";
    }
}

const char* metric_name(Metric m)
{
    switch (m)
    {
    case Metric::DlThroughput:
        return "DlThroughput";
    case Metric::UlThroughput:
        return "UlThroughput";
    case Metric::Connected:
        return "Connected";
    case Metric::PrbUsage:
        return "PrbUsage";
    }
    return "?";
}

const char* scope_name(ScopeKind k)
{
    switch (k)
    {
    case ScopeKind::Cell:
        return "cell";
    case ScopeKind::Slice:
        return "slice";
    case ScopeKind::Ue:
        return "ue";
    }
    return "?";
}

std::string describe_value(const Ie& ie)
{
    switch (ie.tag)
    {
    case tag::NodeId:
    case tag::Cause:
        return fmt::format("\"{}\"", as_text(ie.value));
    case tag::RanFunctionList:
        if (auto ids = read_function_list(ie.value))
        {
            std::string s = "[";
            for (std::size_t i = 0; i < ids->size(); ++i)
            {
                s += fmt::format("{}{}", i ? ", " : "", (*ids)[i]);
            }
            return s + "]";
        }
        break;
    case tag::ReportPeriod:
        if (auto v = read_u32(ie.value))
        {
            return fmt::format("{} us", *v);
        }
        break;
    case tag::AppliedAt:
        if (auto v = read_u64(ie.value))
        {
            return fmt::format("{} us", *v);
        }
        break;
    case tag::KpiPayload:
        if (auto kpis = decode_kpis(ie.value))
        {
            std::string s = fmt::format("{} entries", kpis->size());
            for (const auto& k : *kpis)
            {
                s += fmt::format("\n      {} {}={} value={}", metric_name(k.metric), scope_name(k.scope_kind), k.scope,
                                 k.value);
            }
            return s;
        }
        break;
    case tag::ControlAction:
        if (auto a = decode_action(ie.value))
        {
            std::string s = "SetSliceShares";
            for (const auto& sh : std::get<SetSliceShares>(*a).shares)
            {
                s += fmt::format(" {}={}", to_string(sh.slice), sh.share);
            }
            return s;
        }
        break;
    default:
        break;
    }
    return "0x" + hex(ie.value);
}
} // namespace

std::string describe(const E2Message& msg)
{
    std::string out = fmt::format("{} v{} txn={} ies={}", to_string(msg.msg_type), msg.version, msg.txn_id,
                                  msg.ies.size());
    for (const auto& ie : msg.ies)
    {
        out += fmt::format("\n  [{} {}] len={} {}", ie.tag, tag_name(ie.tag), ie.value.size(), describe_value(ie));
    }
    return out;
}
} // namespace slicesim::e2

#include "slicesim/e2/codec.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace slicesim;
using namespace slicesim::e2;

namespace
{
E2Message random_message(std::mt19937_64& gen)
{
    E2Message m;
    m.msg_type = static_cast<MsgType>(1 + gen() % 8);
    m.txn_id = static_cast<std::uint32_t>(gen());
    const int n = static_cast<int>(gen() % 6);
    for (int i = 0; i < n; ++i)
    {
        Ie ie;
        ie.tag = static_cast<std::uint16_t>(gen());
        const auto len = gen() % 4 == 0 ? gen() % 2000 : gen() % 24;
        for (std::size_t b = 0; b < len; ++b)
            ie.value.push_back(static_cast<std::uint8_t>(gen()));
        m.ies.push_back(std::move(ie));
    }
    return m;
}

// Independent encoder following the documented layout.
Bytes reference_encode(const E2Message& m)
{
    Bytes payload;
    for (const auto& ie : m.ies)
    {
        payload.push_back(ie.tag >> 8);
        payload.push_back(ie.tag & 0xFF);
        payload.push_back(static_cast<std::uint8_t>(ie.value.size() >> 8));
        payload.push_back(static_cast<std::uint8_t>(ie.value.size() & 0xFF));
        payload.insert(payload.end(), ie.value.begin(), ie.value.end());
    }
    Bytes out{m.version, static_cast<std::uint8_t>(m.msg_type)};
    for (int s = 24; s >= 0; s -= 8)
        out.push_back(static_cast<std::uint8_t>(m.txn_id >> s));
    const auto len = static_cast<std::uint32_t>(payload.size());
    for (int s = 24; s >= 0; s -= 8)
        out.push_back(static_cast<std::uint8_t>(len >> s));
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}
} // namespace

TEST(Codec, EncodingMatchesDocumentedLayout)
{
    E2Message m{kVersion, MsgType::SetupResponse, 0x01020304, {{tag::NodeId, text("du1")}}};
    const Bytes want{1, 2, 1, 2, 3, 4, 0, 0, 0, 7, 0, 1, 0, 3, 'd', 'u', '1'};
    EXPECT_EQ(encode(m), want);
}

TEST(Codec, EmptyIeListIsLegal)
{
    E2Message m{kVersion, MsgType::SetupResponse, 9, {}};
    const auto bytes = encode(m);
    EXPECT_EQ(bytes.size(), kHeaderSize);
    const auto r = decode(bytes);
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(*r.message, m);
}

TEST(Codec, OversizedIeRejectedOnEncode)
{
    E2Message m{kVersion, MsgType::Indication, 1, {{tag::KpiPayload, Bytes(kMaxIeValue + 1, 0)}}};
    EXPECT_THROW(encode(m), IeTooLarge);
}

TEST(Codec, TypedDecodeErrors)
{
    const auto good = encode(E2Message{kVersion, MsgType::Failure, 5, {{tag::Cause, text("timeout")}}});

    EXPECT_EQ(decode(Bytes(good.begin(), good.begin() + 9)).error, DecodeError::Truncated);

    auto longer = good;
    longer.push_back(0);
    EXPECT_EQ(decode(longer).error, DecodeError::LengthMismatch);

    auto overrun = good;
    overrun[13] = 0xFF; // IE length low byte
    EXPECT_EQ(decode(overrun).error, DecodeError::IeOverrun);

    auto version = good;
    version[0] = 2;
    EXPECT_EQ(decode(version).error, DecodeError::BadVersion);

    auto unknown = good;
    unknown[1] = 0x7F;
    const auto r = decode(unknown);
    EXPECT_EQ(r.error, DecodeError::UnknownMsgType);
    ASSERT_TRUE(r.message.has_value());
    EXPECT_EQ(r.message->ies.size(), 1u);
}

TEST(Codec, KpiPayloadRoundTripsAtMilliunitResolution)
{
    const std::vector<KpiEntry> e{{Metric::DlThroughput, ScopeKind::Cell, 7, 240.0},
                                  {Metric::UlThroughput, ScopeKind::Slice, 0x01000001, 24.9999},
                                  {Metric::Connected, ScopeKind::Ue, 3, 1.0},
                                  {Metric::PrbUsage, ScopeKind::Cell, 7, -0.0004}};
    const auto decoded = decode_kpis(encode_kpis(e));
    ASSERT_TRUE(decoded.has_value());
    ASSERT_EQ(decoded->size(), e.size());
    for (std::size_t i = 0; i < e.size(); ++i)
    {
        EXPECT_EQ((*decoded)[i].metric, e[i].metric);
        EXPECT_EQ((*decoded)[i].scope_kind, e[i].scope_kind);
        EXPECT_EQ((*decoded)[i].scope, e[i].scope);
        EXPECT_DOUBLE_EQ((*decoded)[i].value, std::round(e[i].value * 1000) / 1000);
    }
    EXPECT_FALSE(decode_kpis(Bytes{0, 2, 0x10}).has_value());
}

TEST(Codec, ControlActionRoundTrip)
{
    const ControlAction a = SetSliceShares{{{SliceId{0x01000001}, 0.8}, {SliceId{0x01000002}, 0.2}}};
    const auto back = decode_action(encode_action(a));
    ASSERT_TRUE(back.has_value());
    const auto& s = std::get<SetSliceShares>(*back);
    ASSERT_EQ(s.shares.size(), 2u);
    EXPECT_NEAR(s.shares[0].share, 0.8, 1e-6);
    EXPECT_EQ(s.shares[1].slice, SliceId{0x01000002});
    EXPECT_FALSE(decode_action(Bytes{9, 0}).has_value());
    EXPECT_FALSE(decode_action(Bytes{1, 2, 0, 0}).has_value());
}

TEST(Codec, HexParsing)
{
    EXPECT_EQ(parse_hex("01 02:ff\nA0"), (Bytes{1, 2, 0xFF, 0xA0}));
    EXPECT_FALSE(parse_hex("0g").has_value());
    EXPECT_FALSE(parse_hex("012").has_value());
    EXPECT_EQ(hex(Bytes{0, 0xAB}), "00ab");
}

TEST(Codec, DescribeNamesTypeAndIes)
{
    const auto d = describe(E2Message{kVersion, MsgType::Failure, 3, {{tag::Cause, text("no-ran-function")}}});
    EXPECT_NE(d.find("Failure"), std::string::npos);
    EXPECT_NE(d.find("no-ran-function"), std::string::npos);
}

TEST(CodecProperty, RoundTripMatchesReferenceEncoder)
{
    std::mt19937_64 gen(2024);
    for (int i = 0; i < 2000; ++i)
    {
        const auto m = random_message(gen);
        const auto bytes = encode(m);
        ASSERT_EQ(bytes, reference_encode(m));
        const auto r = decode(bytes);
        ASSERT_TRUE(r.ok());
        ASSERT_EQ(*r.message, m);
    }
}

TEST(CodecProperty, MutatedFramesDecodeOrFailCleanly)
{
    std::mt19937_64 gen(99);
    for (int i = 0; i < 5000; ++i)
    {
        auto bytes = encode(random_message(gen));
        const int flips = 1 + static_cast<int>(gen() % 4);
        for (int f = 0; f < flips; ++f)
            bytes[gen() % bytes.size()] ^= static_cast<std::uint8_t>(1 + gen() % 255);
        if (gen() % 3 == 0)
            bytes.resize(gen() % (bytes.size() + 1));
        const auto r = decode(bytes);
        ASSERT_TRUE(r.message.has_value() || r.error.has_value());
        if (r.ok())
            ASSERT_EQ(encode(*r.message), bytes) << "accepted frame is not canonical";
    }
}

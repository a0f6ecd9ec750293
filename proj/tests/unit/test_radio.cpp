#include "slicesim/radio/radio.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace slicesim;
using namespace slicesim::radio;

namespace
{
TddConfig tdd(int dl, int ul) { return TddConfig{10, dl, ul, 6, 4}; }

SliceId sid(std::uint32_t v) { return SliceId{v}; }

// Water level by bisection: everyone gets min(demand, level).
std::vector<double> max_min_oracle(double capacity, const std::vector<double>& demands)
{
    double total = 0.0;
    for (const double d : demands)
        total += d;
    if (total <= capacity)
        return demands;
    double lo = 0.0;
    double hi = capacity;
    for (int i = 0; i < 200; ++i)
    {
        const double mid = (lo + hi) / 2;
        double s = 0.0;
        for (const double d : demands)
            s += std::min(d, mid);
        (s > capacity ? hi : lo) = mid;
    }
    std::vector<double> out;
    for (const double d : demands)
        out.push_back(std::min(d, lo));
    return out;
}
} // namespace

TEST(Radio, DuplexFractionsCountSpecialSymbols)
{
    const auto f = duplex_fractions(tdd(7, 2));
    EXPECT_NEAR(f.dl, (7 + 6.0 / 14) / 10, 1e-12);
    EXPECT_NEAR(f.ul, (2 + 4.0 / 14) / 10, 1e-12);
}

TEST(Radio, ReferenceCalibrationHitsDlCentricMeasurement)
{
    const auto cal = RadioCalibration::reference();
    EXPECT_NEAR(link_capacity(40, Direction::Downlink, tdd(7, 2), cal), 240.0, 1e-9);
    EXPECT_NEAR(link_capacity(40, Direction::Uplink, tdd(7, 2), cal), 25.0, 1e-9);
    EXPECT_NEAR(cal.udp_over_tcp_factor * 240.0, 244.9, 1e-9);
}

TEST(Radio, CapacityScalesWithDuplexFractionAndBandwidth)
{
    const auto cal = RadioCalibration::reference();
    // Same spectral efficiency, different slot split.
    const double dl = 240.0 * (5 + 6.0 / 14) / (7 + 6.0 / 14);
    const double ul = 25.0 * (4 + 4.0 / 14) / (2 + 4.0 / 14);
    EXPECT_NEAR(link_capacity(40, Direction::Downlink, tdd(5, 4), cal), dl, 1e-9);
    EXPECT_NEAR(link_capacity(40, Direction::Uplink, tdd(5, 4), cal), ul, 1e-9);
    EXPECT_NEAR(link_capacity(100, Direction::Downlink, tdd(7, 2), cal), 600.0, 1e-9);
}

TEST(Radio, InvalidTddRejected)
{
    EXPECT_THROW(TddConfig({10, 8, 3, 0, 0}).validate(), std::exception);
    EXPECT_THROW(TddConfig({10, 7, 2, 10, 10}).validate(), std::exception);
    EXPECT_NO_THROW(tdd(7, 2).validate());
}

TEST(Radio, PrbGrid)
{
    EXPECT_EQ(prb_count(40), 106);
    EXPECT_EQ(prb_count(100), 272);
    EXPECT_EQ(prb_count(20), 54); // 272 * 0.2 = 54.4
}

TEST(Radio, EightyTwentySplitOnSaturatedCell)
{
    const std::vector<SliceShare> shares{{sid(1), 0.8}, {sid(2), 0.2}};
    const std::map<SliceId, double> sat{{sid(1), 1e9}, {sid(2), 1e9}};
    // 84.8 / 21.2: floors 84 + 21, the spare PRB goes to the larger remainder.
    auto a = allocate_prbs(shares, sat, 106, 244.9);
    EXPECT_EQ(a.of(sid(1)), 85);
    EXPECT_EQ(a.of(sid(2)), 21);
    // 217.6 / 54.4
    a = allocate_prbs(shares, sat, 272, 600);
    EXPECT_EQ(a.of(sid(1)), 218);
    EXPECT_EQ(a.of(sid(2)), 54);
}

TEST(Radio, UnusedShareIsRedistributed)
{
    const std::vector<SliceShare> shares{{sid(1), 0.8}, {sid(2), 0.2}};
    // Slice 1 only needs 10 PRBs worth (per PRB = 1 Mbps).
    const auto a = allocate_prbs(shares, {{sid(1), 10.0}, {sid(2), 1e9}}, 100, 100.0);
    EXPECT_EQ(a.of(sid(1)), 10);
    EXPECT_EQ(a.of(sid(2)), 90);
}

TEST(Radio, AllocateRejectsBadShares)
{
    const std::vector<SliceShare> bad{{sid(1), 0.8}, {sid(2), 0.3}};
    EXPECT_THROW(allocate_prbs(bad, {}, 106, 240), std::exception);
    EXPECT_THROW(allocate_prbs({}, {}, 106, 240), std::exception);
}

TEST(RadioProperty, AllocationIsWorkConservingAndWeightedFair)
{
    std::mt19937_64 gen(11);
    for (int iter = 0; iter < 3000; ++iter)
    {
        const int n = 1 + static_cast<int>(gen() % 4);
        const int total = 20 + static_cast<int>(gen() % 260);
        const double cap = 50.0 + static_cast<double>(gen() % 550);
        std::vector<int> units(n, 1);
        for (int left = 20 - n; left > 0; --left)
            ++units[gen() % n];
        std::vector<SliceShare> shares;
        std::map<SliceId, double> demand;
        for (int i = 0; i < n; ++i)
        {
            shares.push_back({sid(i + 1), units[i] / 20.0});
            const auto pick = gen() % 3;
            demand[sid(i + 1)] = pick == 0 ? std::numeric_limits<double>::infinity()
                                           : cap * static_cast<double>(gen() % 1000) / 1000.0;
        }
        const auto a = allocate_prbs(shares, demand, total, cap);
        const double per_prb = cap / total;
        std::map<SliceId, double> need;
        bool any_short = false;
        int sum = 0;
        for (const auto& s : shares)
        {
            const double d = demand[s.slice];
            need[s.slice] = std::isinf(d) ? total + 1.0 : std::ceil(d / per_prb - 1e-3);
            sum += a.of(s.slice);
            ASSERT_LE(a.of(s.slice), need[s.slice]);
            any_short |= a.of(s.slice) < need[s.slice];
        }
        ASSERT_LE(sum, total);
        if (any_short)
            ASSERT_EQ(sum, total) << "not work conserving";
        for (const auto& i : shares)
        {
            if (a.of(i.slice) >= need[i.slice])
                continue;
            for (const auto& j : shares)
            {
                if (a.of(j.slice) == 0)
                    continue;
                ASSERT_GE((a.of(i.slice) + 1) / i.share + 1e-9, (a.of(j.slice) - 1) / j.share)
                    << "saturated slice " << raw(i.slice) << " could take a PRB from " << raw(j.slice);
            }
        }
    }
}

TEST(RadioProperty, MaxMinFairMatchesWaterLevel)
{
    std::mt19937_64 gen(5);
    for (int iter = 0; iter < 2000; ++iter)
    {
        const int n = 1 + static_cast<int>(gen() % 6);
        std::vector<double> d;
        for (int i = 0; i < n; ++i)
            d.push_back(static_cast<double>(gen() % 10000) / 37.0);
        const double cap = static_cast<double>(gen() % 20000) / 41.0;
        const auto got = max_min_fair(cap, d);
        const auto want = max_min_oracle(cap, d);
        ASSERT_EQ(got.size(), want.size());
        for (int i = 0; i < n; ++i)
            ASSERT_NEAR(got[i], want[i], 1e-6);
    }
    const std::vector<double> infinite{std::numeric_limits<double>::infinity(), 10.0};
    const auto r = max_min_fair(100.0, infinite);
    EXPECT_NEAR(r[0], 90.0, 1e-9);
    EXPECT_NEAR(r[1], 10.0, 1e-9);
}

TEST(Radio, ScheduleCellNeverExceedsDemandOrSliceCapacity)
{
    const std::vector<SliceShare> shares{{sid(1), 0.8}, {sid(2), 0.2}};
    const std::vector<UeDemand> demands{{UeId{1}, sid(1), 400}, {UeId{2}, sid(2), 400}, {UeId{3}, sid(2), 5},
                                        {UeId{4}, sid(9), 50}};
    const auto s = schedule_cell(shares, demands, 106, 244.9);
    EXPECT_NEAR(s.ue_mbps.at(UeId{3}), 5.0, 1e-9);
    EXPECT_EQ(s.ue_mbps.count(UeId{4}) ? s.ue_mbps.at(UeId{4}) : 0.0, 0.0);
    for (const auto& [slice, served] : s.slice_served_mbps)
        EXPECT_LE(served, s.slice_capacity_mbps.at(slice) + 1e-9);
    EXPECT_NEAR(s.slice_capacity_mbps.at(sid(1)), 85.0 / 106 * 244.9, 1e-9);
}

TEST(Radio, NormalizedRescales)
{
    const std::vector<SliceShare> s{{sid(1), 0.4}, {sid(2), 0.1}};
    const auto n = normalized(s);
    EXPECT_NEAR(n[0].share, 0.8, 1e-12);
    EXPECT_NEAR(n[1].share, 0.2, 1e-12);
    EXPECT_THROW(normalized(std::vector<SliceShare>{}), std::exception);
}

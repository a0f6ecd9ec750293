#include "slicesim/ric/ric.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace slicesim;
using namespace slicesim::ric;
using sim::millis;
using sim::SimTime;

namespace
{
const NodeId kCell{5};
const SliceId kA{0x01000001};
const SliceId kB{0x01000002};

TwinState make_twin(std::vector<radio::SliceShare> shares = {{kA, 1.0}})
{
    TwinState t;
    TwinCell c;
    c.udp = true;
    c.shares = std::move(shares);
    t.cells[kCell] = c;
    return t;
}

// One report period for one UE, in the order the xApp sees it.
std::vector<Anomaly> step(TwinState& t, UeId ue, SimTime at, bool connected, double dl)
{
    twin_sync(t, KpiSample{kCell, e2::ScopeKind::Ue, raw(ue), e2::Metric::Connected, connected ? 1.0 : 0.0, at});
    twin_sync(t, KpiSample{kCell, e2::ScopeKind::Ue, raw(ue), e2::Metric::DlThroughput, dl, at});
    auto out = detect_anomalies(t, at);
    const auto next = twin_predict(t, at + t.config.report_period);
    for (auto& [id, u] : t.ues)
        u.predicted = next.at(id);
    return out;
}

void expect_session(TwinState& t, UeId ue, SliceId slice = kA) { t.sessions[ue] = SessionNotice{ue, slice, true}; }

// Exhaustive 5% grid, independent of the production walk.
std::vector<double> brute_force_shares(const TwinState& t, const std::vector<SliceId>& slices,
                                       const std::vector<double>& demand)
{
    const auto& cell = t.cells.at(kCell);
    const int n = static_cast<int>(slices.size());
    std::vector<std::vector<int>> all;
    std::vector<int> cur(n);
    std::function<void(int, int)> rec = [&](int i, int left) {
        if (i == n - 1)
        {
            cur[i] = left;
            all.push_back(cur);
            return;
        }
        for (int u = 0; u <= left; ++u)
        {
            cur[i] = u;
            rec(i + 1, left - u);
        }
    };
    rec(0, 20);
    double total = 0.0;
    for (const double d : demand)
        total += d;
    std::vector<double> best;
    double best_obj = -1, best_dist = 0;
    for (const auto& v : all)
    {
        bool ok = true;
        for (int i = 0; i < n; ++i)
        {
            double m = t.min_shares.contains(slices[i]) ? t.min_shares.at(slices[i]) : 0.0;
            ok &= v[i] >= 1 && v[i] >= std::ceil(m * 20 - 1e-9);
        }
        if (!ok)
            continue;
        std::vector<radio::SliceShare> sh;
        std::map<SliceId, double> sat;
        for (int i = 0; i < n; ++i)
        {
            sh.push_back({slices[i], v[i] / 20.0});
            sat[slices[i]] = std::numeric_limits<double>::infinity();
        }
        const auto thr = radio::slice_throughput(radio::allocate_prbs(sh, sat, cell.prbs(), cell.capacity_mbps()),
                                                 cell.capacity_mbps());
        double obj = 0, dist = 0;
        for (int i = 0; i < n; ++i)
        {
            obj += std::min(demand[i], thr.at(slices[i]));
            dist += std::abs(v[i] / 20.0 - (total > 0 ? demand[i] / total : 1.0 / n));
        }
        const bool better = best.empty() || obj > best_obj + 1e-9 ||
                            (std::abs(obj - best_obj) <= 1e-9 && dist < best_dist - 1e-12);
        if (better)
        {
            best.clear();
            for (int i = 0; i < n; ++i)
                best.push_back(v[i] / 20.0);
            best_obj = obj;
            best_dist = dist;
        }
    }
    return best;
}
} // namespace

TEST(Twin, HealthyConstantUeRaisesNothing)
{
    auto t = make_twin();
    expect_session(t, UeId{1});
    for (int i = 1; i <= 200; ++i)
        ASSERT_TRUE(step(t, UeId{1}, millis(100 * i), true, 20.0).empty()) << "sample " << i;
}

TEST(Twin, DropDetectedWithinThreePeriods)
{
    auto t = make_twin();
    expect_session(t, UeId{1});
    std::vector<Anomaly> drops;
    for (int i = 1; i <= 80; ++i)
    {
        const auto at = millis(100 * i);
        const bool up = at < sim::seconds(5);
        for (auto& a : step(t, UeId{1}, at, up, up ? 20.0 : 0.0))
            if (a.kind == AnomalyKind::ConnectivityDrop)
                drops.push_back(a);
    }
    ASSERT_FALSE(drops.empty());
    EXPECT_LE(drops.front().detected_at, sim::seconds(5) + millis(300));
    EXPECT_DOUBLE_EQ(drops.front().score, 3.0);
    // Suppressed for 1 s, then re-raised while the drop persists.
    ASSERT_GE(drops.size(), 2u);
    EXPECT_GE(drops[1].detected_at - drops[0].detected_at, sim::seconds(1));
}

TEST(Twin, DegradationCausesDivergence)
{
    auto t = make_twin();
    expect_session(t, UeId{1});
    std::vector<AnomalyKind> kinds;
    for (int i = 1; i <= 100; ++i)
    {
        const auto at = millis(100 * i);
        const bool degraded = at >= sim::seconds(7) && at < sim::seconds(8);
        for (auto& a : step(t, UeId{1}, at, true, degraded ? 10.0 : 20.0))
        {
            kinds.push_back(a.kind);
            EXPECT_GE(a.detected_at, sim::seconds(7));
            EXPECT_LE(a.detected_at, sim::seconds(8) + millis(300));
        }
    }
    EXPECT_NE(std::find(kinds.begin(), kinds.end(), AnomalyKind::TwinDivergence), kinds.end());
    EXPECT_NE(std::find(kinds.begin(), kinds.end(), AnomalyKind::KpiOutlier), kinds.end());
}

TEST(Twin, NoOutliersBeforeWindowFills)
{
    auto t = make_twin();
    expect_session(t, UeId{1});
    for (int i = 1; i < 50; ++i)
    {
        // Wildly varying but window not full yet.
        step(t, UeId{1}, millis(100 * i), true, i % 2 ? 1.0 : 100.0);
        ASSERT_EQ(t.ues.at(UeId{1}).outlier_run, 0);
    }
}

TEST(Twin, DemandIsWindowMaxAndPredictionUsesCell)
{
    auto t = make_twin();
    expect_session(t, UeId{1});
    step(t, UeId{1}, millis(100), true, 30.0);
    step(t, UeId{1}, millis(200), true, 10.0);
    EXPECT_DOUBLE_EQ(t.ues.at(UeId{1}).demand_mbps, 30.0);
    // Demand above capacity: prediction is the UDP cell capacity.
    step(t, UeId{1}, millis(300), true, 1000.0);
    const auto p = twin_predict(t, millis(400));
    EXPECT_NEAR(p.at(UeId{1}), 244.9, 1e-9);
}

TEST(Twin, StaleTwinRefusesToPredict)
{
    auto t = make_twin();
    step(t, UeId{1}, millis(100), true, 5.0);
    EXPECT_NO_THROW(twin_predict(t, millis(600)));
    EXPECT_THROW(twin_predict(t, millis(601)), StaleTwin);
}

TEST(Optimize, OneSliceGetsEverything)
{
    auto t = make_twin();
    const auto s = optimize_shares(t, kCell, {{kA, 50.0}});
    ASSERT_EQ(s.size(), 1u);
    EXPECT_DOUBLE_EQ(s[0].share, 1.0);
}

TEST(Optimize, DemandsThatFitAreSatisfied)
{
    auto t = make_twin({{kA, 0.5}, {kB, 0.5}});
    const auto s = optimize_shares(t, kCell, {{kA, 200.0}, {kB, 50.0}});
    EXPECT_DOUBLE_EQ(s[0].share, 0.8);
    EXPECT_DOUBLE_EQ(s[1].share, 0.2);
}

TEST(Optimize, EqualOverloadSplitsEvenly)
{
    auto t = make_twin({{kA, 0.5}, {kB, 0.5}});
    const auto s = optimize_shares(t, kCell, {{kA, 400.0}, {kB, 400.0}});
    EXPECT_DOUBLE_EQ(s[0].share, 0.5);
    EXPECT_DOUBLE_EQ(s[1].share, 0.5);
}

TEST(Optimize, MinimumSharesRespected)
{
    auto t = make_twin({{kA, 0.5}, {kB, 0.5}});
    t.min_shares[kB] = 0.3;
    const auto s = optimize_shares(t, kCell, {{kA, 400.0}, {kB, 1.0}});
    EXPECT_GE(s[1].share, 0.3 - 1e-12);
    t.min_shares[kA] = 0.8;
    EXPECT_THROW(optimize_shares(t, kCell, {{kA, 1.0}, {kB, 1.0}}), std::invalid_argument);
}

TEST(OptimizeProperty, MatchesExhaustiveSearchAndIsScaleInvariant)
{
    std::mt19937_64 gen(17);
    const std::vector<SliceId> ids{kA, kB, SliceId{0x01000003}};
    for (int iter = 0; iter < 150; ++iter)
    {
        const int n = 2 + static_cast<int>(gen() % 2);
        auto t = make_twin();
        std::vector<SliceId> slices(ids.begin(), ids.begin() + n);
        std::vector<double> demand;
        std::map<SliceId, double> dm;
        for (int i = 0; i < n; ++i)
        {
            demand.push_back(static_cast<double>(gen() % 3000) / 10.0);
            dm[slices[i]] = demand.back();
            if (gen() % 4 == 0)
                t.min_shares[slices[i]] = 0.05 * static_cast<double>(gen() % 5);
        }
        const auto got = optimize_shares(t, kCell, dm);
        const auto want = brute_force_shares(t, slices, demand);
        ASSERT_EQ(got.size(), want.size());
        for (int i = 0; i < n; ++i)
            ASSERT_NEAR(got[i].share, want[i], 1e-12) << "iter " << iter;

        // Scale saturated demands: the argmax does not move.
        std::map<SliceId, double> big;
        for (int i = 0; i < n; ++i)
            big[slices[i]] = 1000.0 + 10.0 * i;
        std::map<SliceId, double> bigger;
        for (const auto& [k, v] : big)
            bigger[k] = v * 3.0;
        const auto a = optimize_shares(t, kCell, big);
        const auto b = optimize_shares(t, kCell, bigger);
        for (int i = 0; i < n; ++i)
            ASSERT_DOUBLE_EQ(a[i].share, b[i].share);
    }
}

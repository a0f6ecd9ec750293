#include "slicesim/ric/ric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace slicesim::ric
{
const char* to_string(AnomalyKind k) noexcept
{
    switch (k)
    {
    case AnomalyKind::ConnectivityDrop:
        return "ConnectivityDrop";
    case AnomalyKind::KpiOutlier:
        return "KpiOutlier";
    case AnomalyKind::TwinDivergence:
        return "TwinDivergence";
    }
    return "?";
}

double TwinCell::capacity_mbps() const
{
    double cap = radio::link_capacity(bandwidth_mhz, radio::Direction::Downlink, tdd, calibration);
    if (udp)
    {
        cap *= calibration.udp_over_tcp_factor;
    }
    if (dl_cap_mbps)
    {
        cap = std::min(cap, *dl_cap_mbps);
    }
    return cap;
}

namespace
{
struct MeanStd
{
    double mean{0.0};
    double std{0.0};
};

MeanStd mean_std(const std::deque<double>& w)
{
    MeanStd r;
    if (w.empty())
    {
        return r;
    }
    r.mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
    double ss = 0.0;
    for (const double x : w)
    {
        ss += (x - r.mean) * (x - r.mean);
    }
    r.std = std::sqrt(ss / static_cast<double>(w.size()));
    return r;
}

void apply_session(TwinUe& u, const SessionNotice& n)
{
    u.slice = n.slice;
    u.session_expected = n.active;
}

void sync_dl(const TwinConfig& cfg, TwinUe& u, double m)
{
    if (u.window.size() >= cfg.window)
    {
        const auto ms = mean_std(u.window);
        u.last_z = (m - ms.mean) / std::max(ms.std, cfg.z_std_floor);
        u.outlier_run = std::abs(u.last_z) > cfg.z_threshold ? u.outlier_run + 1 : 0;
    }
    else
    {
        u.last_z = 0.0;
        u.outlier_run = 0;
    }

    if (u.predicted)
    {
        u.last_divergence = std::abs(m - *u.predicted) / std::max(*u.predicted, cfg.divergence_epsilon);
        u.divergence_run = u.last_divergence > cfg.divergence_threshold ? u.divergence_run + 1 : 0;
    }
    else
    {
        u.last_divergence = 0.0;
        u.divergence_run = 0;
    }

    u.drop_run = (u.session_expected && !u.connected) ? u.drop_run + 1 : 0;

    u.window.push_back(m);
    while (u.window.size() > cfg.window)
    {
        u.window.pop_front();
    }
    u.demand_mbps = *std::max_element(u.window.begin(), u.window.end());
}
} // namespace

void twin_sync(TwinState& twin, const KpiSample& sample)
{
    twin.last_sync = std::max(twin.last_sync, sample.at);
    if (sample.scope_kind != e2::ScopeKind::Ue)
    {
        return;
    }
    const UeId id{sample.scope};
    auto [it, inserted] = twin.ues.try_emplace(id);
    auto& u = it->second;
    if (inserted)
    {
        if (auto s = twin.sessions.find(id); s != twin.sessions.end())
        {
            apply_session(u, s->second);
        }
    }
    u.cell = sample.node;
    switch (sample.metric)
    {
    case e2::Metric::Connected:
        u.connected = sample.value >= 0.5;
        break;
    case e2::Metric::DlThroughput:
        sync_dl(twin.config, u, sample.value);
        u.last_sample = sample.at;
        break;
    default:
        break;
    }
}

std::map<UeId, double> twin_predict(const TwinState& twin, sim::SimTime at)
{
    if (twin.cells.empty())
    {
        throw std::logic_error("twin_predict: no cell configuration");
    }
    const auto limit = twin.last_sync + twin.config.report_period * static_cast<std::uint64_t>(twin.config.stale_periods);
    if (at > limit)
    {
        throw StaleTwin(fmt::format("twin last synced at {} us, asked for {} us", twin.last_sync.us, at.us));
    }
    std::map<UeId, double> out;
    std::map<NodeId, std::vector<radio::UeDemand>> per_cell;
    for (const auto& [id, u] : twin.ues)
    {
        out[id] = 0.0;
        if (u.connected && u.slice && twin.cells.contains(u.cell))
        {
            per_cell[u.cell].push_back({id, *u.slice, u.demand_mbps});
        }
    }
    for (const auto& [cell_id, demands] : per_cell)
    {
        const auto& cell = twin.cells.at(cell_id);
        const auto sched = radio::schedule_cell(cell.shares, demands, cell.prbs(), cell.capacity_mbps());
        for (const auto& [ue, rate] : sched.ue_mbps)
        {
            out[ue] = rate;
        }
    }
    return out;
}

std::vector<Anomaly> detect_anomalies(TwinState& twin, sim::SimTime at)
{
    std::vector<Anomaly> out;
    const auto& cfg = twin.config;
    for (const auto& [id, u] : twin.ues)
    {
        if (u.last_sample != at || u.window.empty())
        {
            continue;
        }
        const auto ms = mean_std(u.window);
        const std::string evidence =
            fmt::format("n={} mean={:.3f} std={:.3f} last={:.3f}", u.window.size(), ms.mean, ms.std, u.window.back());
        const auto consider = [&](AnomalyKind kind, int run, double score) {
            if (run < cfg.consecutive)
            {
                return;
            }
            const auto key = std::make_pair(id, kind);
            if (auto prev = twin.last_emitted.find(key);
                prev != twin.last_emitted.end() && at < prev->second + cfg.suppression)
            {
                return;
            }
            twin.last_emitted[key] = at;
            out.push_back(Anomaly{id, kind, at, score, fmt::format("run={} {}", run, evidence)});
        };
        consider(AnomalyKind::ConnectivityDrop, u.drop_run, static_cast<double>(u.drop_run));
        consider(AnomalyKind::KpiOutlier, u.outlier_run, std::abs(u.last_z));
        consider(AnomalyKind::TwinDivergence, u.divergence_run, u.last_divergence);
    }
    return out;
}

std::vector<radio::SliceShare> optimize_shares(const TwinState& twin, NodeId cell_id,
                                               const std::map<SliceId, double>& demands_mbps)
{
    if (demands_mbps.empty())
    {
        throw std::invalid_argument("optimize_shares: no slices");
    }
    const auto cell_it = twin.cells.find(cell_id);
    if (cell_it == twin.cells.end())
    {
        throw std::invalid_argument("optimize_shares: unknown cell");
    }
    const auto& cell = cell_it->second;
    const double capacity = cell.capacity_mbps();
    const int prbs = cell.prbs();
    constexpr int kUnits = 20;

    std::vector<SliceId> slices;
    std::vector<double> demand;
    std::vector<int> floor_units;
    for (const auto& [slice, d] : demands_mbps)
    {
        if (d < 0.0 || std::isnan(d))
        {
            throw std::invalid_argument("optimize_shares: negative demand");
        }
        slices.push_back(slice);
        demand.push_back(d);
        double min_share = 0.0;
        if (auto m = twin.min_shares.find(slice); m != twin.min_shares.end())
        {
            min_share = m->second;
        }
        floor_units.push_back(std::max(1, static_cast<int>(std::ceil(min_share * kUnits - 1e-9))));
    }
    const std::size_t n = slices.size();
    if (std::accumulate(floor_units.begin(), floor_units.end(), 0) > kUnits)
    {
        throw std::invalid_argument("optimize_shares: minimum shares exceed the budget");
    }

    const double total_demand = std::accumulate(demand.begin(), demand.end(), 0.0);
    std::vector<double> target(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        target[i] = total_demand > 0.0 ? demand[i] / total_demand : 1.0 / static_cast<double>(n);
    }

    std::map<SliceId, double> saturated;
    for (const auto s : slices)
    {
        saturated[s] = std::numeric_limits<double>::infinity();
    }

    std::vector<int> units(n, 0);
    std::vector<int> best;
    double best_obj = -1.0;
    double best_dist = 0.0;

    const auto evaluate = [&] {
        std::vector<radio::SliceShare> shares;
        for (std::size_t i = 0; i < n; ++i)
        {
            shares.push_back({slices[i], units[i] / static_cast<double>(kUnits)});
        }
        const auto alloc = radio::allocate_prbs(shares, saturated, prbs, capacity);
        const auto thr = radio::slice_throughput(alloc, capacity);
        double obj = 0.0;
        double dist = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            obj += std::min(demand[i], thr.at(slices[i]));
            dist += std::abs(shares[i].share - target[i]);
        }
        // Enumeration is lexicographic, so the first of equal candidates is
        // the lexicographically smallest one.
        if (best.empty() || obj > best_obj + 1e-9 || (std::abs(obj - best_obj) <= 1e-9 && dist < best_dist - 1e-12))
        {
            best = units;
            best_obj = obj;
            best_dist = dist;
        }
    };

    std::function<void(std::size_t, int)> walk = [&](std::size_t i, int left) {
        if (i + 1 == n)
        {
            if (left >= floor_units[i])
            {
                units[i] = left;
                evaluate();
            }
            return;
        }
        int reserve = 0;
        for (std::size_t j = i + 1; j < n; ++j)
        {
            reserve += floor_units[j];
        }
        for (int u = floor_units[i]; u <= left - reserve; ++u)
        {
            units[i] = u;
            walk(i + 1, left - u);
        }
    };
    walk(0, kUnits);

    std::vector<radio::SliceShare> out;
    for (std::size_t i = 0; i < n; ++i)
    {
        out.push_back({slices[i], best[i] / static_cast<double>(kUnits)});
    }
    return out;
}

// ---------------------------------------------------------------------------

TwinXApp::TwinXApp(Ric& ric, TwinConfig config, sim::Recorder* recorder)
    : XApp("digital-twin"), ric_(ric), recorder_(recorder)
{
    twin_.config = config;
    ric_.bus_subscribe(kTopicShares, [this](const std::any& msg) {
        const auto& n = std::any_cast<const SharesNotice&>(msg);
        if (auto it = twin_.cells.find(n.du); it != twin_.cells.end())
        {
            it->second.shares = n.shares;
        }
    });
    ric_.bus_subscribe(kTopicSession, [this](const std::any& msg) {
        const auto& n = std::any_cast<const SessionNotice&>(msg);
        twin_.sessions[n.ue] = n;
        if (auto it = twin_.ues.find(n.ue); it != twin_.ues.end())
        {
            apply_session(it->second, n);
        }
    });
}

void TwinXApp::configure_cell(NodeId du, TwinCell cell)
{
    if (auto it = twin_.cells.find(du); it != twin_.cells.end() && cell.shares.empty())
    {
        cell.shares = it->second.shares;
    }
    twin_.cells[du] = std::move(cell);
}

void TwinXApp::on_indication(const KpiSample& sample) { twin_sync(twin_, sample); }

void TwinXApp::on_report_end(NodeId node, sim::SimTime at)
{
    namespace tm = twin_metric;
    for (const auto& [id, u] : twin_.ues)
    {
        if (u.cell != node || u.last_sample != at || recorder_ == nullptr)
        {
            continue;
        }
        const auto ue = namer_ ? namer_(id) : to_string(id);
        recorder_->metric(at, tm::kEntity, fmt::format("{}:{}", tm::kDl, ue), u.window.back());
        recorder_->metric(at, tm::kEntity, fmt::format("{}:{}", tm::kConnected, ue), u.connected ? 1.0 : 0.0);
        recorder_->metric(at, tm::kEntity, fmt::format("{}:{}", tm::kSession, ue), u.session_expected ? 1.0 : 0.0);
        if (u.predicted)
        {
            recorder_->metric(at, tm::kEntity, fmt::format("{}:{}", tm::kPredicted, ue), *u.predicted);
        }
    }

    for (auto& a : detect_anomalies(twin_, at))
    {
        if (recorder_ != nullptr)
        {
            const auto ue = namer_ ? namer_(a.ue) : to_string(a.ue);
            recorder_->anomaly(a.detected_at, ue, to_string(a.kind), a.score);
            recorder_->event(a.detected_at, id(),
                             fmt::format("anomaly {} {} score={:.3f} {}", ue, to_string(a.kind), a.score, a.evidence));
        }
        anomalies_.push_back(std::move(a));
    }

    if (!twin_.cells.contains(node))
    {
        return;
    }
    const auto next = twin_predict(twin_, at + twin_.config.report_period);
    for (auto& [id, u] : twin_.ues)
    {
        if (u.cell == node)
        {
            u.predicted = next.at(id);
        }
    }
}

std::vector<radio::SliceShare> TwinXApp::recommend(NodeId cell) const
{
    std::map<SliceId, double> demands;
    for (const auto& s : twin_.cells.at(cell).shares)
    {
        demands[s.slice] = 0.0;
    }
    for (const auto& [_, u] : twin_.ues)
    {
        if (u.cell == cell && u.slice && u.connected)
        {
            demands[*u.slice] += u.demand_mbps;
        }
    }
    if (demands.empty())
    {
        return {};
    }
    return optimize_shares(twin_, cell, demands);
}
} // namespace slicesim::ric

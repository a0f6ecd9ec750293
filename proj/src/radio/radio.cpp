#include "slicesim/radio/radio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

namespace slicesim::radio
{
namespace
{
// A demand within this many PRBs of a whole PRB count rounds down to it.
// Absorbs fixed-point KPI quantization when the twin replays measured rates.
constexpr double kPrbTolerance = 1e-3;
constexpr double kShareSumTolerance = 1e-9;
} // namespace

void TddConfig::validate() const
{
    if (period_slots <= 0 || dl_slots < 0 || ul_slots < 0)
    {
        throw InvalidConfig("TDD slot counts must be non-negative and the period positive");
    }
    if (dl_slots + ul_slots + 1 != period_slots)
    {
        throw InvalidConfig(fmt::format("TDD pattern {}D/{}U + 1 special does not fill a {}-slot period", dl_slots,
                                        ul_slots, period_slots));
    }
    if (special_dl_symbols < 0 || special_ul_symbols < 0 || special_dl_symbols > kSymbolsPerSlot ||
        special_ul_symbols > kSymbolsPerSlot || special_dl_symbols + special_ul_symbols > kSymbolsPerSlot)
    {
        throw InvalidConfig(fmt::format("special slot symbols {}/{} exceed {} per slot", special_dl_symbols,
                                        special_ul_symbols, kSymbolsPerSlot));
    }
}

DuplexFractions duplex_fractions(const TddConfig& cfg)
{
    cfg.validate();
    const double period = cfg.period_slots;
    return DuplexFractions{
        (cfg.dl_slots + static_cast<double>(cfg.special_dl_symbols) / kSymbolsPerSlot) / period,
        (cfg.ul_slots + static_cast<double>(cfg.special_ul_symbols) / kSymbolsPerSlot) / period,
    };
}

RadioCalibration RadioCalibration::reference()
{
    // 40 MHz, 7 DL + 2 UL slots, special slot 6 DL / 4 UL symbols:
    // 240 Mbps DL, 25 Mbps UL; single-UE UDP measured 244.9 Mbps.
    const auto frac = duplex_fractions(TddConfig{});
    return RadioCalibration{
        240.0 / (40.0 * frac.dl),
        25.0 / (40.0 * frac.ul),
        244.9 / 240.0,
    };
}

void RadioCalibration::validate() const
{
    if (!(dl_spectral_eff > 0.0) || !(ul_spectral_eff > 0.0) || !(udp_over_tcp_factor > 0.0))
    {
        throw InvalidConfig("radio calibration constants must be strictly positive");
    }
}

double link_capacity(double bandwidth_mhz, Direction dir, const TddConfig& cfg, const RadioCalibration& cal)
{
    if (!(bandwidth_mhz > 0.0))
    {
        throw InvalidConfig("bandwidth must be positive");
    }
    cal.validate();
    const auto frac = duplex_fractions(cfg);
    return dir == Direction::Downlink ? cal.dl_spectral_eff * bandwidth_mhz * frac.dl
                                      : cal.ul_spectral_eff * bandwidth_mhz * frac.ul;
}

int prb_count(double bandwidth_mhz)
{
    if (!(bandwidth_mhz > 0.0))
    {
        throw InvalidConfig("bandwidth must be positive");
    }
    if (bandwidth_mhz == 40.0)
    {
        return 106;
    }
    return std::max(1, static_cast<int>(std::lround(272.0 * bandwidth_mhz / 100.0)));
}

int PrbAllocation::allocated() const
{
    int sum = 0;
    for (const auto& [_, n] : prbs)
    {
        sum += n;
    }
    return sum;
}

std::vector<SliceShare> normalized(std::span<const SliceShare> shares)
{
    double sum = 0.0;
    for (const auto& s : shares)
    {
        if (s.share < 0.0)
        {
            throw InvalidConfig("negative slice share");
        }
        sum += s.share;
    }
    if (shares.empty() || !(sum > 0.0))
    {
        throw NoActiveSlices("no slice with a positive share");
    }
    std::vector<SliceShare> out;
    out.reserve(shares.size());
    for (const auto& s : shares)
    {
        if (s.share > 0.0)
        {
            out.push_back({s.slice, s.share / sum});
        }
    }
    return out;
}

PrbAllocation allocate_prbs(std::span<const SliceShare> shares, const std::map<SliceId, double>& demands_mbps,
                            int total_prbs, double cell_capacity_mbps)
{
    if (shares.empty())
    {
        throw NoActiveSlices("allocate_prbs: no slices");
    }
    if (total_prbs <= 0 || !(cell_capacity_mbps > 0.0))
    {
        throw InvalidConfig("allocate_prbs: PRB grid and capacity must be positive");
    }
    double share_sum = 0.0;
    for (const auto& s : shares)
    {
        if (!(s.share > 0.0) || s.share > 1.0)
        {
            throw InvalidConfig(fmt::format("slice {} share {} outside (0,1]", to_string(s.slice), s.share));
        }
        share_sum += s.share;
    }
    if (std::abs(share_sum - 1.0) > kShareSumTolerance)
    {
        throw InvalidConfig(fmt::format("slice shares sum to {}, expected 1", share_sum));
    }

    const double per_prb = cell_capacity_mbps / total_prbs;
    struct Entry
    {
        SliceId slice;
        double share;
        long long need;
        int prbs{0};
    };
    std::vector<Entry> entries;
    for (const auto& s : shares)
    {
        double demand = 0.0;
        if (auto it = demands_mbps.find(s.slice); it != demands_mbps.end())
        {
            demand = it->second;
        }
        if (demand < 0.0 || std::isnan(demand))
        {
            throw InvalidConfig("allocate_prbs: negative demand");
        }
        long long need = 0;
        const double in_prbs = demand / per_prb;
        if (in_prbs >= static_cast<double>(total_prbs) + 1.0)
        {
            need = static_cast<long long>(total_prbs) + 1;
        }
        else if (in_prbs > kPrbTolerance)
        {
            need = static_cast<long long>(std::ceil(in_prbs - kPrbTolerance));
        }
        entries.push_back({s.slice, s.share, need});
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.slice < b.slice; });

    std::vector<Entry*> active;
    for (auto& e : entries)
    {
        if (e.need > 0)
        {
            active.push_back(&e);
        }
    }

    long long remaining = total_prbs;
    while (!active.empty())
    {
        double weight = 0.0;
        for (const auto* e : active)
        {
            weight += e->share;
        }
        std::vector<Entry*> still;
        long long granted = 0;
        for (auto* e : active)
        {
            const double fair = static_cast<double>(remaining) * e->share / weight;
            if (static_cast<double>(e->need) <= fair + 1e-9)
            {
                e->prbs = static_cast<int>(e->need);
                granted += e->need;
            }
            else
            {
                still.push_back(e);
            }
        }
        remaining -= granted;
        if (still.size() == active.size())
        {
            break;
        }
        active = std::move(still);
    }

    if (!active.empty())
    {
        double weight = 0.0;
        for (const auto* e : active)
        {
            weight += e->share;
        }
        std::vector<double> frac(active.size());
        long long floors = 0;
        for (std::size_t i = 0; i < active.size(); ++i)
        {
            const double exact = static_cast<double>(remaining) * active[i]->share / weight;
            const double fl = std::floor(exact + 1e-9);
            active[i]->prbs = static_cast<int>(fl);
            frac[i] = exact - fl;
            floors += static_cast<long long>(fl);
        }
        std::vector<std::size_t> order(active.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
        for (long long left = remaining - floors, k = 0; left > 0; --left, ++k)
        {
            ++active[order[static_cast<std::size_t>(k) % order.size()]]->prbs;
        }
    }

    PrbAllocation out;
    out.total_prbs = total_prbs;
    for (const auto& e : entries)
    {
        out.prbs[e.slice] = e.prbs;
    }
    return out;
}

std::map<SliceId, double> slice_throughput(const PrbAllocation& alloc, double cell_capacity_mbps)
{
    std::map<SliceId, double> out;
    for (const auto& [slice, n] : alloc.prbs)
    {
        out[slice] = alloc.total_prbs > 0 ? static_cast<double>(n) / alloc.total_prbs * cell_capacity_mbps : 0.0;
    }
    return out;
}

std::vector<double> max_min_fair(double capacity, std::span<const double> demands)
{
    std::vector<double> out(demands.size(), 0.0);
    std::vector<std::size_t> order(demands.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return demands[a] < demands[b]; });
    double left = std::max(0.0, capacity);
    std::size_t n = demands.size();
    for (auto idx : order)
    {
        const double fair = left / static_cast<double>(n);
        const double give = std::min(std::max(0.0, demands[idx]), fair);
        out[idx] = give;
        left -= give;
        --n;
    }
    return out;
}

CellSchedule schedule_cell(std::span<const SliceShare> shares, std::span<const UeDemand> demands, int total_prbs,
                           double cell_capacity_mbps)
{
    CellSchedule out;
    out.alloc.total_prbs = total_prbs;
    for (const auto& d : demands)
    {
        out.ue_mbps[d.ue] = 0.0;
    }
    if (shares.empty() || !(cell_capacity_mbps > 0.0))
    {
        return out;
    }
    const auto norm = normalized(shares);
    std::map<SliceId, double> slice_demand;
    for (const auto& s : norm)
    {
        slice_demand[s.slice] = 0.0;
    }
    for (const auto& d : demands)
    {
        if (auto it = slice_demand.find(d.slice); it != slice_demand.end())
        {
            it->second += d.demand_mbps;
        }
    }
    out.alloc = allocate_prbs(norm, slice_demand, total_prbs, cell_capacity_mbps);
    out.slice_capacity_mbps = slice_throughput(out.alloc, cell_capacity_mbps);

    for (const auto& [slice, cap] : out.slice_capacity_mbps)
    {
        std::vector<double> want;
        std::vector<UeId> who;
        for (const auto& d : demands)
        {
            if (d.slice == slice)
            {
                want.push_back(d.demand_mbps);
                who.push_back(d.ue);
            }
        }
        const auto got = max_min_fair(cap, want);
        double served = 0.0;
        for (std::size_t i = 0; i < who.size(); ++i)
        {
            out.ue_mbps[who[i]] = got[i];
            served += got[i];
        }
        out.slice_served_mbps[slice] = served;
    }
    return out;
}
} // namespace slicesim::radio

#pragma once

#include "slicesim/ids.hpp"

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace slicesim::radio
{
class InvalidConfig : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

class NoActiveSlices : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr int kSymbolsPerSlot = 14;

/// TDD pattern: full DL slots, full UL slots and one special slot split into
/// DL symbols, UL symbols and guard.
struct TddConfig
{
    int period_slots{10};
    int dl_slots{7};
    int ul_slots{2};
    int special_dl_symbols{6};
    int special_ul_symbols{4};

    void validate() const;
    bool operator==(const TddConfig&) const = default;
};

enum class Direction
{
    Downlink,
    Uplink,
};

struct DuplexFractions
{
    double dl{0.0};
    double ul{0.0};
};

/// Effective spectral efficiencies. The defaults are fitted to the
/// DL-centric 40 MHz measurement (240 / 25 Mbps).
struct RadioCalibration
{
    double dl_spectral_eff{0.0};
    double ul_spectral_eff{0.0};
    double udp_over_tcp_factor{1.0};

    static RadioCalibration reference();
    void validate() const;
    bool operator==(const RadioCalibration&) const = default;
};

DuplexFractions duplex_fractions(const TddConfig& cfg);

/// Mbps for the given direction: spectral_eff x bandwidth x duplex fraction.
double link_capacity(double bandwidth_mhz, Direction dir, const TddConfig& cfg, const RadioCalibration& cal);

/// PRB grid size for 30 kHz SCS: 272 at 100 MHz, 106 at 40 MHz, otherwise
/// proportional to 272/100 MHz and rounded.
int prb_count(double bandwidth_mhz);

struct SliceShare
{
    SliceId slice{};
    double share{0.0};
    bool operator==(const SliceShare&) const = default;
};

struct PrbAllocation
{
    std::map<SliceId, int> prbs;
    int total_prbs{0};

    int of(SliceId s) const
    {
        auto it = prbs.find(s);
        return it == prbs.end() ? 0 : it->second;
    }
    int allocated() const;
};

/// Whole-PRB slice allocation.
///
/// Slices whose demand fits inside their weighted fair share get exactly
/// ceil(demand) PRBs; the PRBs they leave are redistributed by share among
/// the remaining (saturated) slices, repeatedly, until no more slices drop
/// out. Saturated slices then split what is left with floor + largest
/// remainder, ties going to the lower slice id. Shares must sum to 1.
PrbAllocation allocate_prbs(std::span<const SliceShare> shares, const std::map<SliceId, double>& demands_mbps,
                            int total_prbs, double cell_capacity_mbps);

/// (prb_count / total_prbs) x cell_capacity per slice.
std::map<SliceId, double> slice_throughput(const PrbAllocation& alloc, double cell_capacity_mbps);

/// Max-min fair split of `capacity` among `demands` (real valued).
std::vector<double> max_min_fair(double capacity, std::span<const double> demands);

/// Shares rescaled to sum to 1. Throws NoActiveSlices when empty or all zero.
std::vector<SliceShare> normalized(std::span<const SliceShare> shares);

struct UeDemand
{
    UeId ue{};
    SliceId slice{};
    double demand_mbps{0.0};
};

struct CellSchedule
{
    PrbAllocation alloc;
    std::map<SliceId, double> slice_capacity_mbps;
    std::map<SliceId, double> slice_served_mbps;
    std::map<UeId, double> ue_mbps;
};

/// One scheduling decision for a cell: PRBs per slice by allocate_prbs, then
/// each slice's PRB capacity split max-min fair among its UEs (a UE never gets
/// more than it asks for). UEs on slices absent from `shares` get nothing.
/// Shares are normalized first.
CellSchedule schedule_cell(std::span<const SliceShare> shares, std::span<const UeDemand> demands, int total_prbs,
                           double cell_capacity_mbps);
} // namespace slicesim::radio

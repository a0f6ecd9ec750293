#pragma once

#include "slicesim/ids.hpp"
#include "slicesim/sim/engine.hpp"
#include "slicesim/sim/recorder.hpp"

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace slicesim::core
{
/// Slice/service type + 24-bit slice differentiator.
struct Snssai
{
    std::uint8_t sst{1};
    std::uint32_t sd{0};

    SliceId id() const noexcept { return SliceId{(static_cast<std::uint32_t>(sst) << 24) | (sd & 0xFFFFFFu)}; }
    static Snssai from(SliceId id) noexcept
    {
        return Snssai{static_cast<std::uint8_t>(raw(id) >> 24), raw(id) & 0xFFFFFFu};
    }
    auto operator<=>(const Snssai&) const = default;
};

enum class NetworkFunction
{
    CuUp,
    Smf,
    Upf,
};

const char* to_string(NetworkFunction f) noexcept;

struct SliceSpec
{
    Snssai snssai;
    std::string name;
    double radio_share{1.0};
    /// Floor respected by the share optimizer.
    double min_share{0.0};
    std::set<NetworkFunction> dedicated_functions{NetworkFunction::CuUp, NetworkFunction::Smf, NetworkFunction::Upf};
    std::string qos_label;

    void validate() const;
    bool operator==(const SliceSpec&) const = default;
};

class CoreError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};
class RegistrationRejected : public CoreError
{
  public:
    using CoreError::CoreError;
};
class SliceNotAllowed : public CoreError
{
  public:
    using CoreError::CoreError;
};
class UpfUnavailable : public CoreError
{
  public:
    using CoreError::CoreError;
};

using NodeId = sim::EntityId;

struct RegistrationResult
{
    UeId ue{};
    NodeId amf{};
    std::vector<Snssai> allowed;
};

struct SessionContext
{
    UeId ue{};
    Snssai snssai;
    NodeId smf{};
    NodeId upf{};
    std::uint32_t tunnel_id{0};
    sim::SimTime established_at;
};

struct UserPacket
{
    UeId ue{};
    std::uint32_t tunnel_id{0};
    std::uint64_t bytes{0};
};

enum class DropReason
{
    NoTunnel,
};

struct DeliveryRecord
{
    bool delivered{false};
    sim::SimTime delivered_at;
    std::optional<DropReason> drop;
    std::optional<SliceId> slice;
};

struct SliceCounters
{
    std::uint64_t offered{0};
    std::uint64_t delivered{0};
    std::uint64_t dropped{0};
};

struct CoreConfig
{
    std::string amf_name{"amf"};
    bool sliced_amf{false};
    sim::SimTime upf_delay{sim::micros(500)};
};

/// Slice-aware core: AMF registration, one SMF and one UPF per slice,
/// GTP-like tunnels at the UPF. Network functions are engine entities so
/// they appear in traces and message counts.
class Core
{
  public:
    Core(sim::Engine& engine, CoreConfig cfg, sim::Recorder* recorder = nullptr);

    const CoreConfig& config() const noexcept { return cfg_; }

    void add_subscriber(UeId ue, std::vector<Snssai> allowed);
    bool is_subscriber(UeId ue) const { return subscribers_.contains(ue); }

    /// The AMF serving a slice (shared unless sliced_amf).
    std::optional<NodeId> amf_for(SliceId slice) const;
    NodeId shared_amf() const noexcept { return amf_; }

    RegistrationResult register_ue(NodeId amf, UeId ue);
    bool is_registered(UeId ue) const { return registered_.contains(ue); }
    void deregister_ue(UeId ue);

    NodeId deploy_smf(SliceId slice);
    NodeId deploy_upf(SliceId slice);
    NodeId deploy_amf(SliceId slice);
    void remove_function(SliceId slice, NetworkFunction f);
    void remove_amf(SliceId slice);
    std::optional<NodeId> smf_for(SliceId slice) const;
    std::optional<NodeId> upf_for(SliceId slice) const;

    /// Makes the slice known to the AMF(s); UEs can only get sessions on
    /// registered slices.
    void register_slice(SliceId slice) { amf_slices_.insert(slice); }
    void deregister_slice(SliceId slice) { amf_slices_.erase(slice); }
    bool slice_registered(SliceId slice) const { return amf_slices_.contains(slice); }

    SessionContext establish_pdu_session(NodeId smf, UeId ue, Snssai snssai);
    void release_session(UeId ue);
    const SessionContext* session(UeId ue) const;

    DeliveryRecord forward(NodeId upf, const UserPacket& packet);

    const std::map<SliceId, SliceCounters>& counters() const noexcept { return counters_; }
    std::uint64_t dropped_packets() const noexcept { return dropped_packets_; }

    struct Census
    {
        int amf{0};
        int smf{0};
        int upf{0};
    };
    Census census() const;
    /// Per-slice deployed functions; empty when nothing slice-owned remains.
    std::set<std::pair<SliceId, NetworkFunction>> deployed() const;

  private:
    sim::Engine& engine_;
    CoreConfig cfg_;
    sim::Recorder* recorder_;
    NodeId amf_{};
    std::map<UeId, std::vector<Snssai>> subscribers_;
    std::map<UeId, NodeId> registered_;
    std::set<SliceId> amf_slices_;
    std::map<SliceId, NodeId> smf_;
    std::map<SliceId, NodeId> upf_;
    std::map<SliceId, NodeId> sliced_amf_;
    std::map<NodeId, SliceId> owner_;
    std::map<UeId, SessionContext> sessions_;
    std::map<NodeId, std::map<std::uint32_t, SliceId>> tunnels_;
    std::map<NodeId, std::uint32_t> next_tunnel_;
    std::map<SliceId, SliceCounters> counters_;
    std::uint64_t dropped_packets_{0};
};
} // namespace slicesim::core

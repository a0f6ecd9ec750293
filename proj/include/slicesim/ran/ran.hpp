#pragma once

#include "slicesim/core/core5g.hpp"
#include "slicesim/e2/codec.hpp"
#include "slicesim/e2/endpoint.hpp"
#include "slicesim/radio/radio.hpp"
#include "slicesim/sim/engine.hpp"
#include "slicesim/sim/recorder.hpp"

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace slicesim::ran
{
using NodeId = sim::EntityId;
using radio::Direction;

enum class NodeKind
{
    RU,
    DU,
    CU_CP,
    CU_UP,
};

enum class NodeState
{
    Offline,
    Connecting,
    Operational,
};

const char* to_string(NodeKind k) noexcept;
const char* to_string(NodeState s) noexcept;
std::optional<NodeKind> parse_kind(std::string_view s) noexcept;

/// Per-vendor node characteristics.
struct StackProfile
{
    std::string name{"vendor"};
    std::optional<double> dl_cap_mbps;
    std::optional<double> ul_cap_mbps;
    sim::SimTime one_way_proc_delay;
    e2::Quirk e2_quirk{e2::Quirk::Normal};

    /// Built-in presets: vendor, vendor-empty-ies, oai-split, oai-mono.
    /// Processing delay depends on the node kind the profile is applied to.
    static StackProfile preset(std::string_view name, NodeKind kind);
    static bool is_preset(std::string_view name) noexcept;
    void validate() const;
    bool operator==(const StackProfile&) const = default;
};

/// One-way latencies of the links between nodes, plus signaling constants.
struct LinkConfig
{
    sim::SimTime radio{sim::micros(2000)};
    /// Uniform +/- jitter applied to the radio alignment term per traversal.
    sim::SimTime radio_jitter{sim::micros(1500)};
    sim::SimTime fronthaul{sim::micros(100)};
    sim::SimTime midhaul{sim::micros(200)};
    /// Core-to-server leg, including server processing.
    sim::SimTime server{sim::micros(1000)};
    sim::SimTime f1_timeout{sim::seconds(2)};
    sim::SimTime f1_retry{sim::seconds(1)};
    int attach_messages{6};

    bool operator==(const LinkConfig&) const = default;
};

struct CellConfig
{
    double bandwidth_mhz{40.0};
    radio::TddConfig tdd;
    radio::RadioCalibration calibration{radio::RadioCalibration::reference()};

    bool operator==(const CellConfig&) const = default;
};

class RanError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};
class F1SetupFailure : public RanError
{
  public:
    using RanError::RanError;
};
class DuplicateUserPlane : public RanError
{
  public:
    using RanError::RanError;
};
class UnknownSlice : public RanError
{
  public:
    using RanError::RanError;
};
class SliceUnavailable : public RanError
{
  public:
    using RanError::RanError;
};

struct RanNode
{
    NodeId id{};
    std::string name;
    NodeKind kind{NodeKind::DU};
    StackProfile profile;
    NodeState state{NodeState::Offline};
    std::set<SliceId> served_slices; // CU-UP
    std::optional<NodeId> parent;    // CU-UP: owning CU-CP (E1)

    // DU only.
    std::optional<NodeId> ru;
    std::optional<NodeId> cu_cp;
    CellConfig cell;
    std::vector<radio::SliceShare> shares;
};

enum class UeState
{
    Idle,
    RrcConnected,
    Registered,
    SessionActive,
};

const char* to_string(UeState s) noexcept;

struct UeContext
{
    UeId ue{};
    std::string name;
    NodeId entity{};
    UeState state{UeState::Idle};
    std::optional<SliceId> slice;
    std::optional<NodeId> serving_du;
    std::optional<NodeId> serving_cu_up;
    /// Radio link (fault injection can take it down while the session lives).
    bool radio_up{true};
    /// Fraction of the scheduled rate actually delivered (fault injection).
    double impairment{1.0};
    /// Appears in the serving DU's telemetry once it has been SessionActive.
    bool reported{false};
    std::uint64_t attach_generation{0};
};

struct F1Context
{
    NodeId du{};
    NodeId cu_cp{};
    sim::SimTime started_at;
    int attempt{1};
};

struct AttachResult
{
    UeId ue{};
    SliceId slice{};
    sim::SimTime started_at;
    sim::SimTime completes_at;
    std::vector<NodeId> data_path;      // UE, RU, DU, CU-UP, UPF
    std::vector<NodeId> signaling_path; // UE, RU, DU, CU-CP, AMF
};

inline constexpr double kFullBuffer = std::numeric_limits<double>::infinity();

struct Flow
{
    std::string id;
    UeId ue{};
    Direction direction{Direction::Downlink};
    /// Offered load; kFullBuffer for greedy (tcp_fullbuffer) traffic.
    double rate_mbps{kFullBuffer};
    bool udp{false};
    bool active{false};
    double bytes_served{0.0};
    double last_rate_mbps{0.0};
};

/// One-way user-plane path with the delay accumulated before each node.
struct PathHop
{
    NodeId node{};
    sim::SimTime delay;
};

/// Event-driven RU/DU/CU-CP/CU-UP model.
///
/// DUs run one scheduling decision per 500 us slot once F1 setup completes.
/// UE attach is charged `attach_messages` one-way signaling hops
/// (UE -> RU -> DU -> CU-CP -> AMF); the UE goes RrcConnected after 1/3,
/// Registered after 2/3, SessionActive at the end.
class RanSystem
{
  public:
    RanSystem(sim::Engine& engine, core::Core& core, LinkConfig links = {}, sim::Recorder* recorder = nullptr);

    RanSystem(const RanSystem&) = delete;
    RanSystem& operator=(const RanSystem&) = delete;

    const LinkConfig& links() const noexcept { return links_; }

    NodeId add_node(std::string name, NodeKind kind, StackProfile profile);
    void configure_du(NodeId du, NodeId ru, NodeId cu_cp, CellConfig cell);
    /// Brings RU / CU-CP up or down. DUs go Operational only via F1 setup.
    void set_online(NodeId node, bool online);

    const RanNode& node(NodeId id) const;
    const std::map<NodeId, RanNode>& nodes() const noexcept { return nodes_; }
    std::optional<NodeId> find(std::string_view name) const;

    /// Starts F1 setup; completion or failure arrives as events. A failed
    /// DU retries every LinkConfig::f1_retry until the CU-CP answers.
    F1Context f1_setup(NodeId du, NodeId cu_cp);
    std::uint64_t f1_failures() const noexcept { return f1_failures_; }

    void register_slice(NodeId cu_cp, SliceId slice);
    NodeId deploy_cu_up(NodeId cu_cp, SliceId slice, StackProfile profile);
    void remove_cu_up(SliceId slice);
    std::optional<NodeId> cu_up_for(SliceId slice) const;

    void add_ue(UeId ue, std::string name);
    const UeContext& ue(UeId id) const;
    const std::map<UeId, UeContext>& ues() const noexcept { return ues_; }
    std::optional<UeId> find_ue(std::string_view name) const;

    AttachResult ue_attach(UeId ue, SliceId slice, NodeId du);
    void ue_detach(UeId ue);
    sim::SimTime signaling_hop(NodeId du) const;

    void set_radio_link(UeId ue, bool up);
    void set_impairment(UeId ue, double factor);

    /// Takes effect at the next slot boundary strictly after now; returns it.
    sim::SimTime set_slice_shares(NodeId du, std::vector<radio::SliceShare> shares);
    std::vector<radio::SliceShare> shares(NodeId du);

    void add_flow(Flow flow);
    void set_flow_active(const std::string& id, bool active);
    const std::map<std::string, Flow>& flows() const noexcept { return flows_; }

    /// min(link capacity x transport factor, profile cap).
    double cell_capacity(NodeId du, Direction dir, bool udp) const;
    int total_prbs(NodeId du) const;

    struct TickResult
    {
        radio::CellSchedule schedule;
        double capacity_mbps{0.0};
        bool udp{false};
        /// Delivered per UE after impairment.
        std::map<UeId, double> delivered_mbps;
        std::map<SliceId, double> slice_delivered_mbps;
    };
    const TickResult* last_tick(NodeId du, Direction dir) const;

    /// KPIs of the node's latest tick. DU: cell, slice and UE scopes. CU-UP:
    /// slice throughput through it. Others: empty.
    std::vector<e2::KpiEntry> report_telemetry(NodeId node) const;

    std::vector<PathHop> uplink_path(UeId ue) const;

    using NodeListener = std::function<void(const RanNode&)>;
    using SessionListener = std::function<void(const UeContext&, bool active)>;
    void on_node_state(NodeListener cb) { node_cbs_.push_back(std::move(cb)); }
    void on_session(SessionListener cb) { session_cbs_.push_back(std::move(cb)); }

    std::map<NodeKind, int> census() const;

  private:
    RanNode& mutable_node(NodeId id);
    UeContext& mutable_ue(UeId id);
    void set_state(RanNode& n, NodeState s);
    void f1_attempt(NodeId du, NodeId cu_cp, int attempt);
    void f1_timeout(NodeId du, int attempt);
    void tick(NodeId du);
    void apply_pending_shares(NodeId du);
    void attach_step(UeId ue, std::uint64_t generation, int step);
    void fail_attach(UeContext& u, const std::string& why);

    sim::Engine& engine_;
    core::Core& core_;
    LinkConfig links_;
    sim::Recorder* recorder_;
    std::map<NodeId, RanNode> nodes_;
    std::map<NodeId, bool> online_;
    std::map<NodeId, int> f1_attempt_;
    std::map<NodeId, std::vector<std::pair<sim::SimTime, std::vector<radio::SliceShare>>>> pending_shares_;
    std::map<SliceId, NodeId> cu_up_;
    std::map<NodeId, std::set<SliceId>> cu_cp_slices_;
    std::map<UeId, UeContext> ues_;
    std::map<std::string, Flow> flows_;
    std::map<NodeId, std::map<Direction, TickResult>> last_tick_;
    std::map<NodeId, std::map<SliceId, double>> cu_up_rate_;
    std::uint64_t f1_failures_{0};
    std::vector<NodeListener> node_cbs_;
    std::vector<SessionListener> session_cbs_;
};
} // namespace slicesim::ran

#pragma once

#include "slicesim/e2/codec.hpp"
#include "slicesim/sim/engine.hpp"
#include "slicesim/sim/recorder.hpp"

#include <functional>
#include <map>
#include <set>
#include <string>
#include <variant>

namespace slicesim::e2
{
/// Interworking behaviour of a node's E2 stack.
enum class Quirk
{
    Normal,   // full handshake, RAN functions advertised
    EmptyIEs, // SetupResponse sent with no IEs
    NoDecode, // SetupRequest never decoded, no reply
};

const char* to_string(Quirk q) noexcept;
std::optional<Quirk> parse_quirk(std::string_view s) noexcept;

inline constexpr std::uint16_t kFunctionKpiReport = 1;
inline constexpr std::uint16_t kFunctionSliceControl = 2;
inline constexpr sim::SimTime kMinReportPeriod = sim::millis(10);

/// What travels between E2 endpoints on the engine.
struct Frame
{
    sim::EntityId from{};
    Bytes bytes;
};

void send_frame(sim::Engine& engine, sim::EntityId from, sim::EntityId to, sim::SimTime latency, const E2Message& msg);

// Node side ----------------------------------------------------------------

struct AgentHooks
{
    std::function<bool()> operational;
    std::function<std::vector<KpiEntry>()> kpis;
    /// Applies the action; returns the time it takes effect.
    std::function<sim::SimTime(const ControlAction&)> apply_control;
};

class NodeAgent
{
  public:
    NodeAgent(sim::Engine& engine, sim::EntityId self, std::string node_name, Quirk quirk, AgentHooks hooks,
              std::set<std::uint16_t> functions = {kFunctionKpiReport, kFunctionSliceControl});

    sim::EntityId self() const noexcept { return self_; }
    Quirk quirk() const noexcept { return quirk_; }
    void set_link_latency(sim::SimTime latency) noexcept { latency_ = latency; }

    /// Fault injection: silently drop ControlRequests.
    void set_drop_control(bool drop) noexcept { drop_control_ = drop; }

    void on_frame(const Frame& frame);

    std::uint64_t indications_sent() const noexcept { return indications_sent_; }
    std::uint64_t decode_failures() const noexcept { return decode_failures_; }

  private:
    struct NodeSubscription
    {
        sim::EntityId ric{};
        std::uint32_t sub_id{0};
        sim::SimTime period;
    };

    void reply(sim::EntityId to, MsgType type, std::uint32_t txn, std::vector<Ie> ies);
    void fail(sim::EntityId to, std::uint32_t txn, std::string_view cause);
    void report(std::uint32_t sub_id);

    sim::Engine& engine_;
    sim::EntityId self_;
    std::string name_;
    Quirk quirk_;
    AgentHooks hooks_;
    std::set<std::uint16_t> functions_;
    sim::SimTime latency_{sim::millis(1)};
    bool drop_control_{false};
    std::map<std::uint32_t, NodeSubscription> subscriptions_;
    std::uint64_t indications_sent_{0};
    std::uint64_t decode_failures_{0};
};

// RIC side -----------------------------------------------------------------

enum class AssocState
{
    Idle,
    SetupPending,
    Established,
    Degraded, // handshake completed but no RAN functions advertised
};

const char* to_string(AssocState s) noexcept;

struct E2Association
{
    sim::EntityId node{};
    std::string node_name;
    AssocState state{AssocState::Idle};
    std::set<std::uint16_t> ran_functions;
    int retries_left{0};
    int attempts{0};
    std::uint32_t setup_txn{0};
};

struct Subscription
{
    std::uint32_t sub_id{0};
    sim::EntityId node{};
    std::uint16_t function{0};
    sim::SimTime report_period;
    bool active{false};
};

struct E2Failure
{
    std::string cause;
};

struct ControlAck
{
    std::uint32_t txn_id{0};
    sim::SimTime applied_at;
};

using ControlOutcome = std::variant<ControlAck, E2Failure>;

struct RetryPolicy
{
    int setup_retries{3};
    sim::SimTime setup_interval{sim::seconds(2)};
    sim::SimTime control_timeout{sim::seconds(1)};
};

struct Indication
{
    sim::EntityId node{};
    std::uint32_t sub_id{0};
    sim::SimTime at;
    std::vector<KpiEntry> kpis;
};

class RicEndpoint
{
  public:
    RicEndpoint(sim::Engine& engine, sim::EntityId self, sim::Recorder* recorder, RetryPolicy policy = {});

    sim::EntityId self() const noexcept { return self_; }
    void set_link_latency(sim::SimTime latency) noexcept { latency_ = latency; }

    /// Starts (or restarts) the setup handshake with a node.
    void e2_setup(sim::EntityId node);

    const E2Association* association(sim::EntityId node) const;
    const std::map<sim::EntityId, E2Association>& associations() const noexcept { return assocs_; }

    /// Local rejections (degraded or missing association, period below the
    /// 10 ms floor, function not advertised) come back immediately as a
    /// failure; otherwise the subscription is pending until the node answers.
    std::variant<Subscription, E2Failure> subscribe(sim::EntityId node, std::uint16_t function,
                                                    sim::SimTime report_period);
    const std::map<std::uint32_t, Subscription>& subscriptions() const noexcept { return subs_; }

    /// `done` is invoked exactly once: ack, node failure or timeout. Local
    /// rejections are returned directly and `done` is not called.
    std::variant<std::uint32_t, E2Failure> control(sim::EntityId node, const ControlAction& action,
                                                   std::function<void(const ControlOutcome&)> done);

    void on_frame(const Frame& frame);

    void on_indication(std::function<void(const Indication&)> cb) { indication_cbs_.push_back(std::move(cb)); }
    void on_association(std::function<void(const E2Association&)> cb) { assoc_cbs_.push_back(std::move(cb)); }
    void on_subscription_failure(std::function<void(sim::EntityId, const E2Failure&)> cb)
    {
        sub_failure_cbs_.push_back(std::move(cb));
    }

    std::uint64_t unmatched_responses() const noexcept { return unmatched_; }
    std::uint64_t setup_timeouts() const noexcept { return setup_timeouts_; }
    std::uint64_t indications_received() const noexcept { return indications_; }
    const std::vector<std::pair<std::string, E2Failure>>& failures() const noexcept { return failures_; }

  private:
    enum class PendingKind
    {
        Setup,
        Subscription,
        Control,
    };
    struct Pending
    {
        PendingKind kind;
        sim::EntityId node{};
        std::uint32_t sub_id{0};
        std::function<void(const ControlOutcome&)> done;
    };

    void send_setup(E2Association& a);
    void setup_timer(sim::EntityId node, std::uint32_t txn);
    void record_failure(const E2Association& a, std::string cause);
    void notify(const E2Association& a);
    std::uint32_t next_txn() noexcept { return ++txn_counter_; }

    sim::Engine& engine_;
    sim::EntityId self_;
    sim::Recorder* recorder_;
    RetryPolicy policy_;
    sim::SimTime latency_{sim::millis(1)};
    std::uint32_t txn_counter_{0};
    std::map<sim::EntityId, E2Association> assocs_;
    std::map<std::uint32_t, Pending> pending_;
    std::map<std::uint32_t, Subscription> subs_;
    std::vector<std::function<void(const Indication&)>> indication_cbs_;
    std::vector<std::function<void(const E2Association&)>> assoc_cbs_;
    std::vector<std::function<void(sim::EntityId, const E2Failure&)>> sub_failure_cbs_;
    std::uint64_t unmatched_{0};
    std::uint64_t setup_timeouts_{0};
    std::uint64_t indications_{0};
    std::vector<std::pair<std::string, E2Failure>> failures_;
};
} // namespace slicesim::e2

#pragma once

#include "slicesim/core/core5g.hpp"
#include "slicesim/e2/endpoint.hpp"
#include "slicesim/radio/radio.hpp"
#include "slicesim/ran/ran.hpp"
#include "slicesim/sim/engine.hpp"
#include "slicesim/sim/recorder.hpp"

#include <any>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace slicesim::ric
{
using NodeId = sim::EntityId;

struct KpiSample
{
    NodeId node{};
    e2::ScopeKind scope_kind{e2::ScopeKind::Cell};
    std::uint32_t scope{0};
    e2::Metric metric{e2::Metric::DlThroughput};
    double value{0.0};
    sim::SimTime at;
};

class Ric;

/// xApp handler contract. Runs on the engine thread only.
class XApp
{
  public:
    explicit XApp(std::string id) : id_(std::move(id)) {}
    virtual ~XApp() = default;

    const std::string& id() const noexcept { return id_; }

    virtual void on_indication(const KpiSample& sample) = 0;
    /// Called after the last sample of an indication has been delivered.
    virtual void on_report_end(NodeId /*node*/, sim::SimTime /*at*/) {}
    virtual void on_timer(sim::SimTime /*now*/) {}

    /// Nodes this xApp subscribed to or registered for; controls to other
    /// nodes are refused by the runtime.
    const std::set<NodeId>& nodes() const noexcept { return nodes_; }
    void hold(NodeId node) { nodes_.insert(node); }

  private:
    std::string id_;
    std::set<NodeId> nodes_;
};

class NotHeld : public std::logic_error
{
  public:
    using std::logic_error::logic_error;
};

/// Near-RT RIC: one E2 endpoint shared by hosted xApps, indication fan-out,
/// periodic timers and a topic bus for xApp-to-xApp messages.
class Ric
{
  public:
    Ric(sim::Engine& engine, sim::Recorder* recorder, e2::RetryPolicy policy = {});

    Ric(const Ric&) = delete;
    Ric& operator=(const Ric&) = delete;

    sim::Engine& engine() noexcept { return engine_; }
    NodeId entity() const noexcept { return self_; }
    e2::RicEndpoint& e2() noexcept { return *endpoint_; }

    void host(XApp& app);
    /// Starts an `on_timer` callback every `period` from `first`.
    void start_timer(XApp& app, sim::SimTime first, sim::SimTime period);

    /// Subscribes on behalf of `app` and routes the node's indications to it.
    std::variant<e2::Subscription, e2::E2Failure> subscribe(XApp& app, NodeId node, std::uint16_t function,
                                                            sim::SimTime period);

    /// Throws NotHeld if `app` holds no subscription/registration for `node`.
    std::variant<std::uint32_t, e2::E2Failure> emit(XApp& app, NodeId node, const e2::ControlAction& action,
                                                    std::function<void(const e2::ControlOutcome&)> done);

    using BusHandler = std::function<void(const std::any&)>;
    void bus_subscribe(const std::string& topic, BusHandler handler);
    /// Delivered as an engine event at the current time, after the caller
    /// returns.
    void publish(const std::string& topic, std::any message);

  private:
    void dispatch(const e2::Indication& ind);

    sim::Engine& engine_;
    sim::Recorder* recorder_;
    NodeId self_;
    std::unique_ptr<e2::RicEndpoint> endpoint_;
    std::vector<XApp*> apps_;
    std::map<NodeId, std::vector<XApp*>> routes_;
    std::map<std::string, std::vector<BusHandler>> bus_;
};

// Bus payloads --------------------------------------------------------------

inline constexpr const char* kTopicShares = "slice_shares";
inline constexpr const char* kTopicSession = "ue_session";

struct SharesNotice
{
    NodeId du{};
    std::vector<radio::SliceShare> shares;
    sim::SimTime applied_at;
};

struct SessionNotice
{
    UeId ue{};
    SliceId slice{};
    bool active{false};
};

// Slice manager ---------------------------------------------------------------

class AdmissionRejected : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

enum class OrchestrationStep
{
    RegisterCuCp,
    DeployCuUp,
    DeploySmf,
    DeployUpf,
    DeployAmf,
    SetSliceShares,
    RegisterAmf,
};
const char* to_string(OrchestrationStep s) noexcept;

enum class SliceState
{
    Pending,
    Ready,
    OrchestrationFailed,
};
const char* to_string(SliceState s) noexcept;

struct SliceStatus
{
    SliceId slice{};
    SliceState state{SliceState::Pending};
    std::optional<OrchestrationStep> failed_step;
    std::string detail;
};

enum class Provisioning
{
    E2,     // shares pushed through E2 control and acknowledged
    Static, // shares written directly (nodes without a usable E2 stack)
};

/// Slice lifecycle across RAN and core.
class SliceManager : public XApp
{
  public:
    SliceManager(Ric& ric, ran::RanSystem& ran, core::Core& core, NodeId cu_cp, std::vector<NodeId> dus,
                 sim::Recorder* recorder);

    /// Admission is checked synchronously (AdmissionRejected). Deployment
    /// errors roll back and return OrchestrationFailed; otherwise the status
    /// is Pending until every DU acknowledged the new shares (Ready), or an
    /// acknowledgement failed (OrchestrationFailed with rollback).
    SliceStatus create_slice(const core::SliceSpec& spec, Provisioning provisioning = Provisioning::E2);

    /// Changes radio shares of existing slices; unknown slices are rejected.
    void set_shares(const std::map<SliceId, double>& shares, Provisioning provisioning = Provisioning::E2);

    std::optional<SliceStatus> status(SliceId slice) const;
    const std::map<SliceId, core::SliceSpec>& slices() const noexcept { return specs_; }
    std::vector<radio::SliceShare> active_shares() const;

    void on_indication(const KpiSample&) override {}

    using StatusListener = std::function<void(const SliceStatus&)>;
    void on_status(StatusListener cb) { status_cbs_.push_back(std::move(cb)); }

  private:
    void log(SliceId slice, std::string_view text);
    void push_shares(std::optional<SliceId> creating, Provisioning provisioning);
    void finish(SliceId slice, SliceState state, std::optional<OrchestrationStep> step, std::string detail);
    void rollback(SliceId slice);

    Ric& ric_;
    ran::RanSystem& ran_;
    core::Core& core_;
    NodeId cu_cp_;
    std::vector<NodeId> dus_;
    sim::Recorder* recorder_;
    std::map<SliceId, core::SliceSpec> specs_;
    std::map<SliceId, SliceStatus> status_;
    std::vector<StatusListener> status_cbs_;
};

// Digital twin ------------------------------------------------------------------

enum class AnomalyKind
{
    ConnectivityDrop,
    KpiOutlier,
    TwinDivergence,
};
const char* to_string(AnomalyKind k) noexcept;

struct Anomaly
{
    UeId ue{};
    AnomalyKind kind{AnomalyKind::ConnectivityDrop};
    sim::SimTime detected_at;
    double score{0.0};
    std::string evidence;
};

class StaleTwin : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct TwinConfig
{
    std::size_t window{50};
    sim::SimTime report_period{sim::millis(100)};
    int consecutive{3};
    double z_threshold{3.0};
    double z_std_floor{1e-3};
    double divergence_threshold{0.2};
    double divergence_epsilon{1.0};
    sim::SimTime suppression{sim::seconds(1)};
    int stale_periods{5};
};

struct TwinCell
{
    double bandwidth_mhz{40.0};
    radio::TddConfig tdd;
    radio::RadioCalibration calibration{radio::RadioCalibration::reference()};
    std::optional<double> dl_cap_mbps;
    /// Downlink traffic is UDP (transport factor applies).
    bool udp{false};
    std::vector<radio::SliceShare> shares;

    double capacity_mbps() const;
    int prbs() const { return radio::prb_count(bandwidth_mhz); }
};

struct TwinUe
{
    NodeId cell{};
    bool connected{false};
    std::optional<SliceId> slice;
    bool session_expected{false};
    std::deque<double> window; // measured DL Mbps, oldest first
    double demand_mbps{0.0};
    sim::SimTime last_sample;

    // Prediction made at the previous sync for the current sample.
    std::optional<double> predicted;

    // Detector state for the latest sample.
    int drop_run{0};
    int outlier_run{0};
    int divergence_run{0};
    double last_z{0.0};
    double last_divergence{0.0};
};

struct TwinState
{
    TwinConfig config;
    std::map<NodeId, TwinCell> cells;
    std::map<UeId, TwinUe> ues;
    /// Session notices for UEs not seen in telemetry yet.
    std::map<UeId, SessionNotice> sessions;
    std::map<SliceId, double> min_shares;
    sim::SimTime last_sync;
    std::map<std::pair<UeId, AnomalyKind>, sim::SimTime> last_emitted;
};

/// Folds one sample into the twin. UE DL samples run the detectors' per
/// sample bookkeeping (z against the window before insertion, divergence
/// against the stored prediction).
void twin_sync(TwinState& twin, const KpiSample& sample);

/// Per-UE DL rate at time `at` from the radio model over twin state.
/// Throws StaleTwin when `at` is more than stale_periods report periods past
/// the last sync.
std::map<UeId, double> twin_predict(const TwinState& twin, sim::SimTime at);

/// Detectors that reached their run length at the latest sample, after
/// duplicate suppression (which is recorded in `twin`).
std::vector<Anomaly> detect_anomalies(TwinState& twin, sim::SimTime at);

/// 5% grid search over share vectors summing to 1 for `cell`; see README.
std::vector<radio::SliceShare> optimize_shares(const TwinState& twin, NodeId cell,
                                               const std::map<SliceId, double>& demands_mbps);

/// Per-UE twin rows logged at each sync, used by the offline re-check.
namespace twin_metric
{
inline constexpr const char* kEntity = "twin";
inline constexpr const char* kDl = "dl_mbps";
inline constexpr const char* kConnected = "connected";
inline constexpr const char* kPredicted = "predicted_dl_mbps";
inline constexpr const char* kSession = "session";
} // namespace twin_metric

class TwinXApp : public XApp
{
  public:
    TwinXApp(Ric& ric, TwinConfig config, sim::Recorder* recorder);

    /// Static cell configuration push.
    void configure_cell(NodeId du, TwinCell cell);
    void set_min_share(SliceId slice, double min_share) { twin_.min_shares[slice] = min_share; }
    /// Names used for UEs in logged rows (default "ue<n>").
    void set_ue_namer(std::function<std::string(UeId)> namer) { namer_ = std::move(namer); }

    const TwinState& twin() const noexcept { return twin_; }
    const std::vector<Anomaly>& anomalies() const noexcept { return anomalies_; }

    /// optimize_shares over the twin's per-slice demand estimates.
    std::vector<radio::SliceShare> recommend(NodeId cell) const;

    void on_indication(const KpiSample& sample) override;
    void on_report_end(NodeId node, sim::SimTime at) override;

  private:
    Ric& ric_;
    sim::Recorder* recorder_;
    TwinState twin_;
    std::vector<Anomaly> anomalies_;
    std::function<std::string(UeId)> namer_;
};
} // namespace slicesim::ric

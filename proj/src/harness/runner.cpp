#include "slicesim/harness/runner.hpp"

#include "slicesim/core/core5g.hpp"
#include "slicesim/e2/endpoint.hpp"
#include "slicesim/ran/ran.hpp"
#include "slicesim/ric/ric.hpp"
#include "slicesim/sim/engine.hpp"
#include "slicesim/sim/recorder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace slicesim::harness
{
namespace
{
using ran::NodeId;
using ran::NodeKind;
using sim::SimTime;
using ojson = nlohmann::ordered_json;

constexpr SimTime kSamplePeriod = sim::millis(100);

struct FlowState
{
    const TrafficSpec* spec{nullptr};
    UeId ue{};
    radio::Direction dir{radio::Direction::Downlink};
    double last_bytes{0.0};
    std::vector<double> samples;
    // ping only
    std::unique_ptr<sim::RngStream> rng;
    std::uint64_t sent{0};
    std::uint64_t lost{0};
    std::vector<double> rtts_ms;
};

struct SliceSample
{
    SimTime at;
    double dl{0.0};
    double ul{0.0};
};

struct Fault
{
    std::string target;
    std::string kind;
    SimTime start;
    SimTime end;
};

double mean(const std::vector<double>& v)
{
    if (v.empty())
    {
        return 0.0;
    }
    double sum = 0.0;
    for (const double x : v)
    {
        sum += x;
    }
    return sum / static_cast<double>(v.size());
}

/// Nearest-rank percentile.
double percentile(std::vector<double> v, double p)
{
    if (v.empty())
    {
        return 0.0;
    }
    std::sort(v.begin(), v.end());
    const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(v.size())));
    return v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
}

class Run
{
  public:
    Run(const Scenario& s, std::uint64_t seed, std::ostream* trace);

    void execute();
    RunArtifacts artifacts();

  private:
    ran::StackProfile resolve_profile(const std::string& name, NodeKind kind) const;
    void build_topology();
    void build_ric();
    void build_traffic();
    void schedule_events();
    void apply(const EventSpec& e);
    void sample();
    void send_ping(std::size_t idx);
    void log(const std::string& text) { rec_.event(engine_.now(), "harness", text); }
    std::string ue_name(UeId id) const { return ue_names_.at(id); }
    std::string node_name(NodeId id) const { return engine_.name(id); }
    std::optional<std::string> slice_name(SliceId id) const;
    ric::Provisioning provisioning_for(const std::vector<std::string>& slices) const;
    ojson summary();

    const Scenario& s_;
    sim::Engine engine_;
    sim::Recorder rec_;
    core::Core core_;
    ran::RanSystem ran_;
    ric::Ric ric_;
    std::unique_ptr<ric::SliceManager> slices_;
    std::unique_ptr<ric::TwinXApp> twin_;
    std::map<NodeId, std::unique_ptr<e2::NodeAgent>> agents_;
    NodeId harness_{};
    NodeId server_{};
    NodeId cu_cp_{};
    std::vector<NodeId> dus_;
    std::map<std::string, NodeId> node_ids_;
    std::map<std::string, UeId> ue_ids_;
    std::map<UeId, std::string> ue_names_;
    std::map<std::string, SliceId> slice_ids_;
    std::vector<FlowState> flows_;
    std::map<std::string, std::vector<SliceSample>> slice_samples_;
    std::map<std::string, ran::AttachResult> attaches_;
    std::map<NodeId, std::uint64_t> indications_;
    std::vector<Fault> faults_;
};

Run::Run(const Scenario& s, std::uint64_t seed, std::ostream* trace)
    : s_(s), engine_(seed),
      core_(engine_, core::CoreConfig{"amf", s.core.sliced_amf, sim::micros(s.links.upf_us)}, &rec_),
      ran_(engine_, core_,
           ran::LinkConfig{sim::micros(s.links.radio_us), sim::micros(s.links.radio_jitter_us),
                           sim::micros(s.links.fronthaul_us), sim::micros(s.links.midhaul_us),
                           sim::micros(s.links.server_us)},
           &rec_),
      ric_(engine_, &rec_)
{
    engine_.set_trace(trace);
    harness_ = engine_.add_entity("harness");
    server_ = engine_.add_entity("server");

    for (std::size_t i = 0; i < s.slices.size(); ++i)
    {
        const auto& sl = s.slices[i];
        slice_ids_[sl.name] = core::Snssai{static_cast<std::uint8_t>(sl.sst), sl.sd}.id();
    }
    std::uint32_t next_ue = 1;
    for (const auto& sub : s.core.subscribers)
    {
        const UeId id{next_ue++};
        ue_ids_[sub.ue] = id;
        ue_names_[id] = sub.ue;
        std::vector<core::Snssai> allowed;
        for (const auto& name : sub.slices)
        {
            allowed.push_back(core::Snssai::from(slice_ids_.at(name)));
        }
        core_.add_subscriber(id, std::move(allowed));
        ran_.add_ue(id, sub.ue);
    }

    build_topology();
    build_ric();
    build_traffic();
    schedule_events();
}

std::optional<std::string> Run::slice_name(SliceId id) const
{
    for (const auto& [name, sid] : slice_ids_)
    {
        if (sid == id)
        {
            return name;
        }
    }
    return std::nullopt;
}

ran::StackProfile Run::resolve_profile(const std::string& name, NodeKind kind) const
{
    if (ran::StackProfile::is_preset(name))
    {
        return ran::StackProfile::preset(name, kind);
    }
    const auto& ps = s_.profiles.at(name);
    auto p = ran::StackProfile::preset(ps.base, kind);
    p.name = name;
    if (kind == NodeKind::DU)
    {
        if (ps.dl_cap_mbps)
            p.dl_cap_mbps = ps.dl_cap_mbps;
        if (ps.ul_cap_mbps)
            p.ul_cap_mbps = ps.ul_cap_mbps;
        if (ps.du_proc_us)
            p.one_way_proc_delay = sim::micros(*ps.du_proc_us);
    }
    if (ps.e2_quirk)
    {
        p.e2_quirk = *e2::parse_quirk(*ps.e2_quirk);
    }
    return p;
}

void Run::build_topology()
{
    // RUs and the CU-CP first: DUs reference them.
    for (const auto& n : s_.nodes)
    {
        const auto kind = *ran::parse_kind(n.kind);
        if (kind == NodeKind::DU)
        {
            continue;
        }
        const auto id = ran_.add_node(n.id, kind, resolve_profile(n.profile, kind));
        node_ids_[n.id] = id;
        if (kind == NodeKind::CU_CP)
        {
            cu_cp_ = id;
        }
    }
    for (const auto& n : s_.nodes)
    {
        if (n.kind != "DU")
        {
            continue;
        }
        const auto id = ran_.add_node(n.id, NodeKind::DU, resolve_profile(n.profile, NodeKind::DU));
        node_ids_[n.id] = id;
        ran_.configure_du(id, node_ids_.at(n.ru), node_ids_.at(n.cu_cp),
                          ran::CellConfig{n.bandwidth_mhz, n.tdd, s_.calibration});
        dus_.push_back(id);
    }
}

void Run::build_ric()
{
    slices_ = std::make_unique<ric::SliceManager>(ric_, ran_, core_, cu_cp_, dus_, &rec_);
    ric_.host(*slices_);
    if (!s_.ric.enabled)
    {
        return;
    }
    const auto period = sim::millis(s_.ric.report_period_ms);
    if (s_.ric.twin)
    {
        ric::TwinConfig cfg;
        cfg.window = s_.ric.twin_window;
        cfg.report_period = period;
        twin_ = std::make_unique<ric::TwinXApp>(ric_, cfg, &rec_);
        twin_->set_ue_namer([this](UeId id) { return ue_name(id); });
        ric_.host(*twin_);
        bool dl_udp = false;
        bool dl_other = false;
        for (const auto& t : s_.traffic)
        {
            if (t.src == "server")
            {
                (t.kind == "udp_cbr" ? dl_udp : dl_other) = true;
            }
        }
        for (const auto& name : s_.ric.subscribe)
        {
            const auto du = node_ids_.at(name);
            const auto& n = ran_.node(du);
            ric::TwinCell cell;
            cell.bandwidth_mhz = n.cell.bandwidth_mhz;
            cell.tdd = n.cell.tdd;
            cell.calibration = n.cell.calibration;
            cell.dl_cap_mbps = n.profile.dl_cap_mbps;
            cell.udp = dl_udp && !dl_other;
            twin_->configure_cell(du, cell);
        }
        for (const auto& sl : s_.slices)
        {
            twin_->set_min_share(slice_ids_.at(sl.name), sl.min_share);
        }
    }

    for (const auto& n : s_.nodes)
    {
        if (n.kind != "DU" || !n.e2)
        {
            continue;
        }
        const auto du = node_ids_.at(n.id);
        e2::AgentHooks hooks;
        hooks.operational = [this, du] { return ran_.node(du).state == ran::NodeState::Operational; };
        hooks.kpis = [this, du] { return ran_.report_telemetry(du); };
        hooks.apply_control = [this, du](const e2::ControlAction& action) {
            const auto& set = std::get<e2::SetSliceShares>(action);
            return ran_.set_slice_shares(du, set.shares);
        };
        auto agent = std::make_unique<e2::NodeAgent>(engine_, du, n.id, ran_.node(du).profile.e2_quirk, hooks);
        auto* raw_agent = agent.get();
        engine_.set_handler(du, [raw_agent](const sim::Event& ev) {
            if (const auto* frame = std::any_cast<e2::Frame>(&ev.payload.body))
            {
                raw_agent->on_frame(*frame);
            }
        });
        agents_[du] = std::move(agent);
    }

    ran_.on_node_state([this](const ran::RanNode& n) {
        if (n.state == ran::NodeState::Operational && agents_.contains(n.id))
        {
            ric_.e2().e2_setup(n.id);
        }
    });
    ric_.e2().on_association([this, period](const e2::E2Association& a) {
        const bool wanted = std::find(s_.ric.subscribe.begin(), s_.ric.subscribe.end(), a.node_name) !=
                            s_.ric.subscribe.end();
        if (!wanted || (a.state != e2::AssocState::Established && a.state != e2::AssocState::Degraded))
        {
            return;
        }
        ric::XApp& app = twin_ ? static_cast<ric::XApp&>(*twin_) : static_cast<ric::XApp&>(*slices_);
        const auto result = ric_.subscribe(app, a.node, e2::kFunctionKpiReport, period);
        if (const auto* err = std::get_if<e2::E2Failure>(&result))
        {
            rec_.event(engine_.now(), a.node_name, fmt::format("e2 subscription failed cause={}", err->cause));
        }
    });
    ric_.e2().on_indication([this](const e2::Indication& ind) { ++indications_[ind.node]; });
}

void Run::build_traffic()
{
    for (const auto& t : s_.traffic)
    {
        FlowState f;
        f.spec = &t;
        const bool uplink = t.dst == "server";
        f.ue = ue_ids_.at(uplink ? t.src : t.dst);
        f.dir = uplink ? radio::Direction::Uplink : radio::Direction::Downlink;
        if (t.kind == "ping")
        {
            f.rng = std::make_unique<sim::RngStream>(engine_.rng("ping:" + t.id));
        }
        else
        {
            ran::Flow flow;
            flow.id = t.id;
            flow.ue = f.ue;
            flow.direction = f.dir;
            flow.rate_mbps = t.kind == "udp_cbr" ? t.rate_mbps : ran::kFullBuffer;
            flow.udp = t.kind == "udp_cbr";
            ran_.add_flow(flow);
        }
        flows_.push_back(std::move(f));
    }
    for (std::size_t i = 0; i < flows_.size(); ++i)
    {
        const auto* t = flows_[i].spec;
        if (t->kind == "ping")
        {
            engine_.post(sim::millis(t->start_ms), harness_, "ping_start", [this, i] { send_ping(i); });
            continue;
        }
        engine_.post(sim::millis(t->start_ms), harness_, "flow_start",
                     [this, id = t->id] { ran_.set_flow_active(id, true); });
        engine_.post(sim::millis(t->stop_ms), harness_, "flow_stop",
                     [this, id = t->id] { ran_.set_flow_active(id, false); });
    }
}

void Run::send_ping(std::size_t idx)
{
    auto& f = flows_[idx];
    const auto* t = f.spec;
    const auto next = engine_.now() + sim::millis(t->interval_ms);
    if (next < sim::millis(t->stop_ms))
    {
        engine_.post(next, harness_, "ping_timer", [this, idx] { send_ping(idx); });
    }
    ++f.sent;
    const auto& u = ran_.ue(f.ue);
    if (u.state != ran::UeState::SessionActive || !u.radio_up || !u.slice || !core_.upf_for(*u.slice))
    {
        ++f.lost;
        return;
    }
    const auto& links = ran_.links();
    const auto jittered = [&] {
        const auto lo = static_cast<double>(links.radio.us) - static_cast<double>(links.radio_jitter.us);
        const auto hi = static_cast<double>(links.radio.us) + static_cast<double>(links.radio_jitter.us);
        return sim::micros(static_cast<std::uint64_t>(std::llround(f.rng->uniform(lo, hi))));
    };
    const auto& du = ran_.node(*u.serving_du);
    const auto& ru = ran_.node(*du.ru);
    const auto& cu = ran_.node(*u.serving_cu_up);
    const auto upf = *core_.upf_for(*u.slice);
    const auto upf_delay = core_.config().upf_delay;

    struct Hop
    {
        NodeId node;
        SimTime delay;
        const char* kind;
    };
    auto hops = std::make_shared<std::vector<Hop>>(std::vector<Hop>{
        {ru.id, jittered(), "ping_request"},
        {du.id, ru.profile.one_way_proc_delay + links.fronthaul, "ping_request"},
        {cu.id, du.profile.one_way_proc_delay + links.midhaul, "ping_request"},
        {upf, cu.profile.one_way_proc_delay, "ping_request"},
        {server_, upf_delay + links.server, "ping_request"},
        {upf, links.server, "ping_reply"},
        {cu.id, upf_delay, "ping_reply"},
        {du.id, cu.profile.one_way_proc_delay + links.midhaul, "ping_reply"},
        {ru.id, du.profile.one_way_proc_delay + links.fronthaul, "ping_reply"},
        {u.entity, ru.profile.one_way_proc_delay + jittered(), "ping_reply"},
    });
    const auto sent_at = engine_.now();
    auto step = std::make_shared<std::function<void(std::size_t)>>();
    *step = [this, hops, step, sent_at, idx](std::size_t i) {
        if (i == hops->size())
        {
            const double rtt_ms = static_cast<double>((engine_.now() - sent_at).us) / 1000.0;
            auto& fs = flows_[idx];
            fs.rtts_ms.push_back(rtt_ms);
            rec_.metric(engine_.now(), fs.spec->id, "rtt_ms", rtt_ms);
            *step = nullptr; // break the self-reference
            return;
        }
        const auto& h = (*hops)[i];
        engine_.post_in(h.delay, h.node, h.kind, [step, i] { (*step)(i + 1); });
    };
    (*step)(0);
}

ric::Provisioning Run::provisioning_for(const std::vector<std::string>& names) const
{
    for (const auto& n : names)
    {
        if (s_.slice(n)->provision == "static")
        {
            return ric::Provisioning::Static;
        }
    }
    return ric::Provisioning::E2;
}

void Run::schedule_events()
{
    // Bring-up: RUs and CU-CP online, F1 setup for every DU.
    engine_.post(SimTime{}, harness_, "bring_up", [this] {
        for (const auto& n : s_.nodes)
        {
            if (n.kind != "DU")
            {
                ran_.set_online(node_ids_.at(n.id), true);
            }
        }
        for (const auto du : dus_)
        {
            ran_.f1_setup(du, *ran_.node(du).cu_cp);
        }
    });
    for (const auto& e : s_.events)
    {
        engine_.post(sim::millis(e.at_ms), harness_, "scenario:" + e.action, [this, &e] { apply(e); });
    }
    for (auto t = kSamplePeriod; t <= sim::millis(s_.meta.duration_ms); t += kSamplePeriod)
    {
        engine_.post(t, harness_, "sample", [this] { sample(); });
    }
}

void Run::apply(const EventSpec& e)
{
    try
    {
        if (e.action == "attach")
        {
            attaches_[e.ue] = ran_.ue_attach(ue_ids_.at(e.ue), slice_ids_.at(e.slice), node_ids_.at(e.du));
        }
        else if (e.action == "detach")
        {
            ran_.ue_detach(ue_ids_.at(e.ue));
        }
        else if (e.action == "create_slice")
        {
            const auto& sl = *s_.slice(e.slice);
            core::SliceSpec spec;
            spec.snssai = core::Snssai::from(slice_ids_.at(sl.name));
            spec.name = sl.name;
            spec.radio_share = sl.radio_share;
            spec.min_share = sl.min_share;
            spec.qos_label = sl.qos_label;
            slices_->create_slice(spec, provisioning_for({sl.name}));
        }
        else if (e.action == "set_shares")
        {
            std::map<SliceId, double> shares;
            std::vector<std::string> names;
            for (const auto& [name, share] : e.shares)
            {
                shares[slice_ids_.at(name)] = share;
                names.push_back(name);
            }
            slices_->set_shares(shares, provisioning_for(names));
        }
        else if (e.action == "inject_fault")
        {
            const auto end = engine_.now() + sim::millis(e.duration_ms);
            if (e.fault == "ue_drop")
            {
                const auto ue = ue_ids_.at(e.ue);
                ran_.set_radio_link(ue, false);
                engine_.post(end, harness_, "fault_end", [this, ue] { ran_.set_radio_link(ue, true); });
            }
            else if (e.fault == "throughput_degradation")
            {
                const auto ue = ue_ids_.at(e.ue);
                ran_.set_impairment(ue, e.factor);
                engine_.post(end, harness_, "fault_end", [this, ue] { ran_.set_impairment(ue, 1.0); });
            }
            else if (e.fault == "e2_control_drop")
            {
                const auto du = node_ids_.at(e.node);
                auto it = agents_.find(du);
                if (it == agents_.end())
                {
                    throw std::runtime_error(fmt::format("{} has no E2 agent", e.node));
                }
                it->second->set_drop_control(true);
                engine_.post(end, harness_, "fault_end", [this, du] { agents_.at(du)->set_drop_control(false); });
            }
            const auto& target = e.fault == "e2_control_drop" ? e.node : e.ue;
            faults_.push_back({target, e.fault, engine_.now(), end});
            log(fmt::format("inject_fault {} {} duration_ms={}", e.fault, target, e.duration_ms));
        }
        else if (e.action == "node_down" || e.action == "node_up")
        {
            const auto id = node_ids_.at(e.node);
            const bool up = e.action == "node_up";
            if (ran_.node(id).kind == NodeKind::DU && up)
            {
                ran_.f1_setup(id, *ran_.node(id).cu_cp);
            }
            else
            {
                ran_.set_online(id, up);
            }
        }
    }
    catch (const std::exception& ex)
    {
        log(fmt::format("{} failed: {}", e.action, ex.what()));
    }
}

void Run::sample()
{
    const auto now = engine_.now();
    const auto from = now - kSamplePeriod;
    const double to_mbps = 8.0 / 1e6 / (static_cast<double>(kSamplePeriod.us) / 1e6);

    std::map<SliceId, SliceSample> per_slice;
    for (auto& f : flows_)
    {
        if (f.spec->kind == "ping")
        {
            continue;
        }
        const double bytes = ran_.flows().at(f.spec->id).bytes_served;
        const double mbps = (bytes - f.last_bytes) * to_mbps;
        f.last_bytes = bytes;
        if (sim::millis(f.spec->start_ms) <= from && now <= sim::millis(f.spec->stop_ms))
        {
            f.samples.push_back(mbps);
            rec_.metric(now, f.spec->id, "throughput_mbps", mbps);
        }
        if (const auto& u = ran_.ue(f.ue); u.slice)
        {
            auto& ss = per_slice[*u.slice];
            (f.dir == radio::Direction::Downlink ? ss.dl : ss.ul) += mbps;
        }
    }
    for (const auto& [slice, spec] : slices_->slices())
    {
        const auto name = slice_name(slice).value_or(to_string(slice));
        const auto it = per_slice.find(slice);
        const auto ss = it == per_slice.end() ? SliceSample{} : it->second;
        rec_.metric(now, "slice:" + name, "dl_mbps", ss.dl);
        rec_.metric(now, "slice:" + name, "ul_mbps", ss.ul);
        slice_samples_[name].push_back({now, ss.dl, ss.ul});
    }
    for (const auto du : dus_)
    {
        const auto* dl = ran_.last_tick(du, radio::Direction::Downlink);
        const auto* ul = ran_.last_tick(du, radio::Direction::Uplink);
        const auto total = [](const ran::RanSystem::TickResult* t) {
            double sum = 0.0;
            if (t != nullptr)
            {
                for (const auto& [_, v] : t->slice_delivered_mbps)
                    sum += v;
            }
            return sum;
        };
        const auto name = node_name(du);
        rec_.metric(now, name, "dl_mbps", total(dl));
        rec_.metric(now, name, "ul_mbps", total(ul));
        rec_.metric(now, name, "prbs_used", dl != nullptr ? dl->schedule.alloc.allocated() : 0);
    }
    for (const auto& [id, u] : ran_.ues())
    {
        const bool connected = u.state == ran::UeState::SessionActive && u.radio_up;
        rec_.metric(now, u.name, "connected", connected ? 1.0 : 0.0);
    }
}

void Run::execute() { engine_.run_until(sim::millis(s_.meta.duration_ms)); }

ojson Run::summary()
{
    ojson j;
    j["scenario"] = s_.meta.name;
    j["seed"] = engine_.seed();
    j["duration_ms"] = s_.meta.duration_ms;

    auto& flows = j["flows"] = ojson::object();
    for (const auto& f : flows_)
    {
        const auto* t = f.spec;
        ojson o;
        o["kind"] = t->kind;
        o["ue"] = ue_name(f.ue);
        o["direction"] = f.dir == radio::Direction::Downlink ? "dl" : "ul";
        if (t->kind == "ping")
        {
            o["sent"] = f.sent;
            o["received"] = f.rtts_ms.size();
            o["lost"] = f.lost;
            o["rtt_mean_ms"] = mean(f.rtts_ms);
            o["rtt_p95_ms"] = percentile(f.rtts_ms, 95.0);
        }
        else
        {
            o["samples"] = f.samples.size();
            o["mean_mbps"] = mean(f.samples);
            o["p95_mbps"] = percentile(f.samples, 95.0);
        }
        flows[t->id] = o;
    }

    auto windows = s_.windows;
    if (windows.empty())
    {
        windows.push_back({"run", 0, s_.meta.duration_ms});
    }
    j["windows"] = ojson::array();
    for (const auto& w : windows)
    {
        j["windows"].push_back({{"name", w.name}, {"start_ms", w.start_ms}, {"stop_ms", w.stop_ms}});
    }
    auto& slices = j["slices"] = ojson::object();
    for (const auto& sl : s_.slices)
    {
        const auto id = slice_ids_.at(sl.name);
        ojson o;
        o["snssai"] = to_string(id);
        const auto st = slices_->status(id);
        o["status"] = st ? ric::to_string(st->state) : "NotCreated";
        if (st && st->failed_step)
        {
            o["failed_step"] = ric::to_string(*st->failed_step);
        }
        const auto spec = slices_->slices().find(id);
        o["radio_share"] = spec != slices_->slices().end() ? spec->second.radio_share : 0.0;
        auto& wo = o["windows"] = ojson::object();
        for (const auto& w : windows)
        {
            std::vector<double> dl;
            std::vector<double> ul;
            for (const auto& smp : slice_samples_[sl.name])
            {
                if (sim::millis(w.start_ms) + kSamplePeriod <= smp.at && smp.at <= sim::millis(w.stop_ms))
                {
                    dl.push_back(smp.dl);
                    ul.push_back(smp.ul);
                }
            }
            wo[w.name] = {{"samples", dl.size()}, {"dl_mbps", mean(dl)}, {"ul_mbps", mean(ul)}};
        }
        slices[sl.name] = o;
    }

    auto& ues = j["ues"] = ojson::object();
    for (const auto& [id, u] : ran_.ues())
    {
        ojson o;
        o["state"] = ran::to_string(u.state);
        o["slice"] = u.slice ? slice_name(*u.slice).value_or(to_string(*u.slice)) : "";
        if (auto a = attaches_.find(u.name); a != attaches_.end())
        {
            o["data_path"] = ojson::array();
            for (const auto n : a->second.data_path)
                o["data_path"].push_back(node_name(n));
            o["signaling_path"] = ojson::array();
            for (const auto n : a->second.signaling_path)
                o["signaling_path"].push_back(node_name(n));
        }
        ues[u.name] = o;
    }

    const auto rc = ran_.census();
    const auto count = [&](NodeKind k) {
        auto it = rc.find(k);
        return it == rc.end() ? 0 : it->second;
    };
    const auto cc = core_.census();
    j["census"] = {{"RU", count(NodeKind::RU)},       {"DU", count(NodeKind::DU)},
                   {"CU_CP", count(NodeKind::CU_CP)}, {"CU_UP", count(NodeKind::CU_UP)},
                   {"AMF", cc.amf},                   {"SMF", cc.smf},
                   {"UPF", cc.upf}};

    auto& e2j = j["e2"] = ojson::object();
    for (const auto& [du, agent] : agents_)
    {
        ojson o;
        o["quirk"] = e2::to_string(agent->quirk());
        const auto* a = ric_.e2().association(du);
        o["state"] = a != nullptr ? e2::to_string(a->state) : "Idle";
        o["ran_functions"] = a != nullptr ? ojson(a->ran_functions) : ojson::array();
        o["attempts"] = a != nullptr ? a->attempts : 0;
        o["indications"] = indications_[du];
        o["failures"] = ojson::array();
        for (const auto& [node, failure] : ric_.e2().failures())
        {
            if (node == node_name(du))
                o["failures"].push_back(failure.cause);
        }
        e2j[node_name(du)] = o;
    }

    std::map<std::string, int> by_kind{{"ConnectivityDrop", 0}, {"KpiOutlier", 0}, {"TwinDivergence", 0}};
    for (const auto& a : rec_.anomalies())
    {
        ++by_kind[a.kind];
    }
    j["anomalies"] = {{"total", rec_.anomalies().size()}, {"by_kind", by_kind}};

    j["faults"] = ojson::array();
    for (const auto& f : faults_)
    {
        j["faults"].push_back({{"target", f.target}, {"kind", f.kind}, {"start_us", f.start.us}, {"end_us", f.end.us}});
    }

    if (twin_)
    {
        auto& rec = j["twin"]["recommended_shares"] = ojson::object();
        for (const auto& [du, _] : twin_->twin().cells)
        {
            ojson shares = ojson::object();
            try
            {
                for (const auto& s : twin_->recommend(du))
                    shares[slice_name(s.slice).value_or(to_string(s.slice))] = s.share;
            }
            catch (const std::exception&)
            {
                // no slices known to the twin for this cell
            }
            rec[node_name(du)] = shares;
        }
    }

    j["engine"] = {{"events_processed", engine_.processed_count()}, {"events_pending", engine_.pending_count()}};
    return j;
}

RunArtifacts Run::artifacts()
{
    RunArtifacts a;
    std::string m = "time_us,entity,metric,value\n";
    for (const auto& r : rec_.metrics())
    {
        m += fmt::format("{},{},{},{}\n", r.at.us, r.entity, r.metric, r.value);
    }
    a.metrics_csv = std::move(m);
    std::string an = "time_us,ue,kind,score\n";
    for (const auto& r : rec_.anomalies())
    {
        an += fmt::format("{},{},{},{}\n", r.at.us, r.ue, r.kind, r.score);
    }
    a.anomalies_csv = std::move(an);
    std::string ev;
    for (const auto& r : rec_.events())
    {
        ev += fmt::format("{} {} {}\n", r.at.us, r.entity, r.text);
    }
    a.events_log = std::move(ev);
    a.summary_json = summary().dump(2) + "\n";
    return a;
}
} // namespace

RunArtifacts simulate(const Scenario& scenario, const RunOptions& options)
{
    std::ostringstream trace;
    Run run(scenario, options.seed.value_or(scenario.meta.seed), options.trace ? &trace : nullptr);
    try
    {
        run.execute();
    }
    catch (const std::exception& e)
    {
        throw SimulationFault(fmt::format("simulation fault: {}", e.what()));
    }
    auto a = run.artifacts();
    a.trace = trace.str();
    return a;
}

void write_artifacts(const RunArtifacts& a, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    const auto put = [&](const char* name, const std::string& body) {
        std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
        if (!out)
        {
            throw std::runtime_error(fmt::format("cannot write {}", (dir / name).string()));
        }
        out << body;
    };
    put(kMetricsFile, a.metrics_csv);
    put(kAnomaliesFile, a.anomalies_csv);
    put(kEventsFile, a.events_log);
    put(kSummaryFile, a.summary_json);
    if (!a.trace.empty())
    {
        put(kTraceFile, a.trace);
    }
}

std::filesystem::path default_out_root()
{
    if (const char* env = std::getenv("SLICESIM_OUT"); env != nullptr && *env != '\0')
    {
        return env;
    }
    return "out";
}
} // namespace slicesim::harness

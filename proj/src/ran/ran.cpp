#include "slicesim/ran/ran.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace slicesim::ran
{
const char* to_string(NodeKind k) noexcept
{
    switch (k)
    {
    case NodeKind::RU:
        return "RU";
    case NodeKind::DU:
        return "DU";
    case NodeKind::CU_CP:
        return "CU_CP";
    case NodeKind::CU_UP:
        return "CU_UP";
    }
    return "?";
}

const char* to_string(NodeState s) noexcept
{
    switch (s)
    {
    case NodeState::Offline:
        return "Offline";
    case NodeState::Connecting:
        return "Connecting";
    case NodeState::Operational:
        return "Operational";
    }
    return "?";
}

const char* to_string(UeState s) noexcept
{
    switch (s)
    {
    case UeState::Idle:
        return "Idle";
    case UeState::RrcConnected:
        return "RrcConnected";
    case UeState::Registered:
        return "Registered";
    case UeState::SessionActive:
        return "SessionActive";
    }
    return "?";
}

std::optional<NodeKind> parse_kind(std::string_view s) noexcept
{
    if (s == "RU")
        return NodeKind::RU;
    if (s == "DU")
        return NodeKind::DU;
    if (s == "CU_CP")
        return NodeKind::CU_CP;
    if (s == "CU_UP")
        return NodeKind::CU_UP;
    return std::nullopt;
}

namespace
{
sim::SimTime vendor_delay(NodeKind kind)
{
    switch (kind)
    {
    case NodeKind::RU:
        return sim::micros(100);
    case NodeKind::DU:
        return sim::micros(700);
    case NodeKind::CU_CP:
    case NodeKind::CU_UP:
        return sim::micros(400);
    }
    return {};
}
} // namespace

bool StackProfile::is_preset(std::string_view name) noexcept
{
    return name == "vendor" || name == "vendor-empty-ies" || name == "oai-split" || name == "oai-mono";
}

StackProfile StackProfile::preset(std::string_view name, NodeKind kind)
{
    StackProfile p;
    p.name = std::string(name);
    p.one_way_proc_delay = vendor_delay(kind);
    if (name == "vendor")
    {
        return p;
    }
    if (name == "vendor-empty-ies")
    {
        p.e2_quirk = e2::Quirk::EmptyIEs;
        return p;
    }
    if (name == "oai-split")
    {
        // CU/DU split over F1: 43.35 ms RTT, i.e. 16.7 ms extra each way on
        // the DU-CU path, charged to the DU.
        if (kind == NodeKind::DU)
        {
            p.one_way_proc_delay = sim::micros(700 + 16700);
            p.dl_cap_mbps = 10.0;
            p.ul_cap_mbps = 6.0;
        }
        p.e2_quirk = e2::Quirk::NoDecode;
        return p;
    }
    if (name == "oai-mono")
    {
        // Monolithic gNB: 16.5 ms RTT, 3.25 ms extra each way.
        if (kind == NodeKind::DU)
        {
            p.one_way_proc_delay = sim::micros(700 + 3250);
            p.dl_cap_mbps = 120.0;
            p.ul_cap_mbps = 2.0;
        }
        p.e2_quirk = e2::Quirk::NoDecode;
        return p;
    }
    throw std::invalid_argument(fmt::format("unknown stack profile '{}'", name));
}

void StackProfile::validate() const
{
    if ((dl_cap_mbps && !(*dl_cap_mbps > 0.0)) || (ul_cap_mbps && !(*ul_cap_mbps > 0.0)))
    {
        throw std::invalid_argument(fmt::format("profile {}: caps must be positive when bounded", name));
    }
}

// ---------------------------------------------------------------------------

RanSystem::RanSystem(sim::Engine& engine, core::Core& core, LinkConfig links, sim::Recorder* recorder)
    : engine_(engine), core_(core), links_(links), recorder_(recorder)
{
}

RanNode& RanSystem::mutable_node(NodeId id)
{
    auto it = nodes_.find(id);
    if (it == nodes_.end())
    {
        throw RanError("unknown RAN node");
    }
    return it->second;
}

const RanNode& RanSystem::node(NodeId id) const
{
    auto it = nodes_.find(id);
    if (it == nodes_.end())
    {
        throw RanError("unknown RAN node");
    }
    return it->second;
}

std::optional<NodeId> RanSystem::find(std::string_view name) const
{
    for (const auto& [id, n] : nodes_)
    {
        if (n.name == name)
        {
            return id;
        }
    }
    return std::nullopt;
}

UeContext& RanSystem::mutable_ue(UeId id)
{
    auto it = ues_.find(id);
    if (it == ues_.end())
    {
        throw RanError(fmt::format("unknown UE {}", to_string(id)));
    }
    return it->second;
}

const UeContext& RanSystem::ue(UeId id) const
{
    auto it = ues_.find(id);
    if (it == ues_.end())
    {
        throw RanError(fmt::format("unknown UE {}", to_string(id)));
    }
    return it->second;
}

std::optional<UeId> RanSystem::find_ue(std::string_view name) const
{
    for (const auto& [id, u] : ues_)
    {
        if (u.name == name)
        {
            return id;
        }
    }
    return std::nullopt;
}

NodeId RanSystem::add_node(std::string name, NodeKind kind, StackProfile profile)
{
    profile.validate();
    const auto id = engine_.add_entity(name);
    RanNode n;
    n.id = id;
    n.name = std::move(name);
    n.kind = kind;
    n.profile = std::move(profile);
    nodes_[id] = std::move(n);
    online_[id] = false;
    return id;
}

void RanSystem::configure_du(NodeId du, NodeId ru, NodeId cu_cp, CellConfig cell)
{
    auto& n = mutable_node(du);
    if (n.kind != NodeKind::DU || node(ru).kind != NodeKind::RU || node(cu_cp).kind != NodeKind::CU_CP)
    {
        throw RanError(fmt::format("{}: DU must reference an RU and a CU-CP", n.name));
    }
    cell.tdd.validate();
    cell.calibration.validate();
    n.ru = ru;
    n.cu_cp = cu_cp;
    n.cell = cell;
}

void RanSystem::set_state(RanNode& n, NodeState s)
{
    if (n.state == s)
    {
        return;
    }
    n.state = s;
    if (recorder_ != nullptr)
    {
        recorder_->event(engine_.now(), n.name, fmt::format("state {}", to_string(s)));
    }
    for (const auto& cb : node_cbs_)
    {
        cb(n);
    }
}

void RanSystem::set_online(NodeId id, bool online)
{
    auto& n = mutable_node(id);
    online_[id] = online;
    if (n.kind == NodeKind::DU)
    {
        if (!online)
        {
            set_state(n, NodeState::Offline);
        }
        return;
    }
    set_state(n, online ? NodeState::Operational : NodeState::Offline);
}

F1Context RanSystem::f1_setup(NodeId du, NodeId cu_cp)
{
    auto& d = mutable_node(du);
    const auto& c = node(cu_cp);
    if (d.kind != NodeKind::DU || c.kind != NodeKind::CU_CP)
    {
        throw RanError("f1_setup needs a DU and a CU-CP");
    }
    if (d.state == NodeState::Operational)
    {
        throw RanError(fmt::format("{} is already Operational", d.name));
    }
    d.cu_cp = cu_cp;
    online_[du] = true;
    set_state(d, NodeState::Connecting);
    const int attempt = ++f1_attempt_[du];
    f1_attempt(du, cu_cp, attempt);
    return F1Context{du, cu_cp, engine_.now(), attempt};
}

void RanSystem::f1_attempt(NodeId du, NodeId cu_cp, int attempt)
{
    const auto& d = node(du);
    if (recorder_ != nullptr)
    {
        recorder_->event(engine_.now(), d.name, fmt::format("F1SetupRequest attempt={}", attempt));
    }
    // DU processing + midhaul to the CU-CP.
    const auto arrive = engine_.now() + d.profile.one_way_proc_delay + links_.midhaul;
    engine_.post(arrive, cu_cp, "f1_setup_request", [this, du, cu_cp, attempt] {
        const auto& c = node(cu_cp);
        if (c.state != NodeState::Operational)
        {
            return; // unreachable CU-CP never answers
        }
        const auto back = engine_.now() + c.profile.one_way_proc_delay + links_.midhaul;
        engine_.post(back, du, "f1_setup_response", [this, du, attempt] {
            auto& d = mutable_node(du);
            if (f1_attempt_[du] != attempt || d.state != NodeState::Connecting)
            {
                return;
            }
            if (recorder_ != nullptr)
            {
                recorder_->event(engine_.now(), d.name, "F1SetupResponse");
            }
            set_state(d, NodeState::Operational);
            engine_.post(sim::next_slot_boundary(engine_.now()), du, "slot", [this, du] { tick(du); });
        });
    });
    engine_.post_in(links_.f1_timeout, du, "f1_timeout", [this, du, attempt] { f1_timeout(du, attempt); });
}

void RanSystem::f1_timeout(NodeId du, int attempt)
{
    auto& d = mutable_node(du);
    if (f1_attempt_[du] != attempt || d.state != NodeState::Connecting)
    {
        return;
    }
    ++f1_failures_;
    if (recorder_ != nullptr)
    {
        recorder_->event(engine_.now(), d.name, fmt::format("F1SetupFailure attempt={} cause=timeout", attempt));
    }
    set_state(d, NodeState::Offline);
    const auto cu_cp = *d.cu_cp;
    engine_.post_in(links_.f1_retry, du, "f1_retry", [this, du, cu_cp] {
        auto& d = mutable_node(du);
        if (d.state != NodeState::Offline || !online_[du])
        {
            return;
        }
        set_state(d, NodeState::Connecting);
        const int next = ++f1_attempt_[du];
        f1_attempt(du, cu_cp, next);
    });
}

void RanSystem::register_slice(NodeId cu_cp, SliceId slice)
{
    if (node(cu_cp).kind != NodeKind::CU_CP)
    {
        throw RanError("slices are registered at a CU-CP");
    }
    cu_cp_slices_[cu_cp].insert(slice);
}

NodeId RanSystem::deploy_cu_up(NodeId cu_cp, SliceId slice, StackProfile profile)
{
    const auto& c = node(cu_cp);
    if (c.kind != NodeKind::CU_CP || c.state != NodeState::Operational)
    {
        throw RanError(fmt::format("{} is not an Operational CU-CP", c.name));
    }
    if (!cu_cp_slices_[cu_cp].contains(slice))
    {
        throw UnknownSlice(fmt::format("slice {} is not registered at {}", to_string(slice), c.name));
    }
    if (cu_up_.contains(slice))
    {
        throw DuplicateUserPlane(fmt::format("slice {} already has a dedicated CU-UP", to_string(slice)));
    }
    const auto id = add_node(fmt::format("cuup-{}", to_string(slice)), NodeKind::CU_UP, std::move(profile));
    auto& n = mutable_node(id);
    n.served_slices.insert(slice);
    n.parent = cu_cp;
    online_[id] = true;
    set_state(n, NodeState::Operational);
    cu_up_[slice] = id;
    if (recorder_ != nullptr)
    {
        recorder_->event(engine_.now(), c.name, fmt::format("E1 association {}", n.name));
    }
    return id;
}

void RanSystem::remove_cu_up(SliceId slice)
{
    auto it = cu_up_.find(slice);
    if (it == cu_up_.end())
    {
        return;
    }
    const auto id = it->second;
    cu_up_.erase(it);
    if (recorder_ != nullptr)
    {
        recorder_->event(engine_.now(), node(id).name, "removed");
    }
    nodes_.erase(id);
    cu_up_rate_.erase(id);
    for (auto& [_, u] : ues_)
    {
        if (u.serving_cu_up == id)
        {
            fail_attach(u, "user plane removed");
        }
    }
}

std::optional<NodeId> RanSystem::cu_up_for(SliceId slice) const
{
    auto it = cu_up_.find(slice);
    return it == cu_up_.end() ? std::nullopt : std::optional<NodeId>(it->second);
}

void RanSystem::add_ue(UeId ue, std::string name)
{
    if (ues_.contains(ue))
    {
        throw RanError(fmt::format("duplicate UE {}", name));
    }
    UeContext u;
    u.ue = ue;
    u.entity = engine_.add_entity(name);
    u.name = std::move(name);
    ues_[ue] = std::move(u);
}

sim::SimTime RanSystem::signaling_hop(NodeId du) const
{
    const auto& d = node(du);
    sim::SimTime hop = links_.radio + links_.fronthaul + d.profile.one_way_proc_delay + links_.midhaul +
                       core_.config().upf_delay;
    if (d.ru)
    {
        hop += node(*d.ru).profile.one_way_proc_delay;
    }
    if (d.cu_cp)
    {
        hop += node(*d.cu_cp).profile.one_way_proc_delay;
    }
    return hop;
}

AttachResult RanSystem::ue_attach(UeId ue, SliceId slice, NodeId du)
{
    auto& u = mutable_ue(ue);
    const auto& d = node(du);
    if (u.state != UeState::Idle)
    {
        throw RanError(fmt::format("{} is already attaching or attached", u.name));
    }
    if (d.kind != NodeKind::DU || d.state != NodeState::Operational)
    {
        throw RanError(fmt::format("{} is not an Operational DU", d.name));
    }
    std::vector<std::string> missing;
    const auto cu_up = cu_up_for(slice);
    const auto smf = core_.smf_for(slice);
    const auto upf = core_.upf_for(slice);
    const auto amf = core_.amf_for(slice);
    if (!cu_up)
        missing.emplace_back("CU_UP");
    if (!smf)
        missing.emplace_back("SMF");
    if (!upf)
        missing.emplace_back("UPF");
    if (!amf || !core_.slice_registered(slice))
        missing.emplace_back("AMF");
    if (!missing.empty())
    {
        std::string list;
        for (const auto& m : missing)
        {
            list += (list.empty() ? "" : ",") + m;
        }
        throw SliceUnavailable(fmt::format("slice {} lacks {}", to_string(slice), list));
    }
    if (!core_.is_subscriber(ue))
    {
        throw core::RegistrationRejected(fmt::format("{} is not a subscriber", u.name));
    }

    u.slice = slice;
    u.serving_du = du;
    u.radio_up = true;
    const auto generation = ++u.attach_generation;
    const auto hop = signaling_hop(du);
    const int third = std::max(1, links_.attach_messages / 3);
    const auto start = engine_.now();
    for (int step = 1; step <= 3; ++step)
    {
        const int msgs = step == 3 ? links_.attach_messages : third * step;
        engine_.post(start + hop * static_cast<std::uint64_t>(msgs), u.entity, "attach_step",
                     [this, ue, generation, step] { attach_step(ue, generation, step); });
    }
    if (recorder_ != nullptr)
    {
        recorder_->event(start, u.name, fmt::format("attach slice={} du={}", to_string(slice), d.name));
    }
    AttachResult r;
    r.ue = ue;
    r.slice = slice;
    r.started_at = start;
    r.completes_at = start + hop * static_cast<std::uint64_t>(links_.attach_messages);
    r.data_path = {u.entity, *d.ru, du, *cu_up, *upf};
    r.signaling_path = {u.entity, *d.ru, du, *d.cu_cp, *amf};
    return r;
}

void RanSystem::fail_attach(UeContext& u, const std::string& why)
{
    const bool was_active = u.state == UeState::SessionActive;
    if (recorder_ != nullptr)
    {
        recorder_->event(engine_.now(), u.name, fmt::format("session lost: {}", why));
    }
    core_.deregister_ue(u.ue);
    u.state = UeState::Idle;
    u.slice.reset();
    u.serving_cu_up.reset();
    ++u.attach_generation;
    if (was_active)
    {
        for (const auto& cb : session_cbs_)
        {
            cb(u, false);
        }
    }
}

void RanSystem::attach_step(UeId ue, std::uint64_t generation, int step)
{
    auto& u = mutable_ue(ue);
    if (u.attach_generation != generation || !u.slice || !u.serving_du)
    {
        return;
    }
    const auto slice = *u.slice;
    try
    {
        switch (step)
        {
        case 1:
            u.state = UeState::RrcConnected;
            break;
        case 2: {
            const auto amf = core_.amf_for(slice);
            if (!amf)
            {
                throw SliceUnavailable("AMF gone");
            }
            core_.register_ue(*amf, ue);
            u.state = UeState::Registered;
            break;
        }
        case 3: {
            const auto smf = core_.smf_for(slice);
            const auto cu_up = cu_up_for(slice);
            if (!smf || !cu_up)
            {
                throw SliceUnavailable("slice functions removed during attach");
            }
            core_.establish_pdu_session(*smf, ue, core::Snssai::from(slice));
            u.serving_cu_up = cu_up;
            u.state = UeState::SessionActive;
            u.reported = true;
            if (recorder_ != nullptr)
            {
                recorder_->event(engine_.now(), u.name, fmt::format("SessionActive slice={}", to_string(slice)));
            }
            for (const auto& cb : session_cbs_)
            {
                cb(u, true);
            }
            break;
        }
        default:
            break;
        }
    }
    catch (const std::exception& e)
    {
        fail_attach(u, e.what());
    }
}

void RanSystem::ue_detach(UeId ue)
{
    auto& u = mutable_ue(ue);
    if (u.state == UeState::Idle)
    {
        return;
    }
    const bool was_active = u.state == UeState::SessionActive;
    core_.deregister_ue(ue);
    u.state = UeState::Idle;
    u.slice.reset();
    u.serving_cu_up.reset();
    ++u.attach_generation;
    if (recorder_ != nullptr)
    {
        recorder_->event(engine_.now(), u.name, "detach");
    }
    if (was_active)
    {
        for (const auto& cb : session_cbs_)
        {
            cb(u, false);
        }
    }
}

void RanSystem::set_radio_link(UeId ue, bool up) { mutable_ue(ue).radio_up = up; }

void RanSystem::set_impairment(UeId ue, double factor)
{
    if (factor < 0.0 || factor > 1.0)
    {
        throw std::invalid_argument("impairment factor outside [0,1]");
    }
    mutable_ue(ue).impairment = factor;
}

sim::SimTime RanSystem::set_slice_shares(NodeId du, std::vector<radio::SliceShare> shares)
{
    if (node(du).kind != NodeKind::DU)
    {
        throw RanError("slice shares are a DU setting");
    }
    double sum = 0.0;
    for (const auto& s : shares)
    {
        if (s.share < 0.0 || s.share > 1.0)
        {
            throw std::invalid_argument("slice share outside [0,1]");
        }
        sum += s.share;
    }
    if (sum > 1.0 + 1e-9)
    {
        throw std::invalid_argument("slice shares exceed 1");
    }
    const auto at = sim::next_slot_boundary(engine_.now() + sim::micros(1));
    pending_shares_[du].emplace_back(at, std::move(shares));
    return at;
}

void RanSystem::apply_pending_shares(NodeId du)
{
    auto it = pending_shares_.find(du);
    if (it == pending_shares_.end())
    {
        return;
    }
    auto& queue = it->second;
    auto& n = mutable_node(du);
    while (!queue.empty() && queue.front().first <= engine_.now())
    {
        n.shares = std::move(queue.front().second);
        if (recorder_ != nullptr)
        {
            std::string s;
            for (const auto& sh : n.shares)
            {
                s += fmt::format(" {}={}", to_string(sh.slice), sh.share);
            }
            recorder_->event(engine_.now(), n.name, "shares applied" + s);
        }
        queue.erase(queue.begin());
    }
}

std::vector<radio::SliceShare> RanSystem::shares(NodeId du)
{
    apply_pending_shares(du);
    return node(du).shares;
}

void RanSystem::add_flow(Flow flow)
{
    if (!ues_.contains(flow.ue))
    {
        throw RanError(fmt::format("flow {} references unknown UE", flow.id));
    }
    if (flows_.contains(flow.id))
    {
        throw RanError(fmt::format("duplicate flow {}", flow.id));
    }
    auto id = flow.id;
    flows_.emplace(std::move(id), std::move(flow));
}

void RanSystem::set_flow_active(const std::string& id, bool active)
{
    auto it = flows_.find(id);
    if (it == flows_.end())
    {
        throw RanError(fmt::format("unknown flow {}", id));
    }
    it->second.active = active;
}

double RanSystem::cell_capacity(NodeId du, Direction dir, bool udp) const
{
    const auto& d = node(du);
    double cap = radio::link_capacity(d.cell.bandwidth_mhz, dir, d.cell.tdd, d.cell.calibration);
    if (udp)
    {
        cap *= d.cell.calibration.udp_over_tcp_factor;
    }
    const auto& limit = dir == Direction::Downlink ? d.profile.dl_cap_mbps : d.profile.ul_cap_mbps;
    if (limit)
    {
        cap = std::min(cap, *limit);
    }
    return cap;
}

int RanSystem::total_prbs(NodeId du) const { return radio::prb_count(node(du).cell.bandwidth_mhz); }

const RanSystem::TickResult* RanSystem::last_tick(NodeId du, Direction dir) const
{
    auto it = last_tick_.find(du);
    if (it == last_tick_.end())
    {
        return nullptr;
    }
    auto d = it->second.find(dir);
    return d == it->second.end() ? nullptr : &d->second;
}

void RanSystem::tick(NodeId du)
{
    auto it = nodes_.find(du);
    if (it == nodes_.end() || it->second.state != NodeState::Operational)
    {
        return;
    }
    apply_pending_shares(du);
    const auto& d = it->second;
    constexpr double kBytesPerMbpsSlot = 1e6 / 8.0 * (static_cast<double>(sim::kSlot.us) / 1e6);

    for (const auto dir : {Direction::Downlink, Direction::Uplink})
    {
        // Demand per UE, flows per UE.
        std::map<UeId, double> ue_demand;
        std::map<UeId, std::vector<Flow*>> ue_flows;
        bool any = false;
        bool all_udp = true;
        for (auto& [_, f] : flows_)
        {
            if (!f.active || f.direction != dir)
            {
                f.last_rate_mbps = f.direction == dir ? 0.0 : f.last_rate_mbps;
                continue;
            }
            const auto& u = ues_.at(f.ue);
            f.last_rate_mbps = 0.0;
            if (u.serving_du != du || u.state != UeState::SessionActive || !u.radio_up)
            {
                continue;
            }
            ue_demand[f.ue] += f.rate_mbps;
            ue_flows[f.ue].push_back(&f);
            any = true;
            all_udp = all_udp && f.udp;
        }

        TickResult tr;
        tr.udp = any && all_udp;
        tr.capacity_mbps = cell_capacity(du, dir, tr.udp);
        std::vector<radio::UeDemand> demands;
        for (const auto& [ue, u] : ues_)
        {
            if (u.serving_du == du && u.slice && u.state == UeState::SessionActive)
            {
                auto dm = ue_demand.find(ue);
                demands.push_back({ue, *u.slice, dm == ue_demand.end() ? 0.0 : dm->second});
            }
        }
        tr.schedule = radio::schedule_cell(d.shares, demands, total_prbs(du), tr.capacity_mbps);

        for (const auto& [ue, rate] : tr.schedule.ue_mbps)
        {
            const auto& u = ues_.at(ue);
            const double delivered = u.radio_up ? rate * u.impairment : 0.0;
            tr.delivered_mbps[ue] = delivered;
            if (u.slice)
            {
                tr.slice_delivered_mbps[*u.slice] += delivered;
            }
            auto fl = ue_flows.find(ue);
            if (fl == ue_flows.end() || delivered <= 0.0)
            {
                continue;
            }
            std::vector<double> want;
            for (const auto* f : fl->second)
            {
                want.push_back(f->rate_mbps);
            }
            const auto split = radio::max_min_fair(delivered, want);
            double bytes_total = 0.0;
            for (std::size_t i = 0; i < split.size(); ++i)
            {
                fl->second[i]->last_rate_mbps = split[i];
                fl->second[i]->bytes_served += split[i] * kBytesPerMbpsSlot;
                bytes_total += split[i] * kBytesPerMbpsSlot;
            }
            if (const auto* sess = core_.session(ue))
            {
                core_.forward(sess->upf, core::UserPacket{ue, sess->tunnel_id,
                                                          static_cast<std::uint64_t>(std::llround(bytes_total))});
            }
        }
        if (dir == Direction::Downlink)
        {
            for (const auto& [slice, rate] : tr.slice_delivered_mbps)
            {
                if (auto cu = cu_up_for(slice))
                {
                    cu_up_rate_[*cu][slice] = rate;
                }
            }
        }
        last_tick_[du][dir] = std::move(tr);
    }
    engine_.post_in(sim::kSlot, du, "slot", [this, du] { tick(du); });
}

std::vector<e2::KpiEntry> RanSystem::report_telemetry(NodeId id) const
{
    using e2::KpiEntry;
    using e2::Metric;
    using e2::ScopeKind;
    std::vector<KpiEntry> out;
    const auto& n = node(id);
    if (n.kind == NodeKind::CU_UP)
    {
        if (auto it = cu_up_rate_.find(id); it != cu_up_rate_.end())
        {
            for (const auto& [slice, rate] : it->second)
            {
                out.push_back({Metric::DlThroughput, ScopeKind::Slice, raw(slice), rate});
            }
        }
        return out;
    }
    if (n.kind != NodeKind::DU)
    {
        return out;
    }
    const auto* dl = last_tick(id, Direction::Downlink);
    const auto* ul = last_tick(id, Direction::Uplink);
    const auto rate = [](const TickResult* t, auto&& key, auto&& table) -> double {
        if (t == nullptr)
            return 0.0;
        auto& m = table(*t);
        auto it = m.find(key);
        return it == m.end() ? 0.0 : it->second;
    };
    const auto ue_table = [](const TickResult& t) -> const std::map<UeId, double>& { return t.delivered_mbps; };
    const auto slice_table = [](const TickResult& t) -> const std::map<SliceId, double>& {
        return t.slice_delivered_mbps;
    };

    double cell_dl = 0.0;
    double cell_ul = 0.0;
    int prbs = 0;
    if (dl != nullptr)
    {
        for (const auto& [_, v] : dl->slice_delivered_mbps)
            cell_dl += v;
        prbs = dl->schedule.alloc.allocated();
    }
    if (ul != nullptr)
    {
        for (const auto& [_, v] : ul->slice_delivered_mbps)
            cell_ul += v;
    }
    out.push_back({Metric::DlThroughput, ScopeKind::Cell, 0, cell_dl});
    out.push_back({Metric::UlThroughput, ScopeKind::Cell, 0, cell_ul});
    out.push_back({Metric::PrbUsage, ScopeKind::Cell, 0, static_cast<double>(prbs)});
    for (const auto& s : n.shares)
    {
        out.push_back({Metric::DlThroughput, ScopeKind::Slice, raw(s.slice), rate(dl, s.slice, slice_table)});
        out.push_back({Metric::UlThroughput, ScopeKind::Slice, raw(s.slice), rate(ul, s.slice, slice_table)});
        out.push_back({Metric::PrbUsage, ScopeKind::Slice, raw(s.slice),
                       dl != nullptr ? static_cast<double>(dl->schedule.alloc.of(s.slice)) : 0.0});
    }
    for (const auto& [ue, u] : ues_)
    {
        if (!u.reported || u.serving_du != id)
        {
            continue;
        }
        const bool connected = u.state == UeState::SessionActive && u.radio_up;
        out.push_back({Metric::Connected, ScopeKind::Ue, raw(ue), connected ? 1.0 : 0.0});
        out.push_back({Metric::DlThroughput, ScopeKind::Ue, raw(ue), connected ? rate(dl, ue, ue_table) : 0.0});
        out.push_back({Metric::UlThroughput, ScopeKind::Ue, raw(ue), connected ? rate(ul, ue, ue_table) : 0.0});
    }
    return out;
}

std::vector<PathHop> RanSystem::uplink_path(UeId ue) const
{
    const auto& u = this->ue(ue);
    if (u.state != UeState::SessionActive || !u.serving_du || !u.serving_cu_up)
    {
        throw RanError(fmt::format("{} has no active data path", u.name));
    }
    const auto& d = node(*u.serving_du);
    const auto& ru = node(*d.ru);
    const auto& cu = node(*u.serving_cu_up);
    return {
        {ru.id, links_.radio},
        {d.id, ru.profile.one_way_proc_delay + links_.fronthaul},
        {cu.id, d.profile.one_way_proc_delay + links_.midhaul},
    };
    // The UPF hop (CU-UP processing) and the server leg are added by the
    // caller, which owns the core side of the path.
}

std::map<NodeKind, int> RanSystem::census() const
{
    std::map<NodeKind, int> out;
    for (const auto& [_, n] : nodes_)
    {
        ++out[n.kind];
    }
    return out;
}
} // namespace slicesim::ran

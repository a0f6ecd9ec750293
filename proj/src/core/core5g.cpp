#include "slicesim/core/core5g.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace slicesim::core
{
const char* to_string(NetworkFunction f) noexcept
{
    switch (f)
    {
    case NetworkFunction::CuUp:
        return "CU_UP";
    case NetworkFunction::Smf:
        return "SMF";
    case NetworkFunction::Upf:
        return "UPF";
    }
    return "?";
}

void SliceSpec::validate() const
{
    if (!(radio_share > 0.0) || radio_share > 1.0)
    {
        throw std::invalid_argument(fmt::format("slice {} radio_share {} outside (0,1]", name, radio_share));
    }
    if (min_share < 0.0 || min_share > radio_share)
    {
        throw std::invalid_argument(fmt::format("slice {} min_share {} outside [0, radio_share]", name, min_share));
    }
    if (snssai.sd > 0xFFFFFFu)
    {
        throw std::invalid_argument(fmt::format("slice {} sd exceeds 24 bits", name));
    }
    for (const auto f : {NetworkFunction::CuUp, NetworkFunction::Smf, NetworkFunction::Upf})
    {
        if (!dedicated_functions.contains(f))
        {
            throw std::invalid_argument(
                fmt::format("slice {}: {} must be dedicated (no shared user plane)", name, to_string(f)));
        }
    }
}

Core::Core(sim::Engine& engine, CoreConfig cfg, sim::Recorder* recorder)
    : engine_(engine), cfg_(std::move(cfg)), recorder_(recorder)
{
    amf_ = engine_.add_entity(cfg_.amf_name);
}

void Core::add_subscriber(UeId ue, std::vector<Snssai> allowed) { subscribers_[ue] = std::move(allowed); }

std::optional<NodeId> Core::amf_for(SliceId slice) const
{
    if (!cfg_.sliced_amf)
    {
        return amf_;
    }
    auto it = sliced_amf_.find(slice);
    if (it == sliced_amf_.end())
    {
        return std::nullopt;
    }
    return it->second;
}

RegistrationResult Core::register_ue(NodeId amf, UeId ue)
{
    auto it = subscribers_.find(ue);
    if (it == subscribers_.end())
    {
        throw RegistrationRejected(fmt::format("{} is not in the subscriber list", to_string(ue)));
    }
    const bool known_amf = amf == amf_ || std::any_of(sliced_amf_.begin(), sliced_amf_.end(),
                                                      [&](const auto& kv) { return kv.second == amf; });
    if (!known_amf)
    {
        throw RegistrationRejected("registration sent to an unknown AMF");
    }
    registered_[ue] = amf;
    return RegistrationResult{ue, amf, it->second};
}

void Core::deregister_ue(UeId ue)
{
    release_session(ue);
    registered_.erase(ue);
}

NodeId Core::deploy_smf(SliceId slice)
{
    if (auto it = smf_.find(slice); it != smf_.end())
    {
        return it->second;
    }
    const auto id = engine_.add_entity(fmt::format("smf-{}", to_string(slice)));
    smf_[slice] = id;
    owner_[id] = slice;
    return id;
}

NodeId Core::deploy_upf(SliceId slice)
{
    if (auto it = upf_.find(slice); it != upf_.end())
    {
        return it->second;
    }
    const auto id = engine_.add_entity(fmt::format("upf-{}", to_string(slice)));
    upf_[slice] = id;
    owner_[id] = slice;
    return id;
}

NodeId Core::deploy_amf(SliceId slice)
{
    if (auto it = sliced_amf_.find(slice); it != sliced_amf_.end())
    {
        return it->second;
    }
    const auto id = engine_.add_entity(fmt::format("amf-{}", to_string(slice)));
    sliced_amf_[slice] = id;
    owner_[id] = slice;
    return id;
}

void Core::remove_amf(SliceId slice)
{
    if (auto it = sliced_amf_.find(slice); it != sliced_amf_.end())
    {
        owner_.erase(it->second);
        sliced_amf_.erase(it);
    }
}

void Core::remove_function(SliceId slice, NetworkFunction f)
{
    auto& table = f == NetworkFunction::Smf ? smf_ : upf_;
    if (f == NetworkFunction::CuUp)
    {
        return;
    }
    auto it = table.find(slice);
    if (it == table.end())
    {
        return;
    }
    if (f == NetworkFunction::Upf)
    {
        // Sessions anchored on the UPF go with it.
        for (auto s = sessions_.begin(); s != sessions_.end();)
        {
            s = s->second.upf == it->second ? sessions_.erase(s) : std::next(s);
        }
        tunnels_.erase(it->second);
    }
    owner_.erase(it->second);
    table.erase(it);
}

std::optional<NodeId> Core::smf_for(SliceId slice) const
{
    auto it = smf_.find(slice);
    return it == smf_.end() ? std::nullopt : std::optional<NodeId>(it->second);
}

std::optional<NodeId> Core::upf_for(SliceId slice) const
{
    auto it = upf_.find(slice);
    return it == upf_.end() ? std::nullopt : std::optional<NodeId>(it->second);
}

SessionContext Core::establish_pdu_session(NodeId smf, UeId ue, Snssai snssai)
{
    const auto slice = snssai.id();
    auto reg = registered_.find(ue);
    if (reg == registered_.end())
    {
        throw SliceNotAllowed(fmt::format("{} is not registered", to_string(ue)));
    }
    const auto& allowed = subscribers_.at(ue);
    if (std::find(allowed.begin(), allowed.end(), snssai) == allowed.end() || !amf_slices_.contains(slice))
    {
        throw SliceNotAllowed(fmt::format("slice {} not allowed for {}", to_string(slice), to_string(ue)));
    }
    auto s = smf_.find(slice);
    if (s == smf_.end() || s->second != smf)
    {
        throw SliceNotAllowed(fmt::format("SMF does not serve slice {}", to_string(slice)));
    }
    auto u = upf_.find(slice);
    if (u == upf_.end())
    {
        throw UpfUnavailable(fmt::format("no UPF deployed for slice {}", to_string(slice)));
    }
    release_session(ue);
    const auto upf = u->second;
    const auto tunnel = ++next_tunnel_[upf];
    tunnels_[upf][tunnel] = slice;
    SessionContext ctx{ue, snssai, smf, upf, tunnel, engine_.now()};
    sessions_[ue] = ctx;
    if (recorder_ != nullptr)
    {
        recorder_->event(engine_.now(), engine_.name(smf),
                         fmt::format("pdu session {} tunnel={} upf={}", to_string(ue), tunnel, engine_.name(upf)));
    }
    return ctx;
}

void Core::release_session(UeId ue)
{
    auto it = sessions_.find(ue);
    if (it == sessions_.end())
    {
        return;
    }
    if (auto t = tunnels_.find(it->second.upf); t != tunnels_.end())
    {
        t->second.erase(it->second.tunnel_id);
    }
    sessions_.erase(it);
}

const SessionContext* Core::session(UeId ue) const
{
    auto it = sessions_.find(ue);
    return it == sessions_.end() ? nullptr : &it->second;
}

DeliveryRecord Core::forward(NodeId upf, const UserPacket& packet)
{
    DeliveryRecord rec;
    std::optional<SliceId> slice;
    if (auto t = tunnels_.find(upf); t != tunnels_.end())
    {
        if (auto s = t->second.find(packet.tunnel_id); s != t->second.end())
        {
            slice = s->second;
        }
    }
    if (!slice)
    {
        // Attribute the drop to the UPF's owning slice when it still exists.
        if (auto o = owner_.find(upf); o != owner_.end())
        {
            auto& c = counters_[o->second];
            c.offered += packet.bytes;
            c.dropped += packet.bytes;
            rec.slice = o->second;
        }
        ++dropped_packets_;
        rec.drop = DropReason::NoTunnel;
        return rec;
    }
    auto& c = counters_[*slice];
    c.offered += packet.bytes;
    c.delivered += packet.bytes;
    rec.delivered = true;
    rec.delivered_at = engine_.now() + cfg_.upf_delay;
    rec.slice = slice;
    return rec;
}

Core::Census Core::census() const
{
    Census c;
    c.amf = cfg_.sliced_amf ? static_cast<int>(sliced_amf_.size()) : 1;
    c.smf = static_cast<int>(smf_.size());
    c.upf = static_cast<int>(upf_.size());
    return c;
}

std::set<std::pair<SliceId, NetworkFunction>> Core::deployed() const
{
    std::set<std::pair<SliceId, NetworkFunction>> out;
    for (const auto& [s, _] : smf_)
    {
        out.insert({s, NetworkFunction::Smf});
    }
    for (const auto& [s, _] : upf_)
    {
        out.insert({s, NetworkFunction::Upf});
    }
    return out;
}
} // namespace slicesim::core

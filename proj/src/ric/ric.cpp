#include "slicesim/ric/ric.hpp"

#include <fmt/format.h>

namespace slicesim::ric
{
Ric::Ric(sim::Engine& engine, sim::Recorder* recorder, e2::RetryPolicy policy)
    : engine_(engine), recorder_(recorder)
{
    self_ = engine_.add_entity("ric", [this](const sim::Event& ev) {
        if (const auto* frame = std::any_cast<e2::Frame>(&ev.payload.body))
        {
            endpoint_->on_frame(*frame);
        }
    });
    endpoint_ = std::make_unique<e2::RicEndpoint>(engine_, self_, recorder_, policy);
    endpoint_->on_indication([this](const e2::Indication& ind) { dispatch(ind); });
}

void Ric::host(XApp& app)
{
    apps_.push_back(&app);
    if (recorder_ != nullptr)
    {
        recorder_->event(engine_.now(), "ric", fmt::format("xapp {} hosted", app.id()));
    }
}

void Ric::start_timer(XApp& app, sim::SimTime first, sim::SimTime period)
{
    if (period.us == 0)
    {
        throw std::invalid_argument("timer period must be positive");
    }
    auto tick = std::make_shared<std::function<void()>>();
    *tick = [this, &app, period, tick] {
        app.on_timer(engine_.now());
        engine_.post_in(period, self_, "xapp_timer", *tick);
    };
    engine_.post(first, self_, "xapp_timer", *tick);
}

std::variant<e2::Subscription, e2::E2Failure> Ric::subscribe(XApp& app, NodeId node, std::uint16_t function,
                                                             sim::SimTime period)
{
    auto result = endpoint_->subscribe(node, function, period);
    if (std::holds_alternative<e2::Subscription>(result))
    {
        app.hold(node);
        auto& list = routes_[node];
        if (std::find(list.begin(), list.end(), &app) == list.end())
        {
            list.push_back(&app);
        }
    }
    return result;
}

std::variant<std::uint32_t, e2::E2Failure> Ric::emit(XApp& app, NodeId node, const e2::ControlAction& action,
                                                     std::function<void(const e2::ControlOutcome&)> done)
{
    if (!app.nodes().contains(node))
    {
        throw NotHeld(fmt::format("xapp {} holds no registration for {}", app.id(), engine_.name(node)));
    }
    return endpoint_->control(node, action, std::move(done));
}

void Ric::bus_subscribe(const std::string& topic, BusHandler handler) { bus_[topic].push_back(std::move(handler)); }

void Ric::publish(const std::string& topic, std::any message)
{
    engine_.post(engine_.now(), self_, "bus:" + topic, [this, topic, message = std::move(message)] {
        auto it = bus_.find(topic);
        if (it == bus_.end())
        {
            return;
        }
        for (const auto& h : it->second)
        {
            h(message);
        }
    });
}

void Ric::dispatch(const e2::Indication& ind)
{
    auto it = routes_.find(ind.node);
    if (it == routes_.end())
    {
        return;
    }
    for (auto* app : it->second)
    {
        for (const auto& k : ind.kpis)
        {
            app->on_indication(KpiSample{ind.node, k.scope_kind, k.scope, k.metric, k.value, ind.at});
        }
        app->on_report_end(ind.node, ind.at);
    }
}

// ---------------------------------------------------------------------------

const char* to_string(OrchestrationStep s) noexcept
{
    switch (s)
    {
    case OrchestrationStep::RegisterCuCp:
        return "RegisterCuCp";
    case OrchestrationStep::DeployCuUp:
        return "DeployCuUp";
    case OrchestrationStep::DeploySmf:
        return "DeploySmf";
    case OrchestrationStep::DeployUpf:
        return "DeployUpf";
    case OrchestrationStep::DeployAmf:
        return "DeployAmf";
    case OrchestrationStep::SetSliceShares:
        return "SetSliceShares";
    case OrchestrationStep::RegisterAmf:
        return "RegisterAmf";
    }
    return "?";
}

const char* to_string(SliceState s) noexcept
{
    switch (s)
    {
    case SliceState::Pending:
        return "Pending";
    case SliceState::Ready:
        return "Ready";
    case SliceState::OrchestrationFailed:
        return "OrchestrationFailed";
    }
    return "?";
}

SliceManager::SliceManager(Ric& ric, ran::RanSystem& ran, core::Core& core, NodeId cu_cp, std::vector<NodeId> dus,
                           sim::Recorder* recorder)
    : XApp("slice-manager"), ric_(ric), ran_(ran), core_(core), cu_cp_(cu_cp), dus_(std::move(dus)),
      recorder_(recorder)
{
    for (const auto du : dus_)
    {
        hold(du);
    }
    hold(cu_cp_);
    ran_.on_session([this](const ran::UeContext& u, bool active) {
        if (u.slice)
        {
            ric_.publish(kTopicSession, SessionNotice{u.ue, *u.slice, active});
        }
    });
}

void SliceManager::log(SliceId slice, std::string_view text)
{
    if (recorder_ != nullptr)
    {
        recorder_->event(ric_.engine().now(), id(), fmt::format("slice {} {}", to_string(slice), text));
    }
}

std::optional<SliceStatus> SliceManager::status(SliceId slice) const
{
    auto it = status_.find(slice);
    return it == status_.end() ? std::nullopt : std::optional<SliceStatus>(it->second);
}

std::vector<radio::SliceShare> SliceManager::active_shares() const
{
    std::vector<radio::SliceShare> out;
    for (const auto& [slice, spec] : specs_)
    {
        out.push_back({slice, spec.radio_share});
    }
    return out;
}

SliceStatus SliceManager::create_slice(const core::SliceSpec& spec, Provisioning provisioning)
{
    spec.validate();
    const auto slice = spec.snssai.id();
    if (specs_.contains(slice))
    {
        throw AdmissionRejected(fmt::format("slice {} already exists", to_string(slice)));
    }
    double budget = spec.radio_share;
    for (const auto& [_, s] : specs_)
    {
        budget += s.radio_share;
    }
    if (budget > 1.0 + 1e-9)
    {
        log(slice, fmt::format("AdmissionRejected share budget {:.3f} > 1", budget));
        throw AdmissionRejected(fmt::format("slice {}: share budget {:.3f} exceeds 1", to_string(slice), budget));
    }

    specs_[slice] = spec;
    status_[slice] = SliceStatus{slice, SliceState::Pending, std::nullopt, {}};
    log(slice, fmt::format("create name={} share={}", spec.name, spec.radio_share));

    auto step = OrchestrationStep::RegisterCuCp;
    try
    {
        ran_.register_slice(cu_cp_, slice);
        log(slice, "step RegisterCuCp ok");
        step = OrchestrationStep::DeployCuUp;
        const auto& cp = ran_.node(cu_cp_).profile;
        ran_.deploy_cu_up(cu_cp_, slice,
                          ran::StackProfile::is_preset(cp.name) ? ran::StackProfile::preset(cp.name, ran::NodeKind::CU_UP)
                                                                : cp);
        log(slice, "step DeployCuUp ok");
        step = OrchestrationStep::DeploySmf;
        core_.deploy_smf(slice);
        log(slice, "step DeploySmf ok");
        step = OrchestrationStep::DeployUpf;
        core_.deploy_upf(slice);
        log(slice, "step DeployUpf ok");
        if (core_.config().sliced_amf)
        {
            step = OrchestrationStep::DeployAmf;
            core_.deploy_amf(slice);
            log(slice, "step DeployAmf ok");
        }
    }
    catch (const std::exception& e)
    {
        finish(slice, SliceState::OrchestrationFailed, step, e.what());
        return status_.at(slice);
    }
    push_shares(slice, provisioning);
    return status_.at(slice);
}

void SliceManager::set_shares(const std::map<SliceId, double>& shares, Provisioning provisioning)
{
    double budget = 0.0;
    for (const auto& [slice, spec] : specs_)
    {
        auto it = shares.find(slice);
        budget += it == shares.end() ? spec.radio_share : it->second;
    }
    for (const auto& [slice, share] : shares)
    {
        if (!specs_.contains(slice))
        {
            throw std::invalid_argument(fmt::format("set_shares: unknown slice {}", to_string(slice)));
        }
        if (!(share > 0.0) || share > 1.0)
        {
            throw std::invalid_argument("set_shares: share outside (0,1]");
        }
    }
    if (budget > 1.0 + 1e-9)
    {
        throw AdmissionRejected(fmt::format("share budget {:.3f} exceeds 1", budget));
    }
    for (const auto& [slice, share] : shares)
    {
        specs_[slice].radio_share = share;
        log(slice, fmt::format("set_shares share={}", share));
    }
    push_shares(std::nullopt, provisioning);
}

void SliceManager::push_shares(std::optional<SliceId> creating, Provisioning provisioning)
{
    const auto shares = active_shares();

    auto after_shares = [this, creating] {
        if (!creating)
        {
            return;
        }
        const auto slice = *creating;
        log(slice, "step SetSliceShares ok");
        core_.register_slice(slice);
        log(slice, "step RegisterAmf ok");
        finish(slice, SliceState::Ready, std::nullopt, {});
    };

    if (provisioning == Provisioning::Static)
    {
        sim::SimTime applied;
        for (const auto du : dus_)
        {
            applied = ran_.set_slice_shares(du, shares);
            ric_.publish(kTopicShares, SharesNotice{du, shares, applied});
        }
        if (creating)
        {
            log(*creating, "shares provisioned statically");
        }
        after_shares();
        return;
    }

    auto outstanding = std::make_shared<std::size_t>(dus_.size());
    auto failed = std::make_shared<bool>(false);
    if (dus_.empty())
    {
        after_shares();
        return;
    }
    for (const auto du : dus_)
    {
        auto on_done = [this, du, shares, creating, outstanding, failed,
                        after_shares](const e2::ControlOutcome& outcome) {
            if (*failed)
            {
                return;
            }
            if (const auto* err = std::get_if<e2::E2Failure>(&outcome))
            {
                *failed = true;
                if (creating)
                {
                    finish(*creating, SliceState::OrchestrationFailed, OrchestrationStep::SetSliceShares, err->cause);
                }
                else if (recorder_ != nullptr)
                {
                    recorder_->event(ric_.engine().now(), id(), fmt::format("set_shares failed: {}", err->cause));
                }
                return;
            }
            const auto& ack = std::get<e2::ControlAck>(outcome);
            ric_.publish(kTopicShares, SharesNotice{du, shares, ack.applied_at});
            if (--*outstanding == 0)
            {
                after_shares();
            }
        };
        auto sent = ric_.emit(*this, du, e2::SetSliceShares{shares}, on_done);
        if (const auto* err = std::get_if<e2::E2Failure>(&sent))
        {
            on_done(e2::ControlOutcome{*err});
        }
    }
}

void SliceManager::rollback(SliceId slice)
{
    ran_.remove_cu_up(slice);
    core_.remove_function(slice, core::NetworkFunction::Smf);
    core_.remove_function(slice, core::NetworkFunction::Upf);
    core_.remove_amf(slice);
    core_.deregister_slice(slice);
    log(slice, "rollback complete");
}

void SliceManager::finish(SliceId slice, SliceState state, std::optional<OrchestrationStep> step, std::string detail)
{
    auto& st = status_.at(slice);
    st.state = state;
    st.failed_step = step;
    st.detail = std::move(detail);
    if (state == SliceState::OrchestrationFailed)
    {
        log(slice, fmt::format("OrchestrationFailed step={} cause={}", to_string(*step), st.detail));
        rollback(slice);
        specs_.erase(slice);
    }
    else
    {
        log(slice, fmt::format("status {}", to_string(state)));
    }
    const auto copy = st;
    for (const auto& cb : status_cbs_)
    {
        cb(copy);
    }
}
} // namespace slicesim::ric

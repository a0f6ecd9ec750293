#include "slicesim/e2/endpoint.hpp"

#include <fmt/format.h>

namespace slicesim::e2
{
const char* to_string(Quirk q) noexcept
{
    switch (q)
    {
    case Quirk::Normal:
        return "Normal";
    case Quirk::EmptyIEs:
        return "EmptyIEs";
    case Quirk::NoDecode:
        return "NoDecode";
    }
    return "?";
}

std::optional<Quirk> parse_quirk(std::string_view s) noexcept
{
    if (s == "Normal")
        return Quirk::Normal;
    if (s == "EmptyIEs")
        return Quirk::EmptyIEs;
    if (s == "NoDecode")
        return Quirk::NoDecode;
    return std::nullopt;
}

const char* to_string(AssocState s) noexcept
{
    switch (s)
    {
    case AssocState::Idle:
        return "Idle";
    case AssocState::SetupPending:
        return "SetupPending";
    case AssocState::Established:
        return "Established";
    case AssocState::Degraded:
        return "Degraded";
    }
    return "?";
}

void send_frame(sim::Engine& engine, sim::EntityId from, sim::EntityId to, sim::SimTime latency, const E2Message& msg)
{
    engine.schedule_in(latency, to, sim::Message{fmt::format("e2:{}", to_string(msg.msg_type)), Frame{from, encode(msg)}});
}

// ---------------------------------------------------------------------------

NodeAgent::NodeAgent(sim::Engine& engine, sim::EntityId self, std::string node_name, Quirk quirk, AgentHooks hooks,
                     std::set<std::uint16_t> functions)
    : engine_(engine), self_(self), name_(std::move(node_name)), quirk_(quirk), hooks_(std::move(hooks)),
      functions_(std::move(functions))
{
}

void NodeAgent::reply(sim::EntityId to, MsgType type, std::uint32_t txn, std::vector<Ie> ies)
{
    send_frame(engine_, self_, to, latency_, E2Message{kVersion, type, txn, std::move(ies)});
}

void NodeAgent::fail(sim::EntityId to, std::uint32_t txn, std::string_view cause)
{
    reply(to, MsgType::Failure, txn, {Ie{tag::Cause, text(cause)}});
}

void NodeAgent::on_frame(const Frame& frame)
{
    const auto result = decode(frame.bytes);
    if (!result.ok())
    {
        ++decode_failures_;
        return;
    }
    const auto& msg = *result.message;
    if (quirk_ == Quirk::NoDecode && msg.msg_type == MsgType::SetupRequest)
    {
        ++decode_failures_;
        return;
    }
    if (hooks_.operational && !hooks_.operational())
    {
        return;
    }

    switch (msg.msg_type)
    {
    case MsgType::SetupRequest: {
        std::vector<Ie> ies;
        if (quirk_ == Quirk::Normal)
        {
            const std::vector<std::uint16_t> ids(functions_.begin(), functions_.end());
            ies.push_back(Ie{tag::NodeId, text(name_)});
            ies.push_back(Ie{tag::RanFunctionList, function_list(ids)});
        }
        reply(frame.from, MsgType::SetupResponse, msg.txn_id, std::move(ies));
        break;
    }
    case MsgType::SubscriptionRequest: {
        const auto* fn_ie = msg.find(tag::RanFunctionList);
        const auto* period_ie = msg.find(tag::ReportPeriod);
        const auto fns = fn_ie ? read_function_list(fn_ie->value) : std::nullopt;
        std::uint32_t period_us = 0;
        bool has_period = false;
        if (period_ie != nullptr)
        {
            if (const auto p = read_u32(period_ie->value))
            {
                period_us = *p;
                has_period = true;
            }
        }
        if (!fns || fns->size() != 1 || !has_period)
        {
            fail(frame.from, msg.txn_id, "malformed-request");
            break;
        }
        if (!functions_.contains(fns->front()))
        {
            fail(frame.from, msg.txn_id, "unknown-function");
            break;
        }
        if (sim::micros(period_us) < kMinReportPeriod)
        {
            fail(frame.from, msg.txn_id, "period-below-floor");
            break;
        }
        subscriptions_[msg.txn_id] = NodeSubscription{frame.from, msg.txn_id, sim::micros(period_us)};
        reply(frame.from, MsgType::SubscriptionResponse, msg.txn_id, {Ie{tag::RanFunctionList, fn_ie->value}});
        const auto sub_id = msg.txn_id;
        engine_.post_in(sim::micros(period_us), self_, "e2_report", [this, sub_id] { report(sub_id); });
        break;
    }
    case MsgType::ControlRequest: {
        if (drop_control_)
        {
            break;
        }
        const auto* action_ie = msg.find(tag::ControlAction);
        const auto action = action_ie ? decode_action(action_ie->value) : std::nullopt;
        if (!action || !hooks_.apply_control)
        {
            fail(frame.from, msg.txn_id, "unsupported-action");
            break;
        }
        const auto applied = hooks_.apply_control(*action);
        reply(frame.from, MsgType::ControlAck, msg.txn_id, {Ie{tag::AppliedAt, be_u64(applied.us)}});
        break;
    }
    default:
        // Responses are never addressed to a node.
        ++decode_failures_;
        break;
    }
}

void NodeAgent::report(std::uint32_t sub_id)
{
    auto it = subscriptions_.find(sub_id);
    if (it == subscriptions_.end())
    {
        return;
    }
    const auto sub = it->second;
    if (!hooks_.operational || hooks_.operational())
    {
        const auto kpis = hooks_.kpis ? hooks_.kpis() : std::vector<KpiEntry>{};
        reply(sub.ric, MsgType::Indication, sub.sub_id,
              {Ie{tag::NodeId, text(name_)}, Ie{tag::KpiPayload, encode_kpis(kpis)}});
        ++indications_sent_;
    }
    engine_.post_in(sub.period, self_, "e2_report", [this, sub_id] { report(sub_id); });
}

// ---------------------------------------------------------------------------

RicEndpoint::RicEndpoint(sim::Engine& engine, sim::EntityId self, sim::Recorder* recorder, RetryPolicy policy)
    : engine_(engine), self_(self), recorder_(recorder), policy_(policy)
{
}

const E2Association* RicEndpoint::association(sim::EntityId node) const
{
    auto it = assocs_.find(node);
    return it == assocs_.end() ? nullptr : &it->second;
}

void RicEndpoint::notify(const E2Association& a)
{
    if (recorder_ != nullptr)
    {
        recorder_->event(engine_.now(), a.node_name, fmt::format("e2 association {}", to_string(a.state)));
    }
    for (const auto& cb : assoc_cbs_)
    {
        cb(a);
    }
}

void RicEndpoint::record_failure(const E2Association& a, std::string cause)
{
    if (recorder_ != nullptr)
    {
        recorder_->event(engine_.now(), a.node_name, fmt::format("e2 Failure cause={}", cause));
    }
    failures_.emplace_back(a.node_name, E2Failure{std::move(cause)});
}

void RicEndpoint::e2_setup(sim::EntityId node)
{
    auto& a = assocs_[node];
    a.node = node;
    a.node_name = engine_.name(node);
    a.state = AssocState::SetupPending;
    a.ran_functions.clear();
    a.retries_left = policy_.setup_retries;
    a.attempts = 0;
    send_setup(a);
}

void RicEndpoint::send_setup(E2Association& a)
{
    const auto txn = next_txn();
    pending_[txn] = Pending{PendingKind::Setup, a.node, 0, {}};
    a.setup_txn = txn;
    ++a.attempts;
    if (recorder_ != nullptr)
    {
        recorder_->event(engine_.now(), a.node_name, fmt::format("e2 SetupRequest attempt={} txn={}", a.attempts, txn));
    }
    send_frame(engine_, self_, a.node, latency_, E2Message{kVersion, MsgType::SetupRequest, txn, {}});
    const auto node = a.node;
    engine_.post_in(policy_.setup_interval, self_, "e2_setup_timer", [this, node, txn] { setup_timer(node, txn); });
}

void RicEndpoint::setup_timer(sim::EntityId node, std::uint32_t txn)
{
    auto& a = assocs_.at(node);
    if (a.state != AssocState::SetupPending || a.setup_txn != txn)
    {
        return;
    }
    pending_.erase(txn);
    if (a.retries_left > 0)
    {
        --a.retries_left;
        send_setup(a);
        return;
    }
    a.state = AssocState::Idle;
    ++setup_timeouts_;
    if (recorder_ != nullptr)
    {
        recorder_->event(engine_.now(), a.node_name, fmt::format("e2 SetupTimeout after {} attempts", a.attempts));
    }
    notify(a);
}

std::variant<Subscription, E2Failure> RicEndpoint::subscribe(sim::EntityId node, std::uint16_t function,
                                                             sim::SimTime report_period)
{
    auto it = assocs_.find(node);
    if (it == assocs_.end() || it->second.state == AssocState::Idle || it->second.state == AssocState::SetupPending)
    {
        E2Failure f{"no-association"};
        if (it != assocs_.end())
        {
            record_failure(it->second, f.cause);
        }
        return f;
    }
    auto& a = it->second;
    const auto reject = [&](std::string cause) {
        record_failure(a, cause);
        for (const auto& cb : sub_failure_cbs_)
        {
            cb(node, E2Failure{cause});
        }
        return E2Failure{std::move(cause)};
    };
    if (a.state == AssocState::Degraded)
    {
        return reject("no-ran-function");
    }
    if (report_period < kMinReportPeriod)
    {
        return reject("period-below-floor");
    }
    if (!a.ran_functions.contains(function))
    {
        return reject("unknown-function");
    }
    const auto txn = next_txn();
    Subscription sub{txn, node, function, report_period, false};
    subs_[txn] = sub;
    pending_[txn] = Pending{PendingKind::Subscription, node, txn, {}};
    const std::uint16_t fn[] = {function};
    send_frame(engine_, self_, node, latency_,
               E2Message{kVersion, MsgType::SubscriptionRequest, txn,
                         {Ie{tag::RanFunctionList, function_list(fn)},
                          Ie{tag::ReportPeriod, be_u32(static_cast<std::uint32_t>(report_period.us))}}});
    if (recorder_ != nullptr)
    {
        recorder_->event(engine_.now(), a.node_name,
                         fmt::format("e2 SubscriptionRequest function={} period_us={}", function, report_period.us));
    }
    return sub;
}

std::variant<std::uint32_t, E2Failure> RicEndpoint::control(sim::EntityId node, const ControlAction& action,
                                                            std::function<void(const ControlOutcome&)> done)
{
    auto it = assocs_.find(node);
    if (it == assocs_.end() || it->second.state == AssocState::Idle || it->second.state == AssocState::SetupPending)
    {
        return E2Failure{"no-association"};
    }
    auto& a = it->second;
    if (a.state == AssocState::Degraded)
    {
        record_failure(a, "no-ran-function");
        return E2Failure{"no-ran-function"};
    }
    if (!a.ran_functions.contains(kFunctionSliceControl))
    {
        record_failure(a, "unknown-function");
        return E2Failure{"unknown-function"};
    }
    const auto txn = next_txn();
    pending_[txn] = Pending{PendingKind::Control, node, 0, std::move(done)};
    send_frame(engine_, self_, node, latency_,
               E2Message{kVersion, MsgType::ControlRequest, txn, {Ie{tag::ControlAction, encode_action(action)}}});
    engine_.post_in(policy_.control_timeout, self_, "e2_control_timer", [this, txn] {
        auto p = pending_.find(txn);
        if (p == pending_.end())
        {
            return;
        }
        auto cb = std::move(p->second.done);
        const auto node_id = p->second.node;
        pending_.erase(p);
        record_failure(assocs_.at(node_id), "timeout");
        if (cb)
        {
            cb(E2Failure{"timeout"});
        }
    });
    return txn;
}

void RicEndpoint::on_frame(const Frame& frame)
{
    const auto result = decode(frame.bytes);
    if (!result.ok())
    {
        ++unmatched_;
        return;
    }
    const auto& msg = *result.message;

    if (msg.msg_type == MsgType::Indication)
    {
        auto s = subs_.find(msg.txn_id);
        const auto* payload = msg.find(tag::KpiPayload);
        auto kpis = payload ? decode_kpis(payload->value) : std::nullopt;
        if (s == subs_.end() || s->second.node != frame.from || !s->second.active || !kpis)
        {
            ++unmatched_;
            return;
        }
        ++indications_;
        const Indication ind{frame.from, msg.txn_id, engine_.now(), std::move(*kpis)};
        for (const auto& cb : indication_cbs_)
        {
            cb(ind);
        }
        return;
    }

    auto p = pending_.find(msg.txn_id);
    if (p == pending_.end() || p->second.node != frame.from)
    {
        ++unmatched_;
        return;
    }
    auto pending = std::move(p->second);
    auto& a = assocs_.at(frame.from);

    const auto kind_matches = [&] {
        switch (msg.msg_type)
        {
        case MsgType::SetupResponse:
            return pending.kind == PendingKind::Setup;
        case MsgType::SubscriptionResponse:
            return pending.kind == PendingKind::Subscription;
        case MsgType::ControlAck:
            return pending.kind == PendingKind::Control;
        case MsgType::Failure:
            return true;
        default:
            return false;
        }
    }();
    if (!kind_matches)
    {
        ++unmatched_;
        return;
    }
    pending_.erase(p);

    switch (msg.msg_type)
    {
    case MsgType::SetupResponse: {
        if (a.state != AssocState::SetupPending || a.setup_txn != msg.txn_id)
        {
            ++unmatched_;
            return;
        }
        a.ran_functions.clear();
        if (const auto* ie = msg.find(tag::RanFunctionList))
        {
            if (auto ids = read_function_list(ie->value))
            {
                a.ran_functions.insert(ids->begin(), ids->end());
            }
        }
        a.state = a.ran_functions.empty() ? AssocState::Degraded : AssocState::Established;
        notify(a);
        break;
    }
    case MsgType::SubscriptionResponse:
        subs_.at(pending.sub_id).active = true;
        if (recorder_ != nullptr)
        {
            recorder_->event(engine_.now(), a.node_name, fmt::format("e2 SubscriptionResponse sub={}", pending.sub_id));
        }
        break;
    case MsgType::ControlAck: {
        const auto* ie = msg.find(tag::AppliedAt);
        const auto at = ie ? read_u64(ie->value) : std::nullopt;
        if (pending.done)
        {
            pending.done(ControlAck{msg.txn_id, sim::micros(at.value_or(engine_.now().us))});
        }
        break;
    }
    case MsgType::Failure: {
        const auto* ie = msg.find(tag::Cause);
        E2Failure f{ie ? as_text(ie->value) : std::string("unspecified")};
        record_failure(a, f.cause);
        if (pending.kind == PendingKind::Subscription)
        {
            subs_.erase(pending.sub_id);
            for (const auto& cb : sub_failure_cbs_)
            {
                cb(frame.from, f);
            }
        }
        else if (pending.kind == PendingKind::Control && pending.done)
        {
            pending.done(f);
        }
        else if (pending.kind == PendingKind::Setup)
        {
            a.state = AssocState::Idle;
            notify(a);
        }
        break;
    }
    default:
        break;
    }
}
} // namespace slicesim::e2

#include "slicesim/sim/engine.hpp"

#include <fmt/format.h>

namespace slicesim::sim
{
EntityId Engine::add_entity(std::string name, Handler handler)
{
    entities_.push_back(Entity{std::move(name), std::move(handler), 0});
    return EntityId{static_cast<std::uint32_t>(entities_.size() - 1)};
}

void Engine::set_handler(EntityId id, Handler handler)
{
    entities_.at(static_cast<std::size_t>(id)).handler = std::move(handler);
}

const std::string& Engine::name(EntityId id) const
{
    return entities_.at(static_cast<std::size_t>(id)).name;
}

EventId Engine::schedule(SimTime fire_at, EntityId target, Message payload)
{
    if (fire_at < now_)
    {
        throw SchedulingInPast(fmt::format("event '{}' at {} us scheduled while clock is {} us", payload.kind,
                                           fire_at.us, now_.us));
    }
    if (static_cast<std::size_t>(target) >= entities_.size())
    {
        throw std::out_of_range("schedule: unknown target entity");
    }
    const auto seq = next_seq_++;
    queue_.push(Event{fire_at, seq, target, std::move(payload)});
    ++scheduled_;
    return EventId{seq};
}

void Engine::dispatch(Event ev)
{
    now_ = ev.fire_at;
    ++processed_;
    auto& entity = entities_[static_cast<std::size_t>(ev.target)];
    ++entity.messages;
    if (trace_ != nullptr)
    {
        *trace_ << ev.fire_at.us << ' ' << entity.name << ' ' << ev.payload.kind << '\n';
    }
    if (const auto* action = std::any_cast<Action>(&ev.payload.body))
    {
        if (*action)
        {
            (*action)();
        }
        return;
    }
    if (entity.handler)
    {
        // Copy: the handler may add entities and invalidate the reference.
        auto handler = entity.handler;
        handler(ev);
    }
}

bool Engine::step(SimTime t_end)
{
    if (queue_.empty() || queue_.top().fire_at > t_end)
    {
        return false;
    }
    // priority_queue::top is const; the payload must be copied out.
    Event ev = queue_.top();
    queue_.pop();
    dispatch(std::move(ev));
    return true;
}

SimSummary Engine::run_until(SimTime t_end)
{
    while (step(t_end))
    {
    }
    if (now_ < t_end)
    {
        now_ = t_end;
    }
    return summary();
}

SimSummary Engine::summary() const
{
    SimSummary s;
    s.clock = now_;
    s.processed = processed_;
    s.pending = queue_.size();
    s.scheduled = scheduled_;
    for (const auto& e : entities_)
    {
        s.per_entity[e.name] += e.messages;
    }
    return s;
}
} // namespace slicesim::sim

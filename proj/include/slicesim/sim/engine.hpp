#pragma once

#include "slicesim/sim/rng.hpp"
#include "slicesim/sim/time.hpp"

#include <any>
#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace slicesim::sim
{
enum class EntityId : std::uint32_t {};
enum class EventId : std::uint64_t {};

/// Opaque payload. When `body` holds an Action the engine runs it on
/// dispatch; otherwise the target entity's handler receives the event.
struct Message
{
    std::string kind;
    std::any body;
};

using Action = std::function<void()>;

struct Event
{
    SimTime fire_at;
    std::uint64_t seq{0};
    EntityId target{};
    Message payload;
};

using Handler = std::function<void(const Event&)>;

class SchedulingInPast : public std::logic_error
{
  public:
    using std::logic_error::logic_error;
};

struct SimSummary
{
    SimTime clock;
    std::uint64_t processed{0};
    std::uint64_t pending{0};
    std::uint64_t scheduled{0};
    /// Keyed by entity name so the summary is independent of id assignment.
    std::map<std::string, std::uint64_t> per_entity;
};

/// Single-threaded discrete-event engine. Events are ordered by
/// (fire_at, seq); seq is the insertion counter, so ties are FIFO.
class Engine
{
  public:
    explicit Engine(std::uint64_t seed = 0) : seed_(seed) {}

    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    EntityId add_entity(std::string name, Handler handler = {});
    void set_handler(EntityId id, Handler handler);
    const std::string& name(EntityId id) const;
    std::size_t entity_count() const noexcept { return entities_.size(); }

    EventId schedule(SimTime fire_at, EntityId target, Message payload);
    EventId schedule_in(SimTime delay, EntityId target, Message payload)
    {
        return schedule(now_ + delay, target, std::move(payload));
    }
    EventId post(SimTime fire_at, EntityId target, std::string kind, Action action)
    {
        return schedule(fire_at, target, Message{std::move(kind), std::move(action)});
    }
    EventId post_in(SimTime delay, EntityId target, std::string kind, Action action)
    {
        return post(now_ + delay, target, std::move(kind), std::move(action));
    }

    /// Processes every event with fire_at <= t_end, then sets the clock to
    /// t_end. An empty queue is a normal completion.
    SimSummary run_until(SimTime t_end);

    /// Runs at most one event (if any is due by t_end). Returns false when
    /// nothing was processed.
    bool step(SimTime t_end);

    SimTime now() const noexcept { return now_; }
    std::uint64_t seed() const noexcept { return seed_; }
    RngStream rng(std::string_view stream_id) const { return RngStream(seed_, stream_id); }

    /// Emits `<time_us> <target> <message-kind>` per dispatched event.
    void set_trace(std::ostream* out) noexcept { trace_ = out; }

    std::uint64_t scheduled_count() const noexcept { return scheduled_; }
    std::uint64_t processed_count() const noexcept { return processed_; }
    std::uint64_t pending_count() const noexcept { return queue_.size(); }
    SimSummary summary() const;

  private:
    struct Entity
    {
        std::string name;
        Handler handler;
        std::uint64_t messages{0};
    };

    struct Later
    {
        bool operator()(const Event& a, const Event& b) const noexcept
        {
            if (a.fire_at != b.fire_at)
            {
                return a.fire_at > b.fire_at;
            }
            return a.seq > b.seq;
        }
    };

    void dispatch(Event ev);

    std::uint64_t seed_;
    SimTime now_{};
    std::uint64_t next_seq_{0};
    std::uint64_t scheduled_{0};
    std::uint64_t processed_{0};
    std::vector<Entity> entities_;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::ostream* trace_{nullptr};
};
} // namespace slicesim::sim

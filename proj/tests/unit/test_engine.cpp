#include "slicesim/sim/engine.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace slicesim::sim;

TEST(Engine, FiresInTimeOrderWithFifoTies)
{
    Engine e(1);
    const auto a = e.add_entity("a");
    std::vector<int> order;
    e.post(micros(30), a, "x", [&] { order.push_back(3); });
    e.post(micros(10), a, "x", [&] { order.push_back(1); });
    e.post(micros(30), a, "x", [&] { order.push_back(4); });
    e.post(micros(20), a, "x", [&] { order.push_back(2); });
    e.post(micros(30), a, "x", [&] { order.push_back(5); });
    const auto s = e.run_until(micros(100));
    EXPECT_EQ(order, (std::vector<int>{1, 2, 3, 4, 5}));
    EXPECT_EQ(s.processed, 5u);
    EXPECT_EQ(e.now(), micros(100));
}

TEST(Engine, EventsScheduledForNowRunAfterQueuedPeers)
{
    Engine e;
    const auto a = e.add_entity("a");
    std::vector<std::string> order;
    e.post(micros(5), a, "x", [&] {
        order.push_back("first");
        e.post_in(micros(0), a, "y", [&] { order.push_back("spawned"); });
    });
    e.post(micros(5), a, "x", [&] { order.push_back("second"); });
    e.run_until(micros(5));
    EXPECT_EQ(order, (std::vector<std::string>{"first", "second", "spawned"}));
}

TEST(Engine, RejectsSchedulingInThePast)
{
    Engine e;
    const auto a = e.add_entity("a");
    e.run_until(micros(50));
    EXPECT_THROW(e.post(micros(49), a, "x", [] {}), SchedulingInPast);
    EXPECT_NO_THROW(e.post(micros(50), a, "x", [] {}));
}

TEST(Engine, RunUntilLeavesLaterEventsPending)
{
    Engine e;
    const auto a = e.add_entity("a");
    int fired = 0;
    e.post(micros(10), a, "x", [&] { ++fired; });
    e.post(micros(11), a, "x", [&] { ++fired; });
    e.run_until(micros(10));
    EXPECT_EQ(fired, 1);
    EXPECT_EQ(e.pending_count(), 1u);
    e.run_until(micros(20));
    EXPECT_EQ(fired, 2);
}

TEST(Engine, NonActionMessagesGoToTheHandler)
{
    Engine e;
    std::vector<std::string> got;
    const auto a = e.add_entity("a", [&](const Event& ev) { got.push_back(ev.payload.kind); });
    e.schedule(micros(1), a, Message{"ping", 42});
    e.run_until(micros(1));
    EXPECT_EQ(got, (std::vector<std::string>{"ping"}));
}

TEST(Engine, TraceLinesNameTargetAndKind)
{
    Engine e;
    std::ostringstream out;
    e.set_trace(&out);
    const auto a = e.add_entity("du1");
    e.post(micros(1500), a, "slot", [] {});
    e.run_until(micros(2000));
    EXPECT_EQ(out.str(), "1500 du1 slot\n");
}

TEST(Rng, StreamsAreDeterministicAndIndependent)
{
    Engine e1(7);
    Engine e2(7);
    auto a = e1.rng("ping:a");
    auto b = e2.rng("ping:a");
    for (int i = 0; i < 100; ++i)
        ASSERT_EQ(a.next_u64(), b.next_u64());

    // Drawing from another stream does not perturb this one.
    auto c = e1.rng("ping:b");
    auto a2 = e1.rng("ping:a");
    auto ref = e2.rng("ping:a");
    for (int i = 0; i < 10; ++i)
        c.next_u64();
    for (int i = 0; i < 100; ++i)
        ASSERT_EQ(a2.next_u64(), ref.next_u64());

    auto other_seed = Engine(8).rng("ping:a");
    auto same_seed = Engine(7).rng("ping:a");
    EXPECT_NE(other_seed.next_u64(), same_seed.next_u64());
}

TEST(Rng, UniformStaysInRange)
{
    RngStream r(3, "u");
    double lo = 1.0;
    double hi = 0.0;
    for (int i = 0; i < 100000; ++i)
    {
        const double x = r.uniform(500.0, 3500.0);
        ASSERT_GE(x, 500.0);
        ASSERT_LT(x, 3500.0);
        lo = std::min(lo, (x - 500.0) / 3000.0);
        hi = std::max(hi, (x - 500.0) / 3000.0);
        const auto k = r.uniform_int(-2, 2);
        ASSERT_GE(k, -2);
        ASSERT_LE(k, 2);
    }
    EXPECT_LT(lo, 0.001);
    EXPECT_GT(hi, 0.999);
}

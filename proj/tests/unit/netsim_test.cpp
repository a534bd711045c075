#include "cobra/netsim.hpp"

#include <doctest.h>

#include <random>

using namespace cobra;

TEST_SUITE("netsim") {

TEST_CASE("plain synchronous bound") {
    const auto mode = NetMode::synchronous(2, 10);
    AsynchronyPlan plan;
    for (Tick base = 1; base <= 2; ++base) CHECK(deliver_time(0, 1, 5, base, plan, mode) <= 7);
}

TEST_CASE("window opening just before arrival costs at most Δ*") {
    const auto mode = NetMode::synchronous(2, 10);
    AsynchronyPlan plan;
    plan.windows = {{6, 16}};
    plan.partition = {{0}, {1}};
    const Tick t = deliver_time(0, 1, 5, 2, plan, mode);
    CHECK(t <= 5 + 14);
    CHECK(t == 16 + 2); // held to window end, then Δ
}

TEST_CASE("intra-partition traffic is not delayed") {
    const auto mode = NetMode::synchronous(2, 10);
    AsynchronyPlan plan;
    plan.windows = {{0, 10}};
    plan.partition = {{0, 1}, {2}};
    CHECK(deliver_time(0, 1, 3, 2, plan, mode) == 5);
    CHECK(deliver_time(0, 2, 3, 2, plan, mode) == 12);
    // Ids outside every group are never delayed.
    CHECK(deliver_time(5, 2, 3, 2, plan, mode) == 5);
}

TEST_CASE("partial synchrony holds messages until GST") {
    const auto mode = NetMode::partial(1000, 2);
    AsynchronyPlan plan;
    plan.partition = {{0}, {1}};
    const Tick t = deliver_time(0, 1, 5, 2, plan, mode);
    CHECK(t <= 1002);
    CHECK(t == 1002);
    CHECK(deliver_time(0, 1, 2000, 1, plan, mode) <= 2002);
}

TEST_CASE("validate_plan") {
    AsynchronyPlan p;
    p.windows = {{0, 11}};
    CHECK(*validate_plan(p, 10, 0) == PlanError::WindowTooLong);
    p.windows = {{5, 3}};
    CHECK(*validate_plan(p, 10, 0) == PlanError::WindowReversed);
    p.windows = {{0, 5}, {4, 8}};
    CHECK(*validate_plan(p, 10, 0) == PlanError::WindowsOverlap);
    p.windows = {{0, 5}, {8, 12}};
    CHECK(*validate_plan(p, 10, 4) == PlanError::GapTooShort);
    CHECK_FALSE(validate_plan(p, 10, 3).has_value());
}

TEST_CASE("event queue pops in time then send order") {
    EventQueue<int> q;
    Envelope<int> e;
    e.deliver_time = 3;
    e.payload = 1;
    q.push(e);
    e.payload = 2;
    q.push(e);
    e.deliver_time = 5;
    e.payload = 3;
    q.push(e);
    CHECK(q.pop_due(2).empty());
    const auto due = q.pop_due(3);
    REQUIRE(due.size() == 2u);
    CHECK(due[0].payload == 1);
    CHECK(due[1].payload == 2);
    CHECK(q.next_time() == 5);
    CHECK(q.pop_due(4).empty());
    CHECK(q.pop_due(5).size() == 1u);
    CHECK(q.empty());
}

TEST_CASE("network transcript is deterministic for a seed") {
    auto run = [](std::uint64_t seed) {
        AsynchronyPlan plan;
        plan.windows = {{10, 18}};
        plan.partition = {{0, 1}, {2, 3}};
        Network<int> net(NetMode::synchronous(3, 8), plan, seed);
        std::vector<std::tuple<Tick, int, int>> log;
        for (Tick t = 0; t < 40; ++t) {
            for (auto& e : net.step(t)) log.emplace_back(t, e.dst, e.payload);
            for (int s = 0; s < 4; ++s) net.send(s, (s + 1) % 4, static_cast<int>(t * 4 + s), t);
        }
        return log;
    };
    CHECK(run(9) == run(9));
    CHECK(run(9) != run(10));
}

TEST_CASE("fuzzed plans keep every delay within Δ*") {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 300; ++trial) {
        const Tick delta = 1 + static_cast<Tick>(rng() % 3);
        const Tick dgst = static_cast<Tick>(rng() % 12);
        const auto mode = NetMode::synchronous(delta, dgst);
        AsynchronyPlan plan;
        Tick t = static_cast<Tick>(rng() % 5);
        for (int w = 0; w < 3; ++w) {
            const Tick len = dgst == 0 ? 0 : static_cast<Tick>(rng() % (dgst + 1));
            plan.windows.push_back({t, t + len});
            t += len + 1 + static_cast<Tick>(rng() % 10);
        }
        plan.partition = {{0, 2}, {1, 3}};
        Network<int> net(mode, plan, rng());
        for (Tick now = 0; now < 80; ++now) {
            net.step(now);
            for (int s = 0; s < 4; ++s)
                for (int d = 0; d < 4; ++d)
                    if (s != d) net.send(s, d, 0, now);
        }
        CHECK(net.max_delay() <= mode.delta_star());
    }
}

TEST_CASE("send_at never delivers in the past") {
    Network<int> net(NetMode::synchronous(2, 4), {}, 1);
    net.send_at(0, 1, 7, 10, 3);
    CHECK(net.step(10).empty());
    CHECK(net.step(11).size() == 1u);
}

}

#pragma once

#include "cobra/core.hpp"

#include <cstdint>
#include <queue>
#include <random>
#include <utility>
#include <vector>

namespace cobra {

struct NetMode {
    enum class Kind { Synchronous, PartialSynchrony };
    Kind kind = Kind::Synchronous;
    Tick delta = 2;
    Tick delta_gst = 10;
    Tick gst = 0; // PartialSynchrony only

    static NetMode synchronous(Tick delta, Tick delta_gst) { return {Kind::Synchronous, delta, delta_gst, 0}; }
    static NetMode partial(Tick gst, Tick delta) { return {Kind::PartialSynchrony, delta, 0, gst}; }
    Tick delta_star() const { return 2 * delta + delta_gst; }
};

struct AsyncWindow {
    Tick start = 0;
    Tick end = 0; // exclusive
};

// Groups of correct validators kept apart during every window. Ids outside
// all groups (coalition members, clients) are never delayed.
struct AsynchronyPlan {
    std::vector<AsyncWindow> windows;
    std::vector<std::vector<ValidatorId>> partition;

    int group_of(int id) const;
    bool crosses(int src, int dst) const;
};

enum class PlanError { WindowTooLong, WindowsOverlap, WindowReversed, GapTooShort };

const char* plan_error_name(PlanError e);

std::optional<PlanError> validate_plan(const AsynchronyPlan& plan, Tick delta_gst, Tick min_gap);

enum class Jitter { Uniform, Max };

// Delivery time for one message. `base_delay` is the jitter already drawn in [1, delta].
Tick deliver_time(int src, int dst, Tick send_time, Tick base_delay, const AsynchronyPlan& plan, const NetMode& mode);

template <class Payload>
struct Envelope {
    int src = 0;
    int dst = 0;
    Payload payload;
    Tick send_time = 0;
    Tick deliver_time = 0;
    std::uint64_t seq = 0;
};

template <class Payload>
class EventQueue {
public:
    using Env = Envelope<Payload>;

    void push(Env e) {
        e.seq = next_seq_++;
        heap_.push(std::move(e));
    }

    // Pops every envelope due at `now`, in (deliver_time, seq) order.
    std::vector<Env> pop_due(Tick now) {
        std::vector<Env> out;
        while (!heap_.empty() && heap_.top().deliver_time <= now) {
            out.push_back(heap_.top());
            heap_.pop();
        }
        return out;
    }

    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }
    Tick next_time() const { return heap_.empty() ? -1 : heap_.top().deliver_time; }

private:
    struct Later {
        bool operator()(const Env& a, const Env& b) const {
            if (a.deliver_time != b.deliver_time) return a.deliver_time > b.deliver_time;
            return a.seq > b.seq;
        }
    };
    std::priority_queue<Env, std::vector<Env>, Later> heap_;
    std::uint64_t next_seq_ = 0;
};

// Scheduler with a seeded jitter source and running delay statistics.
template <class Payload>
class Network {
public:
    Network(NetMode mode, AsynchronyPlan plan, std::uint64_t seed, Jitter jitter = Jitter::Uniform)
        : mode_(mode), plan_(std::move(plan)), rng_(seed), jitter_(jitter) {}

    Tick send(int src, int dst, Payload p, Tick now) {
        Envelope<Payload> e;
        e.src = src;
        e.dst = dst;
        e.payload = std::move(p);
        e.send_time = now;
        e.deliver_time = cobra::deliver_time(src, dst, now, draw(), plan_, mode_);
        max_delay_ = std::max(max_delay_, e.deliver_time - now);
        ++sent_;
        Tick t = e.deliver_time;
        queue_.push(std::move(e));
        return t;
    }

    // Direct scheduling with an adversary-chosen delivery time.
    void send_at(int src, int dst, Payload p, Tick now, Tick at) {
        Envelope<Payload> e;
        e.src = src;
        e.dst = dst;
        e.payload = std::move(p);
        e.send_time = now;
        e.deliver_time = std::max(at, now + 1);
        max_delay_ = std::max(max_delay_, e.deliver_time - now);
        ++sent_;
        queue_.push(std::move(e));
    }

    std::vector<Envelope<Payload>> step(Tick now) { return queue_.pop_due(now); }

    const NetMode& mode() const { return mode_; }
    const AsynchronyPlan& plan() const { return plan_; }
    Tick max_delay() const { return max_delay_; }
    std::uint64_t sent() const { return sent_; }
    bool idle() const { return queue_.empty(); }

private:
    Tick draw() {
        if (jitter_ == Jitter::Max || mode_.delta <= 1) return mode_.delta;
        std::uniform_int_distribution<Tick> d(1, mode_.delta);
        return d(rng_);
    }

    NetMode mode_;
    AsynchronyPlan plan_;
    std::mt19937_64 rng_;
    Jitter jitter_;
    EventQueue<Payload> queue_;
    Tick max_delay_ = 0;
    std::uint64_t sent_ = 0;
};

} // namespace cobra

#include "cobra/smr.hpp"

#include <doctest.h>

#include <deque>

using namespace cobra;

namespace {

const SystemConfig kCfg = make_config(2, 0, 0, 100, 2, 10, 29);
constexpr Tick kL = 8;

template <class T>
int count_msgs(const Outbox& out, int stage = 0) {
    int c = 0;
    for (const auto& o : out)
        if (const auto* m = std::get_if<T>(&o.msg)) {
            if constexpr (std::is_same_v<T, VoteMsg>) {
                if (stage == 0 || m->stage == stage) ++c;
            } else {
                ++c;
            }
        }
    return c;
}

// Every message arrives one tick after it is sent; broadcasts skip the sender.
struct Cluster {
    std::vector<SmrNode> nodes;
    std::deque<std::tuple<Tick, int, int, Message>> wire;
    std::vector<DeliverEvent> transcript;

    explicit Cluster(const SystemConfig& cfg) {
        for (int v = 0; v < cfg.n; ++v) nodes.emplace_back(v, cfg, GadgetOptions{}, kL);
    }

    void post(int src, Outbox& out, Tick now) {
        for (auto& o : out) {
            if (o.dst == kBroadcast) {
                for (int d = 0; d < static_cast<int>(nodes.size()); ++d)
                    if (d != src) wire.emplace_back(now + 1, src, d, o.msg);
            } else {
                wire.emplace_back(now + 1, src, o.dst, o.msg);
            }
        }
        out.clear();
    }

    void run(Tick ticks) {
        for (Tick now = 0; now < ticks; ++now) {
            std::vector<Outbox> outs(nodes.size());
            while (!wire.empty() && std::get<0>(wire.front()) <= now) {
                auto [t, src, dst, msg] = wire.front();
                wire.pop_front();
                nodes[static_cast<std::size_t>(dst)].on_message(src, msg, now, outs[static_cast<std::size_t>(dst)]);
            }
            if (now % kL == 0) {
                const Round r = round_of(now, kL);
                auto& leader = nodes[static_cast<std::size_t>(leader_of(r, static_cast<int>(nodes.size())))];
                leader.propose(leader.build_block(r), r, now, outs[static_cast<std::size_t>(leader.id())]);
            }
            for (auto& nd : nodes) nd.end_of_tick(now, outs[static_cast<std::size_t>(nd.id())], transcript);
            for (std::size_t v = 0; v < nodes.size(); ++v) post(static_cast<int>(v), outs[v], now);
        }
    }
};

} // namespace

TEST_SUITE("smr") {

TEST_CASE("leader of round r is r mod n") {
    CHECK(leader_of(1, 7) == 1);
    CHECK(leader_of(7, 7) == 0);
    CHECK(round_of(0, kL) == 1);
    CHECK(round_of(kL, kL) == 2);
    CHECK(round_start(2, kL) == kL);
}

TEST_CASE("honest leader includes mempool txs at the next height") {
    SmrNode leader(1, kCfg, {}, kL);
    Outbox out;
    const Transaction tx{100, 200, 5, TxKind::Payment, 0};
    leader.on_message(7, TxMsg{tx}, 0, out);
    const auto b = leader.build_block(1);
    CHECK(b->height == 1);
    CHECK(b->proposer == 1);
    REQUIRE(b->txs.size() == 1u);
    CHECK(b->txs[0] == tx);
    CHECK(b->value == 5);
}

TEST_CASE("correct validator votes once per round and stage") {
    SmrNode leader(1, kCfg, {}, kL);
    SmrNode v(3, kCfg, {}, kL);
    const auto b1 = leader.build_block(1);
    const auto b2 = leader.build_block(1, {Transaction{9, 9, 1, TxKind::Payment, 0}});
    REQUIRE(b1->digest != b2->digest);
    Outbox out;
    v.on_message(1, ProposalMsg{1, b1}, 0, out);
    v.on_message(1, ProposalMsg{1, b2}, 0, out);
    CHECK(count_msgs<VoteMsg>(out, 1) == 1);
}

TEST_CASE("proposals from a non-leader are ignored") {
    SmrNode other(2, kCfg, {}, kL);
    SmrNode v(3, kCfg, {}, kL);
    Outbox out;
    v.on_message(2, ProposalMsg{1, other.build_block(1)}, 0, out);
    CHECK(count_msgs<VoteMsg>(out) == 0);
}

TEST_CASE("vote-all validator signs both conflicting blocks") {
    SmrNode leader(1, kCfg, {}, kL);
    SmrNode v(3, kCfg, {}, kL);
    v.behavior().vote_all = true;
    Outbox out;
    v.on_message(1, ProposalMsg{1, leader.build_block(1)}, 0, out);
    v.on_message(1, ProposalMsg{1, leader.build_block(1, {Transaction{9, 9, 1, TxKind::Payment, 0}})}, 0, out);
    CHECK(count_msgs<VoteMsg>(out, 1) == 2);
}

TEST_CASE("q stage-2 votes deliver, q-1 do not") {
    SmrNode leader(1, kCfg, {}, kL);
    const auto b = leader.build_block(1);
    for (int voters : {4, 5}) {
        SmrNode v(6, kCfg, {}, kL);
        Outbox out;
        std::vector<DeliverEvent> tr;
        v.on_message(1, ProposalMsg{1, b}, 0, out);
        for (int s = 0; s < voters; ++s) v.on_message(s, VoteMsg{s, b->digest, 1, 1, 2}, 1, out);
        v.end_of_tick(1, out, tr);
        CHECK((v.tip_height() == 1) == (voters == 5));
        CHECK((count_msgs<QcMsg>(out) == 1) == (voters == 5));
    }
}

TEST_CASE("votes signed by someone else are dropped") {
    SmrNode leader(1, kCfg, {}, kL);
    const auto b = leader.build_block(1);
    SmrNode v(6, kCfg, {}, kL);
    Outbox out;
    std::vector<DeliverEvent> tr;
    v.on_message(1, ProposalMsg{1, b}, 0, out);
    for (int s = 0; s < 5; ++s) v.on_message(0, VoteMsg{s, b->digest, 1, 1, 2}, 1, out);
    v.end_of_tick(1, out, tr);
    CHECK(v.tip_height() == 0);
}

TEST_CASE("a late stage-1 certificate does not trigger a stage-2 vote") {
    SmrNode leader(1, kCfg, {}, kL);
    const auto b = leader.build_block(1);
    SmrNode v(6, kCfg, {}, kL);
    Outbox out;
    std::vector<DeliverEvent> tr;
    v.on_message(1, ProposalMsg{1, b}, 0, out);
    out.clear();
    // Round 1 ends at tick 8; the quorum of stage-1 votes lands in round 2.
    for (int s = 0; s < 5; ++s) v.on_message(s, VoteMsg{s, b->digest, 1, 1, 1}, kL + 1, out);
    v.end_of_tick(kL + 1, out, tr);
    CHECK(count_msgs<VoteMsg>(out, 2) == 0);
}

TEST_CASE("honest cluster builds one chain with one certificate per height") {
    Cluster c(kCfg);
    c.run(40 * kL);
    const auto& ref = c.nodes[0].chain();
    CHECK(ref.size() >= 35u);
    for (const auto& nd : c.nodes) {
        const auto& ch = nd.chain();
        const std::size_t common = std::min(ch.size(), ref.size());
        for (std::size_t j = 0; j < common; ++j) CHECK(ch[j].first->digest == ref[j].first->digest);
        CHECK(nd.gadget().blacklist().empty());
    }
    std::map<Height, std::set<Digest>> per_height;
    for (const auto& e : c.transcript) per_height[e.height].insert(e.digest);
    for (const auto& [h, ds] : per_height) CHECK(ds.size() == 1u);
}

TEST_CASE("finality votes ride in later blocks") {
    Cluster c(kCfg);
    c.run(30 * kL);
    std::set<ValidatorId> voters;
    const Digest first = c.nodes[0].chain().front().first->digest;
    for (const auto& [b, qc] : c.nodes[0].chain())
        for (const auto& v : b->finality_votes)
            if (v.target == first) voters.insert(v.voter);
    CHECK(voters.size() == 7u);
}

}

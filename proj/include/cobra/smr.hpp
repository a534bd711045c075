#pragma once

#include "cobra/core.hpp"
#include "cobra/gadget.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

namespace cobra {

using BlockPtr = std::shared_ptr<const Block>;

struct ProposalMsg {
    Round round = 0;
    BlockPtr block;
};

struct VoteMsg {
    ValidatorId voter = 0;
    Digest digest = 0;
    Height height = 0;
    Round round = 0;
    int stage = 1;
};

struct QcMsg {
    QuorumCertificate qc;
    BlockPtr block;
};

struct FinalityVoteMsg {
    FinalityVote vote;
};

// Fraud proof: two conflicting certificates at one height.
struct SlashMsg {
    QuorumCertificate a;
    QuorumCertificate b;
};

struct TxMsg {
    Transaction tx;
};

struct WithdrawMsg {
    ValidatorId owner = 0;
    Tick at = 0;
};

using Message = std::variant<ProposalMsg, VoteMsg, QcMsg, FinalityVoteMsg, SlashMsg, TxMsg, WithdrawMsg>;

struct DeliverEvent {
    Tick tick = 0;
    ValidatorId validator = 0;
    Height height = 0;
    Digest digest = 0;
    std::vector<ValidatorId> signers;
    bool appended = false;
    bool conflict = false;
};

constexpr int kBroadcast = -1;

struct Outgoing {
    int dst = kBroadcast;
    Message msg;
};

using Outbox = std::vector<Outgoing>;

struct Behavior {
    bool silent = false;   // neither votes, proposes nor relays
    bool vote_all = false; // signs every proposal it sees at both stages
    bool relay = true;
    // Censorship filter: vote only for blocks from accepted proposers.
    std::function<bool(ValidatorId)> accept_proposer;
};

inline Round round_of(Tick now, Tick round_ticks) { return now / round_ticks + 1; }
inline Tick round_start(Round r, Tick round_ticks) { return (r - 1) * round_ticks; }
inline ValidatorId leader_of(Round r, int n) { return static_cast<ValidatorId>(r % n); }

class SmrNode {
public:
    SmrNode(ValidatorId id, const SystemConfig& cfg, GadgetOptions gopts, Tick round_ticks);

    void on_message(int src, const Message& m, Tick now, Outbox& out);

    // Tallies this tick's votes, forms certificates, delivers in height order
    // and runs the gadget. Appends local deliveries to the transcript.
    void end_of_tick(Tick now, Outbox& out, std::vector<DeliverEvent>& transcript);

    // Next block extending the local tip, or the locked block at that height.
    BlockPtr build_block(Round r, std::vector<Transaction> extra_txs = {}) const;

    // Leader path: votes for its own proposal when the checks pass and
    // broadcasts it.
    void propose(const BlockPtr& b, Round r, Tick now, Outbox& out);

    ValidatorId id() const { return id_; }
    Behavior& behavior() { return behavior_; }
    const Behavior& behavior() const { return behavior_; }
    const Gadget& gadget() const { return gadget_; }
    Gadget& gadget() { return gadget_; }
    Height tip_height() const { return static_cast<Height>(chain_.size()); }
    Digest tip_digest() const { return chain_.empty() ? 0 : chain_.back().first->digest; }
    const std::vector<std::pair<BlockPtr, QuorumCertificate>>& chain() const { return chain_; }
    std::vector<std::pair<Block, QuorumCertificate>> chain_copy() const;
    const std::set<FinalityVote>& finality_pool() const { return fv_pool_; }
    const std::set<ValidatorId>& withdrawn() const { return withdrawn_; }
    bool knows_withdrawal(ValidatorId v) const { return withdrawn_.count(v) > 0; }
    Tick first_blacklist_tick() const { return first_blacklist_tick_; }
    std::size_t finalized_at_first_blacklist() const { return finalized_at_blacklist_; }
    const std::vector<QuorumCertificate>& seen_qcs() const { return seen_qc_list_; }
    BlockPtr block(Digest d) const;
    // Local strength i right after each ledger append, in ledger order.
    const std::vector<int>& strength_trace() const { return strength_trace_; }

private:
    using Key = std::tuple<Round, int, Digest>;

    void on_proposal(int src, const ProposalMsg& p, Tick now, Outbox& out);
    void on_vote(int src, const VoteMsg& v);
    void on_qc(const QcMsg& m, Tick now, Outbox& out);
    void on_slash(const SlashMsg& m, Tick now);
    void cast(Digest d, Height h, Round r, int stage, Outbox& out);
    bool proposal_ok(const Block& b, Round r, Tick now) const;
    void try_deliver(Tick now, Outbox& out, std::vector<DeliverEvent>& transcript);
    void note_blacklist(Tick now);
    void remember(const BlockPtr& b);
    void add_finality_vote(const FinalityVote& v);

    ValidatorId id_;
    SystemConfig cfg_;
    Tick round_ticks_;
    Gadget gadget_;
    Behavior behavior_;

    std::vector<std::pair<BlockPtr, QuorumCertificate>> chain_;
    std::unordered_map<Digest, BlockPtr> blocks_;
    std::map<Key, std::uint64_t> tallies_;
    std::vector<Key> dirty_;
    std::set<std::pair<Round, Digest>> qc1_done_;
    std::set<std::pair<Round, Digest>> qc2_done_;
    std::set<Round> voted1_;
    std::set<Round> voted2_;
    std::map<Height, std::pair<Digest, Round>> lock_; // digest, round of the certificate behind it
    std::unordered_set<std::uint64_t> seen_qc_;
    std::vector<QuorumCertificate> seen_qc_list_;
    std::unordered_set<Digest> relayed_;
    std::vector<int> strength_trace_;
    std::map<Height, std::vector<QcMsg>> pending_;
    std::map<std::pair<std::int64_t, std::int64_t>, Transaction> mempool_;
    std::map<std::int64_t, std::int64_t> last_nonce_;
    std::set<FinalityVote> fv_pool_;
    std::set<FinalityVote> fv_included_;
    std::set<FinalityVote> fv_pending_; // pool minus included
    std::set<ValidatorId> withdrawn_;
    Tick first_blacklist_tick_ = -1;
    std::size_t finalized_at_blacklist_ = 0;
};

} // namespace cobra

#include "cobra/smr.hpp"

#include <algorithm>

namespace cobra {

namespace {

std::uint64_t qc_key(const QuorumCertificate& qc) {
    std::uint64_t h = qc.block_digest * 0x9e3779b97f4a7c15ull;
    h ^= static_cast<std::uint64_t>(qc.round) + 0x632be59bd9b4e019ull + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(qc.stage) + (h << 6) + (h >> 2);
    h ^= signer_mask(qc.signers) + 0x85ebca6bull + (h << 6) + (h >> 2);
    return h;
}

} // namespace

SmrNode::SmrNode(ValidatorId id, const SystemConfig& cfg, GadgetOptions gopts, Tick round_ticks)
    : id_(id), cfg_(cfg), round_ticks_(round_ticks), gadget_(cfg, gopts) {}

BlockPtr SmrNode::block(Digest d) const {
    auto it = blocks_.find(d);
    return it == blocks_.end() ? nullptr : it->second;
}

void SmrNode::remember(const BlockPtr& b) {
    if (b) blocks_.emplace(b->digest, b);
}

std::vector<std::pair<Block, QuorumCertificate>> SmrNode::chain_copy() const {
    std::vector<std::pair<Block, QuorumCertificate>> out;
    out.reserve(chain_.size());
    for (const auto& [b, qc] : chain_) out.emplace_back(*b, qc);
    return out;
}

void SmrNode::on_message(int src, const Message& m, Tick now, Outbox& out) {
    std::visit(
        [&](const auto& msg) {
            using T = std::decay_t<decltype(msg)>;
            if constexpr (std::is_same_v<T, ProposalMsg>) {
                on_proposal(src, msg, now, out);
            } else if constexpr (std::is_same_v<T, VoteMsg>) {
                on_vote(src, msg);
            } else if constexpr (std::is_same_v<T, QcMsg>) {
                on_qc(msg, now, out);
            } else if constexpr (std::is_same_v<T, FinalityVoteMsg>) {
                add_finality_vote(msg.vote);
            } else if constexpr (std::is_same_v<T, SlashMsg>) {
                on_slash(msg, now);
            } else if constexpr (std::is_same_v<T, TxMsg>) {
                auto it = last_nonce_.find(msg.tx.sender);
                if (it == last_nonce_.end() || msg.tx.nonce > it->second)
                    mempool_.emplace(std::make_pair(msg.tx.sender, msg.tx.nonce), msg.tx);
            } else if constexpr (std::is_same_v<T, WithdrawMsg>) {
                withdrawn_.insert(msg.owner);
            }
        },
        m);
}

bool SmrNode::proposal_ok(const Block& b, Round r, Tick now) const {
    if (r != round_of(now, round_ticks_)) return false;
    if (voted1_.count(r)) return false;
    if (gadget_.blacklist().count(b.proposer) || withdrawn_.count(b.proposer)) return false;
    if (behavior_.accept_proposer && !behavior_.accept_proposer(b.proposer)) return false;
    if (b.height != tip_height() + 1 || b.parent_hash != tip_digest()) return false;
    try {
        if (compute_digest(b) != b.digest || block_value(b) != b.value) return false;
    } catch (const OverflowError&) {
        return false;
    }
    auto lk = lock_.find(b.height);
    if (lk != lock_.end() && lk->second.first != b.digest) return false;
    std::map<std::int64_t, std::int64_t> seen;
    for (const auto& tx : b.txs) {
        if (tx.amount < 0) return false;
        auto it = seen.find(tx.sender);
        std::int64_t floor_nonce;
        if (it != seen.end()) floor_nonce = it->second;
        else {
            auto ln = last_nonce_.find(tx.sender);
            floor_nonce = ln == last_nonce_.end() ? -1 : ln->second;
        }
        if (tx.nonce <= floor_nonce) return false;
        seen[tx.sender] = tx.nonce;
    }
    return true;
}

void SmrNode::on_proposal(int src, const ProposalMsg& p, Tick now, Outbox& out) {
    if (!p.block) return;
    remember(p.block);
    if (behavior_.silent) return;
    if (src != leader_of(p.round, cfg_.n)) return;
    if (behavior_.vote_all) {
        cast(p.block->digest, p.block->height, p.round, 1, out);
        return;
    }
    if (!proposal_ok(*p.block, p.round, now)) return;
    voted1_.insert(p.round);
    cast(p.block->digest, p.block->height, p.round, 1, out);
}

void SmrNode::cast(Digest d, Height h, Round r, int stage, Outbox& out) {
    VoteMsg v{id_, d, h, r, stage};
    on_vote(id_, v);
    out.push_back({kBroadcast, v});
}

void SmrNode::on_vote(int src, const VoteMsg& v) {
    if (v.voter != src || v.voter < 0 || v.voter >= cfg_.n) return;
    if (withdrawn_.count(v.voter)) return;
    const Key key{v.round, v.stage, v.digest};
    auto& mask = tallies_[key];
    const std::uint64_t bit = 1ull << v.voter;
    if (mask & bit) return;
    mask |= bit;
    dirty_.push_back(key);
}

void SmrNode::on_qc(const QcMsg& m, Tick now, Outbox& out) {
    (void)now;
    if (!m.block || m.qc.stage != 2) return;
    if (!qc_is_valid(m.qc, cfg_) || m.qc.block_digest != m.block->digest || m.qc.height != m.block->height) return;
    if (compute_digest(*m.block) != m.block->digest) return;
    const auto key = qc_key(m.qc);
    if (!seen_qc_.insert(key).second) return;
    seen_qc_list_.push_back(m.qc);
    remember(m.block);
    // One certificate per block is enough for every peer to deliver and to detect conflicts.
    if (!behavior_.silent && behavior_.relay && relayed_.insert(m.block->digest).second) out.push_back({kBroadcast, m});
    pending_[m.qc.height].push_back(m);
}

void SmrNode::on_slash(const SlashMsg& m, Tick now) {
    if (!qc_is_valid(m.a, cfg_) || !qc_is_valid(m.b, cfg_)) return;
    if (m.a.height != m.b.height || m.a.block_digest == m.b.block_digest) return;
    const auto a = distinct_signers(m.a.signers);
    const auto b = distinct_signers(m.b.signers);
    std::vector<ValidatorId> overlap;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(overlap));
    if (overlap.empty()) return;
    gadget_.slash(overlap);
    note_blacklist(now);
}

void SmrNode::note_blacklist(Tick now) {
    if (first_blacklist_tick_ < 0 && !gadget_.blacklist().empty()) {
        first_blacklist_tick_ = now;
        finalized_at_blacklist_ = gadget_.finalized().size();
    }
}

void SmrNode::try_deliver(Tick now, Outbox& out, std::vector<DeliverEvent>& transcript) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto it = pending_.begin(); it != pending_.end() && it->first <= tip_height();) {
            for (const auto& m : it->second) {
                const auto o = gadget_.on_deliver(m.qc, *m.block, it->first, now);
                transcript.push_back({now, id_, it->first, m.block->digest, m.qc.signers, o.appended, o.conflict});
                note_blacklist(now);
                if (o.conflict && !behavior_.silent) {
                    const auto& stored = gadget_.quorumstore(it->first).front();
                    out.push_back({kBroadcast, SlashMsg{stored, m.qc}});
                }
            }
            it = pending_.erase(it);
        }
        auto it = pending_.find(tip_height() + 1);
        if (it == pending_.end()) continue;
        auto& vec = it->second;
        auto pick = std::find_if(vec.begin(), vec.end(), [&](const QcMsg& m) { return m.block->parent_hash == tip_digest(); });
        if (pick == vec.end()) continue;
        const QcMsg m = *pick;
        vec.erase(pick);
        if (vec.empty()) pending_.erase(it);
        const auto o = gadget_.on_deliver(m.qc, *m.block, m.qc.height, now);
        strength_trace_.push_back(gadget_.strength(now).i);
        transcript.push_back({now, id_, m.qc.height, m.block->digest, m.qc.signers, o.appended, o.conflict});
        chain_.emplace_back(m.block, m.qc);
        for (const auto& tx : m.block->txs) {
            auto& ln = last_nonce_[tx.sender];
            ln = std::max(ln, tx.nonce);
            mempool_.erase({tx.sender, tx.nonce});
        }
        for (const auto& v : m.block->finality_votes) {
            fv_included_.insert(v);
            fv_pending_.erase(v);
        }
        changed = true;
    }
    // Drop mempool entries overtaken by ledger nonces.
    for (auto it = mempool_.begin(); it != mempool_.end();) {
        auto ln = last_nonce_.find(it->first.first);
        if (ln != last_nonce_.end() && it->first.second <= ln->second) it = mempool_.erase(it);
        else ++it;
    }
}

void SmrNode::end_of_tick(Tick now, Outbox& out, std::vector<DeliverEvent>& transcript) {
    std::vector<Key> retry;
    bool progress = true;
    while (progress) {
        progress = false;
        std::vector<Key> keys;
        keys.swap(dirty_);
        std::sort(keys.begin(), keys.end());
        keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
        for (const auto& key : keys) {
            const auto [r, stage, d] = key;
            const std::uint64_t mask = tallies_[key];
            if (popcount(mask) < cfg_.q) continue;
            auto blk = block(d);
            if (!blk) {
                retry.push_back(key);
                continue;
            }
            if (stage == 1) {
                if (!qc1_done_.insert({r, d}).second) continue;
                progress = true;
                if (behavior_.silent) continue;
                if (behavior_.vote_all) {
                    cast(d, blk->height, r, 2, out);
                    continue;
                }
                auto lk = lock_.find(blk->height);
                // A stage-1 certificate from a later round releases an older lock.
                if (lk != lock_.end() && lk->second.first != d && lk->second.second < r) {
                    lk->second = {d, r};
                }
                const bool lock_ok = lk == lock_.end() || lk->second.first == d;
                // Stage-2 votes only count in their own round; a late certificate
                // must not lock a validator that already voted in a later round.
                const bool current = r == round_of(now, round_ticks_);
                if (current && blk->height == tip_height() + 1 && blk->parent_hash == tip_digest() && lock_ok &&
                    !voted2_.count(r) &&
                    !withdrawn_.count(blk->proposer) && !gadget_.blacklist().count(blk->proposer)) {
                    voted2_.insert(r);
                    lock_[blk->height] = {d, r};
                    cast(d, blk->height, r, 2, out);
                }
            } else {
                if (!qc2_done_.insert({r, d}).second) continue;
                progress = true;
                QuorumCertificate qc{d, blk->height, r, 2, mask_ids(mask)};
                on_qc(QcMsg{qc, blk}, now, out);
            }
        }
        const std::size_t before = chain_.size();
        try_deliver(now, out, transcript);
        if (chain_.size() != before) progress = true;
    }
    for (const auto& k : retry) dirty_.push_back(k);

    gadget_.finalize_blocks(now);
    for (Digest d : gadget_.take_fresh()) {
        FinalityVote v{id_, d};
        add_finality_vote(v);
        if (!behavior_.silent) out.push_back({kBroadcast, FinalityVoteMsg{v}});
    }
    note_blacklist(now);

    // Old tallies can no longer change any decision.
    const Round cur = round_of(now, round_ticks_);
    if (cur > 64 && (now % (round_ticks_ * 16)) == 0) {
        const Round cutoff = cur - 48;
        for (auto it = tallies_.begin(); it != tallies_.end() && std::get<0>(it->first) < cutoff;) it = tallies_.erase(it);
    }
}

void SmrNode::add_finality_vote(const FinalityVote& v) {
    if (fv_pool_.insert(v).second && !fv_included_.count(v)) fv_pending_.insert(v);
}

BlockPtr SmrNode::build_block(Round r, std::vector<Transaction> extra_txs) const {
    const Height h = tip_height() + 1;
    auto lk = lock_.find(h);
    if (lk != lock_.end()) {
        auto b = block(lk->second.first);
        if (b && b->parent_hash == tip_digest()) return b;
    }
    Block b;
    b.height = h;
    b.parent_hash = tip_digest();
    b.proposer = id_;
    b.round = r;
    for (const auto& [key, tx] : mempool_) {
        auto ln = last_nonce_.find(key.first);
        if (ln == last_nonce_.end() || key.second > ln->second) b.txs.push_back(tx);
    }
    for (auto& tx : extra_txs) b.txs.push_back(std::move(tx));
    b.finality_votes.assign(fv_pending_.begin(), fv_pending_.end());
    return std::make_shared<const Block>(seal(std::move(b)));
}

void SmrNode::propose(const BlockPtr& b, Round r, Tick now, Outbox& out) {
    remember(b);
    on_proposal(id_, ProposalMsg{r, b}, now, out);
    out.push_back({kBroadcast, ProposalMsg{r, b}});
}

} // namespace cobra

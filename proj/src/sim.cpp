#include "cobra/sim.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

namespace cobra {

const char* byz_behavior_name(ByzBehavior b) {
    switch (b) {
    case ByzBehavior::Honest: return "honest";
    case ByzBehavior::Silent: return "silent";
    case ByzBehavior::VoteAll: return "vote_all";
    case ByzBehavior::NoRelay: return "no_relay";
    case ByzBehavior::Equivocate: return "equivocate";
    case ByzBehavior::Delay: return "delay";
    }
    return "?";
}

std::optional<ByzBehavior> parse_byz_behavior(const std::string& s) {
    for (auto b : {ByzBehavior::Honest, ByzBehavior::Silent, ByzBehavior::VoteAll, ByzBehavior::NoRelay,
                   ByzBehavior::Equivocate, ByzBehavior::Delay})
        if (s == byz_behavior_name(b)) return b;
    return std::nullopt;
}

const char* attack_name(AttackSpec::Kind k) {
    switch (k) {
    case AttackSpec::Kind::None: return "none";
    case AttackSpec::Kind::DoubleSpend: return "double_spend";
    case AttackSpec::Kind::Censorship: return "censorship";
    case AttackSpec::Kind::RewardRecycling: return "reward_recycling";
    }
    return "?";
}

const std::vector<std::string>& known_checks() {
    static const std::vector<std::string> names{
        "no_conflicting_finalization", "old_finality_safety", "no_conflicting_accepted_proofs",
        "conflicting_proofs_accepted", "one_qc_per_height", "delivery_bound", "halt_on_conflict",
        "recent_volume_cap", "slashing_soundness", "non_equivocators_complete", "slashing_completeness",
        "slash_applied", "conservation", "censorship_guard", "censored_windows_unpaid", "correct_proposer_by_window",
        "client_safety", "client_liveness", "detection_latency", "qc_overlap", "realized_within_projection",
        "realized_equals_stake", "net_zero_utility", "positive_attack_utility", "attacker_withdrew", "no_fork",
        "rewards_paid", "reward_formula", "recycling_within_stake", "recycling_closed_form", "recent_above_stake"};
    return names;
}

namespace {

constexpr std::int64_t kAttackNonce = std::int64_t(1) << 40;
constexpr std::int64_t kClientBase = 100000;
constexpr std::int64_t kDummyBase = 900000;

std::vector<std::string> default_checks() {
    return {"no_conflicting_finalization", "old_finality_safety", "one_qc_per_height", "delivery_bound",
            "halt_on_conflict", "recent_volume_cap", "slashing_soundness", "slashing_completeness", "conservation",
            "censorship_guard", "client_safety"};
}

struct Branch {
    std::vector<ValidatorId> members;
    Digest tip = 0;
    Height height = 0;
    std::vector<Digest> built;
    std::set<FinalityVote> included;
    bool paid = false;
};

struct ClientTxRecord {
    Tick at = 0;
    Transaction tx;
};

struct Proof {
    bool accepted = false;
    Digest target = 0;
};

class World {
public:
    explicit World(const Scenario& s)
        : sc_(s), cfg_(s.config), L_(s.round_ticks), roles_(default_roles(cfg_)), rng_(cfg_.seed ^ 0x5deece66dull) {}

    RunResult run();

private:
    bool is_coalition(ValidatorId v) const { return coalition_.count(v) > 0; }
    bool is_correct(ValidatorId v) const { return std::binary_search(correct_.begin(), correct_.end(), v); }

    void setup();
    void send(int src, int dst, const Message& m, Tick now);
    void flush(int src, Outbox& out, Tick now);
    void deliveries(Tick now);
    void inject_client_txs(Tick now);
    void round_start(Tick now);
    void propose_normal(Round r, Tick now);
    void controller_round(Round r, Tick now);
    void censorship_window(int k, Tick now);
    void withdrawals(Tick now);
    void settle(Tick now);
    std::vector<std::set<ValidatorId>> correct_views() const;
    bool blacklisted_by_any_correct(ValidatorId v) const;
    void account_attack(RunResult& res);
    void run_checks(RunResult& res);

    Scenario sc_;
    SystemConfig cfg_;
    Tick L_;
    std::vector<Role> roles_;
    std::mt19937_64 rng_;
    std::unique_ptr<Network<Message>> net_;
    std::vector<SmrNode> nodes_;
    std::map<ValidatorId, StakeAccount> book_;
    std::vector<ValidatorId> correct_;
    std::set<ValidatorId> coalition_;
    std::vector<DeliverEvent> transcript_;

    // double spend
    std::optional<ForkScenario> fork_;
    std::optional<Decision> decision_;
    bool attack_on_ = false;
    Round attack_start_ = 0;
    Tick attack_end_ = 0;
    std::vector<Branch> branches_;
    std::vector<AttackTx> attack_txs_;
    std::vector<ValidatorId> joined_;

    // accounting
    Coins initial_total_ = 0;
    Coins minted_ = 0;
    Coins burned_ = 0;
    std::map<ValidatorId, Coins> rewards_;
    std::map<ValidatorId, Coins> bribes_;
    std::vector<WindowRow> windows_;
    int next_window_ = 0;
    Coins bribe_ = 0;
    Coins bribe_pool_left_ = 0;
    std::multimap<Tick, ValidatorId> withdraw_requests_;
    std::multimap<Tick, ValidatorId> withdraw_due_;
    std::vector<ClientTxRecord> client_txs_;
    std::vector<RecyclingRow> recycling_;
};

void World::setup() {
    const int n = cfg_.n;
    for (int v = 0; v < n; ++v) {
        Coins liquid = roles_[v] == Role::Byzantine ? 0 : cfg_.stake_d;
        if (roles_[v] == Role::Rational && sc_.attack.liquid_per_rational >= 0) liquid = sc_.attack.liquid_per_rational;
        book_[v] = genesis_account(v, roles_[v], cfg_.stake_d, liquid);
    }

    std::set<ValidatorId> deviating;
    for (int v = 0; v < n; ++v)
        if (roles_[v] == Role::Byzantine) deviating.insert(v);

    AsynchronyPlan plan = sc_.plan;
    const auto& atk = sc_.attack;
    if (atk.kind == AttackSpec::Kind::DoubleSpend) {
        const Coins liquid = atk.liquid_per_rational >= 0 ? atk.liquid_per_rational : cfg_.stake_d;
        const bool sync = sc_.mode.kind == NetMode::Kind::Synchronous;
        fork_ = plan_double_spend(cfg_, liquid, sc_.rule);
        if (fork_) {
            decision_ = rational_decide(*fork_, cfg_, sync, atk.force_join);
            if (*decision_ == Decision::Abstain) fork_ = plan_double_spend(cfg_, liquid, sc_.rule, std::vector<ValidatorId>{});
        }
        if (fork_) {
            attack_on_ = true;
            joined_ = fork_->rationals;
            coalition_.insert(fork_->coalition.begin(), fork_->coalition.end());
            deviating.insert(fork_->coalition.begin(), fork_->coalition.end());
            attack_start_ = atk.start_round;
            if (attack_start_ <= 0) {
                attack_start_ = n;
                while (!is_coalition(leader_of(attack_start_, n))) ++attack_start_;
            }
            if (sc_.auto_partition || plan.partition.empty()) plan.partition = fork_->partitions;
            const Tick t0 = cobra::round_start(attack_start_, L_);
            if (sync && plan.windows.empty()) plan.windows.push_back({t0, t0 + cfg_.delta_gst});
            attack_end_ = atk.end_tick;
            if (attack_end_ < 0) attack_end_ = sync ? plan.windows.front().end : sc_.mode.gst;
            for (std::size_t g = 0; g < fork_->partitions.size(); ++g) {
                Branch b;
                b.members = fork_->partitions[g];
                branches_.push_back(b);
            }
            if (atk.withdraw_tick >= 0)
                for (auto v : fork_->coalition) withdraw_requests_.emplace(atk.withdraw_tick, v);
        }
    } else if (atk.kind == AttackSpec::Kind::Censorship) {
        for (int v = 0; v < n; ++v)
            if (roles_[v] != Role::Honest) coalition_.insert(v);
        if (atk.funded_windows > 0)
            for (int v = 0; v < n; ++v)
                if (roles_[v] == Role::Rational) deviating.insert(v);
        // Expected forgone reward of one rational over one window.
        Coins forgone = 0;
        if (sc_.rewards.enabled && sc_.client_txs.every > 0) {
            const Tick span = static_cast<Tick>(n) * L_;
            forgone = sc_.rewards.fee * (span / sc_.client_txs.every) / n;
        }
        bribe_ = atk.bribe_per_rational >= 0 ? atk.bribe_per_rational : std::max<Coins>(1, forgone);
        const Coins pool = static_cast<Coins>(atk.funded_windows) * cfg_.k * bribe_;
        bribe_pool_left_ = pool;
        // Earlier rewards, already unlocked at genesis.
        if (cfg_.f_star > 0 && pool > 0) {
            for (int v = 0; v < cfg_.f_star; ++v) {
                Coins part = pool / cfg_.f_star + (v < pool % cfg_.f_star ? 1 : 0);
                if (part > 0) book_[v].locked_rewards.push_back({part, 0});
            }
        }
    } else if (atk.kind == AttackSpec::Kind::RewardRecycling) {
        recycling_.push_back({atk.reward_lock, attack_reward_recycling(cfg_, atk.rounds_budget, atk.reward_per_round,
                                                                       atk.reward_lock, cfg_.stake_d)});
    }

    for (int v = 0; v < n; ++v)
        if (!deviating.count(v)) correct_.push_back(v);

    for (const auto& [v, a] : book_) initial_total_ += a.staked + a.liquid + a.locked_total();

    net_ = std::make_unique<Network<Message>>(sc_.mode, plan, cfg_.seed, sc_.jitter);
    const GadgetOptions go{sc_.rule, sc_.freeze_strength};
    nodes_.reserve(n);
    for (int v = 0; v < n; ++v) nodes_.emplace_back(v, cfg_, go, L_);

    for (const auto& [v, b] : sc_.byzantine) {
        auto& beh = nodes_[v].behavior();
        switch (b) {
        case ByzBehavior::Silent: beh.silent = true; break;
        case ByzBehavior::VoteAll:
        case ByzBehavior::Equivocate: beh.vote_all = true; break;
        case ByzBehavior::NoRelay: beh.relay = false; break;
        default: break;
        }
    }
    if (atk.kind == AttackSpec::Kind::Censorship) {
        auto only_coalition = [this](ValidatorId p) { return is_coalition(p); };
        for (int v = 0; v < cfg_.f_star; ++v) nodes_[v].behavior().accept_proposer = only_coalition;
    }
    for (const auto& w : sc_.withdrawals) withdraw_requests_.emplace(w.at, w.id);

    if (sc_.client_txs.every > 0)
        for (int j = 0; j < sc_.client_txs.count; ++j) {
            Transaction tx{kClientBase + j, 2 * kClientBase + j, sc_.client_txs.amount, TxKind::Payment, 0};
            client_txs_.push_back({sc_.client_txs.start + j * sc_.client_txs.every, tx});
        }
}

void World::send(int src, int dst, const Message& m, Tick now) {
    auto it = sc_.byzantine.find(src);
    if (sc_.byz_random_delay && it != sc_.byzantine.end() && src < cfg_.n && roles_[src] == Role::Byzantine &&
        it->second == ByzBehavior::Delay) {
        std::uniform_int_distribution<Tick> d(1, cfg_.delta_star);
        net_->send_at(src, dst, m, now, now + d(rng_));
        return;
    }
    net_->send(src, dst, m, now);
}

void World::flush(int src, Outbox& out, Tick now) {
    for (auto& o : out) {
        if (o.dst == kBroadcast) {
            for (int j = 0; j < cfg_.n; ++j)
                if (j != src) send(src, j, o.msg, now);
        } else {
            send(src, o.dst, o.msg, now);
        }
    }
    out.clear();
}

void World::deliveries(Tick now) {
    Outbox out;
    for (auto& env : net_->step(now)) {
        if (env.dst < 0 || env.dst >= cfg_.n) continue; // clients receive nothing
        nodes_[env.dst].on_message(env.src, env.payload, now, out);
        flush(env.dst, out, now);
    }
}

void World::inject_client_txs(Tick now) {
    for (const auto& c : client_txs_) {
        if (c.at != now) continue;
        for (int v = 0; v < cfg_.n; ++v) net_->send(cfg_.n, v, TxMsg{c.tx}, now);
    }
}

void World::propose_normal(Round r, Tick now) {
    const ValidatorId leader = leader_of(r, cfg_.n);
    auto& node = nodes_[leader];
    if (node.behavior().silent) return;
    if (book_[leader].withdrawal.state != Withdrawal::State::None) return;
    Outbox out;
    auto bz = sc_.byzantine.find(leader);
    if (bz != sc_.byzantine.end() && bz->second == ByzBehavior::Equivocate) {
        auto b1 = node.build_block(r);
        auto b2 = node.build_block(r, {Transaction{kDummyBase + leader, kDummyBase, 0, TxKind::Payment, r}});
        node.on_message(leader, ProposalMsg{r, b1}, now, out);
        node.on_message(leader, ProposalMsg{r, b2}, now, out);
        flush(leader, out, now);
        std::uniform_int_distribution<int> coin(0, 1);
        for (int j = 0; j < cfg_.n; ++j)
            if (j != leader) send(leader, j, ProposalMsg{r, coin(rng_) ? b1 : b2}, now);
        return;
    }
    node.propose(node.build_block(r), r, now, out);
    flush(leader, out, now);
}

void World::controller_round(Round r, Tick now) {
    const ValidatorId leader = leader_of(r, cfg_.n);
    const int branch_count = static_cast<int>(branches_.size());
    for (int g = 0; g < branch_count; ++g) {
        auto& br = branches_[g];
        Block b;
        b.height = br.height + 1;
        b.parent_hash = br.tip;
        b.proposer = leader;
        b.round = r;
        if (!br.paid) {
            for (auto rat : joined_) {
                Transaction tx{rat, 1000 + rat * 16 + g, fork_->spend_per_rational_per_branch, TxKind::Payment, kAttackNonce};
                b.txs.push_back(tx);
                attack_txs_.push_back({rat, g, tx, false, 0});
            }
            br.paid = true;
        }
        std::set<FinalityVote> votes;
        for (auto c : br.members)
            for (const auto& v : nodes_[c].finality_pool()) votes.insert(v);
        for (auto d : br.built)
            for (auto m : coalition_) votes.insert(FinalityVote{m, d});
        for (const auto& v : votes)
            if (br.included.insert(v).second) b.finality_votes.push_back(v);
        auto bp = std::make_shared<const Block>(seal(std::move(b)));
        br.tip = bp->digest;
        br.height = bp->height;
        br.built.push_back(bp->digest);
        for (auto c : br.members) {
            net_->send_at(leader, c, ProposalMsg{r, bp}, now, now + 1);
            for (auto m : coalition_)
                for (int stage = 1; stage <= 2; ++stage)
                    net_->send_at(m, c, VoteMsg{m, bp->digest, bp->height, r, stage}, now, now + 1);
        }
    }
}

void World::censorship_window(int k, Tick now) {
    const auto& atk = sc_.attack;
    // The bribe budget is the genesis pool; rewards earned later are not reinvested.
    Coins pool = 0;
    for (int v = 0; v < cfg_.f_star; ++v) pool += spendable(book_[v], now);
    pool = std::min(pool, bribe_pool_left_);
    std::vector<ValidatorId> rats;
    for (int v = 0; v < cfg_.n; ++v)
        if (roles_[v] == Role::Rational) rats.push_back(v);
    const Coins need = bribe_ * static_cast<Coins>(rats.size());
    const bool pay = !rats.empty() && bribe_ > 0 && pool >= need && atk.funded_windows > 0;
    if (pay) {
        for (auto r : rats) {
            Coins left = bribe_;
            for (int v = 0; v < cfg_.f_star && left > 0; ++v) {
                const Coins take = std::min(left, spendable(book_[v], now));
                if (take > 0) transfer_spendable(book_[v], book_[r], take, now);
                left -= take;
            }
            bribes_[r] += bribe_;
        }
        bribe_pool_left_ -= need;
    }
    for (auto r : rats) {
        if (pay) nodes_[r].behavior().accept_proposer = [this](ValidatorId p) { return is_coalition(p); };
        else nodes_[r].behavior().accept_proposer = nullptr;
    }
    while (static_cast<int>(windows_.size()) <= k) {
        WindowRow w;
        w.k = static_cast<int>(windows_.size());
        windows_.push_back(w);
    }
    windows_[k].bribed = pay;
}

void World::round_start(Tick now) {
    const Round r = round_of(now, L_);
    if (sc_.attack.kind == AttackSpec::Kind::Censorship && (r - 1) % cfg_.n == 0)
        censorship_window(static_cast<int>((r - 1) / cfg_.n), now);
    if (attack_on_ && r == attack_start_) {
        for (auto& br : branches_) {
            const auto& lead = nodes_[br.members.front()];
            br.tip = lead.tip_digest();
            br.height = lead.tip_height();
        }
        for (auto v : coalition_) nodes_[v].behavior().silent = true;
    }
    const ValidatorId leader = leader_of(r, cfg_.n);
    if (attack_on_ && r >= attack_start_ && is_coalition(leader)) {
        if (now < attack_end_) controller_round(r, now);
        return;
    }
    propose_normal(r, now);
}

std::vector<std::set<ValidatorId>> World::correct_views() const {
    std::vector<std::set<ValidatorId>> views;
    for (auto c : correct_) views.push_back(nodes_[c].gadget().blacklist());
    return views;
}

bool World::blacklisted_by_any_correct(ValidatorId v) const {
    for (auto c : correct_)
        if (nodes_[c].gadget().blacklist().count(v)) return true;
    return false;
}

void World::withdrawals(Tick now) {
    auto [lo, hi] = withdraw_requests_.equal_range(now);
    for (auto it = lo; it != hi; ++it) {
        const ValidatorId v = it->second;
        try {
            book_[v] = request_withdrawal(book_[v], now, blacklisted_by_any_correct(v));
        } catch (const StakeError&) {
            continue;
        }
        for (int j = 0; j < cfg_.n; ++j)
            if (j != v) net_->send(v, j, WithdrawMsg{v, now}, now);
        nodes_[v].behavior().silent = true;
        withdraw_due_.emplace(now + cfg_.delta_w, v);
    }
    auto [dlo, dhi] = withdraw_due_.equal_range(now);
    for (auto it = dlo; it != dhi; ++it) {
        const ValidatorId v = it->second;
        book_[v] = complete_withdrawal(book_[v], now, cfg_.delta_w, correct_views());
        if (book_[v].withdrawal.state == Withdrawal::State::Rejected) burned_ += cfg_.stake_d;
    }
}

void World::settle(Tick now) {
    const Round cur = round_of(now, L_);
    const int lag = sc_.rewards.settle_lag_rounds >= 0 ? sc_.rewards.settle_lag_rounds : cfg_.n;
    while (true) {
        RewardWindow w = make_window(next_window_, cfg_.n);
        if (cur <= w.last_round + lag) return;
        const auto& chain = nodes_[correct_.front()].chain();
        std::unordered_map<Digest, std::set<ValidatorId>> votes;
        for (const auto& [b, qc] : chain)
            for (const auto& v : b->finality_votes)
                if (v.voter >= 0 && v.voter < cfg_.n) votes[v.target].insert(v.voter);
        for (const auto& [b, qc] : chain) {
            if (b->round < w.first_round || b->round > w.last_round) continue;
            if (static_cast<int>(votes[b->digest].size()) < cfg_.q) continue;
            w.unique_proposers.insert(b->proposer);
            for (const auto& tx : b->txs)
                if (tx.kind == TxKind::Payment && tx.amount > 0) w.fees_total += sc_.rewards.fee;
        }
        const auto payouts = settle_window(w, cfg_.n, cfg_.f, cur);
        const Tick lock = sc_.rewards.lock ? cfg_.delta_star : 0;
        const Coins paid = credit_rewards(book_, payouts, now, lock);
        minted_ += paid;
        for (const auto& [v, amt] : payouts) rewards_[v] += amt.numerator() / amt.denominator();
        while (static_cast<int>(windows_.size()) <= next_window_) {
            WindowRow row;
            row.k = static_cast<int>(windows_.size());
            windows_.push_back(row);
        }
        auto& row = windows_[next_window_];
        row.k = next_window_;
        row.first_round = w.first_round;
        row.last_round = w.last_round;
        row.proposers.assign(w.unique_proposers.begin(), w.unique_proposers.end());
        row.fees = w.fees_total;
        row.paid = paid;
        row.correct_proposer = std::any_of(row.proposers.begin(), row.proposers.end(),
                                           [this](ValidatorId p) { return is_correct(p); });
        ++next_window_;
    }
}

RunResult World::run() {
    setup();
    const bool rewards = sc_.rewards.enabled;
    for (Tick now = 0; now < sc_.run_ticks; ++now) {
        deliveries(now);
        inject_client_txs(now);
        if (now % L_ == 0) round_start(now);
        Outbox out;
        for (int v = 0; v < cfg_.n; ++v) {
            nodes_[v].end_of_tick(now, out, transcript_);
            flush(v, out, now);
        }
        withdrawals(now);
        if (rewards && now % L_ == 0) settle(now);
    }

    RunResult res;
    res.scenario = sc_;
    res.roles = roles_;
    res.correct = correct_;
    for (const auto& nd : nodes_) {
        res.finalization_logs.push_back(nd.gadget().log());
        res.finalized.push_back(nd.gadget().finalized());
        res.blacklists.push_back(nd.gadget().blacklist());
    }
    for (const auto& [v, a] : book_) res.accounts.push_back(a);
    res.transcript = std::move(transcript_);
    res.windows = windows_;
    res.fork = fork_;
    res.decision = decision_;
    res.recycling = recycling_;
    res.max_delay = net_->max_delay();
    res.messages = net_->sent();
    const auto& obs = nodes_[correct_.front()];
    res.observer_strength = obs.strength_trace();
    res.observer_chain = obs.chain_copy();
    for (const auto& e : obs.gadget().ledger()) res.observer_recv.push_back(e.recv_time);
    account_attack(res);
    run_checks(res);
    return res;
}

void World::account_attack(RunResult& res) {
    std::map<ValidatorId, std::map<int, Coins>> accepted;
    std::vector<std::vector<std::pair<Block, QuorumCertificate>>> chains;
    for (const auto& br : branches_) chains.push_back(nodes_[br.members.front()].chain_copy());
    for (auto& t : attack_txs_) {
        const auto& chain = chains[t.branch];
        auto p = build_proof(chain, t.tx, cfg_);
        if (p && verify_proof(*p, cfg_) == ProofVerdict::Accept) {
            t.accepted = true;
            t.block = p->block_digest;
            accepted[t.rational][t.branch] += t.tx.amount;
        }
    }
    res.attack_txs = attack_txs_;
    std::vector<RationalOutcome> outcomes;
    for (int v = 0; v < cfg_.n; ++v) {
        if (roles_[v] != Role::Rational) continue;
        RationalOutcome o;
        o.id = v;
        o.forked = std::find(joined_.begin(), joined_.end(), v) != joined_.end();
        Coins sum = 0, mx = 0;
        for (const auto& [g, a] : accepted[v]) {
            sum += a;
            mx = std::max(mx, a);
        }
        o.double_spent = sum - mx;
        res.double_spent[v] = o.double_spent;
        bool all = !correct_.empty();
        for (auto c : correct_)
            if (!nodes_[c].gadget().blacklist().count(v)) all = false;
        // Stake already withdrawn cannot be taken.
        const auto st = book_[v].withdrawal.state;
        o.slashed = st == Withdrawal::State::Rejected || (all && st != Withdrawal::State::Completed);
        o.rewards = rewards_[v];
        o.bribes = bribes_[v];
        outcomes.push_back(o);
    }
    res.utilities = account_utilities(outcomes, cfg_.stake_d);
}

void World::run_checks(RunResult& res) {
    const int n = cfg_.n;
    const bool sync = sc_.mode.kind == NetMode::Kind::Synchronous;
    const Tick dstar = cfg_.delta_star;
    std::map<std::string, CheckResult> out;
    auto put = [&](const std::string& name, bool ok, std::string detail = {}) {
        out[name] = CheckResult{name, ok, std::move(detail)};
    };

    // Block registry for ancestry and heights.
    std::unordered_map<Digest, std::pair<Digest, Height>> reg;
    for (const auto& nd : nodes_)
        for (const auto& [b, qc] : nd.chain()) reg.emplace(b->digest, std::make_pair(b->parent_hash, b->height));
    auto ancestor_at = [&](Digest d, Height h) -> std::optional<Digest> {
        while (true) {
            auto it = reg.find(d);
            if (it == reg.end()) return std::nullopt;
            if (it->second.second == h) return d;
            if (it->second.second < h) return std::nullopt;
            d = it->second.first;
        }
    };
    auto conflicting = [&](Digest a, Digest b) {
        if (a == b) return false;
        auto ia = reg.find(a), ib = reg.find(b);
        if (ia == reg.end() || ib == reg.end()) return false;
        const Height ha = ia->second.second, hb = ib->second.second;
        if (ha <= hb) return ancestor_at(b, ha) != a;
        return ancestor_at(a, hb) != b;
    };

    // Finalization.
    std::map<Height, std::set<Digest>> fin_at;
    std::set<std::pair<Height, Digest>> old_fin;
    for (auto c : correct_)
        for (const auto& rec : res.finalization_logs[c]) {
            fin_at[rec.height].insert(rec.digest);
            if (rec.old_branch) old_fin.insert({rec.height, rec.digest});
        }
    {
        int bad = 0;
        for (const auto& [h, ds] : fin_at) bad += ds.size() > 1;
        put("no_conflicting_finalization", bad == 0, std::to_string(bad) + " heights with conflicting finalizations");
        int bad_old = 0;
        for (const auto& [h, d] : old_fin) bad_old += fin_at[h].size() > 1;
        put("old_finality_safety", bad_old == 0, std::to_string(bad_old) + " old-finalized blocks with conflicts");
    }

    // Certificates seen by correct validators.
    std::map<Height, std::map<Digest, std::vector<QuorumCertificate>>> qcs;
    for (auto c : correct_)
        for (const auto& qc : nodes_[c].seen_qcs()) qcs[qc.height][qc.block_digest].push_back(qc);
    std::set<ValidatorId> double_signers;
    int min_overlap = n;
    int conflict_pairs = 0;
    {
        int multi = 0;
        for (const auto& [h, byd] : qcs) {
            if (byd.size() > 1) ++multi;
            for (auto a = byd.begin(); a != byd.end(); ++a)
                for (auto b = std::next(a); b != byd.end(); ++b)
                    for (const auto& qa : a->second)
                        for (const auto& qb : b->second) {
                            auto sa = distinct_signers(qa.signers), sb = distinct_signers(qb.signers);
                            std::vector<ValidatorId> x;
                            std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(x));
                            double_signers.insert(x.begin(), x.end());
                            min_overlap = std::min(min_overlap, static_cast<int>(x.size()));
                            ++conflict_pairs;
                        }
        }
        put("one_qc_per_height", multi == 0, std::to_string(multi) + " heights with conflicting certificates");
        put("qc_overlap", conflict_pairs == 0 || min_overlap >= cfg_.f + 1,
            std::to_string(conflict_pairs) + " conflicting pairs, min overlap " +
                std::to_string(conflict_pairs ? min_overlap : 0));
    }

    put("delivery_bound", !sync || res.max_delay <= dstar,
        "max delay " + std::to_string(res.max_delay) + (sync ? " vs delta_star " + std::to_string(dstar) : " (partial synchrony)"));

    {
        int bad = 0;
        for (auto c : correct_) {
            const auto& nd = nodes_[c];
            if (nd.first_blacklist_tick() >= 0 && nd.gadget().finalized().size() != nd.finalized_at_first_blacklist()) ++bad;
        }
        put("halt_on_conflict", bad == 0, std::to_string(bad) + " validators finalized after blacklisting");
    }
    {
        int bad = 0;
        for (auto c : correct_)
            for (const auto& rec : res.finalization_logs[c])
                if (!rec.old_branch && !fits(rec.cap_in_force, rec.suffixvalue)) ++bad;
        put("recent_volume_cap", bad == 0, std::to_string(bad) + " recent finalizations above the cap");
        Coins top = 0;
        for (auto c : correct_)
            for (const auto& rec : res.finalization_logs[c])
                if (!rec.old_branch) top = std::max(top, rec.suffixvalue);
        put("recent_above_stake", top > cfg_.stake_d, "largest recent suffix value " + std::to_string(top));
    }

    // Stake.
    {
        int bad = 0;
        std::string who;
        for (auto v : double_signers)
            if (book_[v].withdrawal.state == Withdrawal::State::Completed) {
                ++bad;
                who += " " + std::to_string(v);
            }
        put("slashing_soundness", bad == 0,
            std::to_string(double_signers.size()) + " double-signers, completed:" + (who.empty() ? " none" : who));
        int missing = 0;
        for (const auto& [v, a] : book_) {
            if (double_signers.count(v) || a.withdrawal.state == Withdrawal::State::None) continue;
            if (a.withdrawal.state != Withdrawal::State::Completed) ++missing;
        }
        put("non_equivocators_complete", missing == 0, std::to_string(missing) + " clean requesters not completed");
        int false_slash = 0;
        for (auto c : correct_)
            for (auto v : nodes_[c].gadget().blacklist())
                if (!double_signers.count(v)) ++false_slash;
        put("slashing_completeness", false_slash == 0, std::to_string(false_slash) + " blacklist entries without double-signing");
        bool applied = !joined_.empty();
        for (auto v : joined_) {
            bool all = true;
            for (auto c : correct_)
                if (!nodes_[c].gadget().blacklist().count(v)) all = false;
            if (!all && book_[v].withdrawal.state != Withdrawal::State::Rejected) applied = false;
        }
        put("slash_applied", applied, "every joined rational blacklisted by all correct validators or rejected");
    }
    {
        Coins total = 0;
        for (const auto& [v, a] : book_) total += a.staked + a.liquid + a.locked_total();
        const Coins expect = initial_total_ + minted_ - burned_;
        put("conservation", total == expect,
            "total " + std::to_string(total) + " expected " + std::to_string(expect) + " (minted " + std::to_string(minted_) +
                ", burned " + std::to_string(burned_) + ")");
    }
    {
        int bad = 0;
        for (const auto& w : windows_)
            if (static_cast<int>(w.proposers.size()) < n - cfg_.f && w.paid != 0) ++bad;
        put("censorship_guard", bad == 0, std::to_string(bad) + " under-participated windows paid");
        int bribed = 0, bad_bribed = 0;
        for (const auto& w : windows_)
            if (w.bribed) {
                ++bribed;
                if (w.paid != 0) ++bad_bribed;
            }
        put("censored_windows_unpaid", bad_bribed == 0 && bribed == sc_.attack.funded_windows,
            std::to_string(bribed) + " bribed windows, " + std::to_string(bad_bribed) + " paid");
        int first = -1;
        for (const auto& w : windows_)
            if (w.correct_proposer && w.first_round > 0) {
                first = w.k;
                break;
            }
        put("correct_proposer_by_window", sc_.liveness_window >= 0 && first == sc_.liveness_window,
            "first window with a finalized correct-proposer block: " + std::to_string(first));
        int paid_windows = 0, bad_formula = 0;
        for (const auto& w : windows_) {
            if (w.first_round == 0) continue;
            if (w.paid > 0) ++paid_windows;
            const Coins p = static_cast<Coins>(w.proposers.size());
            const Coins expect = p >= n - cfg_.f ? p * (w.fees / n) : 0;
            if (w.paid != expect) ++bad_formula;
        }
        put("rewards_paid", paid_windows > 0, std::to_string(paid_windows) + " windows paid");
        put("reward_formula", bad_formula == 0, std::to_string(bad_formula) + " windows off the formula");
    }

    // Clients.
    std::vector<Proof> proofs;
    for (const auto& t : attack_txs_)
        if (t.accepted) proofs.push_back({true, t.block});
    const Tick margin = sc_.liveness_margin >= 0 ? sc_.liveness_margin : static_cast<Tick>(n) * L_ + dstar;
    int live_total = 0, live_ok = 0;
    {
        std::vector<std::vector<std::pair<Block, QuorumCertificate>>> chains;
        for (auto c : correct_) chains.push_back(nodes_[c].chain_copy());
        for (const auto& ct : client_txs_) {
            const bool due = ct.at + margin < sc_.run_ticks;
            bool ok = false;
            for (const auto& ch : chains) {
                auto p = build_proof(ch, ct.tx, cfg_);
                if (p && verify_proof(*p, cfg_) == ProofVerdict::Accept) {
                    proofs.push_back({true, p->block_digest});
                    ok = true;
                    break;
                }
            }
            if (due) {
                ++live_total;
                live_ok += ok;
            }
        }
    }
    {
        int bad = 0;
        for (std::size_t i = 0; i < proofs.size(); ++i)
            for (std::size_t j = i + 1; j < proofs.size(); ++j)
                if (conflicting(proofs[i].target, proofs[j].target)) ++bad;
        put("no_conflicting_accepted_proofs", bad == 0, std::to_string(bad) + " conflicting accepted pairs");
        int attack_bad = 0;
        std::vector<Digest> att;
        for (const auto& t : attack_txs_)
            if (t.accepted) att.push_back(t.block);
        for (std::size_t i = 0; i < att.size(); ++i)
            for (std::size_t j = i + 1; j < att.size(); ++j)
                if (conflicting(att[i], att[j])) ++attack_bad;
        put("conflicting_proofs_accepted", attack_bad > 0, std::to_string(attack_bad) + " conflicting accepted attack proofs");
        int unsafe = 0;
        for (const auto& p : proofs) {
            bool fin = false;
            for (auto c : correct_)
                if (nodes_[c].gadget().is_finalized(p.target)) fin = true;
            if (!fin) ++unsafe;
        }
        put("client_safety", unsafe == 0, std::to_string(unsafe) + " accepted proofs without a correct finalizer");
        put("client_liveness", live_total == live_ok,
            std::to_string(live_ok) + "/" + std::to_string(live_total) + " due client txs confirmed");
    }

    {
        Tick lo = -1, hi = -1;
        int detected = 0;
        for (auto c : correct_) {
            const Tick t = nodes_[c].first_blacklist_tick();
            if (t < 0) continue;
            ++detected;
            lo = lo < 0 ? t : std::min(lo, t);
            hi = std::max(hi, t);
        }
        const bool ok = !sync || detected == 0 ||
                        (detected == static_cast<int>(correct_.size()) && hi - lo <= dstar);
        put("detection_latency", ok,
            std::to_string(detected) + "/" + std::to_string(correct_.size()) + " detected, spread " +
                std::to_string(detected ? hi - lo : 0));
    }

    // Adversary accounting.
    {
        bool within = true;
        std::ostringstream os;
        for (const auto& [v, ds] : res.double_spent) {
            if (fork_ && fork_->share < Rational(ds)) within = false;
            os << v << ":" << ds << " ";
        }
        put("realized_within_projection", within, "double-spent " + os.str());
        bool eq = !joined_.empty();
        for (auto v : joined_)
            if (res.double_spent[v] != cfg_.stake_d) eq = false;
        put("realized_equals_stake", eq, "every joined rational double-spent exactly D");
        bool zero = false, positive = false;
        bool any_fork = false;
        zero = true;
        for (const auto& l : res.utilities.lines) {
            if (!l.forking) continue;
            any_fork = true;
            if (l.net != 0) zero = false;
            if (l.net > 0) positive = true;
        }
        put("net_zero_utility", any_fork && zero, "forking rationals net zero");
        put("positive_attack_utility", positive, "some forking rational gained");
        bool withdrew = false;
        for (auto v : coalition_)
            if (book_[v].withdrawal.state == Withdrawal::State::Completed) withdrew = true;
        put("attacker_withdrew", withdrew, "coalition member completed withdrawal");
    }
    {
        int forks = 0;
        for (std::size_t i = 0; i < correct_.size(); ++i)
            for (std::size_t j = i + 1; j < correct_.size(); ++j) {
                const auto& a = nodes_[correct_[i]].chain();
                const auto& b = nodes_[correct_[j]].chain();
                const std::size_t m = std::min(a.size(), b.size());
                for (std::size_t x = 0; x < m; ++x)
                    if (a[x].first->digest != b[x].first->digest) {
                        ++forks;
                        break;
                    }
            }
        put("no_fork", forks == 0, std::to_string(forks) + " diverging correct pairs");
    }
    {
        bool within = true, closed = true;
        for (const auto& r : recycling_) {
            if (r.result.total_spent > cfg_.stake_d) within = false;
            if (r.result.total_spent != r.result.closed_form) closed = false;
        }
        put("recycling_within_stake", within, recycling_.empty() ? "no recycling run" :
            "spent " + std::to_string(recycling_.front().result.total_spent));
        put("recycling_closed_form", closed, "simulated spend matches liquid + unlocked rewards");
    }

    for (const auto& name : known_checks()) res.checks.push_back(out.at(name));

    std::vector<std::string> asserted = sc_.checks.empty() ? default_checks() : sc_.checks;
    bool pass = true;
    for (const auto& c : res.checks) {
        const bool expect_fail =
            std::find(sc_.expect_violations.begin(), sc_.expect_violations.end(), c.name) != sc_.expect_violations.end();
        const bool asserted_here = std::find(asserted.begin(), asserted.end(), c.name) != asserted.end();
        if (!c.passed) res.violated.push_back(c.name);
        if (expect_fail && c.passed) pass = false;
        if (asserted_here && !expect_fail && !c.passed) pass = false;
    }
    res.passed = pass;
}

} // namespace

Scenario resolve(const Scenario& in) {
    Scenario s = in;
    if (auto e = validate_config(s.config)) throw ScenarioError(std::string("config: ") + config_error_name(*e));
    if (s.round_ticks <= 0) s.round_ticks = 4 * s.config.delta;
    if (s.round_ticks < 2) throw ScenarioError("round_ticks must be at least 2");
    if (s.mode.kind == NetMode::Kind::Synchronous) {
        s.mode.delta = s.config.delta;
        s.mode.delta_gst = s.config.delta_gst;
    } else {
        s.mode.delta = s.config.delta;
    }
    const Tick window_span = static_cast<Tick>(s.config.n) * s.round_ticks;
    if (s.run_ticks < window_span) throw ScenarioError("run_ticks must cover one reward window");
    if (s.min_gap < 0) s.min_gap = 4 * s.round_ticks;
    if (s.mode.kind == NetMode::Kind::Synchronous)
        if (auto e = validate_plan(s.plan, s.config.delta_gst, s.min_gap))
            throw ScenarioError(std::string("plan: ") + plan_error_name(*e));
    auto in_range = [&](int v) { return v >= 0 && v < s.config.n; };
    for (const auto& g : s.plan.partition)
        for (auto v : g)
            if (!in_range(v)) throw ScenarioError("partition id out of range");
    for (const auto& w : s.withdrawals)
        if (!in_range(w.id)) throw ScenarioError("withdrawal id out of range");
    const auto roles = default_roles(s.config);
    for (const auto& [v, b] : s.byzantine)
        if (!in_range(v) || roles[v] != Role::Byzantine) throw ScenarioError("byzantine behavior on a non-Byzantine id");
    for (const auto& c : s.checks)
        if (std::find(known_checks().begin(), known_checks().end(), c) == known_checks().end())
            throw ScenarioError("unknown check " + c);
    for (const auto& c : s.expect_violations)
        if (std::find(known_checks().begin(), known_checks().end(), c) == known_checks().end())
            throw ScenarioError("unknown check " + c);
    if (s.attack.kind == AttackSpec::Kind::Censorship && !s.rewards.enabled)
        throw ScenarioError("censorship needs rewards enabled");
    return s;
}

RunResult run_scenario(const Scenario& s) {
    World w(resolve(s));
    return w.run();
}

Scenario fuzz_scenario(std::uint64_t seed, RuleKind rule) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + 17);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    Scenario s;
    s.name = "fuzz_" + std::to_string(seed);
    const int f = pick(1, 2);
    const int f_star = pick(0, f);
    const int k = pick(0, 2 * f - f_star);
    const Tick delta = pick(1, 2);
    const Tick dgst = pick(0, 12);
    const Tick dstar = 2 * delta + dgst;
    s.config = make_config(f, f_star, k, 100, delta, dgst, 2 * dstar + 1 + pick(0, 20), seed);
    s.mode = NetMode::synchronous(delta, dgst);
    s.rule = rule;
    s.freeze_strength = pick(0, 1) == 1;
    s.round_ticks = 4 * delta;
    const int n = s.config.n;
    s.run_ticks = 3 * n * s.round_ticks + 2 * dstar;
    s.min_gap = 4 * s.round_ticks;

    // Random windows separated by the minimum gap, random two-way split of correct ids.
    Tick t = pick(0, static_cast<int>(2 * s.round_ticks));
    const int windows = pick(0, 3);
    for (int w = 0; w < windows && dgst > 0; ++w) {
        const Tick len = pick(1, static_cast<int>(dgst));
        if (t + len >= s.run_ticks) break;
        s.plan.windows.push_back({t, t + len});
        t += len + s.min_gap + pick(0, static_cast<int>(2 * s.round_ticks));
    }
    std::vector<ValidatorId> correct;
    for (int v = f_star; v < n; ++v) correct.push_back(v);
    std::shuffle(correct.begin(), correct.end(), rng);
    const int cut = pick(1, static_cast<int>(correct.size()) - 1);
    s.plan.partition = {std::vector<ValidatorId>(correct.begin(), correct.begin() + cut),
                        std::vector<ValidatorId>(correct.begin() + cut, correct.end())};

    const std::vector<ByzBehavior> menu{ByzBehavior::Honest, ByzBehavior::Silent, ByzBehavior::VoteAll,
                                        ByzBehavior::NoRelay, ByzBehavior::Equivocate, ByzBehavior::Delay};
    for (int v = 0; v < f_star; ++v) s.byzantine[v] = menu[pick(0, static_cast<int>(menu.size()) - 1)];
    s.byz_random_delay = true;

    // Rationals decide for themselves.
    s.attack.kind = AttackSpec::Kind::DoubleSpend;
    s.attack.force_join = false;
    s.client_txs = {1, s.round_ticks, 2 * n, static_cast<Coins>(pick(1, 60))};
    s.rewards.enabled = pick(0, 1) == 1;
    s.rewards.fee = pick(1, 5);
    s.checks = {"no_conflicting_finalization", "no_conflicting_accepted_proofs", "old_finality_safety",
                "one_qc_per_height", "delivery_bound", "halt_on_conflict", "recent_volume_cap",
                "slashing_completeness", "conservation", "no_fork", "client_safety", "qc_overlap",
                "censorship_guard", "reward_formula"};
    return s;
}

Scenario withdrawal_race_scenario(std::uint64_t seed) {
    std::mt19937_64 rng(seed * 0xbf58476d1ce4e5b9ull + 3);
    auto pick = [&](Tick lo, Tick hi) { return std::uniform_int_distribution<Tick>(lo, hi)(rng); };
    Scenario s;
    s.name = "withdrawal_race_" + std::to_string(seed);
    const int f = static_cast<int>(pick(1, 2));
    const int f_star = f;
    const int k = f;
    const Tick delta = pick(1, 2);
    const Tick dgst = pick(4 * delta + 4, 24);
    const Tick dstar = 2 * delta + dgst;
    s.config = make_config(f, f_star, k, 100, delta, dgst, 2 * dstar + 1 + pick(0, 10), seed);
    s.mode = NetMode::synchronous(delta, dgst);
    s.round_ticks = 4 * delta;
    const int n = s.config.n;
    s.attack.kind = AttackSpec::Kind::DoubleSpend;
    s.attack.force_join = true;
    s.auto_partition = true;
    const Tick t0 = cobra::round_start(n, s.round_ticks);
    s.run_ticks = t0 + dgst + s.config.delta_w + 6 * dstar + 2 * n * s.round_ticks;
    // Each coalition member races its own request against detection.
    for (int v = 0; v < f_star + k; ++v) s.withdrawals.push_back({v, pick(std::max<Tick>(0, t0 - dstar), t0 + dgst + 2 * dstar)});
    for (int v = f_star + k; v < n; ++v)
        if (pick(0, 1)) s.withdrawals.push_back({v, pick(0, s.run_ticks - s.config.delta_w - 2)});
    s.checks = {"slashing_soundness", "non_equivocators_complete", "slashing_completeness", "delivery_bound", "qc_overlap"};
    return s;
}

} // namespace cobra

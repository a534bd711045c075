#include "cobra/adversary.hpp"

#include "cobra/stake.hpp"

#include <algorithm>

namespace cobra {

bool double_spend_feasible(int f_star, int k, int h, int q) { return f_star + k + h / 2 >= q; }

const char* decision_name(Decision d) { return d == Decision::Join ? "join" : "abstain"; }

std::optional<ForkScenario> plan_double_spend(const SystemConfig& cfg, Coins liquid_per_rational, RuleKind rule,
                                              std::optional<std::vector<ValidatorId>> rationals) {
    const auto roles = default_roles(cfg);
    ForkScenario s;
    std::vector<ValidatorId> correct;
    for (int id = 0; id < cfg.n; ++id) {
        if (roles[id] == Role::Byzantine) s.coalition.push_back(id);
        else if (roles[id] == Role::Rational && !rationals) s.rationals.push_back(id);
    }
    if (rationals) s.rationals = *rationals;
    for (auto r : s.rationals) s.coalition.push_back(r);
    std::sort(s.coalition.begin(), s.coalition.end());
    for (int id = 0; id < cfg.n; ++id)
        if (!std::binary_search(s.coalition.begin(), s.coalition.end(), id)) correct.push_back(id);

    const int fs = cfg.f_star;
    const int k = static_cast<int>(s.rationals.size());
    const int h = static_cast<int>(correct.size());
    if (!double_spend_feasible(fs, k, h, cfg.q)) return std::nullopt;

    const int need = std::max(1, cfg.q - static_cast<int>(s.coalition.size()));
    const int branches = std::min(h / need, cfg.f + 1);
    if (branches < 2) return std::nullopt;
    s.partitions.assign(branches, {});
    for (int j = 0; j < h; ++j) s.partitions[j % branches].push_back(correct[j]);
    s.gamma = branches - 1;
    std::size_t largest = 0;
    for (const auto& p : s.partitions) largest = std::max(largest, p.size());
    s.m = static_cast<int>(largest) - 1;

    // Every coalition member signs every branch; the smallest branch sets the cap.
    std::size_t smallest = s.partitions.back().size();
    const int i_branch = std::max(0, static_cast<int>(s.coalition.size() + smallest) - 2 * cfg.f - 1);
    const Cap c = cap(rule, i_branch, cfg.f, cfg.stake_d);
    s.cap = is_unbounded(c) ? Rational(cfg.stake_d) : std::get<Rational>(c);
    if (k > 0) {
        s.share = collusion_bound_mF(s.gamma, s.cap, k);
        const Rational per_branch = s.cap / Rational(k);
        s.spend_per_rational_per_branch =
            std::min<Coins>(liquid_per_rational, per_branch.numerator() / per_branch.denominator());
    }
    s.windows.partition = s.partitions;
    return s;
}

Decision rational_decide(const ForkScenario& s, const SystemConfig& cfg, bool slashing_certain, bool force_join) {
    if (force_join) return Decision::Join;
    if (s.rationals.empty()) return Decision::Abstain;
    const Rational penalty = slashing_certain ? Rational(cfg.stake_d) : Rational(0);
    return s.share > penalty ? Decision::Join : Decision::Abstain;
}

RecyclingResult attack_reward_recycling(const SystemConfig& cfg, int rounds_budget, Coins reward_per_round,
                                        bool reward_lock, Coins initial_liquid) {
    RecyclingResult r;
    StakeAccount acct = genesis_account(0, Role::Rational, cfg.stake_d, initial_liquid);
    StakeAccount sink;
    const Tick lock = reward_lock ? cfg.delta_star : 0;
    for (int round = 0; round < rounds_budget; ++round) {
        // All rounds sit strictly inside one Δ* window.
        const Tick now = static_cast<Tick>(round) * cfg.delta_star / std::max(1, rounds_budget);
        if (reward_per_round > 0) acct.locked_rewards.push_back({reward_per_round, now + lock});
        const Coins s = spendable(acct, now);
        if (s > 0) transfer_spendable(acct, sink, s, now);
        r.spent_per_round.push_back(s);
        r.total_spent += s;
    }
    r.closed_form = initial_liquid + (reward_lock ? 0 : static_cast<Coins>(rounds_budget) * reward_per_round);
    return r;
}

CensorshipPlan attack_censorship(Coins bribe_pool, Coins bribe_per_rational, int rationals, Coins forgone_reward) {
    CensorshipPlan p;
    p.rationals_accept = bribe_per_rational >= forgone_reward && bribe_per_rational > 0;
    const Coins per_window = bribe_per_rational * rationals;
    p.funded_windows = (p.rationals_accept && per_window > 0) ? static_cast<int>(bribe_pool / per_window) : 0;
    p.first_uncensored_window = p.funded_windows;
    return p;
}

UtilityReport account_utilities(const std::vector<RationalOutcome>& outcomes, Coins d) {
    UtilityReport rep;
    for (const auto& o : outcomes) {
        UtilityLine l;
        l.id = o.id;
        l.forking = o.forked;
        if (o.forked) {
            l.gain = o.double_spent;
            l.penalty = o.slashed ? d : 0;
            l.net = l.gain - l.penalty;
        } else {
            l.rewards = o.rewards;
            l.bribes = o.bribes;
            l.net = o.rewards + o.bribes;
        }
        rep.lines.push_back(l);
    }
    return rep;
}

NormalFormGame build_fork_game(const SystemConfig& cfg, const Rational& cap_per_branch, const Rational& follow_reward) {
    NormalFormGame g;
    const int k = cfg.k;
    for (int r = 0; r < k; ++r) {
        g.players.push_back("rational_" + std::to_string(cfg.f_star + r));
        g.strategies.push_back({"follow", "fork"});
    }
    g.players.push_back("coalition_layout");
    g.strategies.push_back({"max_split", "two_way"});
    const int d = static_cast<int>(cfg.stake_d);
    const int honest = cfg.n - cfg.f_star - k;
    g.payoff.assign(g.profile_count(), std::vector<Rational>(g.players.size(), Rational(0)));
    for (std::size_t idx = 0; idx < g.profile_count(); ++idx) {
        const auto prof = g.profile(idx);
        int joiners = 0;
        for (int r = 0; r < k; ++r) joiners += prof[r] == 1;
        const bool two_way = prof[k] == 1;
        const int coalition = cfg.f_star + joiners;
        const int pool = honest + (k - joiners);
        const int need = std::max(1, cfg.q - coalition);
        int branches = joiners > 0 ? std::min(pool / need, cfg.f + 1) : 0;
        if (two_way) branches = std::min(branches, 2);
        if (branches < 2) {
            for (int r = 0; r < k; ++r) g.payoff[idx][r] = follow_reward;
            continue;
        }
        const Rational share = collusion_bound_mF(branches - 1, cap_per_branch, joiners);
        for (int r = 0; r < k; ++r) g.payoff[idx][r] = prof[r] == 1 ? share - Rational(d) : Rational(0);
    }
    return g;
}

InclusionProof mint_colluder_proof(const SystemConfig& cfg, const std::vector<ValidatorId>& colluders) {
    std::vector<ValidatorId> signers = distinct_signers(colluders);
    for (ValidatorId v = 0; v < cfg.n && static_cast<int>(signers.size()) < cfg.q; ++v)
        if (std::find(signers.begin(), signers.end(), v) == signers.end()) signers.push_back(v);
    std::sort(signers.begin(), signers.end());

    Block b1;
    b1.height = 1;
    b1.proposer = colluders.empty() ? 0 : colluders.front();
    b1.round = 1;
    b1.txs.push_back({900001, 900002, cfg.stake_d, TxKind::Payment, 1});
    b1 = seal(b1);
    Block b2;
    b2.height = 2;
    b2.parent_hash = b1.digest;
    b2.proposer = b1.proposer;
    b2.round = 2;
    for (ValidatorId v : distinct_signers(colluders)) b2.finality_votes.push_back({v, b1.digest});
    b2 = seal(b2);

    auto qc_for = [&](const Block& b) { return QuorumCertificate{b.digest, b.height, b.round, 2, signers}; };
    InclusionProof p;
    p.tx = b1.txs.front();
    p.block_digest = b1.digest;
    p.inclusion_path = {0, b1.digest};
    p.chain = {{b1, qc_for(b1)}, {b2, qc_for(b2)}};
    p.votes_for = b1.digest;
    return p;
}

} // namespace cobra

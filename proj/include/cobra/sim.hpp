#pragma once

#include "cobra/adversary.hpp"
#include "cobra/client.hpp"
#include "cobra/core.hpp"
#include "cobra/gadget.hpp"
#include "cobra/netsim.hpp"
#include "cobra/smr.hpp"
#include "cobra/stake.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cobra {

enum class ByzBehavior { Honest, Silent, VoteAll, NoRelay, Equivocate, Delay };

const char* byz_behavior_name(ByzBehavior b);
std::optional<ByzBehavior> parse_byz_behavior(const std::string& s);

struct AttackSpec {
    enum class Kind { None, DoubleSpend, Censorship, RewardRecycling };
    Kind kind = Kind::None;

    // double_spend
    bool force_join = false;
    Round start_round = 0; // 0: first coalition-led round from round n on
    Tick end_tick = -1;    // -1: end of the first window (sync) or gst (partial synchrony)
    Tick withdraw_tick = -1;
    Coins liquid_per_rational = -1; // -1: D

    // censorship
    Coins bribe_per_rational = -1; // -1: forgone-reward estimate
    int funded_windows = 0;

    // reward_recycling
    int rounds_budget = 30;
    Coins reward_per_round = 10;
    bool reward_lock = true;
};

const char* attack_name(AttackSpec::Kind k);

struct ClientTxSpec {
    Tick start = 1;
    Tick every = 0; // 0 disables injection
    int count = 0;
    Coins amount = 1;
};

struct WithdrawalSpec {
    ValidatorId id = 0;
    Tick at = 0;
};

struct RewardSpec {
    bool enabled = false;
    Coins fee = 1;
    bool lock = true;
    int settle_lag_rounds = -1; // -1: n
};

struct Scenario {
    std::string name;
    std::string description;
    std::string paper_ref;
    SystemConfig config;
    NetMode mode;
    AsynchronyPlan plan;
    bool auto_partition = false; // take the partition from the attack plan
    Tick min_gap = -1;           // -1: four rounds
    Jitter jitter = Jitter::Uniform;
    RuleKind rule = RuleKind::StakeBounded;
    bool freeze_strength = false;
    Tick round_ticks = 0; // 0: 4Δ
    Tick run_ticks = 0;
    std::map<ValidatorId, ByzBehavior> byzantine;
    bool byz_random_delay = false;
    AttackSpec attack;
    ClientTxSpec client_txs;
    std::vector<WithdrawalSpec> withdrawals;
    RewardSpec rewards;
    std::vector<std::string> checks;
    std::vector<std::string> expect_violations;
    int liveness_window = -1;
    Tick liveness_margin = -1; // -1: n rounds + Δ*
};

// Every check name the runner knows.
const std::vector<std::string>& known_checks();

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct WindowRow {
    int k = 0;
    Round first_round = 0;
    Round last_round = 0;
    std::vector<ValidatorId> proposers;
    Coins fees = 0;
    Coins paid = 0;
    bool bribed = false;
    bool correct_proposer = false;
};

struct AttackTx {
    ValidatorId rational = 0;
    int branch = 0;
    Transaction tx;
    bool accepted = false;
    Digest block = 0;
};

struct RecyclingRow {
    bool lock = true;
    RecyclingResult result;
};

struct RunResult {
    Scenario scenario;
    std::vector<Role> roles;
    std::vector<ValidatorId> correct;
    std::vector<std::vector<FinalizationRecord>> finalization_logs;
    std::vector<std::vector<Digest>> finalized;
    std::vector<std::set<ValidatorId>> blacklists;
    std::vector<StakeAccount> accounts;
    std::vector<DeliverEvent> transcript;
    std::vector<WindowRow> windows;
    UtilityReport utilities;
    std::optional<ForkScenario> fork;
    std::optional<Decision> decision;
    std::vector<AttackTx> attack_txs;
    std::map<ValidatorId, Coins> double_spent;
    std::vector<RecyclingRow> recycling;
    std::vector<CheckResult> checks;
    std::vector<std::string> violated;
    Tick max_delay = 0;
    std::uint64_t messages = 0;
    std::vector<int> observer_strength;
    std::vector<std::pair<Block, QuorumCertificate>> observer_chain;
    std::vector<Tick> observer_recv;
    bool passed = false;
};

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Rejects inconsistent scenarios; returns the effective copy with defaults resolved.
Scenario resolve(const Scenario& s);

RunResult run_scenario(const Scenario& s);

// Seeded scenario generators used by the fuzz suites.
Scenario fuzz_scenario(std::uint64_t seed, RuleKind rule);
Scenario withdrawal_race_scenario(std::uint64_t seed);

} // namespace cobra

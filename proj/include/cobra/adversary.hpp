#pragma once

#include "cobra/client.hpp"
#include "cobra/core.hpp"
#include "cobra/gadget.hpp"
#include "cobra/netsim.hpp"
#include "cobra/oracle.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cobra {

struct ForkScenario {
    std::vector<ValidatorId> coalition; // Byzantine + recruited rationals
    std::vector<ValidatorId> rationals;
    std::vector<std::vector<ValidatorId>> partitions; // correct validators per branch
    int gamma = 0;
    int m = 0;
    Rational cap{0};
    Rational share{0}; // M(F)
    Coins spend_per_rational_per_branch = 0;
    AsynchronyPlan windows;
};

// Feasible iff f* + k + floor(h/2) >= q. `rationals` lists the recruited
// rationals; by default every rational of the role layout joins.
std::optional<ForkScenario> plan_double_spend(const SystemConfig& cfg, Coins liquid_per_rational,
                                              RuleKind rule = RuleKind::StakeBounded,
                                              std::optional<std::vector<ValidatorId>> rationals = std::nullopt);

bool double_spend_feasible(int f_star, int k, int h, int q);

enum class Decision { Join, Abstain };

const char* decision_name(Decision d);

// Join iff the projected share strictly exceeds the expected penalty.
Decision rational_decide(const ForkScenario& s, const SystemConfig& cfg, bool slashing_certain, bool force_join);

struct RecyclingResult {
    Coins total_spent = 0;
    Coins closed_form = 0;
    std::vector<Coins> spent_per_round;
};

RecyclingResult attack_reward_recycling(const SystemConfig& cfg, int rounds_budget, Coins reward_per_round,
                                        bool reward_lock, Coins initial_liquid);

struct CensorshipPlan {
    int funded_windows = 0;
    bool rationals_accept = false;
    int first_uncensored_window = 0; // 0-based window index
};

CensorshipPlan attack_censorship(Coins bribe_pool, Coins bribe_per_rational, int rationals, Coins forgone_reward);

struct RationalOutcome {
    ValidatorId id = 0;
    bool forked = false;
    Coins double_spent = 0;
    bool slashed = false;
    Coins rewards = 0;
    Coins bribes = 0;
};

struct UtilityLine {
    ValidatorId id = 0;
    bool forking = false;
    Coins gain = 0;
    Coins penalty = 0;
    Coins rewards = 0;
    Coins bribes = 0;
    Coins net = 0;
};

struct UtilityReport {
    std::vector<UtilityLine> lines;
};

UtilityReport account_utilities(const std::vector<RationalOutcome>& outcomes, Coins d);

// Round game over the recruited rationals plus one player choosing the fork
// layout ("max_split" or "two_way"). Rationals choose "follow" or "fork".
NormalFormGame build_fork_game(const SystemConfig& cfg, const Rational& cap_per_branch, const Rational& follow_reward);

// Proof for a payment whose finality votes come only from `colluders`. The
// certificate signers are the colluders, padded with other ids up to q.
InclusionProof mint_colluder_proof(const SystemConfig& cfg, const std::vector<ValidatorId>& colluders);

} // namespace cobra

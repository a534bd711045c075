#pragma once

#include "cobra/core.hpp"

#include <map>
#include <set>
#include <stdexcept>
#include <vector>

namespace cobra {

struct LockedReward {
    Coins amount = 0;
    Tick unlock_tick = 0;
};

struct Withdrawal {
    enum class State { None, Requested, Completed, Rejected };
    State state = State::None;
    Tick at_tick = 0;
};

const char* withdrawal_name(Withdrawal::State s);

struct StakeAccount {
    ValidatorId owner = 0;
    Role role = Role::Honest;
    Coins staked = 0;
    Coins liquid = 0;
    std::vector<LockedReward> locked_rewards;
    Withdrawal withdrawal;

    Coins locked_total() const;
};

StakeAccount genesis_account(ValidatorId id, Role role, Coins d, Coins liquid);

enum class StakeErrorCode { AlreadyRequested, Blacklisted, TooEarly, NotRequested, WindowNotClosed, Insufficient };

const char* stake_error_name(StakeErrorCode c);

class StakeError : public std::runtime_error {
public:
    explicit StakeError(StakeErrorCode c) : std::runtime_error(stake_error_name(c)), code(c) {}
    StakeErrorCode code;
};

StakeAccount request_withdrawal(StakeAccount acct, Tick now, bool blacklisted_locally);

// blacklist_views holds one blacklist per correct validator.
StakeAccount complete_withdrawal(StakeAccount acct, Tick now, Tick delta_w,
                                 const std::vector<std::set<ValidatorId>>& blacklist_views);

Coins spendable(const StakeAccount& acct, Tick now);

// Moves `amount` of spendable coins; unlocked rewards are consumed first.
void transfer_spendable(StakeAccount& from, StakeAccount& to, Coins amount, Tick now);

struct RewardWindow {
    int k = 0;
    Round first_round = 0;
    Round last_round = 0;
    std::set<ValidatorId> unique_proposers;
    Coins fees_total = 0;
    bool settled = false;
};

// Rounds [k*n + 1, (k+1)*n].
RewardWindow make_window(int k, int n);

// Payout per proposer. Total is F*|P|/n, zero when |P| < n - f.
std::map<ValidatorId, Rational> settle_window(RewardWindow& w, int n, int f, Round current_round);

// Credits each payout as a locked reward. Fractional coins are floored.
Coins credit_rewards(std::map<ValidatorId, StakeAccount>& book, const std::map<ValidatorId, Rational>& payouts,
                     Tick now, Tick lock);

} // namespace cobra

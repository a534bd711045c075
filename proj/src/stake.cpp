#include "cobra/stake.hpp"

namespace cobra {

const char* withdrawal_name(Withdrawal::State s) {
    switch (s) {
    case Withdrawal::State::None: return "none";
    case Withdrawal::State::Requested: return "requested";
    case Withdrawal::State::Completed: return "completed";
    case Withdrawal::State::Rejected: return "rejected";
    }
    return "?";
}

const char* stake_error_name(StakeErrorCode c) {
    switch (c) {
    case StakeErrorCode::AlreadyRequested: return "AlreadyRequested";
    case StakeErrorCode::Blacklisted: return "Blacklisted";
    case StakeErrorCode::TooEarly: return "TooEarly";
    case StakeErrorCode::NotRequested: return "NotRequested";
    case StakeErrorCode::WindowNotClosed: return "WindowNotClosed";
    case StakeErrorCode::Insufficient: return "Insufficient";
    }
    return "?";
}

Coins StakeAccount::locked_total() const {
    Coins s = 0;
    for (const auto& r : locked_rewards) s += r.amount;
    return s;
}

StakeAccount genesis_account(ValidatorId id, Role role, Coins d, Coins liquid) {
    StakeAccount a;
    a.owner = id;
    a.role = role;
    a.staked = d;
    a.liquid = role == Role::Byzantine ? 0 : liquid;
    return a;
}

StakeAccount request_withdrawal(StakeAccount acct, Tick now, bool blacklisted_locally) {
    if (acct.withdrawal.state != Withdrawal::State::None) throw StakeError(StakeErrorCode::AlreadyRequested);
    if (blacklisted_locally) throw StakeError(StakeErrorCode::Blacklisted);
    acct.withdrawal = {Withdrawal::State::Requested, now};
    return acct;
}

StakeAccount complete_withdrawal(StakeAccount acct, Tick now, Tick delta_w,
                                 const std::vector<std::set<ValidatorId>>& blacklist_views) {
    if (acct.withdrawal.state != Withdrawal::State::Requested) throw StakeError(StakeErrorCode::NotRequested);
    if (now < acct.withdrawal.at_tick + delta_w) throw StakeError(StakeErrorCode::TooEarly);
    for (const auto& view : blacklist_views)
        if (view.count(acct.owner)) {
            acct.withdrawal.state = Withdrawal::State::Rejected;
            acct.staked = 0;
            return acct;
        }
    acct.withdrawal.state = Withdrawal::State::Completed;
    acct.liquid += acct.staked;
    acct.staked = 0;
    return acct;
}

Coins spendable(const StakeAccount& acct, Tick now) {
    Coins s = acct.liquid;
    for (const auto& r : acct.locked_rewards)
        if (r.unlock_tick <= now) s += r.amount;
    return s;
}

void transfer_spendable(StakeAccount& from, StakeAccount& to, Coins amount, Tick now) {
    if (amount < 0 || spendable(from, now) < amount) throw StakeError(StakeErrorCode::Insufficient);
    Coins left = amount;
    for (auto& r : from.locked_rewards) {
        if (left == 0) break;
        if (r.unlock_tick > now) continue;
        Coins take = std::min(left, r.amount);
        r.amount -= take;
        left -= take;
    }
    std::erase_if(from.locked_rewards, [](const LockedReward& r) { return r.amount == 0; });
    from.liquid -= left;
    to.liquid += amount;
}

RewardWindow make_window(int k, int n) {
    RewardWindow w;
    w.k = k;
    w.first_round = static_cast<Round>(k) * n + 1;
    w.last_round = static_cast<Round>(k + 1) * n;
    return w;
}

std::map<ValidatorId, Rational> settle_window(RewardWindow& w, int n, int f, Round current_round) {
    if (current_round <= w.last_round) throw StakeError(StakeErrorCode::WindowNotClosed);
    std::map<ValidatorId, Rational> out;
    w.settled = true;
    const int p = static_cast<int>(w.unique_proposers.size());
    if (p < n - f || w.fees_total == 0) return out;
    // Each of the |P| proposers receives F/n, so the total is F*|P|/n.
    const Rational share(w.fees_total, n);
    for (auto id : w.unique_proposers) out[id] = share;
    return out;
}

Coins credit_rewards(std::map<ValidatorId, StakeAccount>& book, const std::map<ValidatorId, Rational>& payouts,
                     Tick now, Tick lock) {
    Coins minted = 0;
    for (const auto& [id, amt] : payouts) {
        Coins c = amt.numerator() / amt.denominator();
        if (c <= 0) continue;
        book[id].locked_rewards.push_back({c, now + lock});
        minted += c;
    }
    return minted;
}

} // namespace cobra

#pragma once

#include "cobra/core.hpp"
#include "cobra/gadget.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace cobra {

struct BoundQuery {
    int f = 1;
    int i = 0;
    RuleKind rule = RuleKind::StakeBounded;
    Coins d = 100;
};

enum class BoundRegime { Stake, Strong, StrongestA, StrongestB };

const char* regime_name(BoundRegime r);

struct BoundResult {
    Rational value{0};
    int argmax_m = 0;
    BoundRegime regime = BoundRegime::Stake;
    std::vector<Rational> terms; // indexed by m
};

// (f-m-i)·f/(f-m)²·D for m in [0, f-i].
std::vector<Rational> strong_chain_terms(int f, int i, Coins d);

// (f-m-i)/(f-m)·D for m in [0, f-i]; with i = 0 this is the stake-bounded family.
std::vector<Rational> share_terms(int f, int i, Coins d);

BoundResult max_double_spend(const BoundQuery& q);

struct Case3bRow {
    int f = 0;
    int i1 = 0;
    int i2 = 0;
    int m = 0;
    Rational enumerated{0};
    Rational closed_form{0};
};

// Every feasible (i1, i2, m) layout for the strongest-chain second sub-case.
std::vector<Case3bRow> case3b_rows(int f, int i1, Coins d);

// A(m) + B(m) as simplified: (1 - (3f²+f+6)/(4(f-m)(f+1)))·D.
Rational case3b_closed_form(int f, int m, Coins d);

class DivisionByZero : public std::domain_error {
public:
    DivisionByZero() : std::domain_error("rational_count = 0") {}
};

Rational collusion_bound_mF(int gamma, const Rational& c, int rational_count);

// Exhaustive assignment of f+1 correct validators to chain one, chain two or
// neither. True iff no assignment puts at least `need` on both chains.
bool strongest_chain_unique(int f, int need);

// Smallest count strictly above (f+1)/2.
int strongest_need(int f);

struct ThresholdVotes {
    int votes = 0;
    int n = 0;
    Rational fraction{0};
};

ThresholdVotes strongest_threshold_votes(int f);

struct NormalFormGame {
    std::vector<std::string> players;
    std::vector<std::vector<std::string>> strategies;
    // payoff[profile][player]; profile index is mixed-radix with player 0 least significant.
    std::vector<std::vector<Rational>> payoff;

    std::size_t profile_count() const;
    std::size_t index(const std::vector<int>& profile) const;
    std::vector<int> profile(std::size_t index) const;
};

struct DominanceResult {
    bool dominant = false;
    std::vector<int> witness;    // violating full profile when not dominant
    int witness_alternative = -1;
    bool missing_strict = false; // never strictly better against some alternative
    std::vector<std::vector<int>> strict_profiles; // one per alternative when dominant
};

DominanceResult check_weak_dominance(const NormalFormGame& g, int player, int s_star);

} // namespace cobra

#include "cobra/oracle.hpp"

#include <algorithm>

namespace cobra {

const char* regime_name(BoundRegime r) {
    switch (r) {
    case BoundRegime::Stake: return "stake";
    case BoundRegime::Strong: return "strong";
    case BoundRegime::StrongestA: return "strongest_a";
    case BoundRegime::StrongestB: return "strongest_b";
    }
    return "?";
}

std::vector<Rational> strong_chain_terms(int f, int i, Coins d) {
    std::vector<Rational> out;
    for (int m = 0; m <= f - i; ++m) {
        const std::int64_t fm = f - m;
        out.push_back(Rational(static_cast<std::int64_t>(f - m - i) * f, fm * fm) * Rational(d));
    }
    return out;
}

std::vector<Rational> share_terms(int f, int i, Coins d) {
    std::vector<Rational> out;
    for (int m = 0; m <= f - i; ++m) {
        if (f - m == 0) {
            out.push_back(Rational(0));
            continue;
        }
        out.push_back(Rational(f - m - i, f - m) * Rational(d));
    }
    return out;
}

namespace {

BoundResult pick_max(std::vector<Rational> terms, BoundRegime regime) {
    BoundResult r;
    r.regime = regime;
    r.terms = std::move(terms);
    for (std::size_t m = 0; m < r.terms.size(); ++m)
        if (m == 0 || r.terms[m] > r.value) {
            r.value = r.terms[m];
            r.argmax_m = static_cast<int>(m);
        }
    return r;
}

} // namespace

Rational case3b_closed_form(int f, int m, Coins d) {
    const std::int64_t num = 3ll * f * f + f + 6;
    const std::int64_t den = 4ll * (f - m) * (f + 1);
    return (Rational(1) - Rational(num, den)) * Rational(d);
}

std::vector<Case3bRow> case3b_rows(int f, int i1, Coins d) {
    std::vector<Case3bRow> rows;
    if (2 * i1 <= f + 1) return rows;
    for (int i2 = f / 4 + 1; 4 * i2 > f && i2 < f; ++i2) {
        const int i3 = f + 1 - (i1 + 1) - (i2 + 1);
        if (i3 < 0) break;
        for (int m = 0; m <= i3; ++m) {
            Case3bRow row;
            row.f = f;
            row.i1 = i1;
            row.i2 = i2;
            row.m = m;
            // Share of the i2-strong ledger plus the i3 - m stake-bounded forks.
            row.enumerated = Rational(f, static_cast<std::int64_t>(f - m) * (f - i2)) * Rational(d) +
                             Rational(i3 - m, f - m) * Rational(d);
            row.closed_form = case3b_closed_form(f, m, d);
            rows.push_back(row);
        }
    }
    return rows;
}

BoundResult max_double_spend(const BoundQuery& q) {
    const int f = q.f;
    const int i = q.i;
    const bool above_quarter = 4 * i > f;
    if (q.rule == RuleKind::StakeBounded || !above_quarter) {
        auto t = share_terms(f, 0, q.d);
        if (f > 0) t.pop_back(); // m = f leaves no fork
        return pick_max(std::move(t), BoundRegime::Stake);
    }
    if (q.rule == RuleKind::StrongChain || 2 * i <= f + 1) return pick_max(strong_chain_terms(f, i, q.d), BoundRegime::Strong);

    BoundResult a = pick_max(share_terms(f, i, q.d), BoundRegime::StrongestA);
    const auto rows = case3b_rows(f, i, q.d);
    for (const auto& row : rows)
        if (row.enumerated > a.value) {
            a.value = row.enumerated;
            a.argmax_m = row.m;
            a.regime = BoundRegime::StrongestB;
        }
    return a;
}

Rational collusion_bound_mF(int gamma, const Rational& c, int rational_count) {
    if (rational_count == 0) throw DivisionByZero();
    return Rational(gamma) * c / Rational(rational_count);
}

int strongest_need(int f) { return (f + 1) / 2 + 1; }

bool strongest_chain_unique(int f, int need) {
    const int correct = f + 1;
    std::vector<int> a(correct, 0);
    while (true) {
        int c1 = 0, c2 = 0;
        for (int x : a) {
            c1 += x == 1;
            c2 += x == 2;
        }
        if (c1 >= need && c2 >= need) return false;
        int pos = 0;
        while (pos < correct && a[pos] == 2) a[pos++] = 0;
        if (pos == correct) break;
        ++a[pos];
    }
    return true;
}

ThresholdVotes strongest_threshold_votes(int f) {
    ThresholdVotes t;
    t.votes = 2 * f + (f + 1) / 2 + 1;
    t.n = 3 * f + 1;
    t.fraction = Rational(t.votes, t.n);
    return t;
}

std::size_t NormalFormGame::profile_count() const {
    std::size_t c = 1;
    for (const auto& s : strategies) c *= s.size();
    return c;
}

std::size_t NormalFormGame::index(const std::vector<int>& prof) const {
    std::size_t idx = 0, mul = 1;
    for (std::size_t p = 0; p < strategies.size(); ++p) {
        idx += static_cast<std::size_t>(prof[p]) * mul;
        mul *= strategies[p].size();
    }
    return idx;
}

std::vector<int> NormalFormGame::profile(std::size_t idx) const {
    std::vector<int> prof(strategies.size());
    for (std::size_t p = 0; p < strategies.size(); ++p) {
        prof[p] = static_cast<int>(idx % strategies[p].size());
        idx /= strategies[p].size();
    }
    return prof;
}

DominanceResult check_weak_dominance(const NormalFormGame& g, int player, int s_star) {
    DominanceResult r;
    const int ns = static_cast<int>(g.strategies[player].size());
    for (int alt = 0; alt < ns; ++alt) {
        if (alt == s_star) continue;
        bool strict = false;
        std::vector<int> strict_prof;
        for (std::size_t idx = 0; idx < g.profile_count(); ++idx) {
            auto prof = g.profile(idx);
            if (prof[player] != s_star) continue;
            auto other = prof;
            other[player] = alt;
            const Rational us = g.payoff[idx][player];
            const Rational ua = g.payoff[g.index(other)][player];
            if (ua > us) {
                r.dominant = false;
                r.witness = other;
                r.witness_alternative = alt;
                return r;
            }
            if (us > ua && !strict) {
                strict = true;
                strict_prof = prof;
            }
        }
        if (!strict) {
            r.dominant = false;
            r.missing_strict = true;
            r.witness_alternative = alt;
            return r;
        }
        r.strict_profiles.push_back(strict_prof);
    }
    r.dominant = true;
    return r;
}

} // namespace cobra

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "cobra/adversary.hpp"
#include "cobra/analyzer.hpp"
#include "cobra/client.hpp"
#include "cobra/oracle.hpp"
#include "cobra/report.hpp"
#include "cobra/scenario.hpp"
#include "cobra/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <iostream>
#include <sstream>
#include <string>

#ifndef COBRA_SOURCE_DIR
#define COBRA_SOURCE_DIR "."
#endif

using namespace cobra;

namespace {

// Wall-clock limits in seconds.
constexpr double kLimit1 = 5;
constexpr double kLimit2 = 300;
constexpr double kLimit3 = 10;
constexpr double kLimit4 = 120;
constexpr double kLimit5 = 120;
constexpr double kLimit6 = 60;
constexpr double kLimit7 = 10;
constexpr double kLimit8 = 30;
constexpr double kLimit9 = 30;
constexpr double kLimit10 = 5;

// Capacity arithmetic must match the linear model within this relative error.
constexpr double kCapacityRelTol = 0.05;
// Strongest-block fraction must match within this many blocks.
constexpr double kFractionBlocks = 1.0;
constexpr double kLimitFractionTol = 0.01;

constexpr int kFuzzRuns = 1000;
constexpr int kRaceRuns = 500;
constexpr int kPsRuns = 100;
constexpr int kTraceBlocks = 10000;

struct Outcome {
    bool ok = true;
    std::ostringstream why;

    void require(bool cond, const std::string& msg) {
        if (!cond && ok) {
            ok = false;
            why << msg;
        }
    }
};

std::string scenario_path(const std::string& name) {
    return std::string(COBRA_SOURCE_DIR) + "/scenarios/" + name + ".json";
}

const CheckResult* find_check(const RunResult& r, const std::string& name) {
    for (const auto& c : r.checks)
        if (c.name == name) return &c;
    return nullptr;
}

bool check_passed(const RunResult& r, const std::string& name) {
    const auto* c = find_check(r, name);
    return c && c->passed;
}

bool check_failed(const RunResult& r, const std::string& name) {
    const auto* c = find_check(r, name);
    return c && !c->passed;
}

// 1: tight fork, n = 7.
void criterion1(Outcome& o) {
    const auto r = run_scenario(resolve(load_scenario(scenario_path("tight_fork_n7"))));
    const auto& cfg = r.scenario.config;
    o.require(cfg.n == 7 && cfg.f == 2 && cfg.f_star == 2 && cfg.k == 2 && cfg.h() == 3 && cfg.stake_d == 100,
              "unexpected configuration");
    o.require(r.scenario.rule == RuleKind::StakeBounded, "rule is not stake-bounded");
    int rationals = 0;
    for (ValidatorId v = 0; v < cfg.n; ++v) {
        if (r.roles[v] != Role::Rational) continue;
        ++rationals;
        auto it = r.double_spent.find(v);
        const Coins ds = it == r.double_spent.end() ? 0 : it->second;
        o.require(ds == cfg.stake_d, "rational " + std::to_string(v) + " double-spent " + std::to_string(ds));
        const auto& acct = r.accounts.at(v);
        o.require(acct.staked == 0 && acct.withdrawal.state == Withdrawal::State::Rejected,
                  "rational " + std::to_string(v) + " not slashed");
    }
    o.require(rationals == 2, "expected two rationals");
    int lines = 0;
    for (const auto& l : r.utilities.lines)
        if (l.forking) {
            ++lines;
            o.require(l.net == 0, "net utility " + std::to_string(l.net) + " for " + std::to_string(l.id));
            o.require(l.gain == cfg.stake_d && l.penalty == cfg.stake_d, "gain/penalty differ from D");
        }
    o.require(lines == 2, "expected two forking utility lines");
    o.require(check_passed(r, "slash_applied"), "slash_applied failed");
    o.require(r.passed, "scenario checks failed");
}

// 2: safety under default rationality.
void criterion2(Outcome& o) {
    const RuleKind rules[] = {RuleKind::StakeBounded, RuleKind::StrongChain, RuleKind::StrongestChain};
    int conflicting_final = 0, conflicting_proofs = 0, missing = 0;
    for (int s = 0; s < kFuzzRuns; ++s) {
        const auto sc = fuzz_scenario(static_cast<std::uint64_t>(s) + 1, rules[s % 3]);
        o.require(sc.mode.kind == NetMode::Kind::Synchronous && !sc.attack.force_join, "fuzz scenario not default");
        const auto r = run_scenario(sc);
        if (!find_check(r, "no_conflicting_finalization") || !find_check(r, "no_conflicting_accepted_proofs")) ++missing;
        if (check_failed(r, "no_conflicting_finalization")) ++conflicting_final;
        if (check_failed(r, "no_conflicting_accepted_proofs")) ++conflicting_proofs;
    }
    o.require(missing == 0, std::to_string(missing) + " runs without safety checks");
    o.require(conflicting_final == 0, std::to_string(conflicting_final) + " runs with conflicting finalization");
    o.require(conflicting_proofs == 0, std::to_string(conflicting_proofs) + " runs with conflicting accepted proofs");
}

// 3: bound sweep against an independent evaluation of the max_m expression.
void criterion3(Outcome& o) {
    const Coins d = 100;
    const Rational D(d);
    int equality_rows = 0;
    for (int f = 1; f <= 20; ++f)
        for (int i = 0; i <= f; ++i)
            for (RuleKind rule : {RuleKind::StrongChain, RuleKind::StrongestChain}) {
                const auto r = max_double_spend({f, i, rule, d});
                const std::string at = " at f=" + std::to_string(f) + " i=" + std::to_string(i);
                o.require(r.value <= D, "bound above D" + at);
                if (4 * i <= f) {
                    o.require(r.value == D && r.argmax_m == 0, "no equality at m=0" + at);
                    ++equality_rows;
                }
                if (r.regime == BoundRegime::Strong) {
                    std::vector<Rational> expect;
                    Rational best(0);
                    int arg = 0;
                    for (int m = 0; m <= f - i; ++m) {
                        const Rational t(static_cast<std::int64_t>(f - m - i) * f * d,
                                         static_cast<std::int64_t>(f - m) * (f - m));
                        expect.push_back(t);
                        if (t > best) {
                            best = t;
                            arg = m;
                        }
                    }
                    o.require(r.terms == expect, "terms differ" + at);
                    o.require(strong_chain_terms(f, i, d) == expect, "strong_chain_terms differ" + at);
                    o.require(r.value == best && r.argmax_m == arg, "maximum differs" + at);
                }
                if (rule == RuleKind::StrongChain && 4 * i > f)
                    o.require(r.regime == BoundRegime::Strong, "strong rule outside strong regime" + at);
            }
    o.require(equality_rows > 0, "no equality rows");
}

// 4: withdrawal races.
void criterion4(Outcome& o) {
    int unsound = 0, incomplete = 0, missing = 0;
    for (int s = 0; s < kRaceRuns; ++s) {
        const auto sc = withdrawal_race_scenario(static_cast<std::uint64_t>(s) + 1);
        o.require(sc.config.delta_w > 2 * sc.config.delta_star, "race scenario with Δ_W <= 2Δ*");
        const auto r = run_scenario(sc);
        if (!find_check(r, "slashing_soundness") || !find_check(r, "non_equivocators_complete")) ++missing;
        if (check_failed(r, "slashing_soundness")) ++unsound;
        if (check_failed(r, "non_equivocators_complete")) ++incomplete;
    }
    o.require(missing == 0, std::to_string(missing) + " runs without slashing checks");
    o.require(unsound == 0, std::to_string(unsound) + " runs where a double-signer completed");
    o.require(incomplete == 0, std::to_string(incomplete) + " runs where a clean validator did not complete");
}

// 5: impossibility demonstrations.
void criterion5(Outcome& o) {
    // (a) partial synchrony with k = 1 and f* = f.
    const auto base = resolve(load_scenario(scenario_path("partial_synchrony_break")));
    o.require(base.mode.kind == NetMode::Kind::PartialSynchrony && base.config.k == 1 &&
                  base.config.f_star == base.config.f,
              "(a) scenario is not k=1, f*=f under partial synchrony");
    int broken = 0;
    for (int s = 0; s < kPsRuns; ++s) {
        Scenario sc = base;
        sc.config.seed = static_cast<std::uint64_t>(s) + 1;
        const auto r = run_scenario(sc);
        const bool ok = check_failed(r, "no_fork") && check_passed(r, "conflicting_proofs_accepted") &&
                        check_passed(r, "positive_attack_utility");
        if (ok) ++broken;
    }
    o.require(broken == kPsRuns, "(a) attack succeeded in " + std::to_string(broken) + "/" + std::to_string(kPsRuns));

    // (b) colluders alone reach q once f* = h.
    SystemConfig cfg = make_config(2, 2, 3, 100, 2, 10, 29);
    o.require(cfg.f_star == cfg.h(), "(b) config does not have f* = h");
    std::vector<ValidatorId> colluders(static_cast<std::size_t>(cfg.f_star + cfg.k));
    for (std::size_t j = 0; j < colluders.size(); ++j) colluders[j] = static_cast<ValidatorId>(j);
    o.require(verify_proof(mint_colluder_proof(cfg, colluders), cfg) == ProofVerdict::Accept,
              "(b) colluder proof rejected with f* = h");
    SystemConfig ok_cfg = make_config(2, 2, 2, 100, 2, 10, 29);
    colluders.pop_back();
    o.require(verify_proof(mint_colluder_proof(ok_cfg, colluders), ok_cfg) == ProofVerdict::InsufficientVotes,
              "(b) colluder proof accepted with f* + k < q");

    // (c) reward recycling.
    const SystemConfig rc = make_config(2, 2, 2, 100, 1, 6, 20);
    const auto off = attack_reward_recycling(rc, 30, 10, false, rc.stake_d);
    o.require(off.total_spent > rc.stake_d, "(c) lock off spent " + std::to_string(off.total_spent));
    o.require(off.total_spent == off.closed_form, "(c) lock off differs from closed form");
    for (int budget = 0; budget <= 60; budget += 5)
        for (Coins reward = 0; reward <= 50; reward += 5) {
            const auto on = attack_reward_recycling(rc, budget, reward, true, rc.stake_d);
            o.require(on.total_spent <= rc.stake_d, "(c) lock on exceeded D at budget " + std::to_string(budget));
        }
    for (const char* name : {"reward_recycling_locked", "reward_recycling_unlocked"}) {
        const auto r = run_scenario(resolve(load_scenario(scenario_path(name))));
        o.require(r.passed, std::string("(c) scenario ") + name + " failed");
    }
}

// 6: censorship bribe funding w windows.
void criterion6(Outcome& o) {
    const auto r = run_scenario(resolve(load_scenario(scenario_path("censorship_bribe"))));
    const int w = r.scenario.attack.funded_windows;
    o.require(w >= 1, "no funded windows");
    int bribed = 0;
    for (const auto& row : r.windows)
        if (row.bribed) {
            ++bribed;
            o.require(row.paid == 0, "bribed window " + std::to_string(row.k) + " paid " + std::to_string(row.paid));
        }
    o.require(bribed == w, std::to_string(bribed) + " bribed windows, expected " + std::to_string(w));
    // Window indices are 0-based; window w+1 in 1-based counting is index w.
    int first = -1;
    for (const auto& row : r.windows)
        if (row.correct_proposer) {
            first = row.k;
            break;
        }
    o.require(first == w, "first correct-proposer window " + std::to_string(first));
    o.require(r.passed, "scenario checks failed");
}

// 7: strongest-chain uniqueness and the vote threshold.
void criterion7(Outcome& o) {
    for (int f = 1; f <= 12; ++f)
        o.require(strongest_chain_unique(f, strongest_need(f)), "non-unique strongest chain at f=" + std::to_string(f));
    o.require(!strongest_chain_unique(2, 1), "relaxed threshold still unique");
    o.require(strongest_threshold_votes(2).fraction == Rational(6, 7), "threshold at f=2 is not 6/7");
    const auto t20 = strongest_threshold_votes(20);
    const double frac = boost::rational_cast<double>(t20.fraction);
    o.require(std::abs(frac - 5.0 / 6.0) < kLimitFractionTol, "f=20 fraction " + std::to_string(frac));
    for (int f = 1; f <= 20; ++f) {
        const auto t = strongest_threshold_votes(f);
        o.require(t.votes == 2 * f + (f + 1) / 2 + 1 && t.n == 3 * f + 1, "threshold formula at f=" + std::to_string(f));
    }
}

// 8: case-study methodology on the synthetic trace.
void criterion8(Outcome& o) {
    SyntheticSpec spec;
    const auto trace = synthetic_trace(spec);
    const int f = (spec.n - 1) / 3;
    const auto c = classify(trace, spec.n, f, ClassifyOptions{1, std::nullopt});
    const double target = 0.9979;
    const double tol = kFractionBlocks / static_cast<double>(c.report.blocks);
    o.require(std::abs(c.report.fraction_strongest - target) <= tol,
              "fraction " + std::to_string(c.report.fraction_strongest));
    std::vector<std::int64_t> lens;
    for (const auto& s : c.report.weak_streaks) lens.push_back(s.length);
    o.require(lens == spec.weak_streaks, "streak lengths differ");

    const double d = 470000;
    const double low = 17e6 * 1800.0 / 86400.0;
    const double peak = 128e6 * 300.0 / 86400.0;
    const auto v1 = capacity(c.report, d, 17e6, spec.block_time_s, 1800);
    const auto v2 = capacity(c.report, d, 128e6, spec.block_time_s, 300);
    o.require(v1.feasible && v2.feasible, "capacity verdict infeasible");
    o.require(std::abs(v1.volume_per_delta_star - low) <= kCapacityRelTol * low, "median volume off");
    o.require(std::abs(v2.volume_per_delta_star - peak) <= kCapacityRelTol * peak, "peak volume off");
    o.require(std::abs(v1.volume_per_delta_star - 354000) <= kCapacityRelTol * 354000, "median volume vs 354k");
    o.require(std::abs(v2.volume_per_delta_star - 444000) <= kCapacityRelTol * 444000, "peak volume vs 444k");
    o.require(v1.sustainable_delta_star >= 1800, "median volume does not sustain 30 min");
}

// 9: gadget strength against classify over a simulated run.
void criterion9(Outcome& o) {
    Scenario sc;
    sc.name = "strength_agreement";
    sc.config = make_config(2, 1, 0, 100, 2, 4, 17, 99);
    sc.mode = NetMode::synchronous(sc.config.delta, sc.config.delta_gst);
    sc.rule = RuleKind::StrongestChain;
    sc.round_ticks = 4 * sc.config.delta;
    // A Byzantine leader skips some rounds; 25% headroom keeps the chain above kTraceBlocks.
    sc.run_ticks = (kTraceBlocks + kTraceBlocks / 4) * sc.round_ticks;
    sc.byzantine[0] = ByzBehavior::Delay;
    sc.byz_random_delay = true;
    sc.checks = {"no_fork"};
    const auto r = run_scenario(resolve(sc));
    const auto n = r.scenario.config.n;
    o.require(r.observer_chain.size() >= static_cast<std::size_t>(kTraceBlocks),
              "only " + std::to_string(r.observer_chain.size()) + " blocks");
    o.require(r.observer_strength.size() == r.observer_chain.size() && r.observer_recv.size() == r.observer_chain.size(),
              "observer trace lengths differ");
    if (!o.ok) return;
    ParticipationTrace t;
    t.n = n;
    for (std::size_t j = 0; j < r.observer_chain.size(); ++j) {
        const auto& [b, qc] = r.observer_chain[j];
        TraceRow row;
        row.height = b.height;
        row.proposer = b.proposer;
        row.signers = SignerSet::of(qc.signers, n);
        row.value = static_cast<double>(b.value);
        row.timestamp = static_cast<double>(r.observer_recv[j]);
        t.rows.push_back(row);
    }
    const auto c = classify(t, n, r.scenario.config.f,
                            ClassifyOptions{1, static_cast<double>(r.scenario.config.delta_star)});
    std::size_t mismatches = 0;
    std::set<int> seen;
    for (std::size_t j = 0; j < c.blocks.size(); ++j) {
        seen.insert(r.observer_strength[j]);
        if (c.blocks[j].i != r.observer_strength[j]) ++mismatches;
    }
    o.require(mismatches == 0, std::to_string(mismatches) + " blocks disagree");
    o.require(seen.size() >= 2, "strength never varied");
}

// 10: dominance on the tight-fork round game.
void criterion10(Outcome& o) {
    const SystemConfig cfg = make_config(2, 2, 2, 100, 1, 20, 50);
    const Rational rho(1);
    const auto g = build_fork_game(cfg, Rational(cfg.stake_d), rho);
    for (int p = 0; p < cfg.k; ++p) {
        const auto d = check_weak_dominance(g, p, 0);
        o.require(d.dominant, "follow not dominant for player " + std::to_string(p));
        o.require(!d.strict_profiles.empty(), "no strict profile for player " + std::to_string(p));
    }
    // f Byzantine plus ceil((f+1)/2) rationals split the correct validators
    // into two ledgers; D is shared among the joiners.
    const int join = (cfg.f + 2) / 2;
    std::vector<int> prof(g.players.size(), 0);
    for (int p = 0; p < join; ++p) prof[p] = 1;
    prof[cfg.k] = 1; // two_way
    const auto& u = g.payoff[g.index(prof)];
    const Rational expect = Rational(cfg.stake_d, join) - Rational(cfg.stake_d);
    o.require(u[0] == expect, "lemma profile utility " + rational_string(u[0]) + " != " + rational_string(expect));
    o.require(u[0] < Rational(0), "forking utility is not strictly negative in the lemma profile");
    const auto g2 = build_fork_game(cfg, Rational(cfg.stake_d + 1), rho);
    o.require(!check_weak_dominance(g2, 0, 0).dominant, "cap D+1 still dominant");
}

} // namespace

int main() {
    struct Item {
        int id;
        const char* what;
        double limit;
        std::function<void(Outcome&)> run;
    };
    const Item items[] = {
        {1, "tight fork n=7: double-spend = D, slashed, net 0", kLimit1, criterion1},
        {2, "1000 fuzzed sync runs without conflicting finalization or proofs", kLimit2, criterion2},
        {3, "bound sweep f<=20 under strong and strongest rules", kLimit3, criterion3},
        {4, "500 withdrawal races: no double-signer completes", kLimit4, criterion4},
        {5, "impossibility demonstrations (partial synchrony, f*=h, recycling)", kLimit5, criterion5},
        {6, "censorship bribe: censored windows unpaid, correct proposer by w+1", kLimit6, criterion6},
        {7, "strongest-chain uniqueness f<=12 and threshold fraction", kLimit7, criterion7},
        {8, "synthetic case study: fraction, streaks, capacity", kLimit8, criterion8},
        {9, "gadget strength equals classify over 10k blocks", kLimit9, criterion9},
        {10, "follow weakly dominates; lemma coalition strictly loses", kLimit10, criterion10},
    };
    int failed = 0;
    for (const auto& it : items) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            it.run(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.require(secs < it.limit, "took " + std::to_string(secs) + " s, limit " + std::to_string(it.limit));
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.2fs", secs);
        std::cout << (o.ok ? "PASS" : "FAIL") << " criterion " << it.id << ": " << it.what << " [" << buf << "]";
        if (!o.ok) std::cout << " -- " << o.why.str();
        std::cout << std::endl;
        if (!o.ok) ++failed;
    }
    return failed == 0 ? 0 : 1;
}

#include "cobra/adversary.hpp"

#include <doctest.h>

using namespace cobra;

TEST_SUITE("adversary") {

TEST_CASE("double-spend feasibility") {
    CHECK(double_spend_feasible(2, 2, 3, 5));
    CHECK_FALSE(double_spend_feasible(1, 1, 5, 5));
    const auto cfg = make_config(2, 1, 1, 100, 2, 10, 29);
    CHECK_FALSE(plan_double_spend(cfg, 100).has_value());
}

TEST_CASE("tight plan: three branches, share D") {
    const auto cfg = make_config(2, 2, 2, 100, 2, 10, 29);
    const auto p = plan_double_spend(cfg, 100);
    REQUIRE(p.has_value());
    CHECK(p->coalition.size() == 4u);
    CHECK(p->rationals.size() == 2u);
    CHECK(p->partitions.size() == 3u);
    CHECK(p->gamma == 2);
    CHECK(p->share == Rational(100));
    std::size_t correct = 0;
    for (const auto& b : p->partitions) correct += b.size();
    CHECK(correct == 3u);
}

TEST_CASE("rational_decide joins only on strict gain") {
    const auto cfg = make_config(2, 2, 2, 100, 2, 10, 29);
    auto p = *plan_double_spend(cfg, 100);
    CHECK(rational_decide(p, cfg, true, false) == Decision::Abstain);
    CHECK(rational_decide(p, cfg, true, true) == Decision::Join);
    p.share = Rational(99);
    CHECK(rational_decide(p, cfg, true, false) == Decision::Abstain);
    p.share = Rational(101);
    CHECK(rational_decide(p, cfg, true, false) == Decision::Join);
    // Without certain slashing the penalty vanishes.
    p.share = Rational(100);
    CHECK(rational_decide(p, cfg, false, false) == Decision::Join);
}

TEST_CASE("reward recycling") {
    const auto cfg = make_config(2, 2, 2, 100, 1, 6, 20);
    const auto off = attack_reward_recycling(cfg, 30, 10, false, 100);
    CHECK(off.total_spent > 100);
    CHECK(off.total_spent == off.closed_form);
    CHECK(attack_reward_recycling(cfg, 30, 10, true, 100).total_spent <= 100);
    CHECK(attack_reward_recycling(cfg, 30, 0, false, 100).total_spent == 100);
}

TEST_CASE("censorship pool depletion") {
    const auto none = attack_censorship(0, 10, 2, 10);
    CHECK(none.funded_windows == 0);
    CHECK(none.first_uncensored_window == 0);
    const auto two = attack_censorship(40, 10, 2, 10);
    CHECK(two.rationals_accept);
    CHECK(two.funded_windows == 2);
    CHECK(two.first_uncensored_window == 2);
    const auto cheap = attack_censorship(40, 5, 2, 10);
    CHECK_FALSE(cheap.rationals_accept);
    CHECK(cheap.first_uncensored_window == 0);
}

TEST_CASE("utility accounting") {
    const auto rep = account_utilities({{2, true, 100, true, 0, 0}, {3, false, 0, false, 14, 0}, {4, false, 0, false, 0, 9}},
                                       100);
    REQUIRE(rep.lines.size() == 3u);
    CHECK(rep.lines[0].net == 0);
    CHECK(rep.lines[0].gain == 100);
    CHECK(rep.lines[0].penalty == 100);
    CHECK(rep.lines[1].net == 14);
    CHECK(rep.lines[2].net == 9);
}

TEST_CASE("fork game: follow dominates at cap D, not at D+1") {
    const auto cfg = make_config(2, 2, 2, 100, 1, 20, 50);
    const auto g = build_fork_game(cfg, Rational(100), Rational(1));
    CHECK(g.players.size() == 3u);
    for (int p = 0; p < 2; ++p) CHECK(check_weak_dominance(g, p, 0).dominant);
    const auto g2 = build_fork_game(cfg, Rational(101), Rational(1));
    const auto d = check_weak_dominance(g2, 0, 0);
    CHECK_FALSE(d.dominant);
    CHECK_FALSE(d.witness.empty());
}

}

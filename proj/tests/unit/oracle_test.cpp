#include "cobra/oracle.hpp"

#include <doctest.h>

using namespace cobra;

namespace {

NormalFormGame two_by_two(const std::vector<std::vector<Rational>>& table) {
    NormalFormGame g;
    g.players = {"a", "b"};
    g.strategies = {{"s0", "s1"}, {"s0", "s1"}};
    g.payoff = table;
    return g;
}

} // namespace

TEST_SUITE("oracle") {

TEST_CASE("stake-bounded bound is D") {
    const auto r = max_double_spend({4, 0, RuleKind::StakeBounded, 100});
    CHECK(r.value == Rational(100));
    CHECK(r.argmax_m == 0);
}

TEST_CASE("strong-chain f=8 i=3 exhaustive m-search") {
    const auto r = max_double_spend({8, 3, RuleKind::StrongChain, 100});
    REQUIRE(r.terms.size() == 6u);
    Rational best(0);
    for (int m = 0; m <= 5; ++m) {
        const Rational t(static_cast<std::int64_t>(8 - m - 3) * 8 * 100, static_cast<std::int64_t>(8 - m) * (8 - m));
        CHECK(r.terms[static_cast<std::size_t>(m)] == t);
        best = std::max(best, t);
    }
    CHECK(r.value == best);
    CHECK(r.value <= Rational(100));
    // m = 0 gives 5*8/64*100 = 62.5, m = 2 gives 3*8/36*100 = 66.67.
    CHECK(r.terms[0] == Rational(125, 2));
    CHECK(r.argmax_m == 2);
    CHECK(r.value == Rational(200, 3));
}

TEST_CASE("all validators on one chain leave nothing to double-spend") {
    CHECK(max_double_spend({8, 8, RuleKind::StrongChain, 100}).value == Rational(0));
}

TEST_CASE("sweep stays at or below D for every rule") {
    for (int f = 1; f <= 20; ++f)
        for (int i = 0; i <= f; ++i)
            for (auto rule : {RuleKind::StakeBounded, RuleKind::StrongChain, RuleKind::StrongestChain})
                CHECK(max_double_spend({f, i, rule, 100}).value <= Rational(100));
}

TEST_CASE("second strongest sub-case enumeration stays below D") {
    for (int f = 1; f <= 12; ++f)
        for (int i = 0; i <= f; ++i)
            for (const auto& row : case3b_rows(f, i, 100)) CHECK(row.enumerated <= Rational(100));
}

TEST_CASE("collusion bound") {
    CHECK(collusion_bound_mF(2, Rational(100), 2) == Rational(100));
    CHECK(collusion_bound_mF(0, Rational(100), 2) == Rational(0));
    CHECK(collusion_bound_mF(3, Rational(100), 6) == Rational(50));
    CHECK_THROWS_AS(collusion_bound_mF(1, Rational(100), 0), DivisionByZero);
}

TEST_CASE("strongest-chain uniqueness") {
    CHECK(strongest_need(2) == 2);
    CHECK(strongest_need(5) == 4);
    CHECK(strongest_chain_unique(2, strongest_need(2)));
    CHECK(strongest_chain_unique(5, strongest_need(5)));
    CHECK_FALSE(strongest_chain_unique(2, 1));
}

TEST_CASE("threshold votes") {
    const auto t2 = strongest_threshold_votes(2);
    CHECK(t2.votes == 6);
    CHECK(t2.n == 7);
    CHECK(t2.fraction == Rational(6, 7));
    const auto t6 = strongest_threshold_votes(6);
    CHECK(t6.votes == 16);
    CHECK(t6.n == 19);
    const double f200 = boost::rational_cast<double>(strongest_threshold_votes(200).fraction);
    CHECK(f200 == doctest::Approx(5.0 / 6.0).epsilon(0.005));
}

TEST_CASE("prisoner's dilemma: defect dominates") {
    // Strategy 0 cooperate, 1 defect; player 0 least significant in the profile index.
    const auto g = two_by_two({{3, 3}, {5, 0}, {0, 5}, {1, 1}});
    CHECK(g.index({1, 0}) == 1u);
    const auto d = check_weak_dominance(g, 0, 1);
    CHECK(d.dominant);
    CHECK(d.strict_profiles.size() == 1u);
    const auto c = check_weak_dominance(g, 0, 0);
    CHECK_FALSE(c.dominant);
    CHECK(c.witness.size() == 2u);
    CHECK(c.witness[0] == 1);
}

TEST_CASE("ties everywhere are not weak dominance") {
    const auto g = two_by_two({{1, 1}, {1, 1}, {1, 1}, {1, 1}});
    const auto d = check_weak_dominance(g, 0, 0);
    CHECK_FALSE(d.dominant);
    CHECK(d.missing_strict);
}

TEST_CASE("single-strategy game is vacuously dominant") {
    NormalFormGame g;
    g.players = {"solo"};
    g.strategies = {{"only"}};
    g.payoff = {{Rational(0)}};
    CHECK(check_weak_dominance(g, 0, 0).dominant);
}

}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cms/bigint.hpp"
#include "cms/errors.hpp"
#include "cms/transition_system.hpp"
#include "cms/words.hpp"
#include "support.hpp"

#include <random>

using namespace cms;
using testing::word;

namespace {

TransitionSystem ones_bouquet(std::optional<std::uint64_t> L = std::nullopt)
{
    return TransitionSystem::bouquet(LoopCounts::ones(), L);
}

TransitionSystem self_loop() { return TransitionSystem::finite({{1}}); }

// Closed walks of length n at state a by repeated multiplication.
BigInt closed_walks(const std::vector<std::vector<int>>& m, std::size_t n, std::size_t a)
{
    const std::size_t k = m.size();
    std::vector<BigInt> v(k, 0);
    v[a] = 1;
    for (std::size_t step = 0; step < n; ++step) {
        std::vector<BigInt> next(k, 0);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                if (m[i][j])
                    next[j] += v[i];
        v = next;
    }
    return v[a];
}

std::vector<std::vector<int>> random_irreducible(std::mt19937& rng, std::size_t k)
{
    std::vector<std::vector<int>> m(k, std::vector<int>(k, 0));
    std::bernoulli_distribution extra(0.35);
    for (std::size_t i = 0; i < k; ++i) {
        m[i][(i + 1) % k] = 1;
        for (std::size_t j = 0; j < k; ++j)
            if (extra(rng))
                m[i][j] = 1;
    }
    return m;
}

// Compositions of N with parts weighted by a(n) = 1 (up to L).
BigInt compositions(std::size_t N, std::size_t L)
{
    std::vector<BigInt> c(N + 1, 0);
    c[0] = 1;
    for (std::size_t n = 1; n <= N; ++n)
        for (std::size_t m = 1; m <= std::min(n, L); ++m)
            c[n] += c[n - m];
    return c[N];
}

} // namespace

TEST_CASE("admissibility on the full shift and the bouquet")
{
    CHECK(is_admissible(TransitionSystem::full_shift(2), word({"1", "2", "1"})));
    const auto B = ones_bouquet();
    CHECK(is_admissible(B, word({"r", "v(3,1,1)", "v(3,1,2)", "r"})));
    CHECK_FALSE(is_admissible(B, word({"v(3,1,1)", "r"})));
    CHECK(is_admissible(B, Word{}));
    CHECK(is_admissible(B, word({"v(7,1,6)"})));
    CHECK_THROWS_AS(is_admissible(B, word({"v(3,2,1)"})), DomainError);
    CHECK_THROWS_AS(is_admissible(TransitionSystem::full_shift(2), word({"3"})), DomainError);
}

TEST_CASE("bouquet successors and state order")
{
    const auto B = ones_bouquet(4);
    const auto succ = B.successors(StateId::root());
    REQUIRE(succ.size() == 4);
    CHECK(succ[0] == StateId::root());
    CHECK(succ[1] == StateId::loop(2, 1, 1));
    CHECK(succ[3] == StateId::loop(4, 1, 1));
    CHECK(B.successors(StateId::loop(4, 1, 3)) == std::vector<StateId>{StateId::root()});
    CHECK(B.order_index(StateId::root()) == 1);
    CHECK(B.order_index(StateId::loop(2, 1, 1)) == 2);
    CHECK(B.order_index(StateId::loop(3, 1, 2)) == 4);
    for (std::uint64_t i = 1; i <= 7; ++i)
        CHECK(B.order_index(B.state_at(i)) == i);
    CHECK(B.state_count() == std::optional<std::uint64_t>(1 + 1 + 2 + 3));
}

TEST_CASE("loop vertex positions are bounded by the loop length")
{
    const auto B = ones_bouquet();
    CHECK_FALSE(B.contains(StateId::loop(3, 1, 3)));
    CHECK_FALSE(B.contains(StateId::loop(3, 1, 0)));
    CHECK(B.contains(StateId::loop(3, 1, 2)));
}

TEST_CASE("finite matrices must be irreducible")
{
    CHECK_THROWS_AS(TransitionSystem::finite({{1, 1}, {0, 1}}), DomainError);
    CHECK_NOTHROW(TransitionSystem::finite({{0, 1}, {1, 0}}));
}

TEST_CASE("enumerate_words order, filters and limits")
{
    const auto F = TransitionSystem::full_shift(2);
    const auto all = enumerate_words(F, 2, {}, {}, 100);
    CHECK(all.exhaustive);
    REQUIRE(all.words.size() == 4);
    CHECK(all.words[0] == word({"1", "1"}));
    CHECK(all.words[1] == word({"1", "2"}));
    CHECK(all.words[2] == word({"2", "1"}));
    CHECK(all.words[3] == word({"2", "2"}));

    const auto few = enumerate_words(F, 3, {}, {}, 2);
    CHECK(few.words.size() == 2);
    CHECK_FALSE(few.exhaustive);

    const auto B = ones_bouquet(3);
    auto at_root = [](const StateId& s) { return s.is_root(); };
    const auto rr = enumerate_words(B, 3, at_root, at_root, 100);
    CHECK(rr.exhaustive);
    REQUIRE(!rr.words.empty());
    CHECK(rr.words[0] == word({"r", "r", "r"}));
    // root-to-root words with 2 steps are compositions of 2
    CHECK(BigInt(rr.words.size()) == compositions(2, 3));
    for (const auto& w : rr.words)
        CHECK(is_admissible(B, w));
}

TEST_CASE("enumeration refuses unbounded branching")
{
    const auto B = ones_bouquet();
    try {
        (void)enumerate_words(B, 3, {}, {}, 10);
        FAIL("expected a refusal");
    } catch (const RefusalError& e) {
        CHECK(e.parameter() == "truncate_len");
    }
}

TEST_CASE("generated words are admissible")
{
    const auto B = ones_bouquet(5);
    for (std::size_t len = 1; len <= 7; ++len)
        for_each_word(B, len, {}, {}, [&](std::span<const StateId> w) {
            CHECK(is_admissible(B, w));
            return true;
        });
}

TEST_CASE("periodic points")
{
    const auto F = TransitionSystem::full_shift(2);
    CHECK(periodic_points(F, 3, StateId::plain(1)).size() == 4);
    const auto B = ones_bouquet();
    const auto two = periodic_points(B, 2, StateId::root());
    REQUIRE(two.size() == 2);
    CHECK(two[0] == word({"r", "r"}));
    CHECK(two[1] == word({"r", "v(2,1,1)"}));
    const auto loop = periodic_points(self_loop(), 5, StateId::plain(1));
    REQUIRE(loop.size() == 1);
    CHECK(loop[0] == word({"1", "1", "1", "1", "1"}));
}

TEST_CASE("periodic point counts agree with matrix powers")
{
    std::mt19937 rng(20261016);
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t k = 2 + trial % 4;
        const auto m = random_irreducible(rng, k);
        const auto T = TransitionSystem::finite(m);
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t n = 1; n <= 12; ++n) {
                const BigInt want = closed_walks(m, n, a);
                CHECK(periodic_point_count(T, n, StateId::plain(a + 1)) == want);
                if (n <= 8) {
                    BigInt seen = 0;
                    for_each_periodic_point(T, n, StateId::plain(a + 1), [&](std::span<const StateId>) {
                        seen += 1;
                        return true;
                    });
                    CHECK(seen == want);
                }
            }
    }
}

TEST_CASE("bouquet periodic point counts are compositions")
{
    const auto B = ones_bouquet();
    for (std::size_t n = 1; n <= 16; ++n)
        CHECK(periodic_point_count(B, n, StateId::root()) == compositions(n, n));
    const auto T = ones_bouquet(4);
    for (std::size_t n = 1; n <= 14; ++n)
        CHECK(periodic_point_count(T, n, StateId::root()) == compositions(n, 4));
}

TEST_CASE("shortest connectors")
{
    const auto F = TransitionSystem::full_shift(2);
    CHECK(shortest_connector(F, StateId::plain(1), StateId::plain(2)) == word({"1"}));
    const auto B = ones_bouquet();
    CHECK(shortest_connector(B, StateId::root(), StateId::loop(3, 1, 1)) == word({"r"}));
    CHECK(shortest_connector(B, StateId::loop(3, 1, 1), StateId::root()) == word({"v(3,1,1)", "v(3,1,2)"}));
    const auto T = ones_bouquet(6);
    CHECK(shortest_connector_search(T, StateId::loop(3, 1, 1), StateId::loop(5, 1, 2), 10)
          == word({"v(3,1,1)", "v(3,1,2)", "r", "v(5,1,1)"}));
    try {
        (void)shortest_connector_search(T, StateId::loop(6, 1, 1), StateId::root(), 3);
        FAIL("expected an unreachable error");
    } catch (const UnreachableError& e) {
        CHECK(e.horizon() == 3);
    }
}

TEST_CASE("connectors are no longer than any connecting word")
{
    const auto T = ones_bouquet(5);
    const auto states = T.states();
    for (const auto& a : states)
        for (const auto& b : states) {
            const auto w = shortest_connector(T, a, b);
            REQUIRE(!w.empty());
            CHECK(w.front() == a);
            Word full = w;
            full.push_back(b);
            CHECK(is_admissible(T, full));
            // no shorter word connects a to b
            for (std::size_t len = 1; len < w.size(); ++len)
                for_each_word(T, len + 1, [&](const StateId& s) { return s == a; },
                              [&](const StateId& s) { return s == b; }, [&](std::span<const StateId>) {
                                  FAIL("found a shorter connector");
                                  return false;
                              });
        }
}

TEST_CASE("f-property counts")
{
    const auto F = TransitionSystem::full_shift(2);
    CHECK(f_property_count(F, 2, 2).count == 8);
    CHECK(f_property_count(F, 2, 3).count == 16);
    const auto B = ones_bouquet();
    CHECK(f_property_count(B, 1, 4).count == 8);
    CHECK(f_property_count(F, 0, 3).count == 0);
    for (std::size_t N = 1; N <= 20; ++N)
        CHECK(f_property_count(B, 1, N).count == compositions(N, N));
    const auto big = f_property_count(TransitionSystem::full_shift(3), 3, 60, BigInt(1) << 20);
    CHECK(big.overflow);
}

TEST_CASE("geometric bouquet counts use exact loop multiplicities")
{
    const auto B = TransitionSystem::bouquet(LoopCounts::geometric(2).with_first(1), 6);
    // Root-to-Root words with N steps: sum over compositions of prod a(n_j)
    std::vector<BigInt> c(13, 0);
    c[0] = 1;
    for (std::size_t n = 1; n <= 12; ++n)
        for (std::size_t m = 1; m <= std::min<std::size_t>(n, 6); ++m)
            c[n] += c[n - m] * (m == 1 ? BigInt(1) : (BigInt(1) << m));
    for (std::size_t n = 1; n <= 12; ++n) {
        CHECK(periodic_point_count(B, n, StateId::root()) == c[n]);
        CHECK(f_property_count(B, 1, n).count == c[n]);
    }
}

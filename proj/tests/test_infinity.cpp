#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cms/infinity.hpp"
#include "cms/potential.hpp"
#include "cms/thermo.hpp"
#include "cms/transition_system.hpp"
#include "cms/words.hpp"
#include "support.hpp"

#include <random>

using namespace cms;
using testing::ln2;

namespace {

BigInt binomial(std::uint64_t n, std::uint64_t k)
{
    if (k > n)
        return 0;
    BigInt r = 1;
    for (std::uint64_t i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}

bool same(double a, double b)
{
    if (std::isinf(a) || std::isinf(b))
        return a == b;
    return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a));
}

Potential halving()
{
    LoopWeightRule rule;
    rule.rate = std::log(2.0);
    return Potential::bouquet(rule, BouquetScheme::Entry);
}

} // namespace

TEST_CASE("cylinders that stay high on the full 3-shift")
{
    const auto F = TransitionSystem::full_shift(3);
    CHECK(count_B(F, nullptr, 5, 3, 1).z == 16);
    CHECK(count_B(F, nullptr, 5, 3, 1, CountMethod::Enumeration).z == 16);
}

TEST_CASE("root visits on the ones bouquet")
{
    // k loops use k+1 root visits; compositions of n into k parts number C(n-1, k-1)
    const auto T = TransitionSystem::bouquet(LoopCounts::ones(), 40);
    for (std::uint64_t M : {1u, 2u, 3u, 5u})
        for (std::size_t n = 1; n <= 30; ++n) {
            BigInt want = 0;
            for (std::uint64_t k = 1; k <= n; ++k)
                if (M * (k + 1) <= n + 1)
                    want += binomial(n - 1, k - 1);
            CHECK(count_B(T, nullptr, n, M, 1).z == want);
        }
}

TEST_CASE("empty cylinder sets")
{
    const auto F = TransitionSystem::full_shift(3);
    const Potential zero(1, 0.0);
    for (std::uint64_t M = 2; M <= 4; ++M)
        for (std::size_t n = 1; n + 1 < 2 * M; ++n) {
            const auto b = count_B(F, &zero, n, M, 1);
            CHECK(b.z == 0);
            CHECK(b.z_phi == kNegInf);
        }
}

TEST_CASE("DP counts match enumeration on small systems")
{
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> u(-2.0, 0.5);
    const auto T = TransitionSystem::bouquet(LoopCounts::list({1, 2, 1, 3, 1}), 5);
    Potential phi(2, 0.0);
    for (const auto& w : enumerate_words(T, 2, {}, {}, 1000).words)
        phi.set(w, u(rng));
    const auto F = TransitionSystem::finite({{0, 1, 1}, {1, 1, 0}, {1, 1, 1}});
    Potential psi(2, 0.0);
    for (const auto& w : enumerate_words(F, 2, {}, {}, 100).words)
        psi.set(w, u(rng));
    for (std::uint64_t q : {1u, 2u, 4u})
        for (std::uint64_t M : {1u, 2u, 3u}) {
            const auto series = count_B_series(T, &phi, 11, M, q);
            const auto fseries = count_B_series(F, &psi, 10, M, std::min<std::uint64_t>(q, 2));
            for (std::size_t n = 1; n <= 11; ++n) {
                const auto e = count_B(T, &phi, n, M, q, CountMethod::Enumeration);
                CHECK(series[n - 1].z == e.z);
                CHECK(same(series[n - 1].z_phi, e.z_phi));
                if (n <= 10) {
                    const auto fe = count_B(F, &psi, n, M, std::min<std::uint64_t>(q, 2), CountMethod::Enumeration);
                    CHECK(fseries[n - 1].z == fe.z);
                    CHECK(same(fseries[n - 1].z_phi, fe.z_phi));
                }
            }
        }
}

TEST_CASE("counts never grow with M")
{
    const auto T = TransitionSystem::bouquet(LoopCounts::geometric(2).with_first(1), 12);
    for (std::uint64_t q : {1u, 3u, 10u}) {
        std::vector<BCount> prev;
        for (std::uint64_t M = 1; M <= 8; ++M) {
            const auto cur = count_B_series(T, nullptr, 24, M, q);
            if (!prev.empty())
                for (std::size_t n = 0; n < cur.size(); ++n)
                    CHECK(cur[n].z <= prev[n].z);
            prev = cur;
        }
    }
    const auto prof = hinf_profile(T, {1, 3}, {2, 4, 8}, 24);
    CHECK(prof.counts_monotone_in_M);
}

TEST_CASE("composition bound dominates")
{
    const auto T = TransitionSystem::bouquet(LoopCounts::list({1, 2, 2, 3, 1, 2}), 6);
    for (std::uint64_t q : {1u, 2u, 5u})
        for (std::uint64_t M : {2u, 3u})
            for (std::size_t n = 1; n <= 12; ++n)
                CHECK(count_B(T, nullptr, n, M, q, CountMethod::Enumeration).z <= composition_bound(T, n, M, q));
}

TEST_CASE("loop-count growth rates")
{
    CHECK(bouquet_hinf_oracle(LoopCounts::geometric(2)) == doctest::Approx(ln2()));
    CHECK(bouquet_hinf_oracle(LoopCounts::ones()) == 0.0);
    CHECK(bouquet_hinf_oracle(LoopCounts::double_exponential()) == kInf);
}

TEST_CASE("entropy at infinity of the ones bouquet vanishes")
{
    const auto T = TransitionSystem::bouquet(LoopCounts::ones(), 80);
    const auto prof = hinf_profile(T, {1}, {4, 8, 16}, 80);
    // compositions into at most n/M parts grow like (1/n) log C(n, n/M)
    double prev = kInf;
    for (std::uint64_t M : {4u, 8u, 16u}) {
        const double s = prof.cell(M, 1).slope;
        CHECK(s <= prev + 1e-9);
        prev = s;
    }
    CHECK(prof.cell(16, 1).slope < 0.25);
    CHECK(prof.slopes_monotone_in_M);
}

TEST_CASE("entropy at infinity of the doubling bouquet")
{
    const auto T = TransitionSystem::bouquet(LoopCounts::geometric(2).with_first(1), 25);
    const auto prof = hinf_profile(T, {1}, {2, 4, 8}, 30);
    CHECK(prof.slopes_monotone_in_M);
    for (std::uint64_t M : {2u, 4u, 8u})
        CHECK(prof.cell(M, 1).slope >= ln2() - 0.05);
}

TEST_CASE("finite shifts have nothing at infinity once q covers the alphabet")
{
    const auto F = TransitionSystem::full_shift(3);
    const auto prof = hinf_profile(F, {3}, {2, 3}, 12);
    for (const auto& c : prof.cells)
        for (const auto& z : c.z)
            CHECK(z == 0);
    CHECK(prof.h_inf == kNegInf);
}

TEST_CASE("contraction at infinity")
{
    const auto F = TransitionSystem::full_shift(3);
    const Potential zero(1, 0.0);
    const auto flat = delta_profile(F, zero, {1}, {2, 3}, 12);
    for (const auto& c : flat.cells)
        for (std::size_t n = 0; n < c.z.size(); ++n)
            if (c.z[n] != 0)
                CHECK(c.z_phi[n] == 0.0);

    const auto T = TransitionSystem::bouquet(LoopCounts::ones(), 40);
    const auto half = delta_profile(T, halving(), {1}, {2, 4}, 40);
    for (const auto& c : half.cells)
        for (std::size_t n = 0; n < c.z.size(); ++n)
            if (c.z[n] != 0)
                CHECK(c.z_phi[n] == doctest::Approx(-ln2()).epsilon(1e-12));
    CHECK(half.delta == doctest::Approx(-ln2()).epsilon(1e-12));
    const auto ci = ci_check(half, 0.0);
    CHECK(ci.verdict == Verdict::Holds);
}

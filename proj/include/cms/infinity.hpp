#pragma once

#include "bigint.hpp"
#include "loop_counts.hpp"
#include "numeric.hpp"
#include "potential.hpp"
#include "thermo.hpp"
#include "transition_system.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace cms {

/// B(n, M, q): admissible (n+1)-words x_0..x_n with x_0, x_n <= q and
/// M * #{k : x_k <= q} <= n + 1.
struct BCount {
    BigInt z;
    /// max over B(n,M,q) of (1/n) S_n phi; -inf when B is empty.
    double z_phi = kNegInf;
};

enum class CountMethod { DP, Enumeration };

BCount count_B(const TransitionSystem& system, const Potential* phi, std::size_t n, std::uint64_t M, std::uint64_t q,
               CountMethod method = CountMethod::DP);
/// count_B for every n = 1..horizon at once (index n-1).
std::vector<BCount> count_B_series(const TransitionSystem& system, const Potential* phi, std::size_t horizon,
                                   std::uint64_t M, std::uint64_t q, CountMethod method = CountMethod::DP);

struct InfinityCell {
    std::uint64_t M = 0;
    std::uint64_t q = 0;
    std::vector<BigInt> z;       // index n-1
    std::vector<double> log_z;   // -inf when z = 0
    std::vector<double> z_phi;   // empty without a potential
    double slope = kNegInf;      // growth rate of z_n on the tail half
    double slope_stderr = 0.0;
    double delta = kNegInf;      // max of z_phi over the tail half
    double delta_band = 0.0;     // spread of z_phi over the tail half
};

struct InfinityProfile {
    std::size_t horizon = 0;
    std::vector<std::uint64_t> Ms;
    std::vector<std::uint64_t> qs;
    std::vector<InfinityCell> cells; // q-major, then M
    /// z_n(M', q) <= z_n(M, q) for M' >= M at every n.
    bool counts_monotone_in_M = true;
    /// Fitted slopes non-increasing in M at each q.
    bool slopes_monotone_in_M = true;
    /// Slope at the largest M for each q (estimates h_inf(q)), and the value
    /// at the largest q (estimates h_inf).
    std::vector<double> h_inf_q;
    double h_inf = kNegInf;
    std::vector<double> delta_q;
    double delta = kNegInf;
    double delta_band = 0.0;

    [[nodiscard]] const InfinityCell& cell(std::uint64_t M, std::uint64_t q) const;
};

InfinityProfile hinf_profile(const TransitionSystem& system, const std::vector<std::uint64_t>& qs,
                             const std::vector<std::uint64_t>& Ms, std::size_t horizon);
InfinityProfile delta_profile(const TransitionSystem& system, const Potential& phi, const std::vector<std::uint64_t>& qs,
                              const std::vector<std::uint64_t>& Ms, std::size_t horizon);

struct CiResult {
    Verdict verdict = Verdict::Inconclusive;
    double delta = 0.0;
    double band = 0.0;
    double pressure = 0.0;
};
/// Holds when delta + band < P, fails when delta - band >= P.
CiResult ci_check(const InfinityProfile& profile, double pressure);

/// limsup (1/n) log a(n) for a loop-count family.
double bouquet_hinf_oracle(const LoopCounts& counts);

/// Loop-decomposition bound on z_n(M, q) for a bouquet: every counted word is
/// an exit segment, k <= n/M whole loops and an entry segment.
BigInt composition_bound(const TransitionSystem& system, std::size_t n, std::uint64_t M, std::uint64_t q);

} // namespace cms

#include "cms/infinity.hpp"

#include "bouquet_paths.hpp"
#include "cms/errors.hpp"
#include "cms/words.hpp"

#include <algorithm>
#include <cmath>

namespace cms {

namespace {

void check_grid(std::uint64_t M, std::uint64_t q)
{
    if (M == 0)
        throw DomainError("M must be at least 1");
    if (q == 0)
        throw DomainError("q must be at least 1");
}

// Largest visit count allowed in B(n, M, q): M v <= n + 1.
std::uint64_t max_visits(std::size_t n, std::uint64_t M) { return (n + 1) / M; }

std::vector<BCount> bouquet_series(const TransitionSystem& system, const Potential* phi, std::size_t N,
                                   std::uint64_t M, std::uint64_t q)
{
    const bool weighted = phi != nullptr;
    detail::BouquetPaths paths(system, q, N, weighted ? phi->edge_function() : nullptr,
                               weighted ? phi->tabled_loops() : std::set<std::pair<std::uint64_t, std::uint64_t>>{});
    const auto R = paths.root_table<detail::CountRing>(true);
    std::vector<std::vector<std::vector<double>>> best;
    if (weighted)
        best.push_back(paths.root_table<detail::MaxPlusRing>(true));
    std::vector<BCount> out(N);
    for (std::size_t n = 1; n <= N; ++n) {
        const std::uint64_t V = max_visits(n, M);
        double top = kNegInf;
        for (const auto& a : paths.lows())
            for (const auto& b : paths.lows()) {
                out[n - 1].z += paths.paths<detail::CountRing>(R, a, b, n, V);
                if (weighted)
                    top = std::max(top, paths.paths<detail::MaxPlusRing>(best[0], a, b, n, V));
            }
        if (weighted && top != kNegInf)
            out[n - 1].z_phi = top / static_cast<double>(n);
    }
    return out;
}

std::vector<BCount> finite_series(const TransitionSystem& system, const Potential* phi, std::size_t N, std::uint64_t M,
                                  std::uint64_t q)
{
    const std::size_t k = system.matrix_size();
    const std::size_t lows = std::min<std::size_t>(k, q);
    const std::size_t width = N + 2;
    std::vector<BCount> out(N);
    // state x visits, counts and best sums.
    for (std::size_t start = 0; start < lows; ++start) {
        std::vector<std::vector<BigInt>> cnt(k, std::vector<BigInt>(width, 0));
        std::vector<std::vector<double>> top(k, std::vector<double>(width, kNegInf));
        cnt[start][1] = 1;
        top[start][1] = 0.0;
        for (std::size_t n = 1; n <= N; ++n) {
            std::vector<std::vector<BigInt>> c2(k, std::vector<BigInt>(width, 0));
            std::vector<std::vector<double>> t2(k, std::vector<double>(width, kNegInf));
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j) {
                    if (!system.matrix_entry(i, j))
                        continue;
                    const std::size_t add = j < lows ? 1 : 0;
                    const double w = phi ? phi->edge_weight(StateId::plain(i + 1), StateId::plain(j + 1)) : 0.0;
                    for (std::size_t v = 0; v + add < width; ++v) {
                        if (cnt[i][v].is_zero())
                            continue;
                        c2[j][v + add] += cnt[i][v];
                        t2[j][v + add] = std::max(t2[j][v + add], top[i][v] + w);
                    }
                }
            cnt.swap(c2);
            top.swap(t2);
            const std::uint64_t V = max_visits(n, M);
            for (std::size_t j = 0; j < lows; ++j)
                for (std::size_t v = 0; v <= std::min<std::uint64_t>(V, width - 1); ++v) {
                    if (cnt[j][v].is_zero())
                        continue;
                    out[n - 1].z += cnt[j][v];
                    if (phi)
                        out[n - 1].z_phi = std::max(out[n - 1].z_phi, top[j][v] / static_cast<double>(n));
                }
        }
    }
    return out;
}

BCount enumerate_B(const TransitionSystem& system, const Potential* phi, std::size_t n, std::uint64_t M,
                   std::uint64_t q)
{
    BCount out;
    const StateFilter is_low = [&](const StateId& s) { return system.order_index(s) <= q; };
    double top = kNegInf;
    for_each_word(system, n + 1, is_low, is_low, [&](std::span<const StateId> w) {
        std::uint64_t visits = 0;
        for (const auto& s : w)
            visits += is_low(s) ? 1 : 0;
        if (visits * M > n + 1)
            return true;
        out.z += 1;
        if (phi)
            top = std::max(top, cylinder_sup(system, *phi, w, n));
        return true;
    });
    if (phi && top != kNegInf)
        out.z_phi = top / static_cast<double>(n);
    return out;
}

} // namespace

std::vector<BCount> count_B_series(const TransitionSystem& system, const Potential* phi, std::size_t horizon,
                                   std::uint64_t M, std::uint64_t q, CountMethod method)
{
    check_grid(M, q);
    if (horizon == 0)
        throw DomainError("horizon must be at least 1");
    if (method == CountMethod::DP && (!phi || phi->memory() <= 2))
        return system.is_bouquet() ? bouquet_series(system, phi, horizon, M, q)
                                   : finite_series(system, phi, horizon, M, q);
    std::vector<BCount> out;
    for (std::size_t n = 1; n <= horizon; ++n)
        out.push_back(enumerate_B(system, phi, n, M, q));
    return out;
}

BCount count_B(const TransitionSystem& system, const Potential* phi, std::size_t n, std::uint64_t M, std::uint64_t q,
               CountMethod method)
{
    check_grid(M, q);
    if (n == 0)
        throw DomainError("n must be at least 1");
    if (method == CountMethod::Enumeration || (phi && phi->memory() > 2))
        return enumerate_B(system, phi, n, M, q);
    return count_B_series(system, phi, n, M, q, method).back();
}

const InfinityCell& InfinityProfile::cell(std::uint64_t M, std::uint64_t q) const
{
    for (const auto& c : cells)
        if (c.M == M && c.q == q)
            return c;
    throw DomainError("no profile cell for M = " + std::to_string(M) + ", q = " + std::to_string(q));
}

namespace {

InfinityProfile build_profile(const TransitionSystem& system, const Potential* phi, std::vector<std::uint64_t> qs,
                              std::vector<std::uint64_t> Ms, std::size_t N)
{
    if (qs.empty() || Ms.empty())
        throw DomainError("M and q grids must be non-empty");
    if (N == 0)
        throw DomainError("horizon must be at least 1");
    std::sort(qs.begin(), qs.end());
    qs.erase(std::unique(qs.begin(), qs.end()), qs.end());
    std::sort(Ms.begin(), Ms.end());
    Ms.erase(std::unique(Ms.begin(), Ms.end()), Ms.end());
    InfinityProfile prof;
    prof.horizon = N;
    prof.Ms = Ms;
    prof.qs = qs;
    const std::size_t first = N / 2 + 1;
    for (auto q : qs) {
        for (auto M : Ms) {
            InfinityCell cell;
            cell.M = M;
            cell.q = q;
            for (auto& b : count_B_series(system, phi, N, M, q)) {
                cell.log_z.push_back(b.z.is_zero() ? kNegInf : log_of(b.z));
                cell.z.push_back(std::move(b.z));
                if (phi)
                    cell.z_phi.push_back(b.z_phi);
            }
            const GrowthFit g = fit_growth(cell.log_z, first, N);
            if (g.points > 0) {
                cell.slope = g.rate;
                cell.slope_stderr = g.rate_stderr;
            }
            if (phi) {
                double lo = kInf;
                for (std::size_t n = first; n <= N; ++n)
                    if (cell.z_phi[n - 1] != kNegInf) {
                        cell.delta = std::max(cell.delta, cell.z_phi[n - 1]);
                        lo = std::min(lo, cell.z_phi[n - 1]);
                    }
                cell.delta_band = cell.delta == kNegInf ? 0.0 : cell.delta - lo;
            }
            prof.cells.push_back(std::move(cell));
        }
        const std::size_t base = prof.cells.size() - Ms.size();
        for (std::size_t i = 1; i < Ms.size(); ++i) {
            const auto& a = prof.cells[base + i - 1];
            const auto& b = prof.cells[base + i];
            for (std::size_t n = 0; n < N; ++n)
                if (b.z[n] > a.z[n])
                    prof.counts_monotone_in_M = false;
            if (b.slope > a.slope + 1e-12)
                prof.slopes_monotone_in_M = false;
        }
        const auto& last = prof.cells.back();
        prof.h_inf_q.push_back(last.slope);
        if (phi)
            prof.delta_q.push_back(last.delta);
    }
    prof.h_inf = prof.h_inf_q.back();
    if (phi) {
        prof.delta = prof.delta_q.back();
        prof.delta_band = prof.cells.back().delta_band;
    }
    return prof;
}

} // namespace

InfinityProfile hinf_profile(const TransitionSystem& system, const std::vector<std::uint64_t>& qs,
                             const std::vector<std::uint64_t>& Ms, std::size_t horizon)
{
    return build_profile(system, nullptr, qs, Ms, horizon);
}

InfinityProfile delta_profile(const TransitionSystem& system, const Potential& phi, const std::vector<std::uint64_t>& qs,
                              const std::vector<std::uint64_t>& Ms, std::size_t horizon)
{
    return build_profile(system, &phi, qs, Ms, horizon);
}

CiResult ci_check(const InfinityProfile& profile, double pressure)
{
    CiResult out;
    out.delta = profile.delta;
    out.band = profile.delta_band;
    out.pressure = pressure;
    if (profile.delta_q.empty())
        return out;
    if (out.delta + out.band < pressure)
        out.verdict = Verdict::Holds;
    else if (out.delta - out.band >= pressure)
        out.verdict = Verdict::Fails;
    return out;
}

double bouquet_hinf_oracle(const LoopCounts& counts) { return counts.growth_rate(); }

BigInt composition_bound(const TransitionSystem& system, std::size_t n, std::uint64_t M, std::uint64_t q)
{
    check_grid(M, q);
    if (!system.is_bouquet())
        throw DomainError("composition bound needs a bouquet shift");
    detail::BouquetPaths paths(system, q, n, nullptr);
    const std::size_t K = n / M;
    // C[k][m]: ordered choices of k loops with total length m.
    std::vector<std::vector<BigInt>> C(K + 1, std::vector<BigInt>(n + 1, 0));
    C[0][0] = 1;
    for (std::size_t k = 1; k <= K; ++k)
        for (std::size_t m = 1; m <= n; ++m)
            for (const auto& c : paths.loops())
                if (c.len <= m && !C[k - 1][m - c.len].is_zero())
                    C[k][m] += c.multiplicity * C[k - 1][m - c.len];
    BigInt total = 0;
    for (const auto& a : paths.lows())
        for (const auto& b : paths.lows()) {
            if (auto d = paths.direct_segment(a, b); d && d->steps == n)
                total += 1;
            const std::size_t ends = paths.exit_segment(a).steps + paths.entry_segment(b).steps;
            if (ends > n)
                continue;
            for (std::size_t k = 0; k <= K; ++k)
                total += C[k][n - ends];
        }
    return total;
}

} // namespace cms

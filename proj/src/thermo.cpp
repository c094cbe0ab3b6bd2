#include "cms/thermo.hpp"

#include "bouquet_paths.hpp"
#include "cms/errors.hpp"
#include "cms/examples.hpp"
#include "cms/numeric.hpp"
#include "cms/words.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace cms {

const char* method_name(SumMethod m)
{
    switch (m) {
    case SumMethod::BruteForce:
        return "brute-force";
    case SumMethod::RenewalDP:
        return "renewal-DP";
    case SumMethod::ClosedForm:
        return "closed-form";
    }
    return "?";
}

const char* verdict_name(Verdict v)
{
    switch (v) {
    case Verdict::Holds:
        return "holds";
    case Verdict::Fails:
        return "fails";
    case Verdict::Inconclusive:
        return "inconclusive";
    }
    return "?";
}

const char* status_name(SeriesStatus s)
{
    switch (s) {
    case SeriesStatus::Finite:
        return "finite";
    case SeriesStatus::Infinite:
        return "infinite";
    case SeriesStatus::Inconclusive:
        return "inconclusive";
    }
    return "?";
}

const char* recurrence_name(RecurrenceKind k)
{
    switch (k) {
    case RecurrenceKind::Transient:
        return "transient";
    case RecurrenceKind::NullRecurrent:
        return "null-recurrent";
    case RecurrenceKind::PositiveRecurrent:
        return "positive-recurrent";
    case RecurrenceKind::StronglyPositiveRecurrent:
        return "strongly-positive-recurrent";
    case RecurrenceKind::Inconclusive:
        return "inconclusive";
    }
    return "?";
}

namespace {

bool is_first_return(std::span<const StateId> w, const StateId& base)
{
    for (std::size_t i = 1; i < w.size(); ++i)
        if (w[i] == base)
            return false;
    return true;
}

// Edge weights of a finite matrix shift, -inf off the graph.
std::vector<std::vector<double>> finite_weights(const TransitionSystem& system, const Potential& phi)
{
    const std::size_t k = system.matrix_size();
    std::vector<std::vector<double>> w(k, std::vector<double>(k, kNegInf));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (system.matrix_entry(i, j))
                w[i][j] = phi.edge_weight(StateId::plain(i + 1), StateId::plain(j + 1));
    return w;
}

template <class Combine>
std::vector<double> transfer_step(const std::vector<double>& v, const std::vector<std::vector<double>>& w,
                                  double identity, Combine combine)
{
    const std::size_t k = v.size();
    std::vector<double> out(k, identity);
    for (std::size_t i = 0; i < k; ++i) {
        if (v[i] == kNegInf)
            continue;
        for (std::size_t j = 0; j < k; ++j)
            if (w[i][j] != kNegInf)
                out[j] = combine(out[j], v[i] + w[i][j]);
    }
    return out;
}

double max2(double a, double b) { return std::max(a, b); }

PartitionSums finite_sums(const TransitionSystem& system, const Potential& phi, const StateId& base, std::size_t N)
{
    PartitionSums out;
    out.base = base;
    out.horizon = N;
    out.method = SumMethod::RenewalDP;
    const auto w = finite_weights(system, phi);
    const std::size_t k = system.matrix_size();
    const std::size_t b = base.index - 1;
    std::vector<double> all(k, kNegInf), fresh(k, kNegInf);
    all[b] = fresh[b] = 0.0;
    for (std::size_t n = 1; n <= N; ++n) {
        all = transfer_step(all, w, kNegInf, log_add);
        fresh = transfer_step(fresh, w, kNegInf, log_add);
        out.log_z.push_back(all[b]);
        out.log_zstar.push_back(fresh[b]);
        fresh[b] = kNegInf; // later returns are not first returns
    }
    return out;
}

PartitionSums bouquet_sums(const TransitionSystem& system, const Potential& phi, const StateId& base, std::size_t N)
{
    PartitionSums out;
    out.base = base;
    out.horizon = N;
    out.method = SumMethod::RenewalDP;
    auto special = phi.tabled_loops();
    if (base.is_loop())
        special.insert({base.loop_len, base.loop_index});
    detail::BouquetPaths paths(system, 0, N, phi.edge_function(), special);
    const auto R = paths.root_table<detail::LogSumRing>(false);
    if (base.is_root()) {
        std::vector<LogSumAccumulator> star(N + 1);
        for (const auto& c : paths.loops())
            star[c.len].add(detail::LogSumRing::loop(c));
        for (std::size_t n = 1; n <= N; ++n) {
            out.log_z.push_back(R[n][0]);
            out.log_zstar.push_back(star[n].value());
        }
        return out;
    }
    const auto own = paths.own_class(base.loop_len, base.loop_index);
    const auto avoid = paths.root_table<detail::LogSumRing>(false, own);
    for (std::size_t n = 1; n <= N; ++n) {
        out.log_z.push_back(paths.paths<detail::LogSumRing>(R, base, base, n, std::nullopt));
        out.log_zstar.push_back(paths.paths<detail::LogSumRing>(avoid, base, base, n, std::nullopt));
    }
    return out;
}

} // namespace

PartitionSums partition_sums_bruteforce(const TransitionSystem& system, const Potential& phi, const StateId& base,
                                        std::size_t horizon)
{
    if (horizon == 0)
        throw DomainError("horizon must be at least 1");
    PartitionSums out;
    out.base = base;
    out.horizon = horizon;
    out.method = SumMethod::BruteForce;
    for (std::size_t n = 1; n <= horizon; ++n) {
        const BigInt expected = periodic_point_count(system, n, base);
        if (expected > kPeriodicPointCap)
            throw RefusalError("period " + std::to_string(n) + " has " + to_string(expected)
                                   + " periodic points, too many to enumerate",
                               "horizon");
        LogSumAccumulator z, zstar;
        for_each_periodic_point(system, n, base, [&](std::span<const StateId> w) {
            const double s = birkhoff_sum(system, phi, w, SumMode::PeriodicWrap).value;
            z.add(s);
            if (is_first_return(w, base))
                zstar.add(s);
            return true;
        });
        out.log_z.push_back(z.value());
        out.log_zstar.push_back(zstar.value());
    }
    return out;
}

PartitionSums partition_sums_renewal(std::span<const double> log_wstar)
{
    const std::size_t N = log_wstar.size();
    if (N == 0)
        throw DomainError("renewal sums need at least one return weight");
    PartitionSums out;
    out.horizon = N;
    out.method = SumMethod::RenewalDP;
    out.log_zstar.assign(log_wstar.begin(), log_wstar.end());
    std::vector<double> z(N + 1, kNegInf);
    z[0] = 0.0;
    for (std::size_t n = 1; n <= N; ++n) {
        LogSumAccumulator acc;
        for (std::size_t m = 1; m <= n; ++m)
            if (log_wstar[m - 1] != kNegInf && z[n - m] != kNegInf)
                acc.add(log_wstar[m - 1] + z[n - m]);
        z[n] = acc.value();
    }
    out.log_z.assign(z.begin() + 1, z.end());
    return out;
}

PartitionSums partition_sums_renewal_linear(std::span<const double> wstar)
{
    std::vector<double> logs;
    logs.reserve(wstar.size());
    for (double w : wstar) {
        if (!(w >= 0.0))
            throw DomainError("return weights must be non-negative");
        logs.push_back(w == 0.0 ? kNegInf : std::log(w));
    }
    return partition_sums_renewal(logs);
}

std::vector<double> return_weights(const TransitionSystem& system, const Potential& phi, std::size_t horizon)
{
    if (!system.is_bouquet())
        throw DomainError("return weights by loop length need a bouquet shift");
    if (phi.memory() > 2)
        throw DomainError("loop weights need a potential of memory at most 2");
    detail::BouquetPaths paths(system, 0, horizon, phi.edge_function(), phi.tabled_loops());
    std::vector<LogSumAccumulator> star(horizon + 1);
    for (const auto& c : paths.loops())
        star[c.len].add(detail::LogSumRing::loop(c));
    std::vector<double> out;
    for (std::size_t n = 1; n <= horizon; ++n)
        out.push_back(star[n].value());
    return out;
}

PartitionSums partition_sums(const TransitionSystem& system, const Potential& phi, const StateId& base,
                             std::size_t horizon)
{
    if (horizon == 0)
        throw DomainError("horizon must be at least 1");
    if (!system.contains(base))
        throw DomainError("unknown base state " + to_string(base));
    if (phi.memory() <= 2)
        return system.is_bouquet() ? bouquet_sums(system, phi, base, horizon)
                                   : finite_sums(system, phi, base, horizon);
    return partition_sums_bruteforce(system, phi, base, horizon);
}

PressureEstimate pressure_estimate(const PartitionSums& sums)
{
    const std::size_t N = sums.log_z.size();
    if (N < 5)
        throw DomainError("pressure estimate needs at least 5 terms");
    PressureEstimate out;
    out.first_n = N / 2 + 1;
    out.last_n = N;
    auto tail = [&](std::size_t first) {
        std::vector<double> x, y;
        for (std::size_t n = first; n <= N; ++n)
            if (std::isfinite(sums.log_z[n - 1])) {
                x.push_back(static_cast<double>(n));
                y.push_back(sums.log_z[n - 1]);
            }
        return std::make_pair(x, y);
    };
    const auto [x, y] = tail(out.first_n);
    if (x.size() < 2) {
        out.degenerate = true;
        out.value = kNegInf;
        return out;
    }
    const LineFit fit = fit_line(x, y);
    out.value = fit.slope;
    out.intercept = fit.intercept;
    out.max_residual = fit.max_residual;
    double drift = 0.0;
    const auto [xq, yq] = tail(3 * N / 4 + 1);
    if (xq.size() >= 2)
        drift = std::abs(fit_line(xq, yq).slope - fit.slope);
    out.uncertainty = fit.slope_stderr + drift;
    return out;
}

double chi_per(const TransitionSystem& system, const Potential& phi, std::size_t horizon)
{
    if (horizon == 0)
        throw DomainError("horizon must be at least 1");
    double best = kNegInf;
    if (phi.memory() <= 2 && system.is_bouquet()) {
        // Every periodic orbit is a concatenation of loops at the root, so its
        // average is a convex combination of loop averages.
        detail::BouquetPaths paths(system, 0, horizon, phi.edge_function(), phi.tabled_loops());
        for (const auto& c : paths.loops())
            if (!c.multiplicity.is_zero())
                best = std::max(best, c.weight / static_cast<double>(c.len));
        return best;
    }
    if (phi.memory() <= 2) {
        const auto w = finite_weights(system, phi);
        const std::size_t k = system.matrix_size();
        for (std::size_t start = 0; start < k; ++start) {
            std::vector<double> v(k, kNegInf);
            v[start] = 0.0;
            for (std::size_t n = 1; n <= horizon; ++n) {
                v = transfer_step(v, w, kNegInf, max2);
                if (v[start] != kNegInf)
                    best = std::max(best, v[start] / static_cast<double>(n));
            }
        }
        return best;
    }
    for (const auto& base : system.states())
        for (std::size_t n = 1; n <= horizon; ++n)
            for_each_periodic_point(system, n, base, [&](std::span<const StateId> w) {
                best = std::max(best, birkhoff_sum(system, phi, w, SumMode::PeriodicWrap).value
                                          / static_cast<double>(n));
                return true;
            });
    return best;
}

UcsResult ucs_check(double chi, double pressure, double tol)
{
    UcsResult out;
    out.chi_per = chi;
    out.pressure = pressure;
    out.tol = tol;
    out.verdict = chi < pressure - tol ? Verdict::Holds : Verdict::Fails;
    return out;
}

SprResult spr_check(std::span<const double> log_zstar, double pressure, double tol)
{
    const std::size_t N = log_zstar.size();
    if (N < 5)
        throw DomainError("SPR check needs at least 5 terms");
    if (!std::isfinite(pressure))
        throw DomainError("SPR check needs a finite pressure");
    SprResult out;
    out.pressure = pressure;
    out.tol = tol;
    out.first_n = N / 2 + 1;
    out.last_n = N;
    const GrowthFit g = fit_growth(log_zstar, out.first_n, N);
    if (g.points == 0) {
        out.slope = kNegInf; // Z*_n vanishes on the whole tail
        out.verdict = Verdict::Holds;
        return out;
    }
    out.slope = g.rate;
    out.slope_stderr = g.rate_stderr;
    if (out.slope < pressure - tol)
        out.verdict = Verdict::Holds;
    else if (std::abs(out.slope - pressure) <= tol)
        out.verdict = Verdict::Fails;
    else
        out.verdict = Verdict::Inconclusive;
    return out;
}

InducedSystem induced_system(const TransitionSystem& system, const Potential& phi, const StateId& base,
                             std::size_t max_len, std::size_t cap)
{
    if (!system.contains(base))
        throw DomainError("unknown base state " + to_string(base));
    if (max_len == 0)
        throw DomainError("first-return length bound must be at least 1");
    InducedSystem out;
    out.base = base;
    out.max_len = max_len;
    out.exhaustive.assign(max_len, true);
    if (base.is_loop() && base.loop_len > max_len)
        return out;
    const TransitionSystem local = system.bounded_branching() ? system : system.truncated(max_len);
    Word w{base};
    bool capped = false;
    std::function<void()> dfs = [&]() {
        if (capped)
            return;
        if (local.has_edge(w.back(), base)) {
            if (out.words.size() >= cap) {
                capped = true;
                return;
            }
            Word closed = w;
            closed.push_back(base);
            ReturnWord r;
            r.word = w;
            r.weight = cylinder_sup(local, phi, closed, w.size());
            r.exact = phi.memory() <= 2 || r.weight == cylinder_inf(local, phi, closed, w.size());
            out.words.push_back(std::move(r));
        }
        if (w.size() == max_len)
            return;
        for (const auto& t : local.successors(w.back())) {
            if (t == base)
                continue;
            w.push_back(t);
            dfs();
            w.pop_back();
        }
    };
    dfs();
    if (capped)
        std::fill(out.exhaustive.begin(), out.exhaustive.end(), false);
    std::stable_sort(out.words.begin(), out.words.end(), [](const ReturnWord& a, const ReturnWord& b) {
        return a.word.size() != b.word.size() ? a.word.size() < b.word.size() : a.word < b.word;
    });
    return out;
}

namespace {

SeriesValue infinite_series()
{
    SeriesValue v;
    v.status = SeriesStatus::Infinite;
    v.value = kInf;
    return v;
}

// log sum_k exp(log_c - beta log k + k x) for x < 0 with a ratio-test tail bound.
SeriesValue power_series_inside(double log_c, double beta, double x, double tol)
{
    constexpr std::size_t kMaxTerms = 50'000'000;
    LogSumAccumulator acc;
    auto term = [&](double k) { return log_c - beta * std::log(k) + k * x; };
    for (std::size_t k = 1; k <= kMaxTerms; ++k) {
        acc.add(term(static_cast<double>(k)));
        const double K = static_cast<double>(k);
        // Ratio t_{j+1}/t_j for every j > k is at most rho.
        const double rho = beta >= 0.0 ? std::exp(x) : std::exp(x - beta * std::log((K + 2.0) / (K + 1.0)));
        if (rho >= 1.0)
            continue;
        const double log_tail = term(K + 1.0) - std::log1p(-rho);
        const double partial = acc.value();
        const double rel = std::exp(log_tail - partial);
        if (rel <= tol) {
            SeriesValue v;
            v.status = SeriesStatus::Finite;
            v.value = partial + 0.5 * std::log1p(rel);
            v.error_bound = 0.5 * rel + 1e-15 * (1.0 + std::abs(partial)) + K * 1e-17;
            v.terms = k;
            return v;
        }
    }
    SeriesValue v;
    v.status = SeriesStatus::Inconclusive;
    v.value = acc.value();
    v.terms = kMaxTerms;
    return v;
}

} // namespace

SeriesValue induced_pressure(const ReturnFamily& family, double p, double tol)
{
    if (const auto* g = std::get_if<GeometricReturns>(&family)) {
        const double x = g->log_ratio + p;
        if (x >= 0.0)
            return infinite_series();
        SeriesValue v;
        v.status = SeriesStatus::Finite;
        v.value = g->log_scale + x - std::log(-std::expm1(x));
        v.error_bound = 4e-16 * (1.0 + std::abs(v.value) + std::abs(g->log_scale) + std::abs(x));
        return v;
    }
    const auto& f = std::get<PowerLawReturns>(family);
    const double x = p - f.rate;
    if (x > 0.0)
        return infinite_series();
    if (x == 0.0) {
        if (f.beta <= 1.0)
            return infinite_series();
        const CertifiedValue z = zeta(f.beta, tol);
        SeriesValue v;
        v.status = SeriesStatus::Finite;
        v.value = f.log_c + std::log(z.value);
        v.error_bound = z.error_bound / z.value + 4e-16 * (1.0 + std::abs(v.value));
        return v;
    }
    return power_series_inside(f.log_c, f.beta, x, tol);
}

namespace {

constexpr double kExponentMargin = 0.25;

struct TailShape {
    GrowthFit fit;
    double rate_tol = 0.0;
    double last_log = kNegInf;
    std::size_t last_n = 0;
};

TailShape tail_shape(std::span<const double> log_terms)
{
    TailShape t;
    const std::size_t N = log_terms.size();
    t.fit = fit_growth(log_terms, N / 2 + 1, N);
    t.rate_tol = std::max(1e-3, 3.0 * t.fit.rate_stderr);
    for (std::size_t n = N; n >= 1; --n)
        if (std::isfinite(log_terms[n - 1])) {
            t.last_log = log_terms[n - 1];
            t.last_n = n;
            break;
        }
    return t;
}

} // namespace

SeriesValue induced_pressure(std::span<const double> log_zstar, double p)
{
    const std::size_t N = log_zstar.size();
    if (N < 5)
        throw DomainError("induced pressure from data needs at least 5 terms");
    std::vector<double> terms(N);
    LogSumAccumulator acc;
    for (std::size_t k = 1; k <= N; ++k) {
        terms[k - 1] = log_zstar[k - 1] == kNegInf ? kNegInf : log_zstar[k - 1] + static_cast<double>(k) * p;
        acc.add(terms[k - 1]);
    }
    SeriesValue v;
    v.terms = N;
    v.value = acc.value();
    const TailShape t = tail_shape(terms);
    if (t.fit.points == 0) {
        v.status = SeriesStatus::Finite; // no mass on the tail
        return v;
    }
    const double r = t.fit.rate;
    double log_tail = kNegInf;
    if (r > t.rate_tol)
        return infinite_series();
    if (r < -t.rate_tol) {
        log_tail = t.last_log + r - std::log(-std::expm1(r));
    } else {
        const double gamma = t.fit.exponent;
        if (gamma > -1.0 + kExponentMargin)
            return infinite_series();
        if (gamma >= -1.0 - kExponentMargin) {
            v.status = SeriesStatus::Inconclusive;
            return v;
        }
        // sum_{k>N} k^gamma ~ N^{gamma+1} / (-gamma-1)
        log_tail = t.last_log + std::log(static_cast<double>(t.last_n) / (-gamma - 1.0));
    }
    const double total = log_add(v.value, log_tail);
    v.status = SeriesStatus::Finite;
    v.error_bound = std::exp(log_tail - total);
    v.value = total;
    return v;
}

CertifiedValue pressure_from_returns(const ReturnFamily& family)
{
    const SprBoundary edge = spr_boundary(family);
    const double p_star = edge.p_star;
    if (edge.delta.status == SeriesStatus::Finite) {
        const double tol = std::max(1e-12, 10.0 * edge.delta.error_bound);
        if (edge.delta.value <= tol)
            return {-p_star, edge.delta.value < -tol ? 0.0 : tol};
    }
    // log F(p) is increasing in p and crosses 0 strictly below p*.
    double step = 1.0;
    double lo = p_star - step;
    auto log_f = [&](double p) { return induced_pressure(family, p).value; };
    while (log_f(lo) > 0.0) {
        step *= 2.0;
        lo = p_star - step;
        if (step > 1e6)
            throw NoSolutionError("first-return series does not fall below 1");
    }
    double hi = p_star;
    while (hi - lo > 1e-13 * std::max(1.0, std::abs(lo))) {
        const double mid = 0.5 * (lo + hi);
        const SeriesValue v = induced_pressure(family, mid);
        if (v.status == SeriesStatus::Inconclusive)
            break;
        (v.status == SeriesStatus::Infinite || v.value > 0.0 ? hi : lo) = mid;
    }
    return {-0.5 * (lo + hi), 0.5 * (hi - lo) + 1e-13};
}

SprBoundary spr_boundary(const ReturnFamily& family)
{
    SprBoundary out;
    if (const auto* g = std::get_if<GeometricReturns>(&family)) {
        out.p_star = -g->log_ratio;
        out.delta = infinite_series();
        return out;
    }
    const auto& f = std::get<PowerLawReturns>(family);
    out.p_star = f.rate;
    out.delta = induced_pressure(family, f.rate);
    return out;
}

SprBoundary spr_boundary(std::span<const double> log_zstar)
{
    const std::size_t N = log_zstar.size();
    if (N < 5)
        throw DomainError("SPR boundary from data needs at least 5 terms");
    SprBoundary out;
    const GrowthFit g = fit_growth(log_zstar, N / 2 + 1, N);
    if (g.points == 0) {
        out.p_star = kInf;
        out.delta = infinite_series();
        return out;
    }
    out.p_star = -g.rate;
    out.delta = induced_pressure(log_zstar, out.p_star);
    return out;
}

namespace {

RecurrenceResult classify_from(SeriesValue first, SeriesValue mean, bool strictly_inside, std::string evidence)
{
    RecurrenceResult out;
    out.first_return = first;
    out.mean_return = mean;
    out.evidence = std::move(evidence);
    if (first.status != SeriesStatus::Finite) {
        out.kind = RecurrenceKind::Inconclusive;
        out.evidence += first.status == SeriesStatus::Infinite
                            ? "; first-return series diverges, so P is below the pressure"
                            : "; first-return series undecided at this horizon";
        return out;
    }
    const double tol = std::max(1e-9, 10.0 * first.error_bound);
    if (first.value < -tol) {
        out.kind = RecurrenceKind::Transient;
        return out;
    }
    if (first.value > tol) {
        out.kind = RecurrenceKind::Inconclusive;
        out.evidence += "; first-return series exceeds 1, so P is below the pressure";
        return out;
    }
    if (strictly_inside) {
        out.kind = RecurrenceKind::StronglyPositiveRecurrent;
        return out;
    }
    switch (mean.status) {
    case SeriesStatus::Finite:
        out.kind = RecurrenceKind::PositiveRecurrent;
        break;
    case SeriesStatus::Infinite:
        out.kind = RecurrenceKind::NullRecurrent;
        break;
    case SeriesStatus::Inconclusive:
        out.kind = RecurrenceKind::Inconclusive;
        out.evidence += "; mean return time undecided at this horizon";
        break;
    }
    return out;
}

} // namespace

RecurrenceResult recurrence_classify(const PowerLawReturns& family, double pressure)
{
    const double p = -pressure;
    const SeriesValue first = induced_pressure(family, p);
    PowerLawReturns weighted = family;
    weighted.beta -= 1.0;
    const SeriesValue mean = induced_pressure(weighted, p);
    const bool inside = p < family.rate;
    return classify_from(first, mean, inside, "closed form C n^-beta e^-n rate");
}

RecurrenceResult recurrence_classify(const GeometricReturns& family, double pressure)
{
    const double p = -pressure;
    const SeriesValue first = induced_pressure(family, p);
    SeriesValue mean = first.status == SeriesStatus::Finite ? first : infinite_series();
    if (first.status == SeriesStatus::Finite) {
        const double x = family.log_ratio + p;
        // sum k e^{kx} = e^x / (1 - e^x)^2
        mean.value = family.log_scale + x - 2.0 * std::log(-std::expm1(x));
    }
    return classify_from(first, mean, family.log_ratio + p < 0.0, "closed form geometric returns");
}

RecurrenceResult recurrence_classify(std::span<const double> log_zstar, double pressure)
{
    const std::size_t N = log_zstar.size();
    if (N < 5)
        throw DomainError("recurrence classification needs at least 5 terms");
    const SeriesValue first = induced_pressure(log_zstar, -pressure);
    std::vector<double> weighted(N);
    std::vector<double> normalized(N);
    for (std::size_t n = 1; n <= N; ++n) {
        const double t = log_zstar[n - 1];
        weighted[n - 1] = t == kNegInf ? kNegInf : t + std::log(static_cast<double>(n));
        normalized[n - 1] = t == kNegInf ? kNegInf : t - static_cast<double>(n) * pressure;
    }
    const SeriesValue mean = induced_pressure(weighted, -pressure);
    const TailShape t = tail_shape(normalized);
    const bool inside = t.fit.points == 0 || t.fit.rate < -t.rate_tol;
    return classify_from(first, mean, inside,
                         "partial sums to n = " + std::to_string(N) + " with fitted tails");
}

namespace {

bool low(const TransitionSystem& system, const StateId& s, std::uint64_t q)
{
    return system.order_index(s) <= q;
}

std::vector<double> crc_maxima(const TransitionSystem& system, const Potential& phi, std::uint64_t q, std::size_t N)
{
    std::vector<double> s(N, kNegInf);
    if (phi.memory() <= 2 && system.is_bouquet()) {
        detail::BouquetPaths paths(system, q, N, phi.edge_function(), phi.tabled_loops());
        const auto R = paths.root_table<detail::MaxPlusRing>(false);
        for (const auto& a : paths.lows())
            for (const auto& b : paths.lows())
                for (std::size_t n = 1; n <= N; ++n)
                    s[n - 1] = std::max(s[n - 1], paths.paths<detail::MaxPlusRing>(R, a, b, n, std::nullopt));
        return s;
    }
    if (phi.memory() <= 2) {
        const auto w = finite_weights(system, phi);
        const std::size_t k = system.matrix_size();
        const std::size_t lows = std::min<std::size_t>(k, q);
        for (std::size_t start = 0; start < lows; ++start) {
            std::vector<double> v(k, kNegInf);
            v[start] = 0.0;
            for (std::size_t n = 1; n <= N; ++n) {
                v = transfer_step(v, w, kNegInf, max2);
                for (std::size_t j = 0; j < lows; ++j)
                    s[n - 1] = std::max(s[n - 1], v[j]);
            }
        }
        return s;
    }
    const StateFilter is_low = [&](const StateId& x) { return low(system, x, q); };
    for (std::size_t n = 1; n <= N; ++n)
        for_each_word(system, n + 1, is_low, is_low, [&](std::span<const StateId> w) {
            s[n - 1] = std::max(s[n - 1], cylinder_sup(system, phi, w, n));
            return true;
        });
    return s;
}

} // namespace

CrcProfile crc_profile(const TransitionSystem& system, const Potential& phi, std::uint64_t q, std::size_t horizon,
                       double pressure, double tol)
{
    if (q == 0 || horizon == 0)
        throw DomainError("CRC profile needs q >= 1 and a positive horizon");
    CrcProfile out;
    out.q = q;
    out.horizon = horizon;
    out.pressure = pressure;
    out.tol = tol;
    out.s = crc_maxima(system, phi, q, horizon);
    std::vector<double> x, y;
    for (std::size_t n = horizon / 2 + 1; n <= horizon; ++n)
        if (std::isfinite(out.s[n - 1])) {
            x.push_back(static_cast<double>(n));
            y.push_back(out.s[n - 1]);
        }
    if (x.size() < 2) {
        out.verdict = Verdict::Inconclusive;
        return out;
    }
    out.lambda = -fit_line(x, y).slope;
    out.c = kNegInf;
    for (std::size_t n = 1; n <= horizon; ++n)
        if (std::isfinite(out.s[n - 1]))
            out.c = std::max(out.c, out.s[n - 1] + static_cast<double>(n) * out.lambda);
    out.margin = out.lambda + pressure;
    out.verdict = out.margin > tol ? Verdict::Holds : Verdict::Fails;
    return out;
}

namespace {

bool position_ok(Condition cond, std::size_t i, std::size_t n, bool is_low)
{
    switch (cond) {
    case Condition::A:
        return i != n || is_low;
    case Condition::B:
        return i != 0 || is_low;
    case Condition::C:
        return i >= n || !is_low;
    }
    return true;
}

// Lexicographically first violating word for a memory <= 2 potential on a
// bounded system: backward max-plus values, then a greedy forward pass.
std::optional<Witness> witness_by_dp(const TransitionSystem& system, const Potential& phi, Condition cond,
                                     std::uint64_t q, double c, double eps, std::size_t n)
{
    const auto states = system.states();
    std::unordered_map<StateId, std::size_t> index;
    for (std::size_t i = 0; i < states.size(); ++i)
        index.emplace(states[i], i);
    std::vector<std::vector<std::pair<std::size_t, double>>> succ(states.size());
    std::vector<bool> is_low(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        is_low[i] = system.order_index(states[i]) <= q;
        for (const auto& t : system.successors(states[i]))
            succ[i].emplace_back(index.at(t), phi.edge_weight(states[i], t));
    }
    // best[i][s]: max sum of the remaining n - i edges from x_i = s.
    std::vector<std::vector<double>> best(n + 1, std::vector<double>(states.size(), kNegInf));
    for (std::size_t s = 0; s < states.size(); ++s)
        if (position_ok(cond, n, n, is_low[s]))
            best[n][s] = 0.0;
    for (std::size_t i = n; i-- > 0;)
        for (std::size_t s = 0; s < states.size(); ++s) {
            if (!position_ok(cond, i, n, is_low[s]))
                continue;
            for (const auto& [t, w] : succ[s])
                if (best[i + 1][t] != kNegInf)
                    best[i][s] = std::max(best[i][s], w + best[i + 1][t]);
        }
    const double threshold = c - static_cast<double>(n) * eps;
    constexpr double slack = 1e-12;
    std::size_t cur = states.size();
    for (std::size_t s = 0; s < states.size(); ++s)
        if (best[0][s] > threshold + slack) {
            cur = s;
            break;
        }
    if (cur == states.size())
        return std::nullopt;
    Witness wit;
    wit.n = n;
    wit.word.push_back(states[cur]);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        bool moved = false;
        for (const auto& [t, w] : succ[cur])
            if (best[i + 1][t] != kNegInf && acc + w + best[i + 1][t] > threshold + slack) {
                acc += w;
                cur = t;
                wit.word.push_back(states[t]);
                moved = true;
                break;
            }
        if (!moved)
            return std::nullopt;
    }
    wit.sum = cylinder_sup(system, phi, wit.word, n);
    return wit;
}

std::optional<Witness> witness_by_enumeration(const TransitionSystem& system, const Potential& phi, Condition cond,
                                              std::uint64_t q, double c, double eps, std::size_t n)
{
    const std::size_t len = std::max(n + 1, n + phi.memory() - 1);
    const double threshold = c - static_cast<double>(n) * eps;
    std::optional<Witness> found;
    for_each_word(system, len, nullptr, nullptr, [&](std::span<const StateId> w) {
        for (std::size_t i = 0; i <= n; ++i)
            if (!position_ok(cond, i, n, low(system, w[i], q)))
                return true;
        const double s = cylinder_sup(system, phi, w, n);
        if (s > threshold) {
            found = Witness{Word(w.begin(), w.end()), n, s};
            return false;
        }
        return true;
    });
    return found;
}

} // namespace

std::optional<Witness> condition_witness_search(const TransitionSystem& system, const Potential& phi, Condition cond,
                                                std::uint64_t q, double c, double eps, std::size_t horizon)
{
    if (!system.bounded_branching())
        throw RefusalError("witness search needs a truncated bouquet", "truncate_len");
    for (std::size_t n = 1; n <= horizon; ++n) {
        auto w = phi.memory() <= 2 ? witness_by_dp(system, phi, cond, q, c, eps, n)
                                   : witness_by_enumeration(system, phi, cond, q, c, eps, n);
        if (w)
            return w;
    }
    return std::nullopt;
}

} // namespace cms

#include "cms/examples.hpp"

#include "cms/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace cms {

namespace {

LoopCounts graph_counts(const BouquetSpec& spec)
{
    return spec.graph_first ? spec.counts.with_first(*spec.graph_first) : spec.counts;
}

// The rule as seen by the abstract family: W(1) follows the formula and the
// loop counts are the abstract ones.
LoopWeightRule abstract_rule(const BouquetSpec& spec)
{
    LoopWeightRule r = spec.rule;
    r.root_loop.reset();
    if (r.subtract_log_count)
        r.counts = spec.counts;
    return r;
}

} // namespace

bool graph_realizable(const BouquetSpec& spec)
{
    const auto a1 = graph_counts(spec).count(1);
    return a1 && *a1 <= 1;
}

BouquetModel build_bouquet(const BouquetSpec& spec)
{
    const LoopCounts counts = graph_counts(spec);
    const auto a1 = counts.count(1);
    if (!a1 || *a1 >= 2)
        throw DomainError("bouquet '" + spec.name + "' has a(1) >= 2, which no simple graph realizes; "
                          "use its abstract return weights or set a(1) <= 1 for the graph");
    LoopWeightRule rule = spec.rule;
    if (rule.subtract_log_count && !rule.counts)
        rule.counts = counts;
    BouquetModel model{spec, TransitionSystem::bouquet(counts, spec.truncate_len),
                       Potential::bouquet(std::move(rule), spec.scheme), abstract_closed_form(spec)};
    return model;
}

std::vector<double> abstract_return_weights(const BouquetSpec& spec, std::size_t horizon)
{
    const LoopWeightRule rule = abstract_rule(spec);
    std::vector<double> out;
    out.reserve(horizon);
    for (std::size_t n = 1; n <= horizon; ++n) {
        const double log_a = spec.counts.log_count(n);
        if (log_a == kNegInf) {
            out.push_back(kNegInf);
            continue;
        }
        if (rule.subtract_log_count) {
            // a(n) e^{W(n)} with log a(n) cancelled exactly.
            LoopWeightRule plain = rule;
            plain.subtract_log_count = false;
            out.push_back(plain.total(n));
        } else {
            const double w = rule.total(n);
            out.push_back(w == kNegInf ? kNegInf : log_a + w);
        }
    }
    return out;
}

std::optional<ReturnFamily> abstract_closed_form(const BouquetSpec& spec)
{
    const LoopWeightRule& r = spec.rule;
    if (!r.psi.empty())
        return std::nullopt;
    double log_ratio = 0.0;
    if (!r.subtract_log_count) {
        const auto form = spec.counts.form();
        if ((form != LoopCounts::Form::Geometric && form != LoopCounts::Form::Ones) || spec.counts.first_override())
            return std::nullopt;
        log_ratio = spec.counts.growth_rate();
    }
    if (r.beta == 0.0)
        return GeometricReturns{r.log_c, log_ratio - r.rate};
    return PowerLawReturns{r.log_c, r.beta, r.rate - log_ratio};
}

double bouquet_delta_oracle(const BouquetSpec& spec)
{
    const LoopWeightRule& r = spec.rule;
    if (r.psi_bounds_support)
        return kNegInf;
    double d = -r.rate;
    if (r.subtract_log_count)
        d -= spec.counts.growth_rate();
    return d;
}

CertifiedValue zeta(double beta, double tol)
{
    if (!(beta > 1.0))
        throw DomainError("zeta(beta) diverges for beta <= 1");
    // Euler-Maclaurin: sum_{n<N} n^-s + N^{1-s}/(s-1) + N^-s/2 + sum_k B_2k/(2k)! s..(s+2k-2) N^{-s-2k+1}.
    static constexpr std::array<double, 10> bernoulli = {1.0 / 6,      -1.0 / 30,        1.0 / 42,   -1.0 / 30,
                                                         5.0 / 66,     -691.0 / 2730,    7.0 / 6,    -3617.0 / 510,
                                                         43867.0 / 798, -174611.0 / 330};
    const double s = beta;
    for (double N = 8; N <= 1 << 20; N *= 2) {
        double partial = 0.0;
        for (double n = N - 1; n >= 1; n -= 1)
            partial += std::pow(n, -s);
        double value = partial + std::pow(N, 1 - s) / (s - 1) + 0.5 * std::pow(N, -s);
        double rising = s;   // s (s+1) ... (s+2k-2)
        double fact = 2.0;   // (2k)!
        double last = 0.0;
        for (std::size_t k = 1; k <= bernoulli.size(); ++k) {
            const double term = bernoulli[k - 1] / fact * rising * std::pow(N, -s - 2.0 * k + 1.0);
            if (k == bernoulli.size()) {
                last = std::abs(term); // first omitted term bounds the remainder
                break;
            }
            value += term;
            rising *= (s + 2.0 * k - 1.0) * (s + 2.0 * k);
            fact *= (2.0 * k + 1.0) * (2.0 * k + 2.0);
        }
        const double rounding = 4.0 * N * std::numeric_limits<double>::epsilon() * value;
        if (last + rounding <= tol)
            return {value, last + rounding};
    }
    throw NoSolutionError("zeta(" + std::to_string(beta) + ") cannot be certified to the requested tolerance");
}

CertifiedValue normalizing_C(double beta, double tol)
{
    const CertifiedValue z = zeta(beta, tol);
    return {1.0 / z.value, z.error_bound / ((z.value - z.error_bound) * z.value)};
}

double htop_solve(const LoopCounts& counts, double tol)
{
    if (counts.form() == LoopCounts::Form::DoubleExponential)
        throw NoSolutionError("sum a(n) x^n has radius of convergence 0 for a(n) = 2^(2^n)");
    if ((counts.form() == LoopCounts::Form::Geometric || counts.form() == LoopCounts::Form::Ones)
        && !counts.first_override())
        return std::log(2.0 * static_cast<double>(counts.ratio())); // r x / (1 - r x) = 1 at x = 1/(2r)
    auto f = [&](double h) { return counts.generating(h) - 1.0; };
    const double g = counts.growth_rate();
    double lo = std::isfinite(g) ? g : 0.0;
    double hi = lo + 1.0;
    while (f(hi) > 0.0) {
        hi += 2.0 * (hi - lo);
        if (hi > 1e6)
            throw NoSolutionError("generating series stays above 1");
    }
    if (!std::isfinite(g)) {
        // Finite support: the series grows without bound as h decreases, unless a = 0.
        while (f(lo) < 0.0) {
            lo -= 2.0 * (hi - lo);
            if (lo < -1e6)
                throw NoSolutionError("generating series never reaches 1 (a vanishes)");
        }
    } else if (f(lo) < 0.0) {
        throw NoSolutionError("generating series stays below 1 on its convergence region");
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) >= 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<PresetInfo> list_presets()
{
    return {
        {"sec52-entry", "a(n) = 1, weight -n log 2 on the entry edge of each loop; positive recurrent with P = 0"},
        {"sec52-exit", "as sec52-entry with the weight on the exit edge"},
        {"sec52-mid", "as sec52-entry with the weight on the edge entering v_ceil(n/2)"},
        {"sec52-spread", "as sec52-entry with -log 2 on every loop edge"},
        {"sec53(beta,C|auto)", "a(n) = 2^n, weight log C - n log 2 - beta log n on entry edges; defaults beta = 3, "
                               "C = 1/zeta(beta); graph realized with a(1) = 1 and phi[r r] = log C"},
        {"sec54(psi...)", "a(n) = 2^(2^n), weight log C - 2^n log 2 - psi(n), psi given per length (default n log 2 "
                          "for n <= 30), C normalizing the induced pressure; abstract weights only"},
        {"renewal-ones", "a(n) = 1 with the zero potential"},
    };
}

namespace {

double parse_number(std::string_view text, const std::string& what)
{
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end)
        throw DomainError("cannot read " + what + " from '" + std::string(text) + "'");
    return v;
}

std::vector<std::string> split_args(std::string_view args)
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : args) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != ' ') {
            cur += ch;
        }
    }
    if (!cur.empty() || !out.empty())
        out.push_back(cur);
    return out;
}

BouquetSpec sec52(BouquetScheme scheme, const char* name)
{
    BouquetSpec s;
    s.name = name;
    s.counts = LoopCounts::ones();
    s.rule.rate = std::numbers::ln2;
    s.scheme = scheme;
    return s;
}

} // namespace

BouquetSpec preset(std::string_view full)
{
    std::string_view name = full;
    std::vector<std::string> args;
    if (const auto open = full.find('('); open != std::string_view::npos) {
        if (full.back() != ')')
            throw DomainError("preset arguments must end with ')': " + std::string(full));
        name = full.substr(0, open);
        args = split_args(full.substr(open + 1, full.size() - open - 2));
    }
    auto no_args = [&]() {
        if (!args.empty())
            throw DomainError("preset " + std::string(name) + " takes no arguments");
    };
    if (name == "sec52-entry" || name == "sec52")
        return no_args(), sec52(BouquetScheme::Entry, "sec52-entry");
    if (name == "sec52-exit")
        return no_args(), sec52(BouquetScheme::Exit, "sec52-exit");
    if (name == "sec52-mid")
        return no_args(), sec52(BouquetScheme::Mid, "sec52-mid");
    if (name == "sec52-spread")
        return no_args(), sec52(BouquetScheme::Spread, "sec52-spread");
    if (name == "renewal-ones") {
        no_args();
        BouquetSpec s;
        s.name = "renewal-ones";
        return s;
    }
    if (name == "sec53") {
        if (args.size() > 2)
            throw DomainError("sec53 takes (beta, C|auto)");
        const double beta = args.empty() ? 3.0 : parse_number(args[0], "beta");
        double c = 0.0;
        if (args.size() < 2 || args[1] == "auto") {
            if (!(beta > 1.0))
                throw DomainError("C = auto needs beta > 1");
            c = normalizing_C(beta).value;
        } else {
            c = parse_number(args[1], "C");
        }
        if (!(c > 0.0))
            throw DomainError("C must be positive");
        BouquetSpec s;
        std::ostringstream label;
        label.precision(12);
        label << "sec53(" << beta << "," << c << ")";
        s.name = label.str();
        s.counts = LoopCounts::geometric(2);
        s.graph_first = 1;
        s.rule.log_c = std::log(c);
        s.rule.rate = std::numbers::ln2;
        s.rule.beta = beta;
        s.rule.root_loop = std::log(c);
        return s;
    }
    if (name == "sec54") {
        std::vector<double> psi;
        for (const auto& a : args)
            psi.push_back(parse_number(a, "psi"));
        if (psi.empty())
            for (int n = 1; n <= 30; ++n)
                psi.push_back(n * std::numbers::ln2);
        LogSumAccumulator mass;
        for (double v : psi)
            mass.add(-v);
        BouquetSpec s;
        s.name = "sec54";
        s.counts = LoopCounts::double_exponential();
        s.rule.log_c = -mass.value();
        s.rule.subtract_log_count = true;
        s.rule.psi = std::move(psi);
        s.rule.psi_bounds_support = true;
        return s;
    }
    throw DomainError("unknown preset '" + std::string(full) + "'");
}

} // namespace cms

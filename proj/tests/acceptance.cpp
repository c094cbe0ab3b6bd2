// Acceptance run: one PASS/FAIL line per criterion, indented evidence below it.
#include "cms/errors.hpp"
#include "cms/examples.hpp"
#include "cms/infinity.hpp"
#include "cms/report.hpp"
#include "cms/thermo.hpp"
#include "cms/words.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace cms;

namespace {

const double kLn2 = std::log(2.0);

struct Criterion {
    int id;
    std::string title;
    std::vector<std::string> notes;
    bool ok = true;

    void check(bool cond, const std::string& what)
    {
        ok = ok && cond;
        notes.push_back(std::string(cond ? "  ok   " : "  MISS ") + what);
    }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

BouquetSpec truncated(std::string_view name, std::uint64_t L)
{
    BouquetSpec s = preset(name);
    s.truncate_len = L;
    return s;
}

void halving_family(Criterion& c)
{
    const auto t0 = std::chrono::steady_clock::now();
    constexpr std::size_t N = 40;
    const BouquetSpec spec = preset("sec52-entry");
    const auto sums = partition_sums_renewal(abstract_return_weights(spec, N));
    double worst = 0.0;
    for (double lz : sums.log_z)
        worst = std::max(worst, std::abs(std::exp(lz) - 0.5));
    c.check(worst <= 1e-12, fmt("Z_n = 1/2 for n <= 40 (max deviation %.2e, tol 1e-12)", worst));
    const double P = pressure_estimate(sums).value;
    c.check(std::abs(P) <= 1e-9, fmt("pressure estimate %.3e within 1e-9 of 0", P));

    const auto model = build_bouquet(truncated("sec52-entry", N));
    const double chi = chi_per(model.system, model.potential, N);
    c.check(std::abs(chi + kLn2) <= 1e-12, fmt("chi_per = %.15f, -log 2 = %.15f (tol 1e-12)", chi, -kLn2));

    const auto family = abstract_closed_form(spec);
    const auto at0 = induced_pressure(*family, 0.0);
    c.check(at0.status == SeriesStatus::Finite && std::abs(at0.value) <= 1e-12,
            fmt("induced pressure at p = 0: %.3e (tol 1e-12)", at0.value));
    const auto edge = spr_boundary(*family);
    c.check(std::abs(edge.p_star - kLn2) <= 1e-9, fmt("p* = %.15f vs log 2 (tol 1e-9)", edge.p_star));
    const auto spr = spr_check(sums.log_zstar, P);
    c.check(spr.verdict == Verdict::Holds, std::string("SPR verdict ") + verdict_name(spr.verdict)
                                               + fmt(" (slope %.6f)", spr.slope));
    const double dt = seconds_since(t0);
    c.check(dt < 1.0, fmt("runtime %.3f s < 1 s", dt));
}

void sharp_family(Criterion& c)
{
    const auto t0 = std::chrono::steady_clock::now();
    const double h = htop_solve(LoopCounts::geometric(2));
    c.check(std::abs(h - std::log(4.0)) <= 1e-9, fmt("h_top = %.15f vs log 4 (tol 1e-9)", h));

    const auto C = normalizing_C(3.0);
    constexpr double kApery = 1.2020569031595942854;
    c.check(std::abs(C.value - 1.0 / kApery) <= 1e-12, fmt("1/zeta(3) = %.15f (Apery reference, tol 1e-12)", C.value));
    const BouquetSpec spec = preset("sec53(3,auto)");
    const auto sums = partition_sums_renewal(abstract_return_weights(spec, 50));
    double worst = 0.0;
    for (std::size_t n = 1; n <= 50; ++n) {
        const double want = C.value * std::pow(double(n), -3.0);
        worst = std::max(worst, std::abs(std::exp(sums.log_zstar[n - 1]) / want - 1.0));
    }
    c.check(worst <= 1e-12, fmt("Z*_n = C n^-3 for n <= 50 (max rel err %.2e, tol 1e-12)", worst));

    const auto family = abstract_closed_form(spec);
    const auto at0 = induced_pressure(*family, 0.0);
    c.check(at0.status == SeriesStatus::Finite && std::abs(at0.value) <= 1e-8,
            fmt("induced pressure at p = 0: %.3e (bound %.1e, tol 1e-8)", at0.value, at0.error_bound));

    std::vector<double> zstar;
    for (std::size_t n = 1; n <= 200; ++n)
        zstar.push_back(std::log(C.value) - 3.0 * std::log(double(n)));
    const auto spr = spr_check(zstar, 0.0, 1e-2);
    c.check(spr.verdict == Verdict::Fails && std::abs(spr.slope) <= 1e-2,
            std::string("SPR verdict ") + verdict_name(spr.verdict) + fmt(" at N = 200, slope %.2e", spr.slope));

    struct Case {
        double beta, scale;
        RecurrenceKind want;
    };
    for (const Case k : {Case{3.0, 1.0, RecurrenceKind::PositiveRecurrent},
                         Case{1.5, 1.0, RecurrenceKind::NullRecurrent},
                         Case{3.0, 0.5, RecurrenceKind::Transient}}) {
        const double logc = std::log(k.scale * normalizing_C(k.beta).value);
        const auto r = recurrence_classify(PowerLawReturns{logc, k.beta, 0.0}, 0.0);
        c.check(r.kind == k.want, fmt("beta = %.1f, C = %.1f/zeta(beta): ", k.beta, k.scale) + recurrence_name(r.kind));
    }
    const double dt = seconds_since(t0);
    c.check(dt < 5.0, fmt("runtime %.3f s < 5 s", dt));
}

void infinity_profile(Criterion& c)
{
    const auto t0 = std::chrono::steady_clock::now();
    constexpr std::size_t N = 30;
    const std::vector<std::uint64_t> Ms{2, 4, 8};
    const auto T = TransitionSystem::bouquet(LoopCounts::geometric(2).with_first(1), 25);
    const auto prof = hinf_profile(T, {1}, Ms, N);
    for (auto M : Ms) {
        const double s = prof.cell(M, 1).slope;
        c.check(std::abs(s - kLn2) <= 0.1, fmt("M = %.0f: fitted slope %.4f in [log 2 - 0.1, log 2 + 0.1]", double(M), s));
    }
    bool per_n = true;
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t j = 1; j < Ms.size(); ++j)
            per_n = per_n && prof.cell(Ms[j], 1).log_z[n] <= prof.cell(Ms[j - 1], 1).log_z[n];
    c.check(per_n && prof.slopes_monotone_in_M, "(1/n) log z_n and fitted slopes non-increasing in M");

    BouquetSpec spec = truncated("sec53(3,auto)", 25);
    const auto model = build_bouquet(spec);
    const auto delta = delta_profile(model.system, model.potential, {1}, Ms, N);
    for (auto M : Ms) {
        const double z = delta.cell(M, 1).z_phi[N - 1];
        c.check(std::abs(z + kLn2) <= 0.05, fmt("M = %.0f: z_phi at n = 30 is %.4f, -log 2 = %.4f (tol 0.05)", double(M), z, -kLn2));
    }
    const double dt = seconds_since(t0);
    c.check(dt < 30.0, fmt("runtime %.3f s < 30 s", dt));
}

void oracle_equivalence(Criterion& c)
{
    const auto t0 = std::chrono::steady_clock::now();
    for (const char* name : {"sec52-entry", "renewal-ones"}) {
        RunConfig config;
        config.preset = name;
        config.truncate = 5;
        config.horizon = 12;
        config.Ms = {2, 3};
        config.qs = {1};
        const auto doc = run_oracle(config);
        const bool pass = doc.at("all_pass").get<bool>();
        const double err = doc.at("max_rel_err").get<double>();
        c.check(pass && err <= 1e-12, std::string(name) + fmt(": %.0f rows, max rel err %.2e (tol 1e-12)",
                                                             double(doc.at("rows").size()), err));
    }
    const double dt = seconds_since(t0);
    c.check(dt < 10.0, fmt("runtime %.3f s < 10 s", dt));
}

void finite_sanity(Criterion& c)
{
    const auto F = TransitionSystem::full_shift(2);
    const Potential zero(1, 0.0);
    bool exact = true;
    for (std::size_t n = 1; n <= 20; ++n)
        exact = exact && periodic_point_count(F, n, StateId::plain(1)) == (BigInt(1) << (n - 1));
    c.check(exact, "periodic point counts 2^(n-1) for n <= 20");
    const auto sums = partition_sums(F, zero, StateId::plain(1), 20);
    double worst = 0.0;
    for (std::size_t n = 1; n <= 20; ++n)
        worst = std::max(worst, std::abs(sums.log_z[n - 1] - (n - 1.0) * kLn2));
    c.check(worst <= 1e-12, fmt("log Z_n = (n-1) log 2 (max deviation %.2e)", worst));
    const double P = pressure_estimate(sums).value;
    c.check(std::abs(P - kLn2) <= 1e-3, fmt("pressure fit %.6f vs log 2 (tol 1e-3)", P));

    const double k = -0.7;
    const auto S = TransitionSystem::finite({{1}});
    const auto phi = Potential::constant(k);
    const double chi = chi_per(S, phi, 10);
    const double Ps = pressure_estimate(partition_sums(S, phi, StateId::plain(1), 10)).value;
    c.check(std::abs(chi - k) <= 1e-12 && std::abs(Ps - k) <= 1e-12, fmt("self-loop: chi_per = %.6f, P = %.6f, c = %.1f", chi, Ps, k));
    const auto ucs = ucs_check(chi, Ps, 1e-2);
    c.check(ucs.verdict == Verdict::Fails, std::string("self-loop UCS verdict ") + verdict_name(ucs.verdict));
}

struct Family {
    std::string name;
    TransitionSystem system;
    Potential potential;
};

Family random_family(std::mt19937& rng, int index)
{
    std::uniform_int_distribution<std::uint64_t> len(3, 12);
    std::uniform_int_distribution<std::uint64_t> count(1, 3);
    std::uniform_real_distribution<double> weight(-3.0, 0.0);
    const std::uint64_t L = len(rng);
    std::vector<std::uint64_t> a{1};
    for (std::uint64_t n = 2; n <= L; ++n)
        a.push_back(count(rng));
    auto T = TransitionSystem::bouquet(LoopCounts::list(a), L);
    Potential phi(2, 0.0);
    phi.set(Word{StateId::root(), StateId::root()}, weight(rng));
    for (std::uint64_t n = 2; n <= L; ++n)
        for (std::uint64_t i = 1; i <= a[n - 1]; ++i)
            phi.set(Word{StateId::root(), StateId::loop(n, i, 1)}, weight(rng));
    return {"random-" + std::to_string(index) + " (L = " + std::to_string(L) + ")", T, phi};
}

void theorem_consistency(Criterion& c)
{
    constexpr std::size_t N = 40;
    std::vector<Family> families;
    for (const char* name : {"sec52-entry", "sec52-exit", "sec52-mid", "sec52-spread", "renewal-ones"}) {
        auto m = build_bouquet(truncated(name, 30));
        families.push_back({name, m.system, m.potential});
    }
    {
        auto m = build_bouquet(truncated("sec53(3,auto)", 16));
        families.push_back({"sec53(3,auto)", m.system, m.potential});
    }
    std::mt19937 rng(20261016);
    for (int i = 0; i < 50; ++i)
        families.push_back(random_family(rng, i));

    int crc_certified = 0, ci_certified = 0, violations = 0;
    for (const auto& f : families) {
        const double P = pressure_estimate(partition_sums(f.system, f.potential, StateId::root(), N)).value;
        const double chi = chi_per(f.system, f.potential, N);
        const auto crc = crc_profile(f.system, f.potential, 1, N, P, 0.05);
        if (crc.margin > 0.05) {
            ++crc_certified;
            if (!(chi < P - 0.01)) {
                ++violations;
                c.check(false, f.name + fmt(": CRC margin %.4f but chi_per %.4f vs P %.4f", crc.margin, chi, P));
            }
        }
        const auto prof = delta_profile(f.system, f.potential, {1}, {2, 4, 8}, N);
        if (prof.delta + prof.delta_band < P) {
            ++ci_certified;
            if (!(chi < P)) {
                ++violations;
                c.check(false, f.name + fmt(": delta + band %.4f < P %.4f but chi_per %.4f", prof.delta + prof.delta_band, P, chi));
            }
        }
    }
    c.check(violations == 0, fmt("%.0f families, CRC certified on %.0f, CI certified on %.0f", double(families.size()),
                                 crc_certified, ci_certified)
                                 + ", no violations");
}

void witnesses(Criterion& c)
{
    const auto entry = build_bouquet(truncated("sec52-entry", 40));
    const auto a = condition_witness_search(entry.system, entry.potential, Condition::A, 1, 1.0, 0.1, 20);
    c.check(a.has_value(), a ? "sec52-entry (A): witness " + to_string(a->word) + fmt(", S_n = %.3f", a->sum)
                             : std::string("sec52-entry (A): none within horizon 20"));
    const auto exit = build_bouquet(truncated("sec52-exit", 40));
    const auto b = condition_witness_search(exit.system, exit.potential, Condition::B, 1, 1.0, 0.1, 20);
    c.check(b.has_value(), b ? "sec52-exit (B): witness " + to_string(b->word) + fmt(", S_n = %.3f", b->sum)
                             : std::string("sec52-exit (B): none within horizon 20"));
    const auto w = condition_witness_search(TransitionSystem::full_shift(2), Potential(1, 0.0), Condition::C, 2, 1.0,
                                            0.1, 20);
    c.check(!w.has_value(), "full 2-shift, q = 2 (C): none");
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<void(Criterion&)>>> runs{
        {"halving bouquet reproduction", halving_family},
        {"sharp bouquet reproduction", sharp_family},
        {"entropy and contraction at infinity", infinity_profile},
        {"brute force against DP", oracle_equivalence},
        {"finite-shift sanity", finite_sanity},
        {"UCS/CRC/CI consistency", theorem_consistency},
        {"condition witnesses", witnesses},
    };
    int failed = 0;
    int id = 0;
    for (const auto& [title, run] : runs) {
        Criterion c{++id, title, {}, true};
        try {
            run(c);
        } catch (const std::exception& e) {
            c.check(false, std::string("threw: ") + e.what());
        }
        std::printf("%s  criterion %d: %s\n", c.ok ? "PASS" : "FAIL", c.id, c.title.c_str());
        for (const auto& n : c.notes)
            std::printf("%s\n", n.c_str());
        failed += c.ok ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(runs.size()) - failed, runs.size());
    return failed == 0 ? 0 : 1;
}

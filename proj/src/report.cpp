#include "cms/report.hpp"

#include "cms/errors.hpp"
#include "cms/infinity.hpp"
#include "cms/words.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>

namespace cms {

using nlohmann::json;

json format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "+inf" : "-inf";
    if (v == 0.0)
        return 0.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::strtod(buf, nullptr);
}

namespace {

// Display scaling for quantities in natural-log units.
struct Units {
    double scale = 1.0;
    [[nodiscard]] json log(double v) const { return format_number(v / scale); }
    [[nodiscard]] json logs(const std::vector<double>& v) const
    {
        json a = json::array();
        for (double x : v)
            a.push_back(log(x));
        return a;
    }
};

json family_json(const ReturnFamily& f, const Units& u)
{
    if (const auto* g = std::get_if<GeometricReturns>(&f))
        return {{"kind", "geometric"}, {"log_scale", u.log(g->log_scale)}, {"log_ratio", u.log(g->log_ratio)}};
    const auto& p = std::get<PowerLawReturns>(f);
    return {{"kind", "power_law"}, {"log_C", u.log(p.log_c)}, {"beta", format_number(p.beta)}, {"rate", u.log(p.rate)}};
}

json series_json(const SeriesValue& v, const Units& u)
{
    return {{"status", status_name(v.status)}, {"value", u.log(v.value)}, {"error_bound", u.log(v.error_bound)}};
}

std::size_t horizon_of(const RunConfig& c, std::size_t fallback) { return c.horizon.value_or(fallback); }

std::vector<double> truncated_weights(const BouquetSpec& spec, std::size_t N)
{
    auto w = abstract_return_weights(spec, N);
    if (spec.truncate_len)
        for (std::size_t n = *spec.truncate_len + 1; n <= N; ++n)
            w[n - 1] = kNegInf;
    return w;
}

bool same_log(double a, double b, double rel)
{
    if (a == kNegInf || b == kNegInf)
        return a == b;
    return std::abs(a - b) <= rel * (1.0 + std::abs(a));
}

PartitionSums model_sums(const Model& m, std::size_t N)
{
    if (!m.spec)
        return partition_sums(*m.system, m.potential, m.base, N);
    PartitionSums sums = partition_sums_renewal(truncated_weights(*m.spec, N));
    sums.base = StateId::root();
    if (m.system) {
        const PartitionSums graph = partition_sums(*m.system, m.potential, StateId::root(), N);
        for (std::size_t n = 0; n < N; ++n)
            if (!same_log(sums.log_z[n], graph.log_z[n], 1e-9) || !same_log(sums.log_zstar[n], graph.log_zstar[n], 1e-9))
                throw InvariantError("graph and abstract return weights disagree at n = " + std::to_string(n + 1));
    }
    return sums;
}

double abstract_chi_per(const BouquetSpec& spec, std::size_t N)
{
    LoopWeightRule rule = spec.rule;
    rule.root_loop.reset();
    if (rule.subtract_log_count)
        rule.counts = spec.counts;
    double best = kNegInf;
    for (std::size_t n = 1; n <= N; ++n) {
        if (spec.truncate_len && n > *spec.truncate_len)
            break;
        if (spec.counts.log_count(n) == kNegInf)
            continue;
        best = std::max(best, rule.total(n) / static_cast<double>(n));
    }
    return best;
}

} // namespace

Model resolve_model(const RunConfig& config, std::size_t truncation)
{
    if (config.preset) {
        BouquetSpec spec = preset(*config.preset);
        spec.truncate_len = config.truncate.value_or(truncation);
        Model m{spec.name, spec, std::nullopt, Potential(), StateId::root(), std::nullopt};
        if (!config.truncate)
            m.closed_form = abstract_closed_form(spec);
        if (graph_realizable(spec)) {
            try {
                BouquetModel b = build_bouquet(spec);
                m.system = b.system;
                m.potential = b.potential;
            } catch (const RefusalError&) {
                // too many states to index; the abstract weights still apply
            }
        }
        return m;
    }
    TransitionSystem system = parse_shift(read_json_file(*config.shift_path));
    if (config.truncate) {
        if (!system.is_bouquet())
            throw ConfigError("truncate", "only bouquet shifts can be truncated");
        system = system.truncated(*config.truncate);
    }
    Potential phi = config.potential_path ? parse_potential(read_json_file(*config.potential_path), &system)
                                          : Potential(1, 0.0);
    const StateId base = system.is_bouquet() ? StateId::root() : StateId::plain(1);
    return Model{*config.shift_path, std::nullopt, system, phi, base, std::nullopt};
}

json run_task(const RunConfig& config, Task task)
{
    validate(config);
    const std::size_t N = horizon_of(config, 40);
    if (N < 5)
        throw ConfigError("horizon", "diagnostics need a horizon of at least 5");
    const Model m = resolve_model(config, N);
    const Units u{config.log2 ? std::numbers::ln2 : 1.0};
    json doc;
    doc["model"] = {{"name", m.name}, {"graph", m.system.has_value()}, {"horizon", N}};
    if (m.spec) {
        doc["model"]["loop_counts"] = m.spec->counts.describe();
        doc["model"]["scheme"] = scheme_name(m.spec->scheme);
        if (m.spec->truncate_len)
            doc["model"]["truncate_len"] = *m.spec->truncate_len;
    }
    if (m.closed_form)
        doc["model"]["closed_form"] = family_json(*m.closed_form, u);
    doc["units"] = config.log2 ? "log2" : "ln";

    const PartitionSums sums = model_sums(m, N);
    doc["logZ"] = u.logs(sums.log_z);
    doc["logZstar"] = u.logs(sums.log_zstar);
    doc["sums"] = {{"method", method_name(sums.method)}, {"base", to_string(sums.base)}, {"horizon", N}};

    const PressureEstimate fit = pressure_estimate(sums);
    double P = fit.value;
    json pj = {{"fit", u.log(fit.value)},        {"uncertainty", u.log(fit.uncertainty)},
               {"first_n", fit.first_n},         {"last_n", fit.last_n},
               {"max_residual", u.log(fit.max_residual)}, {"degenerate", fit.degenerate}};
    if (m.closed_form) {
        const CertifiedValue exact = pressure_from_returns(*m.closed_form);
        P = exact.value;
        pj["closed_form"] = u.log(exact.value);
        pj["closed_form_error"] = u.log(exact.error_bound);
    }
    pj["value"] = u.log(P);
    doc["pressure"] = pj;
    if (task == Task::Pressure)
        return doc;

    json summary = {{"pressure", u.log(P)}};
    if (task == Task::Report || task == Task::Spr) {
        const double tol = m.closed_form ? kSprClosedFormTol : config.tol;
        const SprResult spr = spr_check(sums.log_zstar, P, tol);
        doc["spr"] = {{"verdict", verdict_name(spr.verdict)}, {"slope", u.log(spr.slope)},
                      {"slope_stderr", u.log(spr.slope_stderr)}, {"pressure", u.log(P)},
                      {"tol", format_number(tol)}, {"first_n", spr.first_n}, {"last_n", spr.last_n}};
        const SprBoundary edge = m.closed_form ? spr_boundary(*m.closed_form) : spr_boundary(sums.log_zstar);
        const SeriesValue at0 = m.closed_form ? induced_pressure(*m.closed_form, 0.0)
                                              : induced_pressure(sums.log_zstar, 0.0);
        doc["induced"] = {{"p_star", u.log(edge.p_star)}, {"delta", series_json(edge.delta, u)},
                          {"at_zero", series_json(at0, u)}};
        RecurrenceResult rec;
        if (m.closed_form)
            rec = std::visit([&](const auto& f) { return recurrence_classify(f, P); }, *m.closed_form);
        else
            rec = recurrence_classify(sums.log_zstar, P);
        doc["recurrence"] = {{"class", recurrence_name(rec.kind)},
                             {"first_return", series_json(rec.first_return, u)},
                             {"mean_return", series_json(rec.mean_return, u)},
                             {"evidence", rec.evidence}};
        summary["spr"] = verdict_name(spr.verdict);
        summary["class"] = recurrence_name(rec.kind);
    }
    if (task == Task::Report) {
        const double chi = m.system ? chi_per(*m.system, m.potential, N) : abstract_chi_per(*m.spec, N);
        const UcsResult ucs = ucs_check(chi, P, config.tol);
        doc["chi_per"] = {{"value", u.log(chi)}, {"ucs", verdict_name(ucs.verdict)}, {"tol", format_number(ucs.tol)}};
        summary["chi_per"] = u.log(chi);
        summary["model"] = m.system ? "graph" : "abstract";
        summary["ucs"] = verdict_name(ucs.verdict);
        if (m.system) {
            const CrcProfile crc = crc_profile(*m.system, m.potential, config.qs.front(), N, P, config.tol);
            doc["crc"] = {{"q", crc.q},
                          {"lambda", u.log(crc.lambda)},
                          {"C", u.log(crc.c)},
                          {"margin", u.log(crc.margin)},
                          {"verdict", verdict_name(crc.verdict)},
                          {"s", u.logs(crc.s)}};
            summary["crc"] = verdict_name(crc.verdict);
        }
        if (m.spec) {
            try {
                const double h = htop_solve(m.spec->counts);
                doc["h_top"] = u.log(h);
                summary["h_top"] = u.log(h);
            } catch (const NoSolutionError&) {
                doc["h_top"] = "+inf";
                summary["h_top"] = "+inf";
            }
        }
    }
    if (task == Task::Report || task == Task::Hinf) {
        if (m.spec) {
            const double h = bouquet_hinf_oracle(m.spec->counts);
            const double d = bouquet_delta_oracle(*m.spec);
            doc["oracles"] = {{"h_inf", u.log(h)}, {"delta", u.log(d)}};
            summary["h_inf"] = u.log(h);
            summary["delta"] = u.log(d);
            summary["delta_plus_hinf"] = u.log(h + d);
        }
        if (m.system) {
            const InfinityProfile prof = delta_profile(*m.system, m.potential, config.qs, config.Ms, N);
            const CiResult ci = ci_check(prof, P);
            json cells = json::array();
            for (const auto& c : prof.cells)
                cells.push_back({{"M", c.M},
                                 {"q", c.q},
                                 {"slope", u.log(c.slope)},
                                 {"slope_stderr", u.log(c.slope_stderr)},
                                 {"delta", u.log(c.delta)},
                                 {"delta_band", u.log(c.delta_band)},
                                 {"log_z", u.logs(c.log_z)},
                                 {"z_phi", u.logs(c.z_phi)}});
            doc["profile"] = {{"horizon", N},
                              {"M", prof.Ms},
                              {"q", prof.qs},
                              {"cells", cells},
                              {"h_inf", u.log(prof.h_inf)},
                              {"delta", u.log(prof.delta)},
                              {"delta_band", u.log(prof.delta_band)},
                              {"counts_monotone_in_M", prof.counts_monotone_in_M},
                              {"slopes_monotone_in_M", prof.slopes_monotone_in_M},
                              {"ci", verdict_name(ci.verdict)}};
            if (!prof.counts_monotone_in_M)
                throw InvariantError("z_n(M, q) increased with M");
            summary["h_inf_fitted"] = u.log(prof.h_inf);
            summary["delta_fitted"] = u.log(prof.delta);
            summary["ci"] = verdict_name(ci.verdict);
        }
    }
    doc["summary"] = summary;
    return doc;
}

namespace {

double rel_error(double log_a, double log_b)
{
    if (log_a == kNegInf && log_b == kNegInf)
        return 0.0;
    if (log_a == kNegInf || log_b == kNegInf)
        return kInf;
    return std::abs(std::expm1(log_a - log_b));
}

} // namespace

json run_oracle(const RunConfig& config)
{
    validate(config);
    const std::size_t N = horizon_of(config, 12);
    const std::uint64_t L = config.truncate.value_or(5);
    if (N > kOracleMaxHorizon)
        throw RefusalError("oracle horizon " + std::to_string(N) + " exceeds the enumeration cap "
                               + std::to_string(kOracleMaxHorizon),
                           "horizon");
    if (config.preset && L > kOracleMaxTruncation)
        throw RefusalError("oracle truncation " + std::to_string(L) + " exceeds the enumeration cap "
                               + std::to_string(kOracleMaxTruncation),
                           "truncate");
    RunConfig local = config;
    if (config.preset)
        local.truncate = L;
    const Model m = resolve_model(local, L);
    if (!m.system)
        throw RefusalError("the oracle needs a graph realization of " + m.name, "preset");
    const TransitionSystem& T = *m.system;
    if (!T.bounded_branching())
        throw RefusalError("the oracle needs a truncated bouquet", "truncate");

    constexpr double kWeightedTol = 1e-12;
    json rows = json::array();
    double max_rel = 0.0;
    bool all_pass = true;
    auto add_weighted = [&](const std::string& what, std::size_t n, double brute, double dp, json extra = json::object()) {
        const double rel = rel_error(brute, dp);
        const bool pass = rel <= kWeightedTol;
        max_rel = std::max(max_rel, rel);
        all_pass = all_pass && pass;
        json row = {{"quantity", what}, {"n", n}, {"brute", format_number(brute)}, {"dp", format_number(dp)},
                    {"rel_err", format_number(rel)}, {"pass", pass}};
        row.update(extra);
        rows.push_back(row);
    };
    auto add_exact = [&](const std::string& what, std::size_t n, const BigInt& brute, const BigInt& dp,
                         json extra = json::object()) {
        const bool pass = brute == dp;
        all_pass = all_pass && pass;
        json row = {{"quantity", what}, {"n", n}, {"brute", to_string(brute)}, {"dp", to_string(dp)},
                    {"rel_err", pass ? 0.0 : 1.0}, {"pass", pass}};
        row.update(extra);
        rows.push_back(row);
    };

    const PartitionSums brute = partition_sums_bruteforce(T, m.potential, m.base, N);
    const PartitionSums dp = partition_sums(T, m.potential, m.base, N);
    std::optional<PartitionSums> renewal;
    if (m.spec)
        renewal = partition_sums_renewal(truncated_weights(*m.spec, N));
    for (std::size_t n = 1; n <= N; ++n) {
        BigInt enumerated = 0;
        for_each_periodic_point(T, n, m.base, [&](std::span<const StateId>) {
            enumerated += 1;
            return true;
        });
        add_exact("periodic_points", n, enumerated, periodic_point_count(T, n, m.base));
        add_weighted("logZ", n, brute.log_z[n - 1], dp.log_z[n - 1]);
        add_weighted("logZstar", n, brute.log_zstar[n - 1], dp.log_zstar[n - 1]);
        if (renewal) {
            add_weighted("logZ_renewal", n, brute.log_z[n - 1], renewal->log_z[n - 1]);
            add_weighted("logZstar_renewal", n, brute.log_zstar[n - 1], renewal->log_zstar[n - 1]);
        }
    }
    for (auto q : config.qs)
        for (auto M : config.Ms) {
            const auto series = count_B_series(T, &m.potential, N, M, q, CountMethod::DP);
            for (std::size_t n = 1; n <= N; ++n) {
                const BCount e = count_B(T, &m.potential, n, M, q, CountMethod::Enumeration);
                const json cell = {{"M", M}, {"q", q}};
                add_exact("z_n", n, e.z, series[n - 1].z, cell);
                const double diff = e.z_phi == series[n - 1].z_phi
                                        ? 0.0
                                        : std::abs(e.z_phi - series[n - 1].z_phi) / (1.0 + std::abs(e.z_phi));
                const bool pass = diff <= kWeightedTol;
                all_pass = all_pass && pass;
                max_rel = std::max(max_rel, diff);
                json row = {{"quantity", "z_phi"}, {"n", n}, {"brute", format_number(e.z_phi)},
                            {"dp", format_number(series[n - 1].z_phi)}, {"rel_err", format_number(diff)},
                            {"pass", pass}};
                row.update(cell);
                rows.push_back(row);
                if (T.is_bouquet()) {
                    const BigInt bound = composition_bound(T, n, M, q);
                    const bool ok = e.z <= bound;
                    all_pass = all_pass && ok;
                    json b = {{"quantity", "z_n_bound"}, {"n", n}, {"brute", to_string(e.z)},
                              {"dp", to_string(bound)}, {"rel_err", 0.0}, {"pass", ok}};
                    b.update(cell);
                    rows.push_back(b);
                }
            }
        }
    return {{"model", m.name},
            {"horizon", N},
            {"truncate_len", T.is_bouquet() ? json(T.max_loop_len().value_or(0)) : json(nullptr)},
            {"rows", rows},
            {"max_rel_err", format_number(max_rel)},
            {"all_pass", all_pass}};
}

namespace {

std::string cell_text(const json& v)
{
    if (v.is_string())
        return v.get<std::string>();
    if (v.is_null())
        return "";
    return v.dump();
}

void write_file(const std::filesystem::path& path, const std::string& body, std::vector<std::string>& written)
{
    std::ofstream out(path);
    if (!out)
        throw ConfigError(path.string(), "cannot write output file");
    out << body;
    written.push_back(path.string());
}

} // namespace

std::vector<std::string> write_outputs(const json& doc, const RunConfig& config, const std::string& stem)
{
    const std::filesystem::path dir(config.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw ConfigError("out", "cannot create directory " + dir.string());
    std::vector<std::string> written;
    if (config.format == "json") {
        write_file(dir / (stem + ".json"), doc.dump(2) + "\n", written);
        return written;
    }
    json summary = doc;
    if (doc.contains("logZ")) {
        std::string csv = "n,logZ,logZstar\n";
        for (std::size_t i = 0; i < doc["logZ"].size(); ++i)
            csv += std::to_string(i + 1) + "," + cell_text(doc["logZ"][i]) + "," + cell_text(doc["logZstar"][i]) + "\n";
        write_file(dir / "partition_sums.csv", csv, written);
        summary.erase("logZ");
        summary.erase("logZstar");
    }
    if (doc.contains("profile")) {
        std::string csv = "n,M,q,log_z,z_phi\n";
        for (const auto& c : doc["profile"]["cells"])
            for (std::size_t i = 0; i < c["log_z"].size(); ++i)
                csv += std::to_string(i + 1) + "," + cell_text(c["M"]) + "," + cell_text(c["q"]) + ","
                       + cell_text(c["log_z"][i]) + "," + (i < c["z_phi"].size() ? cell_text(c["z_phi"][i]) : "")
                       + "\n";
        write_file(dir / "profile.csv", csv, written);
        for (auto& c : summary["profile"]["cells"]) {
            c.erase("log_z");
            c.erase("z_phi");
        }
    }
    if (doc.contains("rows")) {
        std::string csv = "quantity,n,M,q,brute,dp,rel_err,pass\n";
        for (const auto& r : doc["rows"])
            csv += cell_text(r["quantity"]) + "," + cell_text(r["n"]) + "," + cell_text(r.value("M", json())) + ","
                   + cell_text(r.value("q", json())) + "," + cell_text(r["brute"]) + "," + cell_text(r["dp"]) + ","
                   + cell_text(r["rel_err"]) + "," + cell_text(r["pass"]) + "\n";
        write_file(dir / (stem + ".csv"), csv, written);
        summary.erase("rows");
    }
    if (summary.contains("crc"))
        summary["crc"].erase("s");
    write_file(dir / "summary.json", summary.dump(2) + "\n", written);
    return written;
}

} // namespace cms

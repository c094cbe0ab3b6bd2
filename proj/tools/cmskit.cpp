#include "cms/errors.hpp"
#include "cms/examples.hpp"
#include "cms/report.hpp"
#include "cms/spec_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

enum Exit { kOk = 0, kConfig = 2, kRefusal = 3, kInvariant = 4 };

struct Flags {
    std::string config;
    std::string shift;
    std::string potential;
    std::string preset;
    std::size_t horizon = 0;
    std::uint64_t truncate = 0;
    std::vector<std::uint64_t> Ms;
    std::vector<std::uint64_t> qs;
    double tol = 0.0;
    std::string out;
    std::string format;
    bool log2 = false;
};

struct Bound {
    CLI::App* app;
    std::vector<std::pair<std::string, CLI::Option*>> opts;

    bool given(const std::string& name) const
    {
        for (const auto& [n, o] : opts)
            if (n == name)
                return o->count() > 0;
        return false;
    }
};

Bound add_run_flags(CLI::App* app, Flags& f)
{
    Bound b{app, {}};
    b.opts.emplace_back("config", app->add_option("--config", f.config, "JSON run config; flags override it"));
    b.opts.emplace_back("shift", app->add_option("--shift", f.shift, "shift spec (JSON)"));
    b.opts.emplace_back("potential", app->add_option("--potential", f.potential, "potential spec (JSON)"));
    b.opts.emplace_back("preset", app->add_option("--preset", f.preset, "named family, see `cmskit presets`"));
    b.opts.emplace_back("horizon", app->add_option("--horizon", f.horizon, "largest n (N)"));
    b.opts.emplace_back("truncate", app->add_option("--truncate", f.truncate, "largest loop length kept (L)"));
    b.opts.emplace_back("M", app->add_option("--M", f.Ms, "M grid, comma separated")->delimiter(','));
    b.opts.emplace_back("q", app->add_option("--q", f.qs, "q grid, comma separated")->delimiter(','));
    b.opts.emplace_back("tol", app->add_option("--tol", f.tol, "verdict tolerance"));
    b.opts.emplace_back("out", app->add_option("--out", f.out, "output directory"));
    b.opts.emplace_back("format", app->add_option("--format", f.format, "csv or json")
                                      ->check(CLI::IsMember({"csv", "json"})));
    b.opts.emplace_back("log2", app->add_flag("--log2", f.log2, "display logs in base 2"));
    return b;
}

cms::RunConfig assemble(const Bound& b, const Flags& f)
{
    cms::RunConfig c;
    if (b.given("config"))
        c = cms::parse_run_config(cms::read_json_file(f.config));
    if (b.given("shift"))
        c.shift_path = f.shift;
    if (b.given("potential"))
        c.potential_path = f.potential;
    if (b.given("preset"))
        c.preset = f.preset;
    if (b.given("horizon"))
        c.horizon = f.horizon;
    if (b.given("truncate"))
        c.truncate = f.truncate;
    if (b.given("M"))
        c.Ms = f.Ms;
    if (b.given("q"))
        c.qs = f.qs;
    if (b.given("tol"))
        c.tol = f.tol;
    if (b.given("out"))
        c.out_dir = f.out;
    if (b.given("format"))
        c.format = f.format;
    if (b.given("log2"))
        c.log2 = f.log2;
    cms::validate(c);
    return c;
}

std::string flag_for(const std::string& parameter)
{
    if (parameter == "truncate_len")
        return "--truncate";
    return "--" + parameter;
}

void emit(const nlohmann::json& doc, const cms::RunConfig& c, const std::string& stem)
{
    const auto paths = cms::write_outputs(doc, c, stem);
    if (doc.contains("summary"))
        std::cout << doc["summary"].dump(2) << "\n";
    for (const auto& p : paths)
        std::cout << "wrote " << p << "\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"cmskit: partition sums, pressure and recurrence diagnostics for countable Markov shifts"};
    app.require_subcommand(1);

    Flags f;
    auto* report = app.add_subcommand("report", "full diagnostics report");
    auto* oracle = app.add_subcommand("oracle", "brute force versus DP agreement table");
    auto* presets = app.add_subcommand("presets", "list the named families");
    auto* pressure = app.add_subcommand("pressure", "partition sums and pressure estimate");
    auto* hinf = app.add_subcommand("hinf", "entropy and contraction at infinity profiles");
    auto* spr = app.add_subcommand("spr", "SPR, induced pressure and recurrence class");

    std::vector<std::pair<CLI::App*, Bound>> runs;
    for (auto* sub : {report, oracle, pressure, hinf, spr})
        runs.emplace_back(sub, add_run_flags(sub, f));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (presets->parsed()) {
            for (const auto& p : cms::list_presets())
                std::cout << p.name << "\t" << p.description << "\n";
            return kOk;
        }
        for (const auto& [sub, bound] : runs) {
            if (!sub->parsed())
                continue;
            const auto config = assemble(bound, f);
            if (sub == oracle) {
                const auto doc = cms::run_oracle(config);
                emit(doc, config, "oracle");
                std::cout << (doc.at("all_pass").get<bool>() ? "oracle: all rows pass" : "oracle: FAILED rows")
                          << " (max_rel_err " << doc.at("max_rel_err").dump() << ")\n";
                return doc.at("all_pass").get<bool>() ? kOk : kInvariant;
            }
            cms::Task task = cms::Task::Report;
            if (sub == pressure)
                task = cms::Task::Pressure;
            else if (sub == hinf)
                task = cms::Task::Hinf;
            else if (sub == spr)
                task = cms::Task::Spr;
            emit(cms::run_task(config, task), config, sub->get_name());
            return kOk;
        }
    } catch (const cms::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const cms::DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const cms::RefusalError& e) {
        std::cerr << "refused: " << e.what() << " (set or lower " << flag_for(e.parameter()) << ")\n";
        return kRefusal;
    } catch (const cms::UnreachableError& e) {
        std::cerr << "refused: " << e.what() << " (horizon " << e.horizon() << ")\n";
        return kRefusal;
    } catch (const cms::NoSolutionError& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return kRefusal;
    } catch (const cms::InvariantError& e) {
        std::cerr << "invariant breach: " << e.what() << "\n";
        return kInvariant;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInvariant;
    }
    return kOk;
}

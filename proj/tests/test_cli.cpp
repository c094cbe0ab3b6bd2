#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cms/errors.hpp"
#include "cms/report.hpp"
#include "cms/spec_io.hpp"
#include "cms/words.hpp"
#include "support.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cms;
using nlohmann::json;
using testing::ln2;

namespace {

std::string data(const std::string& name) { return std::string(CMS_TEST_DATA) + "/" + name; }

std::filesystem::path scratch(const std::string& name)
{
    auto p = std::filesystem::temp_directory_path() / ("cmskit_tests_" + name);
    std::filesystem::remove_all(p);
    return p;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

RunConfig preset_config(const std::string& name, std::size_t N)
{
    RunConfig c;
    c.preset = name;
    c.horizon = N;
    return c;
}

double num(const json& v) { return v.get<double>(); }

} // namespace

TEST_CASE("strict config parsing")
{
    try {
        (void)parse_run_config(read_json_file(data("unknown_key.json")));
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("horizons") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_run_config(json{{"horizon", -3}}), ConfigError);
    CHECK_THROWS_AS(parse_run_config(json{{"log2", "yes"}}), ConfigError);
    CHECK_THROWS_AS(read_json_file(data("missing.json")), ConfigError);

    const auto zero = parse_run_config(read_json_file(data("zero_horizon.json")));
    CHECK_THROWS_AS(validate(zero), ConfigError);
    CHECK_THROWS_AS(validate(parse_run_config(read_json_file(data("empty_grid.json")))), ConfigError);

    RunConfig both = preset_config("sec52-entry", 10);
    both.shift_path = data("full2.json");
    CHECK_THROWS_AS(validate(both), ConfigError);
    RunConfig none;
    CHECK_THROWS_AS(validate(none), ConfigError);
    RunConfig fmt = preset_config("sec52-entry", 10);
    fmt.format = "xml";
    CHECK_THROWS_AS(validate(fmt), ConfigError);
}

TEST_CASE("shift and potential documents")
{
    const auto F = parse_shift(read_json_file(data("full2.json")));
    CHECK(F.matrix_size() == 2);
    const auto B = parse_shift(read_json_file(data("ones_bouquet.json")));
    CHECK(B.max_loop_len() == std::optional<std::uint64_t>(10));
    CHECK_THROWS_AS(parse_shift(json{{"kind", "bouquet"}, {"a", {{"form", "ones"}}}, {"extra", 1}}), ConfigError);
    CHECK_THROWS_AS(parse_shift(json{{"kind", "torus"}}), ConfigError);
    CHECK(parse_shift(json{{"kind", "bouquet"}, {"a", {{"form", "geometric"}, {"r", 2}, {"a1", 1}}}}).loop_count(1) == 1);

    const auto phi = parse_potential(read_json_file(data("cycle_table.json")), &F);
    CHECK(birkhoff_sum(F, phi, testing::word({"1", "2", "1"}), SumMode::PeriodicWrap).value == doctest::Approx(-0.5));
    try {
        (void)parse_potential(read_json_file(data("bad_word.json")), &B);
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(e.where() == "potential.table[0].word");
    }
    const auto half = parse_potential(read_json_file(data("halving_entry.json")), &B);
    CHECK(half.edge_weight(StateId::root(), StateId::loop(4, 1, 1)) == doctest::Approx(-4 * ln2()));
    CHECK(half.edge_weight(StateId::root(), StateId::root()) == doctest::Approx(-ln2()));
    CHECK_THROWS_AS(parse_potential(json{{"memory", 1}, {"beta", 2}}, nullptr), ConfigError);
}

TEST_CASE("report on the halving preset")
{
    const auto doc = run_task(preset_config("sec52-entry", 40), Task::Report);
    const auto& s = doc.at("summary");
    CHECK(std::abs(num(s.at("pressure"))) <= 1e-9);
    CHECK(num(s.at("chi_per")) == doctest::Approx(-ln2()).epsilon(1e-11));
    CHECK(s.at("spr") == "holds");
    CHECK(s.at("ucs") == "holds");
    CHECK(doc.at("logZ").size() == 40);
    for (const auto& v : doc.at("logZ"))
        CHECK(num(v) == doctest::Approx(-ln2()).epsilon(1e-11));
    CHECK(num(doc.at("induced").at("p_star")) == doctest::Approx(ln2()).epsilon(1e-11));
}

TEST_CASE("report on the sharp family")
{
    const auto doc = run_task(preset_config("sec53(3,auto)", 60), Task::Report);
    const auto& s = doc.at("summary");
    CHECK(num(s.at("h_top")) == doctest::Approx(std::log(4.0)).epsilon(1e-11));
    CHECK(std::abs(num(s.at("delta_plus_hinf"))) <= 1e-11);
    CHECK(s.at("spr") == "fails");
    CHECK(s.at("class") == "positive-recurrent");
}

TEST_CASE("finite shifts from files")
{
    RunConfig c;
    c.shift_path = data("full2.json");
    c.horizon = 20;
    const auto doc = run_task(c, Task::Pressure);
    CHECK(num(doc.at("pressure").at("value")) == doctest::Approx(ln2()).epsilon(1e-10));

    c.shift_path = data("self_loop.json");
    c.potential_path = data("constant.json");
    const auto loop = run_task(c, Task::Report);
    CHECK(num(loop.at("summary").at("chi_per")) == doctest::Approx(-0.4));
    CHECK(num(loop.at("summary").at("pressure")) == doctest::Approx(-0.4));
    CHECK(loop.at("summary").at("ucs") == "fails");
}

TEST_CASE("log2 display scaling")
{
    RunConfig c = preset_config("sec52-entry", 20);
    c.log2 = true;
    const auto doc = run_task(c, Task::Report);
    CHECK(doc.at("units") == "log2");
    CHECK(num(doc.at("summary").at("chi_per")) == doctest::Approx(-1.0).epsilon(1e-11));
}

TEST_CASE("oracle tables")
{
    RunConfig c = preset_config("renewal-ones", 12);
    c.truncate = 5;
    c.Ms = {2, 3};
    const auto doc = run_oracle(c);
    CHECK(doc.at("all_pass").get<bool>());
    CHECK(num(doc.at("max_rel_err")) <= 1e-12);
    bool saw_z = false;
    for (const auto& r : doc.at("rows"))
        saw_z = saw_z || r.at("quantity") == "z_n";
    CHECK(saw_z);

    RunConfig big = c;
    big.horizon = kOracleMaxHorizon + 1;
    try {
        (void)run_oracle(big);
        FAIL("expected a refusal");
    } catch (const RefusalError& e) {
        CHECK(e.parameter() == "horizon");
    }
    RunConfig wide = c;
    wide.truncate = kOracleMaxTruncation + 1;
    CHECK_THROWS_AS(run_oracle(wide), RefusalError);
}

TEST_CASE("outputs are byte-stable")
{
    const auto dir = scratch("stable");
    RunConfig c = preset_config("sec52-mid", 30);
    c.out_dir = dir.string();
    write_outputs(run_task(c, Task::Report), c, "report");
    const std::string first = slurp(dir / "report.json");
    write_outputs(run_task(c, Task::Report), c, "report");
    CHECK(slurp(dir / "report.json") == first);
    CHECK(!first.empty());

    c.format = "csv";
    const auto paths = write_outputs(run_task(c, Task::Report), c, "report");
    CHECK(std::filesystem::exists(dir / "partition_sums.csv"));
    CHECK(std::filesystem::exists(dir / "profile.csv"));
    CHECK(std::filesystem::exists(dir / "summary.json"));
    const std::string csv = slurp(dir / "partition_sums.csv");
    CHECK(csv.rfind("n,logZ,logZstar\n", 0) == 0);
    CHECK(slurp(dir / "profile.csv").rfind("n,M,q,log_z,z_phi\n", 0) == 0);
}

TEST_CASE("twelve significant digits")
{
    CHECK(format_number(std::log(2.0)).dump() == "0.69314718056");
    CHECK(format_number(kInf) == "+inf");
    CHECK(format_number(kNegInf) == "-inf");
    CHECK(format_number(-0.0).dump() == "0.0");
}

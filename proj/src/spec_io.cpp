#include "cms/spec_io.hpp"

#include "cms/errors.hpp"
#include "cms/examples.hpp"
#include "cms/words.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

namespace cms {

using nlohmann::json;

namespace {

void only_keys(const json& doc, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!doc.is_object())
        throw ConfigError(where, "expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : doc.items())
        if (!ok.count(key))
            throw ConfigError(where + "." + key, "unknown key");
}

const json& required(const json& doc, const std::string& where, const char* key)
{
    if (!doc.contains(key))
        throw ConfigError(where + "." + key, "missing required field");
    return doc.at(key);
}

double number(const json& v, const std::string& where)
{
    if (!v.is_number())
        throw ConfigError(where, "expected a number");
    return v.get<double>();
}

std::uint64_t natural(const json& v, const std::string& where, std::uint64_t min = 0)
{
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw ConfigError(where, "expected a non-negative integer");
    const auto n = v.get<std::uint64_t>();
    if (n < min)
        throw ConfigError(where, "must be at least " + std::to_string(min));
    return n;
}

std::string text(const json& v, const std::string& where)
{
    if (!v.is_string())
        throw ConfigError(where, "expected a string");
    return v.get<std::string>();
}

std::vector<std::uint64_t> natural_list(const json& v, const std::string& where)
{
    if (!v.is_array())
        throw ConfigError(where, "expected an array");
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(natural(v[i], where + "[" + std::to_string(i) + "]", 1));
    return out;
}

} // namespace

json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(path, "cannot open file");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path, std::string("invalid JSON: ") + e.what());
    }
}

LoopCounts parse_loop_counts(const json& doc, const std::string& where)
{
    if (!doc.is_object())
        throw ConfigError(where, "expected an object");
    const std::string form = text(required(doc, where, "form"), where + ".form");
    LoopCounts counts = LoopCounts::ones();
    if (form == "geometric") {
        only_keys(doc, where, {"form", "r", "a1"});
        counts = LoopCounts::geometric(natural(required(doc, where, "r"), where + ".r", 1));
    } else if (form == "ones") {
        only_keys(doc, where, {"form", "a1"});
    } else if (form == "list") {
        only_keys(doc, where, {"form", "values", "a1"});
        const json& vals = required(doc, where, "values");
        if (!vals.is_array())
            throw ConfigError(where + ".values", "expected an array");
        std::vector<std::uint64_t> values;
        for (std::size_t i = 0; i < vals.size(); ++i)
            values.push_back(natural(vals[i], where + ".values[" + std::to_string(i) + "]"));
        counts = LoopCounts::list(std::move(values));
    } else if (form == "double_exponential") {
        only_keys(doc, where, {"form", "a1"});
        counts = LoopCounts::double_exponential();
    } else {
        throw ConfigError(where + ".form", "unknown form '" + form + "'");
    }
    if (doc.contains("a1"))
        counts = counts.with_first(natural(doc.at("a1"), where + ".a1"));
    return counts;
}

TransitionSystem parse_shift(const json& doc, const std::string& where)
{
    if (!doc.is_object())
        throw ConfigError(where, "expected an object");
    const std::string kind = text(required(doc, where, "kind"), where + ".kind");
    try {
        if (kind == "bouquet") {
            only_keys(doc, where, {"kind", "a", "truncate_len"});
            const LoopCounts counts = parse_loop_counts(required(doc, where, "a"), where + ".a");
            std::optional<std::uint64_t> L;
            if (doc.contains("truncate_len"))
                L = natural(doc.at("truncate_len"), where + ".truncate_len", 1);
            return TransitionSystem::bouquet(counts, L);
        }
        if (kind == "finite") {
            only_keys(doc, where, {"kind", "matrix"});
            const json& m = required(doc, where, "matrix");
            if (!m.is_array())
                throw ConfigError(where + ".matrix", "expected an array of rows");
            std::vector<std::vector<int>> rows;
            for (std::size_t i = 0; i < m.size(); ++i) {
                const std::string rw = where + ".matrix[" + std::to_string(i) + "]";
                if (!m[i].is_array())
                    throw ConfigError(rw, "expected an array");
                std::vector<int> row;
                for (std::size_t j = 0; j < m[i].size(); ++j)
                    row.push_back(static_cast<int>(natural(m[i][j], rw + "[" + std::to_string(j) + "]")));
                rows.push_back(std::move(row));
            }
            return TransitionSystem::finite(rows);
        }
    } catch (const DomainError& e) {
        throw ConfigError(where, e.what());
    }
    throw ConfigError(where + ".kind", "unknown kind '" + kind + "'");
}

Potential parse_potential(const json& doc, const TransitionSystem* host, const std::string& where)
{
    only_keys(doc, where, {"memory", "default", "table", "scheme", "C", "beta", "rate", "root_weight", "psi"});
    const double def = doc.contains("default") ? number(doc.at("default"), where + ".default") : 0.0;
    std::optional<Potential> phi;
    if (doc.contains("scheme")) {
        const std::string name = text(doc.at("scheme"), where + ".scheme");
        const auto scheme = parse_scheme(name);
        if (!scheme)
            throw ConfigError(where + ".scheme", "unknown scheme '" + name + "'");
        LoopWeightRule rule;
        rule.beta = doc.contains("beta") ? number(doc.at("beta"), where + ".beta") : 0.0;
        rule.rate = doc.contains("rate") ? number(doc.at("rate"), where + ".rate") : std::numbers::ln2;
        double c = 1.0;
        if (doc.contains("C")) {
            const json& cj = doc.at("C");
            if (cj.is_string() && cj.get<std::string>() == "auto") {
                if (!(rule.beta > 1.0))
                    throw ConfigError(where + ".C", "\"auto\" needs beta > 1");
                c = normalizing_C(rule.beta).value;
            } else {
                c = number(cj, where + ".C");
            }
            if (!(c > 0.0))
                throw ConfigError(where + ".C", "must be positive");
        }
        rule.log_c = std::log(c);
        rule.root_loop = doc.contains("root_weight") ? number(doc.at("root_weight"), where + ".root_weight")
                                                     : rule.log_c;
        if (doc.contains("psi")) {
            const json& p = doc.at("psi");
            if (!p.is_array())
                throw ConfigError(where + ".psi", "expected an array");
            for (std::size_t i = 0; i < p.size(); ++i)
                rule.psi.push_back(number(p[i], where + ".psi[" + std::to_string(i) + "]"));
        }
        phi = Potential::bouquet(std::move(rule), *scheme, def);
        if (doc.contains("memory") && natural(doc.at("memory"), where + ".memory") != 2)
            throw ConfigError(where + ".memory", "bouquet schemes have memory 2");
    } else {
        for (const char* key : {"C", "beta", "rate", "root_weight", "psi"})
            if (doc.contains(key))
                throw ConfigError(where + "." + key, "only meaningful together with a scheme");
        const std::uint64_t m = natural(required(doc, where, "memory"), where + ".memory", 1);
        phi = Potential(m, def);
    }
    if (doc.contains("table")) {
        const json& t = doc.at("table");
        if (!t.is_array())
            throw ConfigError(where + ".table", "expected an array");
        for (std::size_t i = 0; i < t.size(); ++i) {
            const std::string ew = where + ".table[" + std::to_string(i) + "]";
            only_keys(t[i], ew, {"word", "value"});
            const json& wj = required(t[i], ew, "word");
            if (!wj.is_array())
                throw ConfigError(ew + ".word", "expected an array of states");
            Word w;
            for (std::size_t k = 0; k < wj.size(); ++k) {
                const std::string sw = ew + ".word[" + std::to_string(k) + "]";
                try {
                    w.push_back(wj[k].is_number_integer() ? StateId::plain(natural(wj[k], sw, 1))
                                                          : parse_state(text(wj[k], sw)));
                } catch (const DomainError& e) {
                    throw ConfigError(sw, e.what());
                }
            }
            if (w.size() != phi->memory())
                throw ConfigError(ew + ".word", "length differs from the memory " + std::to_string(phi->memory()));
            if (host) {
                try {
                    if (!is_admissible(*host, w))
                        throw ConfigError(ew + ".word", "not an admissible word of the shift");
                } catch (const DomainError& e) {
                    throw ConfigError(ew + ".word", e.what());
                }
            }
            phi->set(w, number(required(t[i], ew, "value"), ew + ".value"));
        }
    }
    return *phi;
}

RunConfig parse_run_config(const json& doc)
{
    const std::string where = "config";
    only_keys(doc, where, {"shift", "potential", "preset", "horizon", "truncate", "M", "q", "tol", "out", "format",
                           "log2"});
    RunConfig c;
    if (doc.contains("shift"))
        c.shift_path = text(doc.at("shift"), where + ".shift");
    if (doc.contains("potential"))
        c.potential_path = text(doc.at("potential"), where + ".potential");
    if (doc.contains("preset"))
        c.preset = text(doc.at("preset"), where + ".preset");
    if (doc.contains("horizon"))
        c.horizon = natural(doc.at("horizon"), where + ".horizon");
    if (doc.contains("truncate"))
        c.truncate = natural(doc.at("truncate"), where + ".truncate");
    if (doc.contains("M"))
        c.Ms = natural_list(doc.at("M"), where + ".M");
    if (doc.contains("q"))
        c.qs = natural_list(doc.at("q"), where + ".q");
    if (doc.contains("tol"))
        c.tol = number(doc.at("tol"), where + ".tol");
    if (doc.contains("out"))
        c.out_dir = text(doc.at("out"), where + ".out");
    if (doc.contains("format"))
        c.format = text(doc.at("format"), where + ".format");
    if (doc.contains("log2")) {
        if (!doc.at("log2").is_boolean())
            throw ConfigError(where + ".log2", "expected a boolean");
        c.log2 = doc.at("log2").get<bool>();
    }
    return c;
}

void validate(const RunConfig& c)
{
    if (c.horizon && *c.horizon < 1)
        throw ConfigError("horizon", "must be at least 1");
    if (c.truncate && *c.truncate < 1)
        throw ConfigError("truncate", "must be at least 1");
    if (c.Ms.empty())
        throw ConfigError("M", "grid must be non-empty");
    if (c.qs.empty())
        throw ConfigError("q", "grid must be non-empty");
    for (auto m : c.Ms)
        if (m < 1)
            throw ConfigError("M", "grid values must be at least 1");
    for (auto q : c.qs)
        if (q < 1)
            throw ConfigError("q", "grid values must be at least 1");
    if (c.preset.has_value() == c.shift_path.has_value())
        throw ConfigError("preset", "give exactly one of a preset and a shift spec");
    if (c.preset && c.potential_path)
        throw ConfigError("potential", "presets carry their own potential");
    if (c.format != "json" && c.format != "csv")
        throw ConfigError("format", "must be json or csv");
    if (!(c.tol > 0.0))
        throw ConfigError("tol", "must be positive");
}

} // namespace cms

#include "cms/potential.hpp"

#include "cms/errors.hpp"
#include "cms/numeric.hpp"
#include "cms/words.hpp"

#include <algorithm>
#include <cmath>

namespace cms {

double LoopWeightRule::total(std::uint64_t n) const
{
    if (n == 0)
        throw DomainError("loop length must be positive");
    if (n == 1 && root_loop)
        return *root_loop;
    if (psi_bounds_support && n > psi.size())
        return kNegInf;
    double w = log_c - rate * static_cast<double>(n) - beta * std::log(static_cast<double>(n));
    if (subtract_log_count) {
        if (!counts)
            throw DomainError("loop-count subtraction needs the loop counts");
        w -= counts->log_count(n);
    }
    if (n <= psi.size())
        w -= psi[n - 1];
    return w;
}

const char* scheme_name(BouquetScheme s)
{
    switch (s) {
    case BouquetScheme::Entry:
        return "bouquet_entry";
    case BouquetScheme::Exit:
        return "bouquet_exit";
    case BouquetScheme::Mid:
        return "bouquet_mid";
    case BouquetScheme::Spread:
        return "bouquet_spread";
    }
    return "?";
}

std::optional<BouquetScheme> parse_scheme(std::string_view name)
{
    for (auto s : {BouquetScheme::Entry, BouquetScheme::Exit, BouquetScheme::Mid, BouquetScheme::Spread})
        if (name == scheme_name(s))
            return s;
    return std::nullopt;
}

Potential::Potential(std::size_t memory, double default_value) : memory_(memory), default_(default_value)
{
    if (memory == 0)
        throw DomainError("potential memory must be at least 1");
}

Potential Potential::bouquet(LoopWeightRule rule, BouquetScheme scheme, double default_value)
{
    Potential p(2, default_value);
    p.rule_ = std::move(rule);
    p.scheme_ = scheme;
    return p;
}

void Potential::set(const Word& key, double value)
{
    if (key.size() != memory_)
        throw DomainError("table key " + to_string(key) + " does not have length " + std::to_string(memory_));
    table_[key] = value;
}

std::optional<double> Potential::rule_value(const StateId& a, const StateId& b) const
{
    if (a.is_root() && b.is_root())
        return rule_->total(1);
    std::uint64_t n = 0, step = 0;
    if (a.is_root() && b.is_loop() && b.position == 1) {
        n = b.loop_len;
        step = 0;
    } else if (a.is_loop()) {
        n = a.loop_len;
        step = a.position;
    } else {
        return std::nullopt;
    }
    switch (*scheme_) {
    case BouquetScheme::Entry:
        if (step == 0)
            return rule_->total(n);
        break;
    case BouquetScheme::Exit:
        if (step == n - 1)
            return rule_->total(n);
        break;
    case BouquetScheme::Mid:
        if (step == (n + 1) / 2 - 1)
            return rule_->total(n);
        break;
    case BouquetScheme::Spread:
        return rule_->total(n) / static_cast<double>(n);
    }
    return std::nullopt;
}

double Potential::value(std::span<const StateId> window) const
{
    if (window.size() != memory_)
        throw DomainError("potential of memory " + std::to_string(memory_) + " evaluated on a window of length "
                          + std::to_string(window.size()));
    if (!table_.empty()) {
        auto it = table_.find(Word(window.begin(), window.end()));
        if (it != table_.end())
            return it->second + shift_;
    }
    if (rule_)
        if (auto v = rule_value(window[0], window[1]))
            return *v + shift_;
    return default_ + shift_;
}

double Potential::edge_weight(const StateId& a, const StateId& b) const
{
    if (memory_ == 1) {
        const StateId w[1] = {a};
        return value(w);
    }
    if (memory_ == 2) {
        const StateId w[2] = {a, b};
        return value(w);
    }
    throw DomainError("edge weights need a potential of memory at most 2");
}

std::function<double(const StateId&, const StateId&)> Potential::edge_function() const
{
    return [this](const StateId& a, const StateId& b) { return edge_weight(a, b); };
}

std::set<std::pair<std::uint64_t, std::uint64_t>> Potential::tabled_loops() const
{
    std::set<std::pair<std::uint64_t, std::uint64_t>> out;
    for (const auto& [key, v] : table_)
        for (const auto& s : key)
            if (s.is_loop())
                out.insert({s.loop_len, s.loop_index});
    return out;
}

std::vector<double> Potential::variations() const
{
    std::vector<double> var(memory_, 0.0);
    for (std::size_t k = 1; k < memory_; ++k) {
        std::map<Word, std::pair<double, double>> ranges;
        for (const auto& [key, v] : table_) {
            Word prefix(key.begin(), key.begin() + static_cast<std::ptrdiff_t>(k));
            auto [it, fresh] = ranges.emplace(prefix, std::make_pair(std::min(v, default_), std::max(v, default_)));
            if (!fresh) {
                it->second.first = std::min(it->second.first, v);
                it->second.second = std::max(it->second.second, v);
            }
        }
        for (const auto& [prefix, r] : ranges)
            var[k - 1] = std::max(var[k - 1], r.second - r.first);
        if (rule_)
            var[k - 1] = kInf; // loop weights are unbounded on shorter cylinders
    }
    return var;
}

double Potential::distortion_constant() const
{
    const auto var = variations();
    double b = 0.0;
    for (std::size_t k = 2; k <= var.size(); ++k)
        b += var[k - 1];
    return b;
}

Potential Potential::shifted(double c) const
{
    Potential p = *this;
    p.shift_ += c;
    return p;
}

namespace {

void check_word(const TransitionSystem& system, std::span<const StateId> word)
{
    if (!is_admissible(system, word))
        throw DomainError("inadmissible word " + to_string(Word(word.begin(), word.end())));
}

double window_sum(const Potential& phi, std::span<const StateId> word, std::size_t n)
{
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        s += phi.value(word.subspan(j, phi.memory()));
    return s;
}

// Optimizes S_n phi over admissible extensions of `word` to n + m - 1 symbols.
double extreme_over_cylinder(const TransitionSystem& system, const Potential& phi, std::span<const StateId> word,
                             std::size_t n, bool want_max)
{
    check_word(system, word);
    if (word.empty())
        throw DomainError("cylinder of the empty word");
    const std::size_t need = n + phi.memory() - 1;
    if (n == 0)
        return 0.0;
    if (word.size() >= need)
        return window_sum(phi, word, n);
    double best = want_max ? kNegInf : kInf;
    Word w(word.begin(), word.end());
    std::function<void()> dfs = [&]() {
        if (w.size() == need) {
            const double s = window_sum(phi, w, n);
            best = want_max ? std::max(best, s) : std::min(best, s);
            return;
        }
        for (const auto& t : system.successors(w.back())) {
            w.push_back(t);
            dfs();
            w.pop_back();
        }
    };
    dfs();
    return best;
}

} // namespace

BirkhoffValue birkhoff_sum(const TransitionSystem& system, const Potential& phi, std::span<const StateId> word,
                           SumMode mode)
{
    if (word.empty())
        throw DomainError("Birkhoff sum of the empty word");
    check_word(system, word);
    BirkhoffValue out;
    const std::size_t m = phi.memory();
    if (mode == SumMode::PeriodicWrap) {
        if (!system.has_edge(word.back(), word.front()))
            throw DomainError("wrap edge " + to_string(word.back()) + " -> " + to_string(word.front())
                              + " is not admissible");
        const std::size_t len = word.size();
        Word window(m);
        double s = 0.0;
        for (std::size_t j = 0; j < len; ++j) {
            for (std::size_t t = 0; t < m; ++t)
                window[t] = word[(j + t) % len];
            s += phi.value(window);
        }
        out.value = out.lower = s;
        out.length = len;
        return out;
    }
    const std::size_t n = word.size() >= m ? word.size() - m + 1 : 0;
    out.length = n;
    out.value = out.lower = n > 0 ? window_sum(phi, word, n) : 0.0;
    return out;
}

double cylinder_inf(const TransitionSystem& system, const Potential& phi, std::span<const StateId> word, std::size_t n)
{
    return extreme_over_cylinder(system, phi, word, n, false);
}

double cylinder_sup(const TransitionSystem& system, const Potential& phi, std::span<const StateId> word, std::size_t n)
{
    return extreme_over_cylinder(system, phi, word, n, true);
}

double connector_constant(const TransitionSystem& system, const Potential& phi, std::uint64_t q)
{
    if (q == 0)
        throw DomainError("connector constant needs q >= 1");
    const auto low = system.states_up_to(q);
    double best = kInf;
    for (const auto& a : low)
        for (const auto& b : low) {
            Word w = shortest_connector(system, a, b);
            const std::size_t len = w.size();
            w.push_back(b);
            best = std::min(best, cylinder_inf(system, phi, w, len));
        }
    return best;
}

} // namespace cms

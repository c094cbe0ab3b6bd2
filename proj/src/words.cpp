#include "cms/words.hpp"

#include "bouquet_paths.hpp"
#include "cms/errors.hpp"

#include <deque>
#include <string>
#include <unordered_map>

namespace cms {

namespace {

constexpr std::size_t kDistanceStateCap = 2'000'000;

// Cached successor lists for one traversal.
class SuccessorCache {
public:
    explicit SuccessorCache(const TransitionSystem& system) : system_(system) {}

    const std::vector<StateId>& operator()(const StateId& s)
    {
        auto it = cache_.find(s);
        if (it == cache_.end())
            it = cache_.emplace(s, system_.successors(s)).first;
        return it->second;
    }

private:
    const TransitionSystem& system_;
    std::unordered_map<StateId, std::vector<StateId>> cache_;
};

// Number of edges from each state to the nearest state accepted by `target`;
// empty when the system is too large to tabulate.
std::optional<std::unordered_map<StateId, std::size_t>> distances_to(const TransitionSystem& system,
                                                                       const StateFilter& target)
{
    const auto count = system.state_count();
    if (!count || *count > kDistanceStateCap)
        return std::nullopt;
    const auto all = system.states();
    std::unordered_map<StateId, std::vector<StateId>> preds;
    preds.reserve(all.size());
    for (const auto& s : all)
        for (const auto& t : system.successors(s))
            preds[t].push_back(s);
    std::unordered_map<StateId, std::size_t> dist;
    std::deque<StateId> queue;
    for (const auto& s : all)
        if (target(s)) {
            dist.emplace(s, 0);
            queue.push_back(s);
        }
    while (!queue.empty()) {
        const StateId u = queue.front();
        queue.pop_front();
        const std::size_t d = dist[u];
        for (const auto& p : preds[u])
            if (dist.emplace(p, d + 1).second)
                queue.push_back(p);
    }
    return dist;
}

void require_bounded(const TransitionSystem& system)
{
    if (!system.bounded_branching())
        throw RefusalError("word enumeration needs a truncated bouquet", "truncate_len");
}

// Depth-first extension of `word` up to `length` symbols. `remaining_ok`
// prunes prefixes that cannot be completed.
bool extend(SuccessorCache& succ, std::vector<StateId>& word, std::size_t length,
            const std::function<bool(const StateId&, std::size_t)>& remaining_ok, const StateFilter& end,
            const WordVisitor& visit)
{
    if (word.size() == length) {
        if (end && !end(word.back()))
            return true;
        return visit(std::span<const StateId>(word));
    }
    const std::vector<StateId> next = succ(word.back());
    for (const auto& t : next) {
        if (remaining_ok && !remaining_ok(t, length - word.size() - 1))
            continue;
        word.push_back(t);
        const bool go_on = extend(succ, word, length, remaining_ok, end, visit);
        word.pop_back();
        if (!go_on)
            return false;
    }
    return true;
}

} // namespace

bool is_admissible(const TransitionSystem& system, std::span<const StateId> word)
{
    for (const auto& s : word)
        if (!system.contains(s))
            throw DomainError("unknown state " + to_string(s));
    for (std::size_t i = 0; i + 1 < word.size(); ++i)
        if (!system.has_edge(word[i], word[i + 1]))
            return false;
    return true;
}

bool for_each_word(const TransitionSystem& system, std::size_t length, const StateFilter& start,
                   const StateFilter& end, const WordVisitor& visit)
{
    if (length == 0)
        return true;
    require_bounded(system);
    SuccessorCache succ(system);
    std::function<bool(const StateId&, std::size_t)> remaining_ok;
    std::optional<std::unordered_map<StateId, std::size_t>> dist;
    if (end) {
        dist = distances_to(system, end);
        if (dist)
            remaining_ok = [&dist](const StateId& s, std::size_t steps_left) {
                auto it = dist->find(s);
                return it != dist->end() && it->second <= steps_left;
            };
    }
    std::vector<StateId> word;
    word.reserve(length);
    for (const auto& s : system.states()) {
        if (start && !start(s))
            continue;
        if (remaining_ok && !remaining_ok(s, length - 1))
            continue;
        word.assign(1, s);
        if (!extend(succ, word, length, remaining_ok, end, visit))
            return false;
    }
    return true;
}

WordList enumerate_words(const TransitionSystem& system, std::size_t length, const StateFilter& start,
                         const StateFilter& end, std::size_t limit)
{
    WordList out;
    if (limit == 0) {
        bool any = false;
        for_each_word(system, length, start, end, [&](std::span<const StateId>) {
            any = true;
            return false;
        });
        out.exhaustive = !any;
        return out;
    }
    const bool finished = for_each_word(system, length, start, end, [&](std::span<const StateId> w) {
        if (out.words.size() == limit) {
            out.exhaustive = false;
            return false;
        }
        out.words.emplace_back(w.begin(), w.end());
        return true;
    });
    if (finished)
        out.exhaustive = true;
    return out;
}

BigInt periodic_point_count(const TransitionSystem& system, std::size_t n, const StateId& base)
{
    if (!system.contains(base))
        throw DomainError("unknown state " + to_string(base));
    if (n == 0)
        throw DomainError("period must be positive");
    if (system.is_bouquet()) {
        // Closed walks at a loop vertex leave through the root.
        if (base.is_loop() && base.loop_len > n)
            return 0;
        detail::BouquetPaths paths(system, 0, n, nullptr);
        const auto R = paths.root_table<detail::CountRing>(false);
        return base.is_root() ? R[n][0] : R[n - base.loop_len][0];
    }
    const std::size_t k = system.matrix_size();
    const std::size_t b = base.index - 1;
    std::vector<BigInt> v(k, 0), w(k);
    v[b] = 1;
    for (std::size_t step = 0; step < n; ++step) {
        std::fill(w.begin(), w.end(), BigInt(0));
        for (std::size_t i = 0; i < k; ++i) {
            if (v[i].is_zero())
                continue;
            for (std::size_t j = 0; j < k; ++j)
                if (system.matrix_entry(i, j))
                    w[j] += v[i];
        }
        v.swap(w);
    }
    return v[b];
}

bool for_each_periodic_point(const TransitionSystem& system, std::size_t n, const StateId& base,
                             const WordVisitor& visit)
{
    if (!system.contains(base))
        throw DomainError("unknown state " + to_string(base));
    if (n == 0)
        throw DomainError("period must be positive");
    if (base.is_loop() && base.loop_len > n)
        return true;
    const TransitionSystem local = system.bounded_branching() ? system : system.truncated(n);
    const auto dist = distances_to(local, [&base](const StateId& s) { return s == base; });
    std::function<bool(const StateId&, std::size_t)> remaining_ok;
    if (dist)
        // The wrap edge back to the base adds one step.
        remaining_ok = [&dist](const StateId& s, std::size_t steps_left) {
            auto it = dist->find(s);
            return it != dist->end() && it->second <= steps_left + 1;
        };
    SuccessorCache succ(local);
    std::vector<StateId> word{base};
    word.reserve(n);
    const StateFilter closes = [&local, &base](const StateId& s) { return local.has_edge(s, base); };
    return extend(succ, word, n, remaining_ok, closes, visit);
}

std::vector<Word> periodic_points(const TransitionSystem& system, std::size_t n, const StateId& base,
                                  std::size_t cap)
{
    const BigInt expected = periodic_point_count(system, n, base);
    if (expected > cap)
        throw RefusalError("period " + std::to_string(n) + " has " + to_string(expected)
                               + " periodic points, above the cap of " + std::to_string(cap),
                           "horizon");
    std::vector<Word> out;
    out.reserve(static_cast<std::size_t>(expected));
    for_each_periodic_point(system, n, base, [&out](std::span<const StateId> w) {
        out.emplace_back(w.begin(), w.end());
        return true;
    });
    return out;
}

namespace {

Word loop_run(std::uint64_t n, std::uint64_t i, std::uint64_t from_k, std::uint64_t to_k)
{
    Word w;
    for (std::uint64_t k = from_k; k <= to_k; ++k)
        w.push_back(k == 0 ? StateId::root() : StateId::loop(n, i, k));
    return w;
}

Word bouquet_connector(const TransitionSystem& system, const StateId& from, const StateId& to)
{
    if (from.is_root()) {
        if (to.is_loop())
            return loop_run(to.loop_len, to.loop_index, 0, to.position - 1);
        if (system.loop_count(1) > 0)
            return Word{StateId::root()};
        const std::uint64_t longest = system.max_loop_len().value_or(UINT64_MAX);
        for (std::uint64_t n = 2; n <= longest; ++n)
            if (system.loop_count(n) > 0)
                return loop_run(n, 1, 0, n - 1);
        throw UnreachableError("no loop returns to the root", 0);
    }
    if (to.is_loop() && to.loop_len == from.loop_len && to.loop_index == from.loop_index
        && to.position > from.position)
        return loop_run(from.loop_len, from.loop_index, from.position, to.position - 1);
    Word w = loop_run(from.loop_len, from.loop_index, from.position, from.loop_len - 1);
    if (to.is_loop()) {
        Word rest = loop_run(to.loop_len, to.loop_index, 0, to.position - 1);
        w.insert(w.end(), rest.begin(), rest.end());
    }
    return w;
}

} // namespace

Word shortest_connector_search(const TransitionSystem& system, const StateId& from, const StateId& to,
                               std::size_t horizon)
{
    if (!system.contains(from) || !system.contains(to))
        throw DomainError("unknown state in connector query");
    SuccessorCache succ(system);
    std::unordered_map<StateId, StateId> parent;
    std::deque<std::pair<StateId, std::size_t>> queue{{from, 1}};
    parent.emplace(from, from);
    while (!queue.empty()) {
        auto [u, len] = queue.front();
        queue.pop_front();
        if (system.has_edge(u, to)) {
            Word w{u};
            while (!(w.back() == from))
                w.push_back(parent.at(w.back()));
            std::reverse(w.begin(), w.end());
            return w;
        }
        if (len >= horizon)
            continue;
        for (const auto& t : succ(u))
            if (parent.emplace(t, u).second)
                queue.emplace_back(t, len + 1);
    }
    throw UnreachableError("no connector within the horizon", horizon);
}

Word shortest_connector(const TransitionSystem& system, const StateId& from, const StateId& to)
{
    if (!system.contains(from) || !system.contains(to))
        throw DomainError("unknown state in connector query");
    if (system.is_bouquet())
        return bouquet_connector(system, from, to);
    return shortest_connector_search(system, from, to, system.matrix_size());
}

PathCount f_property_count(const TransitionSystem& system, std::uint64_t q, std::size_t steps, const BigInt& bound)
{
    PathCount out;
    if (q == 0)
        return out;
    if (system.is_bouquet()) {
        detail::BouquetPaths paths(system, q, steps, nullptr);
        const auto R = paths.root_table<detail::CountRing>(false);
        for (const auto& s : paths.lows())
            for (const auto& t : paths.lows())
                out.count += paths.paths<detail::CountRing>(R, s, t, steps, std::nullopt);
    } else {
        const std::size_t k = system.matrix_size();
        const std::size_t low = std::min<std::size_t>(k, q);
        for (std::size_t s = 0; s < low; ++s) {
            std::vector<BigInt> v(k, 0), w(k);
            v[s] = 1;
            for (std::size_t step = 0; step < steps; ++step) {
                std::fill(w.begin(), w.end(), BigInt(0));
                for (std::size_t i = 0; i < k; ++i) {
                    if (v[i].is_zero())
                        continue;
                    for (std::size_t j = 0; j < k; ++j)
                        if (system.matrix_entry(i, j))
                            w[j] += v[i];
                }
                v.swap(w);
            }
            for (std::size_t t = 0; t < low; ++t)
                out.count += v[t];
        }
    }
    out.overflow = out.count > bound;
    return out;
}

} // namespace cms

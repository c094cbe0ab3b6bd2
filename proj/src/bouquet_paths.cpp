#include "bouquet_paths.hpp"

#include "cms/errors.hpp"

namespace cms::detail {

namespace {

StateId loop_vertex(std::uint64_t n, std::uint64_t i, std::uint64_t k)
{
    return (k == 0 || k == n) ? StateId::root() : StateId::loop(n, i, k);
}

} // namespace

BouquetPaths::BouquetPaths(const TransitionSystem& system, std::uint64_t q, std::size_t max_steps,
                           EdgeWeight weight, const std::set<std::pair<std::uint64_t, std::uint64_t>>& special)
    : system_(&system), q_(q), max_steps_(max_steps), weight_(std::move(weight))
{
    if (!system.is_bouquet())
        throw DomainError("bouquet path algebra needs a bouquet shift");
    lows_ = system.states_up_to(q);

    std::uint64_t longest = max_steps;
    if (auto L = system.max_loop_len())
        longest = std::min<std::uint64_t>(longest, *L);

    const LoopCounts& counts = system.loop_counts();
    // Saturating order index of v_1^{n,1} minus one; only compared against q.
    std::uint64_t base = 1;
    auto sat_add = [](std::uint64_t a, std::uint64_t b) {
        std::uint64_t r = 0;
        return __builtin_add_overflow(a, b, &r) ? UINT64_MAX : r;
    };
    auto sat_mul = [](std::uint64_t a, std::uint64_t b) {
        std::uint64_t r = 0;
        return __builtin_mul_overflow(a, b, &r) ? UINT64_MAX : r;
    };
    for (std::uint64_t n = 1; n <= longest; ++n) {
        const BigInt a = counts.exact_count(n);
        const std::uint64_t a_small = a > UINT64_MAX ? UINT64_MAX : static_cast<std::uint64_t>(a);
        const std::uint64_t loop_base = base;
        if (n >= 2)
            base = sat_add(base, sat_mul(a_small, n - 1));
        if (a.is_zero())
            continue;
        auto low_vertex = [&](std::uint64_t i, std::uint64_t k) {
            return q_ > 0 && sat_add(loop_base, sat_add(sat_mul(i - 1, n - 1), k)) <= q_;
        };
        auto loop_weight = [&](std::uint64_t i) {
            double w = 0.0;
            for (std::uint64_t k = 0; k < n; ++k)
                w += edge(loop_vertex(n, i, k), loop_vertex(n, i, k + 1));
            return w;
        };
        auto low_interior = [&](std::uint64_t i) {
            std::uint64_t c = 0;
            for (std::uint64_t k = 1; k < n; ++k)
                c += low_vertex(i, k) ? 1 : 0;
            return c;
        };
        // Loops whose first interior vertex is low come first in the order.
        std::set<std::uint64_t> own;
        if (n >= 2) {
            for (std::uint64_t i = 1; i <= a_small && low_vertex(i, 1); ++i)
                own.insert(i);
            for (auto it = special.lower_bound({n, 0}); it != special.end() && it->first == n; ++it)
                if (it->second >= 1 && it->second <= a_small)
                    own.insert(it->second);
        } else {
            own.insert(1);
        }
        for (std::uint64_t i : own) {
            LoopClass c;
            c.len = n;
            c.loop_index = i;
            c.multiplicity = 1;
            c.log_multiplicity = 0.0;
            c.weight = loop_weight(i);
            c.low_interior = n >= 2 ? low_interior(i) : 0;
            loops_.push_back(std::move(c));
        }
        const BigInt rest = a - own.size();
        if (rest > 0) {
            std::uint64_t rep = 1;
            while (own.count(rep))
                ++rep;
            LoopClass c;
            c.len = n;
            c.loop_index = rep;
            c.generic = true;
            c.multiplicity = rest;
            c.log_multiplicity = log_of(rest);
            c.weight = loop_weight(rep);
            c.low_interior = 0;
            loops_.push_back(std::move(c));
        }
    }
}

bool BouquetPaths::is_low(const StateId& s) const
{
    if (q_ == 0)
        return false;
    if (s.is_root())
        return true;
    try {
        return system_->order_index(s) <= q_;
    } catch (const RefusalError&) {
        return false; // index beyond 64 bits
    }
}

Segment BouquetPaths::exit_segment(const StateId& s) const
{
    Segment seg;
    if (s.is_root())
        return seg;
    const std::uint64_t n = s.loop_len;
    for (std::uint64_t k = s.position; k < n; ++k) {
        const StateId from = loop_vertex(n, s.loop_index, k);
        const StateId to = loop_vertex(n, s.loop_index, k + 1);
        seg.weight += edge(from, to);
        seg.lows += is_low(to) ? 1 : 0;
        ++seg.steps;
    }
    return seg;
}

Segment BouquetPaths::entry_segment(const StateId& t) const
{
    Segment seg;
    if (t.is_root())
        return seg;
    const std::uint64_t n = t.loop_len;
    for (std::uint64_t k = 0; k < t.position; ++k) {
        const StateId from = loop_vertex(n, t.loop_index, k);
        const StateId to = loop_vertex(n, t.loop_index, k + 1);
        seg.weight += edge(from, to);
        seg.lows += is_low(to) ? 1 : 0;
        ++seg.steps;
    }
    return seg;
}

std::optional<Segment> BouquetPaths::direct_segment(const StateId& s, const StateId& t) const
{
    if (!s.is_loop() || !t.is_loop() || s.loop_len != t.loop_len || s.loop_index != t.loop_index
        || t.position <= s.position)
        return std::nullopt;
    Segment seg;
    for (std::uint64_t k = s.position; k < t.position; ++k) {
        const StateId from = StateId::loop(s.loop_len, s.loop_index, k);
        const StateId to = StateId::loop(s.loop_len, s.loop_index, k + 1);
        seg.weight += edge(from, to);
        seg.lows += is_low(to) ? 1 : 0;
        ++seg.steps;
    }
    return seg;
}

} // namespace cms::detail

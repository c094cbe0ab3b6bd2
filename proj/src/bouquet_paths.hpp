#pragma once

// Path algebra on bouquet shifts. Every path decomposes into an exit segment
// (start vertex up to the root), a concatenation of whole loops, and an entry
// segment (root down to the end vertex), or lies inside a single loop. The
// root-to-root part is a renewal convolution over loop classes, evaluated in
// a semiring; the optional "visits" dimension counts coordinates with order
// index <= q.

#include "cms/bigint.hpp"
#include "cms/numeric.hpp"
#include "cms/transition_system.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <set>
#include <utility>
#include <vector>

namespace cms::detail {

using EdgeWeight = std::function<double(const StateId&, const StateId&)>;

struct LoopClass {
    std::uint64_t len = 0;
    std::uint64_t loop_index = 0; // representative loop
    bool generic = false;         // stands for `multiplicity` identical loops
    BigInt multiplicity;
    double log_multiplicity = 0.0;
    double weight = 0.0;
    std::uint64_t low_interior = 0;
};

struct Segment {
    std::uint64_t steps = 0;
    double weight = 0.0;
    std::uint64_t lows = 0;
};

struct CountRing {
    using Value = BigInt;
    static Value zero() { return 0; }
    static Value one() { return 1; }
    static void accumulate(Value& acc, const Value& v) { acc += v; }
    static Value mul(const Value& a, const Value& b) { return a * b; }
    static Value loop(const LoopClass& c) { return c.multiplicity; }
    static Value segment(const Segment&) { return 1; }
    static bool is_zero(const Value& v) { return v.is_zero(); }
};

struct MaxPlusRing {
    using Value = double;
    static Value zero() { return kNegInf; }
    static Value one() { return 0.0; }
    static void accumulate(Value& acc, Value v) { acc = std::max(acc, v); }
    static Value mul(Value a, Value b) { return (a == kNegInf || b == kNegInf) ? kNegInf : a + b; }
    static Value loop(const LoopClass& c) { return c.multiplicity.is_zero() ? kNegInf : c.weight; }
    static Value segment(const Segment& s) { return s.weight; }
    static bool is_zero(Value v) { return v == kNegInf; }
};

struct LogSumRing {
    using Value = double;
    static Value zero() { return kNegInf; }
    static Value one() { return 0.0; }
    static void accumulate(Value& acc, Value v) { acc = log_add(acc, v); }
    static Value mul(Value a, Value b) { return (a == kNegInf || b == kNegInf) ? kNegInf : a + b; }
    static Value loop(const LoopClass& c) { return c.log_multiplicity + c.weight; }
    static Value segment(const Segment& s) { return s.weight; }
    static bool is_zero(Value v) { return v == kNegInf; }
};

class BouquetPaths {
public:
    /// `q` fixes the low set [<= q]; loops touching it and loops listed in
    /// `special` (pairs (n, i)) get their own class. Loops longer than
    /// `max_steps` are never closed and are left out.
    BouquetPaths(const TransitionSystem& system, std::uint64_t q, std::size_t max_steps, EdgeWeight weight,
                 const std::set<std::pair<std::uint64_t, std::uint64_t>>& special = {});

    [[nodiscard]] const std::vector<LoopClass>& loops() const noexcept { return loops_; }
    [[nodiscard]] const std::vector<StateId>& lows() const noexcept { return lows_; }
    [[nodiscard]] std::size_t max_steps() const noexcept { return max_steps_; }

    [[nodiscard]] Segment exit_segment(const StateId& s) const;
    [[nodiscard]] Segment entry_segment(const StateId& t) const;
    [[nodiscard]] std::optional<Segment> direct_segment(const StateId& s, const StateId& t) const;

    /// Index of the class holding loop (n, i) alone, if any.
    [[nodiscard]] std::optional<std::size_t> own_class(std::uint64_t n, std::uint64_t i) const
    {
        for (std::size_t c = 0; c < loops_.size(); ++c)
            if (loops_[c].len == n && loops_[c].loop_index == i && !loops_[c].generic)
                return c;
        return std::nullopt;
    }

    /// R[n][v]: root-to-root paths of n steps with v low coordinates after the
    /// first. Without visit tracking the inner vector has one slot.
    template <class Ring>
    [[nodiscard]] std::vector<std::vector<typename Ring::Value>>
    root_table(bool track_visits, std::optional<std::size_t> skip_class = std::nullopt) const
    {
        using V = typename Ring::Value;
        const std::size_t N = max_steps_;
        const std::size_t width = track_visits ? N + 2 : 1;
        std::vector<std::vector<V>> R(N + 1, std::vector<V>(width, Ring::zero()));
        R[0][0] = Ring::one();
        std::vector<V> loop_values;
        for (const auto& c : loops_)
            loop_values.push_back(Ring::loop(c));
        for (std::size_t n = 1; n <= N; ++n) {
            for (std::size_t ci = 0; ci < loops_.size(); ++ci) {
                const LoopClass& c = loops_[ci];
                if (c.len > n || Ring::is_zero(loop_values[ci]) || skip_class == ci)
                    continue;
                const auto& prev = R[n - c.len];
                const std::size_t shift = track_visits ? c.low_interior + 1 : 0;
                for (std::size_t v = shift; v < width; ++v)
                    if (!Ring::is_zero(prev[v - shift]))
                        Ring::accumulate(R[n][v], Ring::mul(loop_values[ci], prev[v - shift]));
            }
        }
        return R;
    }

    /// Paths s -> t with exactly n steps whose low-coordinate count (x_0
    /// included) is at most `max_visits` (unbounded when std::nullopt).
    template <class Ring>
    [[nodiscard]] typename Ring::Value paths(const std::vector<std::vector<typename Ring::Value>>& R,
                                             const StateId& s, const StateId& t, std::size_t n,
                                             std::optional<std::uint64_t> max_visits) const
    {
        using V = typename Ring::Value;
        V total = Ring::zero();
        const bool track = R.empty() ? false : R[0].size() > 1;
        if (auto d = direct_segment(s, t); d && d->steps == n && (!max_visits || 1 + d->lows <= *max_visits))
            Ring::accumulate(total, Ring::segment(*d));
        const Segment ex = exit_segment(s);
        const Segment en = entry_segment(t);
        if (ex.steps + en.steps > n || n - ex.steps - en.steps >= R.size())
            return total;
        const auto& row = R[n - ex.steps - en.steps];
        const V ends = Ring::mul(Ring::segment(ex), Ring::segment(en));
        if (!track) {
            if (!Ring::is_zero(row[0]))
                Ring::accumulate(total, Ring::mul(ends, row[0]));
            return total;
        }
        const std::uint64_t fixed = 1 + ex.lows + en.lows;
        for (std::size_t v = 0; v < row.size(); ++v) {
            if (max_visits && fixed + v > *max_visits)
                break;
            if (!Ring::is_zero(row[v]))
                Ring::accumulate(total, Ring::mul(ends, row[v]));
        }
        return total;
    }

private:
    [[nodiscard]] bool is_low(const StateId& s) const;
    [[nodiscard]] double edge(const StateId& a, const StateId& b) const { return weight_ ? weight_(a, b) : 0.0; }

    const TransitionSystem* system_;
    std::uint64_t q_;
    std::size_t max_steps_;
    EdgeWeight weight_;
    std::vector<StateId> lows_;
    std::vector<LoopClass> loops_;
};

} // namespace cms::detail

#include "cms/transition_system.hpp"

#include "cms/errors.hpp"

#include <algorithm>
#include <deque>
#include <string>

namespace cms {

namespace {

constexpr std::uint64_t kSuccessorCap = 10'000'000;
constexpr std::uint64_t kStateListCap = 50'000'000;

bool strongly_connected(const std::vector<std::vector<std::uint8_t>>& m)
{
    const std::size_t k = m.size();
    auto reach = [&](bool forward) {
        std::vector<bool> seen(k, false);
        std::deque<std::size_t> queue{0};
        seen[0] = true;
        while (!queue.empty()) {
            const std::size_t u = queue.front();
            queue.pop_front();
            for (std::size_t v = 0; v < k; ++v) {
                const bool edge = forward ? m[u][v] : m[v][u];
                if (edge && !seen[v]) {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
    };
    return reach(true) && reach(false);
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t r = 0;
    if (__builtin_add_overflow(a, b, &r))
        throw RefusalError("state order index exceeds 64 bits", "truncate_len");
    return r;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t r = 0;
    if (__builtin_mul_overflow(a, b, &r))
        throw RefusalError("state order index exceeds 64 bits", "truncate_len");
    return r;
}

} // namespace

TransitionSystem TransitionSystem::finite(const std::vector<std::vector<int>>& matrix)
{
    if (matrix.empty())
        throw DomainError("transition matrix is empty");
    TransitionSystem t;
    t.kind_ = Kind::FiniteMatrix;
    for (const auto& row : matrix) {
        if (row.size() != matrix.size())
            throw DomainError("transition matrix is not square");
        std::vector<std::uint8_t> r;
        for (int e : row) {
            if (e != 0 && e != 1)
                throw DomainError("transition matrix entries must be 0 or 1");
            r.push_back(static_cast<std::uint8_t>(e));
        }
        t.matrix_.push_back(std::move(r));
    }
    if (!strongly_connected(t.matrix_))
        throw DomainError("transition matrix is not irreducible (shift is not transitive)");
    return t;
}

TransitionSystem TransitionSystem::full_shift(std::size_t k)
{
    return finite(std::vector<std::vector<int>>(k, std::vector<int>(k, 1)));
}

TransitionSystem TransitionSystem::bouquet(const LoopCounts& counts,
                                           std::optional<std::uint64_t> max_loop_len)
{
    if (auto a1 = counts.count(1); !a1 || *a1 > 1)
        throw DomainError("graph realization needs a(1) <= 1 (a simple graph has one self-loop at "
                          "the root); use abstract return weights or override a(1)");
    if (max_loop_len && *max_loop_len == 0)
        throw DomainError("truncation length must be >= 1");

    TransitionSystem t;
    t.kind_ = max_loop_len ? Kind::TruncatedBouquet : Kind::Bouquet;
    t.counts_ = counts;
    t.max_len_ = max_loop_len;
    if (auto end = counts.support_end())
        t.max_len_ = t.max_len_ ? std::min(*t.max_len_, *end) : *end;

    if (t.max_len_) {
        const std::uint64_t L = *t.max_len_;
        bool any = false;
        t.bases_.assign(L + 2, 0);
        if (L + 1 >= 2)
            t.bases_[2] = 1;
        for (std::uint64_t n = 1; n <= L; ++n) {
            const auto a = counts.count(n);
            if (!a)
                throw RefusalError("a(" + std::to_string(n) + ") exceeds 64 bits", "truncate_len");
            any = any || *a > 0;
            if (n >= 2)
                t.bases_[n + 1] = checked_add(t.bases_[n], checked_mul(*a, n - 1));
        }
        if (!any)
            throw DomainError("bouquet has no loops (a(n) = 0 for every realized n)");
    }
    return t;
}

bool TransitionSystem::bounded_branching() const noexcept
{
    return kind_ == Kind::FiniteMatrix || max_len_.has_value();
}

const LoopCounts& TransitionSystem::loop_counts() const
{
    if (!counts_)
        throw DomainError("loop counts requested from a finite-matrix shift");
    return *counts_;
}

std::optional<std::uint64_t> TransitionSystem::max_loop_len() const
{
    if (!is_bouquet())
        throw DomainError("loop length requested from a finite-matrix shift");
    return max_len_;
}

bool TransitionSystem::loop_exists(std::uint64_t n) const
{
    if (n == 0 || (max_len_ && n > *max_len_))
        return false;
    const auto a = counts_->count(n);
    return !a || *a > 0;
}

std::uint64_t TransitionSystem::loop_count(std::uint64_t n) const
{
    const LoopCounts& c = loop_counts();
    if (n == 0 || (max_len_ && n > *max_len_))
        return 0;
    const auto a = c.count(n);
    if (!a)
        throw RefusalError("a(" + std::to_string(n) + ") exceeds 64 bits", "truncate_len");
    return *a;
}

std::uint64_t TransitionSystem::loop_base(std::uint64_t n) const
{
    if (n < bases_.size())
        return bases_[n];
    std::uint64_t base = 1;
    for (std::uint64_t m = 2; m < n; ++m)
        base = checked_add(base, checked_mul(loop_count(m), m - 1));
    return base;
}

TransitionSystem TransitionSystem::truncated(std::uint64_t max_loop_len) const
{
    const std::uint64_t L = max_len_ ? std::min(*max_len_, max_loop_len) : max_loop_len;
    return bouquet(loop_counts(), L);
}

bool TransitionSystem::contains(const StateId& s) const
{
    switch (s.kind) {
    case StateId::Kind::Plain:
        return kind_ == Kind::FiniteMatrix && s.index >= 1 && s.index <= matrix_.size();
    case StateId::Kind::Root:
        return is_bouquet();
    case StateId::Kind::Loop: {
        if (!is_bouquet() || s.loop_len < 2 || !loop_exists(s.loop_len))
            return false;
        if (s.position < 1 || s.position > s.loop_len - 1 || s.loop_index < 1)
            return false;
        const auto a = counts_->count(s.loop_len);
        return !a || s.loop_index <= *a;
    }
    }
    return false;
}

bool TransitionSystem::has_edge(const StateId& from, const StateId& to) const
{
    if (!contains(from))
        throw DomainError("unknown state " + to_string(from));
    if (!contains(to))
        throw DomainError("unknown state " + to_string(to));
    if (kind_ == Kind::FiniteMatrix)
        return matrix_[from.index - 1][to.index - 1] != 0;
    if (from.is_root()) {
        if (to.is_root())
            return loop_exists(1);
        return to.position == 1;
    }
    if (from.position + 1 == from.loop_len)
        return to.is_root();
    return to == StateId::loop(from.loop_len, from.loop_index, from.position + 1);
}

std::optional<std::uint64_t> TransitionSystem::out_degree(const StateId& s) const
{
    if (!contains(s))
        throw DomainError("unknown state " + to_string(s));
    if (kind_ == Kind::FiniteMatrix)
        return static_cast<std::uint64_t>(std::count(matrix_[s.index - 1].begin(), matrix_[s.index - 1].end(), 1));
    if (!s.is_root())
        return 1;
    if (!max_len_)
        return std::nullopt;
    std::uint64_t d = 0;
    for (std::uint64_t n = 1; n <= *max_len_; ++n)
        d = checked_add(d, loop_count(n));
    return d;
}

std::vector<StateId> TransitionSystem::successors(const StateId& s) const
{
    if (!contains(s))
        throw DomainError("unknown state " + to_string(s));
    std::vector<StateId> out;
    if (kind_ == Kind::FiniteMatrix) {
        const auto& row = matrix_[s.index - 1];
        for (std::size_t j = 0; j < row.size(); ++j)
            if (row[j])
                out.push_back(StateId::plain(j + 1));
        return out;
    }
    if (!s.is_root()) {
        if (s.position + 1 == s.loop_len)
            out.push_back(StateId::root());
        else
            out.push_back(StateId::loop(s.loop_len, s.loop_index, s.position + 1));
        return out;
    }
    const auto degree = out_degree(s);
    if (!degree)
        throw RefusalError("the root of an untruncated bouquet has infinitely many successors",
                           "truncate_len");
    if (*degree > kSuccessorCap)
        throw RefusalError("root out-degree " + std::to_string(*degree) + " exceeds the enumeration cap",
                           "truncate_len");
    out.reserve(*degree);
    if (loop_exists(1))
        out.push_back(StateId::root());
    for (std::uint64_t n = 2; n <= *max_len_; ++n)
        for (std::uint64_t i = 1, a = loop_count(n); i <= a; ++i)
            out.push_back(StateId::loop(n, i, 1));
    return out;
}

std::uint64_t TransitionSystem::order_index(const StateId& s) const
{
    if (!contains(s))
        throw DomainError("unknown state " + to_string(s));
    switch (s.kind) {
    case StateId::Kind::Plain:
        return s.index;
    case StateId::Kind::Root:
        return 1;
    case StateId::Kind::Loop:
        break;
    }
    return checked_add(checked_add(loop_base(s.loop_len), checked_mul(s.loop_index - 1, s.loop_len - 1)),
                       s.position);
}

StateId TransitionSystem::state_at(std::uint64_t index) const
{
    if (index == 0)
        throw DomainError("order indices start at 1");
    if (kind_ == Kind::FiniteMatrix) {
        if (index > matrix_.size())
            throw DomainError("order index " + std::to_string(index) + " beyond the state set");
        return StateId::plain(index);
    }
    if (index == 1)
        return StateId::root();
    std::uint64_t base = 1;
    for (std::uint64_t n = 2;; ++n) {
        if (max_len_ && n > *max_len_)
            throw DomainError("order index " + std::to_string(index) + " beyond the state set");
        const auto a = counts_->count(n);
        std::uint64_t block = 0;
        if (!a || __builtin_mul_overflow(*a, n - 1, &block) || index - base <= block) {
            const std::uint64_t off = index - base - 1;
            return StateId::loop(n, off / (n - 1) + 1, off % (n - 1) + 1);
        }
        base += block;
    }
}

std::vector<StateId> TransitionSystem::states_up_to(std::uint64_t q) const
{
    std::vector<StateId> out;
    const auto total = state_count();
    const std::uint64_t last = total ? std::min(q, *total) : q;
    if (last > kStateListCap)
        throw RefusalError("state list above the enumeration cap", "q");
    if (kind_ == Kind::FiniteMatrix) {
        for (std::uint64_t i = 1; i <= last; ++i)
            out.push_back(StateId::plain(i));
        return out;
    }
    if (last >= 1)
        out.push_back(StateId::root());
    for (std::uint64_t n = 2; out.size() < last; ++n) {
        if (max_len_ && n > *max_len_)
            break;
        const auto a = counts_->count(n);
        for (std::uint64_t i = 1; out.size() < last && (!a || i <= *a); ++i)
            for (std::uint64_t k = 1; out.size() < last && k < n; ++k)
                out.push_back(StateId::loop(n, i, k));
    }
    return out;
}

std::optional<std::uint64_t> TransitionSystem::state_count() const
{
    if (kind_ == Kind::FiniteMatrix)
        return matrix_.size();
    if (!max_len_)
        return std::nullopt;
    return bases_.size() > *max_len_ + 1 ? bases_[*max_len_ + 1] : 1;
}

std::vector<StateId> TransitionSystem::states() const
{
    const auto n = state_count();
    if (!n)
        throw RefusalError("an untruncated bouquet has infinitely many states", "truncate_len");
    return states_up_to(*n);
}

} // namespace cms

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace cms {

/// A vertex of a transition system.
///
/// Finite-matrix shifts use `Plain(index)` with 1-based indices. Bouquet
/// shifts use the root and loop vertices v_k^{n,i}: the k-th interior vertex
/// (1 <= k <= n-1) of the i-th loop of length n. The defaulted ordering agrees
/// with the order index of a bouquet (root first, then (n, i, k)).
struct StateId {
    enum class Kind : std::uint8_t { Plain, Root, Loop };

    Kind kind = Kind::Plain;
    std::uint64_t index = 0;
    std::uint64_t loop_len = 0;
    std::uint64_t loop_index = 0;
    std::uint64_t position = 0;

    static constexpr StateId plain(std::uint64_t i) { return {Kind::Plain, i, 0, 0, 0}; }
    static constexpr StateId root() { return {Kind::Root, 0, 0, 0, 0}; }
    static constexpr StateId loop(std::uint64_t n, std::uint64_t i, std::uint64_t k)
    {
        return {Kind::Loop, 0, n, i, k};
    }

    [[nodiscard]] constexpr bool is_root() const { return kind == Kind::Root; }
    [[nodiscard]] constexpr bool is_loop() const { return kind == Kind::Loop; }
    [[nodiscard]] constexpr bool is_plain() const { return kind == Kind::Plain; }

    friend constexpr auto operator<=>(const StateId&, const StateId&) = default;
};

using Word = std::vector<StateId>;

/// "r", "v(n,i,k)" or the decimal plain index.
std::string to_string(const StateId& s);
std::string to_string(const Word& w);

/// Inverse of to_string; throws DomainError on malformed text.
StateId parse_state(std::string_view text);

} // namespace cms

template <>
struct std::hash<cms::StateId> {
    std::size_t operator()(const cms::StateId& s) const noexcept
    {
        std::size_t h = static_cast<std::size_t>(s.kind);
        for (std::uint64_t v : {s.index, s.loop_len, s.loop_index, s.position})
            h = h * 1000003u ^ std::hash<std::uint64_t>{}(v);
        return h;
    }
};

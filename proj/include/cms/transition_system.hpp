#pragma once

#include "loop_counts.hpp"
#include "state.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace cms {

/// A countable directed graph presented through a successor generator.
///
/// Three kinds exist: a finite 0/1 matrix (states Plain(1..k)), a bouquet of
/// loops with counts a(n), and a bouquet truncated to loops of length
/// <= max_loop_len (longer loops are dropped whole). Instances are immutable
/// and every constructible instance is topologically transitive.
class TransitionSystem {
public:
    enum class Kind { FiniteMatrix, Bouquet, TruncatedBouquet };

    /// Square 0/1 matrix; rejects reducible graphs.
    static TransitionSystem finite(const std::vector<std::vector<int>>& matrix);
    /// Full shift on k symbols.
    static TransitionSystem full_shift(std::size_t k);
    /// Graph realization of a bouquet; needs a(1) <= 1.
    static TransitionSystem bouquet(const LoopCounts& counts,
                                    std::optional<std::uint64_t> max_loop_len = std::nullopt);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] bool is_bouquet() const noexcept { return kind_ != Kind::FiniteMatrix; }

    [[nodiscard]] bool contains(const StateId& s) const;
    /// Throws DomainError when either state is unknown.
    [[nodiscard]] bool has_edge(const StateId& from, const StateId& to) const;

    /// Finite out-degree everywhere and finitely many states.
    [[nodiscard]] bool bounded_branching() const noexcept;
    /// Successors in order-index order; throws RefusalError on unbounded branching.
    [[nodiscard]] std::vector<StateId> successors(const StateId& s) const;
    /// std::nullopt means infinitely many successors.
    [[nodiscard]] std::optional<std::uint64_t> out_degree(const StateId& s) const;

    /// 1-based position in the state order (the identification with N).
    [[nodiscard]] std::uint64_t order_index(const StateId& s) const;
    [[nodiscard]] StateId state_at(std::uint64_t index) const;
    /// All states with order index <= q (fewer if the system is smaller).
    [[nodiscard]] std::vector<StateId> states_up_to(std::uint64_t q) const;

    [[nodiscard]] std::optional<std::uint64_t> state_count() const;
    /// All states in order; bounded systems only.
    [[nodiscard]] std::vector<StateId> states() const;

    // Bouquet-only accessors; throw DomainError on finite matrices.
    [[nodiscard]] const LoopCounts& loop_counts() const;
    /// Longest loop present (truncation or finite support).
    [[nodiscard]] std::optional<std::uint64_t> max_loop_len() const;
    /// a(n) restricted to the realized graph (0 beyond the truncation).
    [[nodiscard]] std::uint64_t loop_count(std::uint64_t n) const;
    /// Same family restricted to loops of length <= max_loop_len.
    [[nodiscard]] TransitionSystem truncated(std::uint64_t max_loop_len) const;

    [[nodiscard]] std::size_t matrix_size() const noexcept { return matrix_.size(); }
    [[nodiscard]] bool matrix_entry(std::size_t i, std::size_t j) const { return matrix_[i][j] != 0; }

private:
    TransitionSystem() = default;

    // Order index of v_1^{n,1} minus one, i.e. 1 + sum_{m<n} a(m)(m-1).
    [[nodiscard]] std::uint64_t loop_base(std::uint64_t n) const;
    [[nodiscard]] bool loop_exists(std::uint64_t n) const;

    Kind kind_ = Kind::FiniteMatrix;
    std::vector<std::vector<std::uint8_t>> matrix_;
    std::optional<LoopCounts> counts_;
    std::optional<std::uint64_t> max_len_;
    std::vector<std::uint64_t> bases_; // bases_[n] for 2 <= n <= max_len_ + 1
};

} // namespace cms

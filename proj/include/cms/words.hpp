#pragma once

#include "bigint.hpp"
#include "state.hpp"
#include "transition_system.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace cms {

using StateFilter = std::function<bool(const StateId&)>;
/// Receives each word; return false to stop the enumeration.
using WordVisitor = std::function<bool(std::span<const StateId>)>;

/// Every consecutive pair is an edge. Unknown states throw DomainError.
bool is_admissible(const TransitionSystem& system, std::span<const StateId> word);

struct WordList {
    std::vector<Word> words;
    bool exhaustive = true;
};

/// Admissible words of `length` whose first / last states pass the filters
/// (empty filters accept everything), in lexicographic state order, at most
/// `limit` of them.
WordList enumerate_words(const TransitionSystem& system, std::size_t length, const StateFilter& start,
                         const StateFilter& end, std::size_t limit);

/// Streaming form of enumerate_words; returns false if the visitor stopped it.
bool for_each_word(const TransitionSystem& system, std::size_t length, const StateFilter& start,
                   const StateFilter& end, const WordVisitor& visit);

/// Default cap on the number of periodic words materialized at once.
inline constexpr std::size_t kPeriodicPointCap = 20'000'000;

/// Length-n words w with w_0 = base whose periodic extension is admissible;
/// one word per periodic point of period n in [base].
std::vector<Word> periodic_points(const TransitionSystem& system, std::size_t n, const StateId& base,
                                  std::size_t cap = kPeriodicPointCap);
bool for_each_periodic_point(const TransitionSystem& system, std::size_t n, const StateId& base,
                             const WordVisitor& visit);
/// Exact number of periodic points of period n in [base].
BigInt periodic_point_count(const TransitionSystem& system, std::size_t n, const StateId& base);

/// A shortest word w with w_0 = from and w·to admissible (length l(from,to));
/// ties go to the lexicographically smallest word.
Word shortest_connector(const TransitionSystem& system, const StateId& from, const StateId& to);
/// Breadth-first version with an explicit horizon (maximum connector length).
Word shortest_connector_search(const TransitionSystem& system, const StateId& from, const StateId& to,
                               std::size_t horizon);

struct PathCount {
    BigInt count;
    bool overflow = false;
};

/// Number of paths with `steps` transitions (words of steps+1 symbols) that
/// start and end at order index <= q. `overflow` is set above `bound`.
PathCount f_property_count(const TransitionSystem& system, std::uint64_t q, std::size_t steps,
                           const BigInt& bound = BigInt(1) << 63);

} // namespace cms

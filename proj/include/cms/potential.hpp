#pragma once

#include "loop_counts.hpp"
#include "state.hpp"
#include "transition_system.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace cms {

/// Total weight W(n) carried by one loop of length n:
/// log_c - rate*n - beta*log n - [log a(n)] - psi(n), with W(1) overridable.
struct LoopWeightRule {
    double log_c = 0.0;
    double rate = 0.0;
    double beta = 0.0;
    /// Subtract log a(n), so that a(n) e^{W(n)} drops the loop count.
    bool subtract_log_count = false;
    std::optional<LoopCounts> counts;
    /// psi[n-1] is subtracted from W(n); lengths past the table get 0.
    std::vector<double> psi;
    /// Loops longer than the psi table carry no weight at all (W = -inf).
    bool psi_bounds_support = false;
    std::optional<double> root_loop;

    [[nodiscard]] double total(std::uint64_t n) const;
};

/// Where a loop's weight sits along the loop.
enum class BouquetScheme {
    Entry,  // edge [r, v_1]
    Exit,   // edge [v_{n-1}, r]
    Mid,    // edge entering v_{ceil(n/2)}
    Spread, // W(n)/n on every edge of the loop
};

const char* scheme_name(BouquetScheme s);
std::optional<BouquetScheme> parse_scheme(std::string_view name);

/// Locally constant potential of finite memory m: phi(x) depends on x_0..x_{m-1}.
/// Values come from an explicit table, then from an optional bouquet rule,
/// then from the default.
class Potential {
public:
    explicit Potential(std::size_t memory = 1, double default_value = 0.0);

    static Potential constant(double c) { return Potential(1, c); }
    static Potential bouquet(LoopWeightRule rule, BouquetScheme scheme, double default_value = 0.0);

    /// Sets the value on the m-word `key`.
    void set(const Word& key, double value);

    [[nodiscard]] std::size_t memory() const noexcept { return memory_; }
    [[nodiscard]] double default_value() const noexcept { return default_; }
    [[nodiscard]] const std::map<Word, double>& table() const noexcept { return table_; }
    [[nodiscard]] const std::optional<LoopWeightRule>& rule() const noexcept { return rule_; }
    [[nodiscard]] std::optional<BouquetScheme> scheme() const noexcept { return scheme_; }

    /// phi on the cylinder of the m-word `window`.
    [[nodiscard]] double value(std::span<const StateId> window) const;
    /// phi seen as a function of the edge (a, b); memory <= 2 only.
    [[nodiscard]] double edge_weight(const StateId& a, const StateId& b) const;
    [[nodiscard]] std::function<double(const StateId&, const StateId&)> edge_function() const;

    /// Bouquet loops (n, i) named by table keys.
    [[nodiscard]] std::set<std::pair<std::uint64_t, std::uint64_t>> tabled_loops() const;

    /// var_k for k = 1..memory; var_k = 0 for k >= memory. Values from the
    /// table and the default only (an upper bound when the default is unused).
    [[nodiscard]] std::vector<double> variations() const;
    /// B_phi = sum_{k>=2} var_k.
    [[nodiscard]] double distortion_constant() const;

    /// Same potential plus a constant.
    [[nodiscard]] Potential shifted(double c) const;

private:
    [[nodiscard]] std::optional<double> rule_value(const StateId& a, const StateId& b) const;

    std::size_t memory_;
    double default_;
    double shift_ = 0.0;
    std::map<Word, double> table_;
    std::optional<LoopWeightRule> rule_;
    std::optional<BouquetScheme> scheme_;
};

struct BirkhoffValue {
    double value = 0.0; // upper value (equal to lower when exact)
    double lower = 0.0;
    std::size_t length = 0;
    bool exact = true;
};

enum class SumMode { OpenCylinder, PeriodicWrap };

/// OpenCylinder: S_n phi over [w] with n = |w| - m + 1 (the longest sum the
/// word determines; 0 when |w| < m). PeriodicWrap: S_{|w|} phi along the
/// periodic extension of w.
BirkhoffValue birkhoff_sum(const TransitionSystem& system, const Potential& phi, std::span<const StateId> word,
                           SumMode mode);

/// inf over [word] of S_n phi, extending the word where phi needs more symbols.
double cylinder_inf(const TransitionSystem& system, const Potential& phi, std::span<const StateId> word, std::size_t n);
double cylinder_sup(const TransitionSystem& system, const Potential& phi, std::span<const StateId> word, std::size_t n);

/// min over a, b with order index <= q of inf S_{l(a,b)} phi on [w(a,b) b].
double connector_constant(const TransitionSystem& system, const Potential& phi, std::uint64_t q);

} // namespace cms

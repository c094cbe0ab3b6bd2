#pragma once

#include "loop_counts.hpp"
#include "numeric.hpp"
#include "potential.hpp"
#include "thermo.hpp"
#include "transition_system.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cms {

/// A bouquet family with loop weights. `counts` is the abstract family used
/// by the renewal sums; the graph realization replaces a(1) by `graph_first`
/// when given (a simple graph carries at most one self-loop at the root).
struct BouquetSpec {
    std::string name;
    LoopCounts counts = LoopCounts::ones();
    std::optional<std::uint64_t> graph_first;
    LoopWeightRule rule;
    BouquetScheme scheme = BouquetScheme::Entry;
    std::optional<std::uint64_t> truncate_len;
};

struct BouquetModel {
    BouquetSpec spec;
    TransitionSystem system;
    Potential potential;
    /// Closed form of w*_n for the abstract family, when one exists.
    std::optional<ReturnFamily> closed_form;
};

/// Graph, potential and closed-form metadata. Throws DomainError when the
/// graph would need a(1) >= 2.
BouquetModel build_bouquet(const BouquetSpec& spec);

/// log w*_n = log a(n) + W(n) for the abstract family, n = 1..horizon.
std::vector<double> abstract_return_weights(const BouquetSpec& spec, std::size_t horizon);
std::optional<ReturnFamily> abstract_closed_form(const BouquetSpec& spec);
/// lim W(n)/n for the family's loop weights: the contraction at infinity of
/// the bouquet at q = 1.
double bouquet_delta_oracle(const BouquetSpec& spec);
/// True when the graph realization exists.
bool graph_realizable(const BouquetSpec& spec);

/// Riemann zeta for real beta > 1 with a certified error bound <= tol.
CertifiedValue zeta(double beta, double tol = 1e-13);
/// 1 / zeta(beta).
CertifiedValue normalizing_C(double beta, double tol = 1e-13);
/// Root h of sum_n a(n) e^{-nh} = 1; throws NoSolutionError when the series
/// never reaches 1 inside its convergence region.
double htop_solve(const LoopCounts& counts, double tol = 1e-12);

/// Named families: sec52-entry, sec52-exit, sec52-mid, sec52-spread,
/// sec53(beta,C|auto), sec54(psi...), renewal-ones.
struct PresetInfo {
    std::string name;
    std::string description;
};
std::vector<PresetInfo> list_presets();
/// Parses a preset name with optional arguments, e.g. "sec53(1.5,auto)".
BouquetSpec preset(std::string_view name);

} // namespace cms

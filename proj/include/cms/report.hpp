#pragma once

#include "examples.hpp"
#include "potential.hpp"
#include "spec_io.hpp"
#include "thermo.hpp"
#include "transition_system.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace cms {

/// What a run operates on: a preset family or a shift/potential pair.
struct Model {
    std::string name;
    std::optional<BouquetSpec> spec;
    std::optional<TransitionSystem> system; // absent when no graph realizes the family
    Potential potential;
    StateId base = StateId::root();
    std::optional<ReturnFamily> closed_form;
};

/// Presets are truncated at `truncation` unless the config says otherwise.
Model resolve_model(const RunConfig& config, std::size_t truncation);

enum class Task { Report, Pressure, Hinf, Spr };

/// Runs the diagnostics for `task` and returns the report document. Values
/// are rounded to 12 significant digits; infinities become "+inf"/"-inf".
nlohmann::json run_task(const RunConfig& config, Task task);

/// Oracle caps for enumeration.
inline constexpr std::size_t kOracleMaxHorizon = 14;
inline constexpr std::uint64_t kOracleMaxTruncation = 8;

/// Brute-force versus DP/closed-form agreement table.
nlohmann::json run_oracle(const RunConfig& config);

/// Writes `doc` under config.out_dir; returns the written paths.
std::vector<std::string> write_outputs(const nlohmann::json& doc, const RunConfig& config, const std::string& stem);

/// 12 significant digits; non-finite values as "+inf", "-inf", "nan".
nlohmann::json format_number(double v);

} // namespace cms

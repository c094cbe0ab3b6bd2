#pragma once

#include "loop_counts.hpp"
#include "potential.hpp"
#include "transition_system.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cms {

/// Reads a JSON document; ConfigError names the file on failure.
nlohmann::json read_json_file(const std::string& path);

/// {"form":"geometric","r":2} | {"form":"ones"} | {"form":"list","values":[...]}
/// | {"form":"double_exponential"}, each with an optional "a1" override.
LoopCounts parse_loop_counts(const nlohmann::json& doc, const std::string& where = "a");

/// {"kind":"bouquet","a":{...},"truncate_len":L} or {"kind":"finite","matrix":[[...]]}.
TransitionSystem parse_shift(const nlohmann::json& doc, const std::string& where = "shift");

/// {"memory":m,"default":d,"table":[{"word":[...],"value":v}],"scheme":"bouquet_entry"}
/// plus the scheme parameters "C" (number or "auto"), "beta", "rate",
/// "root_weight" and "psi". Table words are checked against `host` when given.
Potential parse_potential(const nlohmann::json& doc, const TransitionSystem* host,
                          const std::string& where = "potential");

struct RunConfig {
    std::optional<std::string> shift_path;
    std::optional<std::string> potential_path;
    std::optional<std::string> preset;
    std::optional<std::size_t> horizon;
    std::optional<std::uint64_t> truncate;
    std::vector<std::uint64_t> Ms{2, 4, 8};
    std::vector<std::uint64_t> qs{1};
    double tol = 1e-2;
    std::string out_dir = ".";
    std::string format = "json";
    bool log2 = false;
};

/// Strict parsing: unknown keys and ill-typed values raise ConfigError.
RunConfig parse_run_config(const nlohmann::json& doc);
/// Horizons >= 1, non-empty grids, exactly one model source, known format.
void validate(const RunConfig& config);

} // namespace cms

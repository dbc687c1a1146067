#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace geopath {

enum class Experiment { decompose, ensemble, deviation, kernel, stats, evolve, check };

std::optional<Experiment> experiment_from_name(std::string_view name);
std::string_view experiment_name(Experiment experiment);

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;
inline constexpr int config = 2;
inline constexpr int divergence = 3;
inline constexpr int oracle_mismatch = 4;
}  // namespace exit_code

inline constexpr int config_schema_version = 1;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_path;
};

/// Validates a config document for `experiment` and returns it with every default filled in.
/// `document == nullptr` means "all defaults". With a document, the experiment's own block is
/// required; unknown keys anywhere are rejected. Throws ConfigError carrying the key path.
nlohmann::json resolve_config(Experiment experiment, const nlohmann::json* document, const Overrides& overrides = {});

struct RunOutcome {
  int exit_code = exit_code::ok;
  nlohmann::json record;
};

/// Runs a resolved config. Side files (CSV, ensemble JSON) go under config["output_path"].
/// Returns the result record {schema_version, experiment, status, config, outputs, diagnostics,
/// timing}; everything except `timing` is a pure function of the config.
RunOutcome execute(Experiment experiment, const nlohmann::json& resolved);

/// resolve_config + execute, mapping failures to a structured error record and exit code
/// (2 config, 3 divergence, 4 oracle mismatch in check mode, 1 anything else). The record is
/// also written to <output_path>/<experiment>.json when the output path is known.
RunOutcome run(Experiment experiment, const nlohmann::json* document, const Overrides& overrides = {});

}  // namespace geopath

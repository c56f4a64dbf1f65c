#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "cafem/scenario.hpp"

namespace cafem {

/// Scenario configuration files: INI-style sections of `key = value` lines,
/// `#` starts a comment. Sections: scenario, geometry, diffusion, er_membrane,
/// plasma_membrane, buffer, gating, initial, influx, clamp, numerics, output.
/// Numbers are plain decimals (written in shortest round-trip form), booleans
/// are true/false, snapshot times a comma-separated list.
///
/// Unknown sections or keys, duplicates, type mismatches, missing required
/// keys and invariant violations raise ParseError with the dotted key path
/// and the line number.
ScenarioConfig parse_config(std::istream& in);
ScenarioConfig parse_config(const std::filesystem::path& path);

/// Writes every key, so parse_config(write_config(c)) == c.
void write_config(const ScenarioConfig& config, std::ostream& out);
void write_config(const ScenarioConfig& config, const std::filesystem::path& path);

/// Shortest decimal that parses back to exactly the same double.
std::string format_number(double v);

}  // namespace cafem

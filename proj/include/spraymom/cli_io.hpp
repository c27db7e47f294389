#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "spraymom/simulator.hpp"

namespace spraymom {

/// Reads a YAML case file. Sections: case, basis, grid, time, physics, schemes, output, initial.
/// Unknown keys and out-of-range values raise ConfigError with the offending line.
CaseConfig parse_config(const std::filesystem::path& path);
CaseConfig parse_config_string(const std::string& text, const std::string& source = "<string>");

/// Full YAML rendering (every field, doubles with 17 significant digits).
std::string serialize_config(const CaseConfig& cfg);

/// Output directory: explicit override, then $SPRAYMOM_OUT, then the config value.
std::filesystem::path resolve_output_dir(const CaseConfig& cfg, const std::string& override_dir);

/// One row per cell: i j x y m0 m1/2 m1 m3/2 u v alpha Sigma SigmaH SigmaG (17 digits).
void write_snapshot(std::ostream& os, const Grid2D& grid, const CaseConfig& cfg, double t,
                    double dt);
std::filesystem::path write_snapshot_file(const std::filesystem::path& dir, const Grid2D& grid,
                                          const CaseConfig& cfg, double t, double dt);

/// Plain "key = value" lines.
void write_summary(const std::filesystem::path& path,
                   const std::vector<std::pair<std::string, std::string>>& entries);

/// Double rendered with 17 significant digits.
std::string format_double(double v);

}  // namespace spraymom

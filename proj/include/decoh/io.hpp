#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "decoh/spectra.hpp"

namespace decoh {

inline constexpr const char* kVersion = "0.1.0";

/// Name of the laser-intensity-noise preset coupled through the built-in trap.
inline constexpr const char* kYagPresetName = "paper-yag-1f";
inline constexpr const char* kDefaultTrapPreset = "rb87-yag-500uK";

/// Parses a spectrum description. Terms joined by '+' are combined:
///   paper-yag-1f                      YAG intensity noise with E_L from the trap preset
///   white:S0=4[,f_ir=..,f_uv=..]      band-limited white (default band 1e-4 .. 1e4 Hz)
///   power:A=..,alpha=..,f_ir=..,f_uv=..
///   lorentz:A=..,fc=..[,f_ir=..,f_uv=..]
///   csv:<path> or <path>.csv          tabulated f_hz,s_f
/// A trailing `*<factor>` on a term scales it. Throws ConfigError.
PowerSpectrum parse_spectrum(const std::string& text);

/// `start:stop:step` with stop > start and step > 0; stop is included when it
/// lies on the grid.
std::vector<double> parse_time_grid(const std::string& text);

/// Comma-separated list of integers or `a..b` / `a..b/step` ranges.
std::vector<int> parse_int_list(const std::string& text);

/// Flat key/value configuration from a JSON object or `key = value` lines
/// (`#` and `;` start comments, `[section]` headers are ignored).
std::map<std::string, std::string> load_config(const std::string& path);

/// Writes `content` to `path` through a temporary file and rename. An empty
/// path or "-" writes to standard output.
void write_output(const std::string& path, const std::string& content);

/// `%.17g` formatting; round-trips doubles.
std::string format_double(double v);

/// Renders a table as CSV preceded by `# key: value` provenance lines.
std::string render_csv(const nlohmann::json& provenance, const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& rows);

}  // namespace decoh

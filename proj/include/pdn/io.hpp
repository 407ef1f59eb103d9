#pragma once

// File formats: scenario JSON, CSV tables, SVG heatmaps and run manifests.

#include "pdn/analysis.hpp"
#include "pdn/config.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdn {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- scenario files ---------------------------------------------------------------

/// Canonical JSON: fixed key order, shortest round-trip numbers, trailing newline.
std::string config_to_json(const ScenarioConfig& config);

/// Missing keys keep their defaults; unknown keys and wrong types are
/// ConfigError violations naming the dotted path. The result is not validated.
ScenarioConfig config_from_json(const std::string& text);

/// Accepts a scenario file or a run manifest (its embedded config snapshot).
ScenarioConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ScenarioConfig& config);

/// FNV-1a over the canonical JSON.
std::uint64_t config_hash(const ScenarioConfig& config);
std::string hash_hex(std::uint64_t hash);

// --- tables -------------------------------------------------------------------------

/// Shortest text that reads back to the same double (at most 17 digits).
std::string format_double(double value);

/// i,j,x_mm,y_mm,voltage_v,ir_drop_mv
void write_ir_map_csv(std::ostream& os, const IrDropMap& map, const ChipSpec& chip);
/// time_s,<probe>,...
void write_waveform_csv(std::ostream& os, const TransientWaveform& waveform);
/// axis_value,max_ir_drop_mv,max_psn_mv,config_hash
void write_sweep_csv(std::ostream& os, const SweepResult& result);
/// label,max_ir_drop_mv,max_psn_mv,ir_improvement,psn_improvement
void write_comparison_csv(std::ostream& os, const ComparisonReport& report);
/// Aligned plain-text table for terminals.
std::string format_comparison_table(const ComparisonReport& report);

// --- heatmap --------------------------------------------------------------------------

struct HeatmapStyle {
    int cell_px = 8;
    std::string title = "IR drop";
};

/// SVG 1.1: one rect per tile (row 0 at the bottom), linear blue-to-red scale,
/// legend annotated with the min and max in mV. Byte-identical for equal input.
std::string render_heatmap_svg(const IrDropMap& map, const HeatmapStyle& style = {});

// --- manifest -------------------------------------------------------------------------

struct RunManifest {
    std::string command;
    std::string arguments;  // the command line, for replay
    std::vector<std::string> config_paths;
    std::string resolved_config_json;  // defaults snapshot
    std::vector<std::string> outputs;
    std::string tool_version;
    double wall_time_s = 0.0;
};

/// key: value lines; the config snapshot is embedded verbatim after "config:".
std::string format_manifest(const RunManifest& manifest);

/// The config snapshot embedded in a manifest; ConfigError when absent.
ScenarioConfig config_from_manifest(const std::string& text);

/// Writes text to a file, creating parent directories; IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace pdn

#pragma once

// Scenario description for one power-delivery benchmark: chip, package,
// board, regulator placement, decoupling and load map. Every physical
// field carries its unit in the name.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace pdn {

struct WireSpec {
    double resistivity_ohm_m = 17.1e-9;
    double thickness_um = 5.0;
    double width_um = 3.3;
    double pitch_um = 30.0;

    bool operator==(const WireSpec&) const = default;
};

struct ViaSpec {
    double resistivity_ohm_m = 80e-9;
    double height_um = 50.0;
    double diameter_um = 10.0;
    double inductance_per_via_pH = 20.0;
    int count_per_site = 4;

    bool operator==(const ViaSpec&) const = default;
};

struct BumpSpec {
    double diameter_um = 40.0;
    double pitch_um = 100.0;
    double resistance_per_bump_mohm = 5.0;
    double inductance_per_bump_pH = 20.0;

    bool operator==(const BumpSpec&) const = default;
};

struct ChipSpec {
    double width_mm = 10.0;
    double height_mm = 10.0;
    double supply_voltage_v = 1.0;
    double total_power_w = 100.0;
    WireSpec onchip_wire;
    int tile_count_x = 50;
    int tile_count_y = 50;

    double area_mm2() const { return width_mm * height_mm; }
    double tile_width_mm() const { return width_mm / tile_count_x; }
    double tile_height_mm() const { return height_mm / tile_count_y; }
    double tile_area_mm2() const { return tile_width_mm() * tile_height_mm(); }

    bool operator==(const ChipSpec&) const = default;
};

struct PackageSpec {
    int metal_layer_count = 10;
    double layer_thickness_mm = 0.010;
    double size_x_mm = 35.0;
    double size_y_mm = 35.0;
    double sheet_resistivity_ohm_m = 17.1e-9;
    /// Plane inductance of the merged power sheet, per square.
    double sheet_inductance_pH_per_sq = 28.0;  // calibrated
    BumpSpec c4_bump;
    BumpSpec solder_bump{400.0, 800.0, 1.0, 100.0};
    ViaSpec through_package_via{17.1e-9, 400.0, 100.0, 700.0, 1};

    double merged_thickness_mm() const { return metal_layer_count * layer_thickness_mm; }

    bool operator==(const PackageSpec&) const = default;
};

struct VrmSpec {
    // Calibrated against the reference noise and IR-drop ratios.
    double series_resistance_mohm = 0.016;
    double series_inductance_nH = 0.0007;
    double output_voltage_v = 1.0;

    bool operator==(const VrmSpec&) const = default;
};

struct BoardSpec {
    double lumped_resistance_mohm = 0.2;
    double lumped_inductance_nH = 10.0;

    bool operator==(const BoardSpec&) const = default;
};

// --- regulator placement ---------------------------------------------------

struct OnPackage {
    int count = 4;  // 1: west edge, 2: west+east, 4: all edges
    double gap_mm = 1.0;

    bool operator==(const OnPackage&) const = default;
};

struct BacksidePackage {
    /// Edge length of the regulator footprint relative to the chip edge; the
    /// footprint is centred under the chip.
    double footprint_fraction = 0.75;
    double via_site_pitch_um = 200.0;

    bool operator==(const BacksidePackage&) const = default;
};

struct ChipOnVrm3D {
    BumpSpec microbump{25.0, 50.0, 10.0, 10.0};
    ViaSpec vrm_tsv;

    bool operator==(const ChipOnVrm3D&) const = default;
};

using VrmPlacement = std::variant<OnPackage, BacksidePackage, ChipOnVrm3D>;

std::string placement_name(const VrmPlacement& placement);

// --- decoupling --------------------------------------------------------------

enum class Tier { board, package_bottom, package_top, chip, vrm_die };

std::string to_string(Tier tier);
Tier tier_from_string(const std::string& text);

struct DecapSite {
    Tier tier = Tier::package_top;
    double x = 0.5;  // normalised over the chip footprint
    double y = 0.5;

    bool operator==(const DecapSite&) const = default;
};

struct DiscreteDecap {
    double capacitance_uF = 10.0;
    double esr_mohm = 2.0;
    double esl_nH = 0.5;
    DecapSite site;

    bool operator==(const DiscreteDecap&) const = default;
};

struct DecapPolicy {
    double onchip_density_nF_per_mm2 = 5.3;
    /// Series resistance of the on-die decap, area-normalised (Ω·mm²);
    /// a tile of area A gets ESR = value / A.
    double onchip_esr_ohm_mm2 = 0.004;
    std::vector<DiscreteDecap> package_decaps;
    std::vector<DiscreteDecap> board_decaps;

    bool operator==(const DecapPolicy&) const = default;
};

// --- load map ------------------------------------------------------------------

enum class PowerMapKind { uniform, hotspot, explicit_grid };

std::string to_string(PowerMapKind kind);
PowerMapKind power_map_kind_from_string(const std::string& text);

struct HotspotBlock {
    double center_x = 0.5;  // normalised
    double center_y = 0.5;
    double size_x = 0.2;
    double size_y = 0.2;

    bool operator==(const HotspotBlock&) const = default;
};

/// How the load map is produced. `explicit_grid` carries densities verbatim.
struct PowerMapSpec {
    PowerMapKind kind = PowerMapKind::hotspot;
    double hotspot_ratio = 3.0;
    std::vector<HotspotBlock> blocks{{0.3, 0.3, 0.2, 0.2}, {0.7, 0.7, 0.2, 0.2}};
    std::vector<double> densities_A_per_mm2;  // row-major, x fastest

    bool operator==(const PowerMapSpec&) const = default;
};

/// Per-tile current density at nominal supply, row-major with x fastest.
struct PowerMap {
    int nx = 0;
    int ny = 0;
    std::vector<double> density_A_per_mm2;

    double at(int i, int j) const { return density_A_per_mm2[static_cast<std::size_t>(j) * nx + i]; }
    double& at(int i, int j) { return density_A_per_mm2[static_cast<std::size_t>(j) * nx + i]; }

    bool operator==(const PowerMap&) const = default;
};

// --- stimulus ------------------------------------------------------------------

/// supply_step: regulators ramp v_start -> v_end with loads drawing from t = 0,
/// cold start. load_step: regulators hold their output and the loads ramp from
/// load_start_fraction of nominal to full, starting at the operating point of
/// the starting load.
enum class StimulusKind { dc, supply_step, load_step };

std::string to_string(StimulusKind kind);
StimulusKind stimulus_kind_from_string(const std::string& text);

struct StimulusSpec {
    StimulusKind kind = StimulusKind::load_step;
    double v_start_v = 0.0;
    double v_end_v = 1.0;
    double rise_time_ns = 1.0;
    /// load_step only: loads start at this fraction of their nominal current
    /// (background activity) and ramp to full load.
    double load_start_fraction = 0.4;

    bool operator==(const StimulusSpec&) const = default;
};

struct ScenarioConfig {
    std::string label = "chip_on_vrm_3d";
    ChipSpec chip;
    PackageSpec package;
    BoardSpec board;
    VrmSpec vrm;
    VrmPlacement placement = ChipOnVrm3D{};
    DecapPolicy decaps;
    PowerMapSpec power_map_spec;
    StimulusSpec stimulus;
    /// Resolved by validate_config; empty before validation.
    PowerMap power_map;

    bool operator==(const ScenarioConfig&) const = default;
};

// --- errors ----------------------------------------------------------------------

struct Violation {
    std::string field;       // dotted path, e.g. "chip.width_mm"
    std::string constraint;  // e.g. "must be > 0"
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

// --- operations ----------------------------------------------------------------

/// Calibrated defaults for each benchmark topology.
ScenarioConfig default_config();
ScenarioConfig on_package_config(int vrm_count, double gap_mm = 1.0);
ScenarioConfig backside_config();
ScenarioConfig chip_on_vrm_config();

/// The five reference benchmarks in the order 1-VRM, 2-VRM, 4-VRM, backside, 3-D.
std::vector<ScenarioConfig> benchmark_configs();

/// Checks every invariant and resolves the power map. Throws ConfigError listing
/// all violations. Idempotent.
ScenarioConfig validate_config(const ScenarioConfig& config);

/// Collects violations without throwing.
std::vector<Violation> check_config(const ScenarioConfig& config);

/// total_power / supply_voltage, in amperes.
double total_load_current(const ScenarioConfig& config);

/// Uniform or hotspot map for the chip's tile grid, normalised to chip.total_power_w.
PowerMap builtin_power_map(PowerMapKind kind, const ChipSpec& chip, const PowerMapSpec& spec = {});

/// Scales densities so Σ density·tile_area·V equals total power. Throws
/// ConfigError when the map is all zero but power is requested.
PowerMap normalize_power_map(PowerMap map, const ChipSpec& chip);

/// Σ density·tile_area·V over the grid, in watts.
double power_map_total_w(const PowerMap& map, const ChipSpec& chip);

}  // namespace pdn

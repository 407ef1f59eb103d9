#include "pdn/config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pdn {

namespace {

std::string join_violations(const std::vector<Violation>& violations) {
    std::ostringstream os;
    os << "invalid configuration:";
    for (const auto& v : violations) {
        os << "\n  " << v.field << " " << v.constraint;
    }
    return os.str();
}

class Checker {
public:
    void positive(double value, const std::string& field) {
        if (!(value > 0.0)) add(field, "must be > 0");
    }
    void non_negative(double value, const std::string& field) {
        if (!(value >= 0.0)) add(field, "must be >= 0");
    }
    void unit_interval(double value, const std::string& field) {
        if (!(value >= 0.0 && value <= 1.0)) add(field, "must be within [0, 1]");
    }
    void require(bool ok, const std::string& field, const std::string& constraint) {
        if (!ok) add(field, constraint);
    }
    void add(const std::string& field, const std::string& constraint) {
        violations.push_back({field, constraint});
    }

    void bump(const BumpSpec& b, const std::string& path) {
        positive(b.diameter_um, path + ".diameter_um");
        positive(b.pitch_um, path + ".pitch_um");
        positive(b.resistance_per_bump_mohm, path + ".resistance_per_bump_mohm");
        positive(b.inductance_per_bump_pH, path + ".inductance_per_bump_pH");
        if (b.diameter_um > 0.0 && b.pitch_um > 0.0) {
            require(b.diameter_um < b.pitch_um, path + ".diameter_um", "must be < pitch_um");
        }
    }

    void via(const ViaSpec& v, const std::string& path) {
        positive(v.resistivity_ohm_m, path + ".resistivity_ohm_m");
        positive(v.height_um, path + ".height_um");
        positive(v.diameter_um, path + ".diameter_um");
        positive(v.inductance_per_via_pH, path + ".inductance_per_via_pH");
        require(v.count_per_site >= 1, path + ".count_per_site", "must be >= 1");
    }

    std::vector<Violation> violations;
};

double overlap_1d(double lo_a, double hi_a, double lo_b, double hi_b) {
    return std::max(0.0, std::min(hi_a, hi_b) - std::max(lo_a, lo_b));
}

}  // namespace

ConfigError::ConfigError(std::vector<Violation> violations)
    : std::runtime_error(join_violations(violations)), violations_(std::move(violations)) {}

std::string placement_name(const VrmPlacement& placement) {
    struct Visitor {
        std::string operator()(const OnPackage& p) const {
            return "on_package_" + std::to_string(p.count) + "vrm";
        }
        std::string operator()(const BacksidePackage&) const { return "backside_package"; }
        std::string operator()(const ChipOnVrm3D&) const { return "chip_on_vrm_3d"; }
    };
    return std::visit(Visitor{}, placement);
}

std::string to_string(Tier tier) {
    switch (tier) {
        case Tier::board: return "board";
        case Tier::package_bottom: return "package_bottom";
        case Tier::package_top: return "package_top";
        case Tier::chip: return "chip";
        case Tier::vrm_die: return "vrm_die";
    }
    return "unknown";
}

Tier tier_from_string(const std::string& text) {
    for (Tier t : {Tier::board, Tier::package_bottom, Tier::package_top, Tier::chip, Tier::vrm_die}) {
        if (to_string(t) == text) return t;
    }
    throw std::invalid_argument("unknown tier '" + text + "'");
}

std::string to_string(PowerMapKind kind) {
    switch (kind) {
        case PowerMapKind::uniform: return "uniform";
        case PowerMapKind::hotspot: return "hotspot";
        case PowerMapKind::explicit_grid: return "explicit";
    }
    return "unknown";
}

PowerMapKind power_map_kind_from_string(const std::string& text) {
    if (text == "uniform") return PowerMapKind::uniform;
    if (text == "hotspot") return PowerMapKind::hotspot;
    if (text == "explicit") return PowerMapKind::explicit_grid;
    throw std::invalid_argument("unknown power map kind '" + text + "'");
}

std::string to_string(StimulusKind kind) {
    switch (kind) {
        case StimulusKind::dc: return "dc";
        case StimulusKind::supply_step: return "supply_step";
        case StimulusKind::load_step: return "load_step";
    }
    return "unknown";
}

StimulusKind stimulus_kind_from_string(const std::string& text) {
    if (text == "dc") return StimulusKind::dc;
    if (text == "supply_step" || text == "supply-step") return StimulusKind::supply_step;
    if (text == "load_step" || text == "load-step") return StimulusKind::load_step;
    throw std::invalid_argument("unknown stimulus '" + text + "'");
}

std::vector<Violation> check_config(const ScenarioConfig& config) {
    Checker c;
    const auto& chip = config.chip;
    c.positive(chip.width_mm, "chip.width_mm");
    c.positive(chip.height_mm, "chip.height_mm");
    c.positive(chip.supply_voltage_v, "chip.supply_voltage_v");
    c.non_negative(chip.total_power_w, "chip.total_power_w");
    c.require(chip.tile_count_x >= 2, "chip.tile_count_x", "must be >= 2");
    c.require(chip.tile_count_y >= 2, "chip.tile_count_y", "must be >= 2");
    const auto& wire = chip.onchip_wire;
    c.positive(wire.resistivity_ohm_m, "chip.onchip_wire.resistivity_ohm_m");
    c.positive(wire.thickness_um, "chip.onchip_wire.thickness_um");
    c.positive(wire.width_um, "chip.onchip_wire.width_um");
    c.positive(wire.pitch_um, "chip.onchip_wire.pitch_um");
    if (wire.width_um > 0.0 && wire.pitch_um > 0.0) {
        c.require(wire.width_um < wire.pitch_um, "chip.onchip_wire.width_um", "must be < pitch_um");
    }
    if (chip.width_mm > 0.0 && chip.tile_count_x >= 2 && wire.pitch_um > 0.0) {
        c.require(chip.tile_width_mm() * 1000.0 >= wire.pitch_um, "chip.tile_count_x",
                  "tile width must hold at least one wire pitch");
    }
    if (chip.height_mm > 0.0 && chip.tile_count_y >= 2 && wire.pitch_um > 0.0) {
        c.require(chip.tile_height_mm() * 1000.0 >= wire.pitch_um, "chip.tile_count_y",
                  "tile height must hold at least one wire pitch");
    }

    const auto& pkg = config.package;
    c.require(pkg.metal_layer_count >= 1, "package.metal_layer_count", "must be >= 1");
    c.positive(pkg.layer_thickness_mm, "package.layer_thickness_mm");
    c.positive(pkg.size_x_mm, "package.size_x_mm");
    c.positive(pkg.size_y_mm, "package.size_y_mm");
    c.positive(pkg.sheet_resistivity_ohm_m, "package.sheet_resistivity_ohm_m");
    c.non_negative(pkg.sheet_inductance_pH_per_sq, "package.sheet_inductance_pH_per_sq");
    c.bump(pkg.c4_bump, "package.c4_bump");
    c.bump(pkg.solder_bump, "package.solder_bump");
    c.via(pkg.through_package_via, "package.through_package_via");
    if (chip.width_mm > 0.0 && pkg.size_x_mm > 0.0) {
        c.require(pkg.size_x_mm >= chip.width_mm, "package.size_x_mm", "must be >= chip.width_mm");
    }
    if (chip.height_mm > 0.0 && pkg.size_y_mm > 0.0) {
        c.require(pkg.size_y_mm >= chip.height_mm, "package.size_y_mm", "must be >= chip.height_mm");
    }
    if (pkg.c4_bump.pitch_um > 0.0 && chip.width_mm > 0.0 && chip.height_mm > 0.0) {
        c.require(chip.width_mm * 1000.0 >= pkg.c4_bump.pitch_um &&
                      chip.height_mm * 1000.0 >= pkg.c4_bump.pitch_um,
                  "package.c4_bump.pitch_um", "must fit at least one bump across the chip footprint");
    }

    c.non_negative(config.board.lumped_resistance_mohm, "board.lumped_resistance_mohm");
    c.non_negative(config.board.lumped_inductance_nH, "board.lumped_inductance_nH");

    c.non_negative(config.vrm.series_resistance_mohm, "vrm.series_resistance_mohm");
    c.non_negative(config.vrm.series_inductance_nH, "vrm.series_inductance_nH");
    c.positive(config.vrm.output_voltage_v, "vrm.output_voltage_v");
    if (config.vrm.output_voltage_v > 0.0 && chip.supply_voltage_v > 0.0) {
        c.require(config.vrm.output_voltage_v == chip.supply_voltage_v, "vrm.output_voltage_v",
                  "must equal chip.supply_voltage_v");
    }

    if (const auto* on = std::get_if<OnPackage>(&config.placement)) {
        c.require(on->count == 1 || on->count == 2 || on->count == 4, "placement.count",
                  "must be one of {1, 2, 4}");
        c.positive(on->gap_mm, "placement.gap_mm");
    } else if (const auto* back = std::get_if<BacksidePackage>(&config.placement)) {
        c.require(back->footprint_fraction > 0.0 && back->footprint_fraction <= 1.0,
                  "placement.footprint_fraction", "must be within (0, 1]");
        c.positive(back->via_site_pitch_um, "placement.via_site_pitch_um");
    } else if (const auto* stack = std::get_if<ChipOnVrm3D>(&config.placement)) {
        c.bump(stack->microbump, "placement.microbump");
        c.via(stack->vrm_tsv, "placement.vrm_tsv");
    }

    const auto& d = config.decaps;
    c.non_negative(d.onchip_density_nF_per_mm2, "decaps.onchip_density_nF_per_mm2");
    c.non_negative(d.onchip_esr_ohm_mm2, "decaps.onchip_esr_ohm_mm2");
    auto check_discrete = [&](const std::vector<DiscreteDecap>& list, const std::string& path, Tier tier) {
        for (std::size_t k = 0; k < list.size(); ++k) {
            const auto& cap = list[k];
            const std::string p = path + "[" + std::to_string(k) + "]";
            c.positive(cap.capacitance_uF, p + ".capacitance_uF");
            c.non_negative(cap.esr_mohm, p + ".esr_mohm");
            c.non_negative(cap.esl_nH, p + ".esl_nH");
            c.unit_interval(cap.site.x, p + ".site.x");
            c.unit_interval(cap.site.y, p + ".site.y");
            c.require(cap.site.tier == tier, p + ".site.tier", "must be " + to_string(tier));
        }
    };
    check_discrete(d.package_decaps, "decaps.package_decaps", Tier::package_top);
    check_discrete(d.board_decaps, "decaps.board_decaps", Tier::board);

    const auto& st = config.stimulus;
    if (st.kind != StimulusKind::dc) c.positive(st.rise_time_ns, "stimulus.rise_time_ns");
    c.require(st.load_start_fraction >= 0.0 && st.load_start_fraction < 1.0, "stimulus.load_start_fraction",
              "must be in [0, 1)");
    if (st.kind == StimulusKind::supply_step) {
        c.require(st.v_end_v == config.vrm.output_voltage_v, "stimulus.v_end_v", "must equal vrm.output_voltage_v");
    }

    const auto& pm = config.power_map_spec;
    if (pm.kind == PowerMapKind::hotspot) {
        c.require(pm.hotspot_ratio >= 1.0, "power_map.hotspot_ratio", "must be >= 1");
        for (std::size_t k = 0; k < pm.blocks.size(); ++k) {
            const std::string p = "power_map.blocks[" + std::to_string(k) + "]";
            c.unit_interval(pm.blocks[k].center_x, p + ".center_x");
            c.unit_interval(pm.blocks[k].center_y, p + ".center_y");
            c.require(pm.blocks[k].size_x > 0.0 && pm.blocks[k].size_x <= 1.0, p + ".size_x",
                      "must be within (0, 1]");
            c.require(pm.blocks[k].size_y > 0.0 && pm.blocks[k].size_y <= 1.0, p + ".size_y",
                      "must be within (0, 1]");
        }
    } else if (pm.kind == PowerMapKind::explicit_grid) {
        const auto expected = static_cast<std::size_t>(std::max(chip.tile_count_x, 0)) *
                              static_cast<std::size_t>(std::max(chip.tile_count_y, 0));
        c.require(pm.densities_A_per_mm2.size() == expected, "power_map.densities_A_per_mm2",
                  "must hold tile_count_x * tile_count_y entries");
        bool all_non_negative = std::all_of(pm.densities_A_per_mm2.begin(), pm.densities_A_per_mm2.end(),
                                            [](double v) { return v >= 0.0; });
        c.require(all_non_negative, "power_map.densities_A_per_mm2", "entries must be >= 0");
        if (all_non_negative && chip.total_power_w > 0.0) {
            bool any_positive = std::any_of(pm.densities_A_per_mm2.begin(), pm.densities_A_per_mm2.end(),
                                            [](double v) { return v > 0.0; });
            c.require(any_positive, "power_map.densities_A_per_mm2",
                      "all-zero map cannot be normalised to total_power_w > 0");
        }
    }
    return c.violations;
}

double power_map_total_w(const PowerMap& map, const ChipSpec& chip) {
    double sum = 0.0;
    for (double d : map.density_A_per_mm2) sum += d;
    return sum * chip.tile_area_mm2() * chip.supply_voltage_v;
}

PowerMap normalize_power_map(PowerMap map, const ChipSpec& chip) {
    const double total = power_map_total_w(map, chip);
    if (chip.total_power_w == 0.0) {
        std::fill(map.density_A_per_mm2.begin(), map.density_A_per_mm2.end(), 0.0);
        return map;
    }
    if (!(total > 0.0)) {
        throw ConfigError(std::vector<Violation>{{"power_map", "all-zero map cannot be normalised to total_power_w > 0"}});
    }
    const double factor = chip.total_power_w / total;
    for (double& d : map.density_A_per_mm2) d *= factor;
    return map;
}

PowerMap builtin_power_map(PowerMapKind kind, const ChipSpec& chip, const PowerMapSpec& spec) {
    PowerMap map;
    map.nx = chip.tile_count_x;
    map.ny = chip.tile_count_y;
    map.density_A_per_mm2.assign(static_cast<std::size_t>(map.nx) * map.ny, 0.0);

    if (kind == PowerMapKind::explicit_grid) {
        map.density_A_per_mm2 = spec.densities_A_per_mm2;
        return normalize_power_map(std::move(map), chip);
    }

    // Relative weights: 1 for background, ratio inside a block, area-weighted on partial overlap.
    const double dx = 1.0 / map.nx;
    const double dy = 1.0 / map.ny;
    double weight_sum = 0.0;
    for (int j = 0; j < map.ny; ++j) {
        for (int i = 0; i < map.nx; ++i) {
            double w = 1.0;
            if (kind == PowerMapKind::hotspot) {
                double covered = 0.0;
                for (const auto& b : spec.blocks) {
                    const double ox = overlap_1d(i * dx, (i + 1) * dx, b.center_x - b.size_x / 2,
                                                 b.center_x + b.size_x / 2);
                    const double oy = overlap_1d(j * dy, (j + 1) * dy, b.center_y - b.size_y / 2,
                                                 b.center_y + b.size_y / 2);
                    covered += ox * oy / (dx * dy);
                }
                w += (spec.hotspot_ratio - 1.0) * std::min(covered, 1.0);
            }
            map.at(i, j) = w;
            weight_sum += w;
        }
    }
    const double current_a = chip.total_power_w / chip.supply_voltage_v;
    const double scale = current_a / (weight_sum * chip.tile_area_mm2());
    for (double& d : map.density_A_per_mm2) d *= scale;
    return map;
}

ScenarioConfig validate_config(const ScenarioConfig& config) {
    auto violations = check_config(config);
    if (!violations.empty()) throw ConfigError(std::move(violations));
    ScenarioConfig out = config;
    out.power_map = builtin_power_map(config.power_map_spec.kind, config.chip, config.power_map_spec);
    return out;
}

double total_load_current(const ScenarioConfig& config) {
    return config.chip.total_power_w / config.chip.supply_voltage_v;
}

}  // namespace pdn

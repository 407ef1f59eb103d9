#include "pdn/netlist.hpp"

#include <algorithm>
#include <cmath>

namespace pdn {

namespace {

constexpr double kMilli = 1e-3;
constexpr double kNano = 1e-9;
constexpr double kPico = 1e-12;
constexpr double kMicro = 1e-6;

Label grid_label(Tier tier, const std::string& role, int i, int j) { return {tier, role, std::nullopt, GridPos{i, j}}; }
Label indexed_label(Tier tier, const std::string& role, int k) { return {tier, role, k, std::nullopt}; }
Label lumped_label(Tier tier, const std::string& role) { return {tier, role, std::nullopt, std::nullopt}; }

NodeId chip_node(Netlist& n, int i, int j) { return n.node(grid_label(Tier::chip, "node", i, j)); }
NodeId package_node(Netlist& n, int i, int j) { return n.node(grid_label(Tier::package_top, "node", i, j)); }

void add_chip_grid(Netlist& n, const ChipSpec& chip, const DecapPolicy& decaps, const PowerMap& map) {
    const int nx = chip.tile_count_x;
    const int ny = chip.tile_count_y;
    if (nx < 2 || ny < 2) throw NetlistError("chip tile grid must be at least 2x2");
    if (map.nx != nx || map.ny != ny) throw NetlistError("power map does not match the chip tile grid");

    const double tile_w_um = chip.tile_width_mm() * 1000.0;
    const double tile_h_um = chip.tile_height_mm() * 1000.0;
    const double tile_area = chip.tile_area_mm2();
    // Wires running along x cross the boundary between horizontally adjacent tiles.
    const double r_h = wire_resistance(chip.onchip_wire, tile_w_um) / wires_per_boundary(chip.onchip_wire, tile_h_um);
    const double r_v = wire_resistance(chip.onchip_wire, tile_h_um) / wires_per_boundary(chip.onchip_wire, tile_w_um);
    const double c_tile = decaps.onchip_density_nF_per_mm2 * tile_area * kNano;
    const double esr_tile = decaps.onchip_esr_ohm_mm2 / tile_area;

    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) chip_node(n, i, j);
    }
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const NodeId here = chip_node(n, i, j);
            if (i + 1 < nx) n.add_resistor(here, chip_node(n, i + 1, j), r_h, grid_label(Tier::chip, "grid_h", i, j));
            if (j + 1 < ny) n.add_resistor(here, chip_node(n, i, j + 1), r_v, grid_label(Tier::chip, "grid_v", i, j));
            n.add_current_source(here, ground_node, map.at(i, j) * tile_area, grid_label(Tier::chip, "load", i, j));
            if (c_tile > 0.0) {
                NodeId top = here;
                if (esr_tile > 0.0) {
                    top = n.add_node(grid_label(Tier::chip, "decap_mid", i, j));
                    n.add_resistor(here, top, esr_tile, grid_label(Tier::chip, "decap_esr", i, j));
                }
                n.add_capacitor(top, ground_node, c_tile, grid_label(Tier::chip, "decap", i, j));
            }
            n.add_probe(n.info(here).name, here);
        }
    }
}

void add_package_grid(Netlist& n, const PackageSpec& pkg, const ChipSpec& chip) {
    const int nx = chip.tile_count_x;
    const int ny = chip.tile_count_y;
    const double sheet_r = package_sheet_resistance(pkg);
    const double sheet_l = pkg.sheet_inductance_pH_per_sq * kPico;
    const double aspect_h = chip.tile_width_mm() / chip.tile_height_mm();  // squares along x
    const double aspect_v = chip.tile_height_mm() / chip.tile_width_mm();

    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) package_node(n, i, j);
    }
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const NodeId here = package_node(n, i, j);
            if (i + 1 < nx) {
                n.add_series_rl(here, package_node(n, i + 1, j), sheet_r * aspect_h, sheet_l * aspect_h,
                                grid_label(Tier::package_top, "seg_h", i, j));
            }
            if (j + 1 < ny) {
                n.add_series_rl(here, package_node(n, i, j + 1), sheet_r * aspect_v, sheet_l * aspect_v,
                                grid_label(Tier::package_top, "seg_v", i, j));
            }
        }
    }
}

int tile_index(double normalized, int count) {
    return std::clamp(static_cast<int>(std::floor(normalized * count)), 0, count - 1);
}

void add_package_decaps(Netlist& n, const std::vector<DiscreteDecap>& decaps, const ChipSpec& chip) {
    for (std::size_t k = 0; k < decaps.size(); ++k) {
        const auto& cap = decaps[k];
        const int i = tile_index(cap.site.x, chip.tile_count_x);
        const int j = tile_index(cap.site.y, chip.tile_count_y);
        const int index = static_cast<int>(k);
        const NodeId attach = package_node(n, i, j);
        NodeId top = attach;
        if (cap.esr_mohm > 0.0 || cap.esl_nH > 0.0) {
            top = n.add_node(Label{Tier::package_top, "pdecap_top", index, GridPos{i, j}});
            n.add_series_rl(attach, top, cap.esr_mohm * kMilli, cap.esl_nH * kNano,
                            Label{Tier::package_top, "pdecap", index, GridPos{i, j}});
        }
        n.add_capacitor(top, ground_node, cap.capacitance_uF * kMicro,
                        Label{Tier::package_top, "pdecap_c", index, GridPos{i, j}});
    }
}

void add_board(Netlist& n, const ScenarioConfig& config) {
    const auto& chip = config.chip;
    const auto& bump = config.package.solder_bump;
    const int bumps = std::max(1, static_cast<int>(std::floor(config.package.size_x_mm * 1000.0 / bump.pitch_um)) *
                                      static_cast<int>(std::floor(config.package.size_y_mm * 1000.0 / bump.pitch_um)));
    const NodeId center = package_node(n, chip.tile_count_x / 2, chip.tile_count_y / 2);
    const NodeId pad = n.add_node(lumped_label(Tier::board, "pad"));
    n.add_series_rl(center, pad, bump.resistance_per_bump_mohm * kMilli / bumps,
                    bump.inductance_per_bump_pH * kPico / bumps, lumped_label(Tier::package_bottom, "solder"));

    NodeId rail = pad;
    if (config.board.lumped_resistance_mohm > 0.0 || config.board.lumped_inductance_nH > 0.0) {
        rail = n.add_node(lumped_label(Tier::board, "rail"));
        n.add_series_rl(pad, rail, config.board.lumped_resistance_mohm * kMilli,
                        config.board.lumped_inductance_nH * kNano, lumped_label(Tier::board, "lump"));
    }
    const auto& decaps = config.decaps.board_decaps;
    for (std::size_t k = 0; k < decaps.size(); ++k) {
        const auto& cap = decaps[k];
        const int index = static_cast<int>(k);
        NodeId top = rail;
        if (cap.esr_mohm > 0.0 || cap.esl_nH > 0.0) {
            top = n.add_node(indexed_label(Tier::board, "bdecap_top", index));
            n.add_series_rl(rail, top, cap.esr_mohm * kMilli, cap.esl_nH * kNano,
                            indexed_label(Tier::board, "bdecap", index));
        }
        n.add_capacitor(top, ground_node, cap.capacitance_uF * kMicro, indexed_label(Tier::board, "bdecap_c", index));
    }
}

/// Ideal source plus series parasitics; returns the regulator output node.
NodeId add_regulator(Netlist& n, const VrmSpec& vrm, int index) {
    const NodeId src = n.add_node(indexed_label(Tier::vrm_die, "src", index));
    n.add_voltage_source(src, ground_node, vrm.output_voltage_v, indexed_label(Tier::vrm_die, "vsrc", index));
    if (vrm.series_resistance_mohm == 0.0 && vrm.series_inductance_nH == 0.0) return src;
    const NodeId out = n.add_node(indexed_label(Tier::vrm_die, "out", index));
    n.add_series_rl(src, out, vrm.series_resistance_mohm * kMilli, vrm.series_inductance_nH * kNano,
                    indexed_label(Tier::vrm_die, "vrm", index));
    return out;
}

void add_c4_array(Netlist& n, const ScenarioConfig& config) {
    const auto& chip = config.chip;
    const auto& bump = config.package.c4_bump;
    const double tw = chip.tile_width_mm() * 1000.0;
    const double th = chip.tile_height_mm() * 1000.0;
    for (int j = 0; j < chip.tile_count_y; ++j) {
        const int ny = sites_in_span(j * th, (j + 1) * th, bump.pitch_um, chip.height_mm * 1000.0);
        for (int i = 0; i < chip.tile_count_x; ++i) {
            const int count = ny * sites_in_span(i * tw, (i + 1) * tw, bump.pitch_um, chip.width_mm * 1000.0);
            if (count == 0) continue;
            n.add_series_rl(package_node(n, i, j), chip_node(n, i, j), bump.resistance_per_bump_mohm * kMilli / count,
                            bump.inductance_per_bump_pH * kPico / count, grid_label(Tier::chip, "c4", i, j));
        }
    }
}

void attach_on_package(Netlist& n, const ScenarioConfig& config, const OnPackage& placement) {
    const auto& chip = config.chip;
    const int nx = chip.tile_count_x;
    const int ny = chip.tile_count_y;
    const double sheet_r = package_sheet_resistance(config.package);
    const double sheet_l = config.package.sheet_inductance_pH_per_sq * kPico;

    enum Side { west, east, south, north };
    std::vector<Side> sides;
    switch (placement.count) {
        case 1: sides = {west}; break;
        case 2: sides = {west, east}; break;
        default: sides = {west, east, south, north}; break;
    }

    for (std::size_t k = 0; k < sides.size(); ++k) {
        const int index = static_cast<int>(k);
        const NodeId out = add_regulator(n, config.vrm, index);
        const Side side = sides[k];
        const bool vertical_edge = side == west || side == east;
        const int edge_nodes = vertical_edge ? ny : nx;
        // Strip of package plane from the regulator edge to the first row of tile centres.
        const double across = vertical_edge ? chip.tile_width_mm() : chip.tile_height_mm();
        const double along = vertical_edge ? chip.tile_height_mm() : chip.tile_width_mm();
        const double squares = (placement.gap_mm + across / 2.0) / along;
        for (int t = 0; t < edge_nodes; ++t) {
            int i = 0;
            int j = 0;
            switch (side) {
                case west: i = 0; j = t; break;
                case east: i = nx - 1; j = t; break;
                case south: i = t; j = 0; break;
                case north: i = t; j = ny - 1; break;
            }
            n.add_series_rl(out, package_node(n, i, j), sheet_r * squares, sheet_l * squares,
                            Label{Tier::package_top, "gap", index, GridPos{i, j}});
        }
    }
}

void attach_backside(Netlist& n, const ScenarioConfig& config, const BacksidePackage& placement) {
    const auto& chip = config.chip;
    const auto& via = config.package.through_package_via;
    const NodeId out = add_regulator(n, config.vrm, 0);
    const double r_site = via_resistance(via);
    const double l_site = via.inductance_per_via_pH * kPico / via.count_per_site;

    const double fw = chip.width_mm * 1000.0 * placement.footprint_fraction;
    const double fh = chip.height_mm * 1000.0 * placement.footprint_fraction;
    const double x0 = (chip.width_mm * 1000.0 - fw) / 2.0;
    const double y0 = (chip.height_mm * 1000.0 - fh) / 2.0;
    const double tw = chip.tile_width_mm() * 1000.0;
    const double th = chip.tile_height_mm() * 1000.0;
    int attached = 0;
    for (int j = 0; j < chip.tile_count_y; ++j) {
        const int cy = sites_in_span(j * th - y0, (j + 1) * th - y0, placement.via_site_pitch_um, fh);
        for (int i = 0; i < chip.tile_count_x; ++i) {
            const int count = cy * sites_in_span(i * tw - x0, (i + 1) * tw - x0, placement.via_site_pitch_um, fw);
            if (count == 0) continue;
            n.add_series_rl(out, package_node(n, i, j), r_site / count, l_site / count,
                            grid_label(Tier::package_bottom, "tpv", i, j));
            ++attached;
        }
    }
    if (attached == 0) throw NetlistError("backside regulator footprint holds no through-package via site");
}

void attach_chip_on_vrm(Netlist& n, const ScenarioConfig& config, const ChipOnVrm3D& placement) {
    const auto& chip = config.chip;
    const NodeId out = add_regulator(n, config.vrm, 0);
    const double r_site = via_resistance(placement.vrm_tsv) + placement.microbump.resistance_per_bump_mohm * kMilli;
    const double l_site = placement.vrm_tsv.inductance_per_via_pH * kPico / placement.vrm_tsv.count_per_site +
                          placement.microbump.inductance_per_bump_pH * kPico;
    const double pitch = placement.microbump.pitch_um;
    const double tw = chip.tile_width_mm() * 1000.0;
    const double th = chip.tile_height_mm() * 1000.0;
    int attached = 0;
    for (int j = 0; j < chip.tile_count_y; ++j) {
        const int cy = sites_in_span(j * th, (j + 1) * th, pitch, chip.height_mm * 1000.0);
        for (int i = 0; i < chip.tile_count_x; ++i) {
            const int count = cy * sites_in_span(i * tw, (i + 1) * tw, pitch, chip.width_mm * 1000.0);
            if (count == 0) continue;
            n.add_series_rl(out, chip_node(n, i, j), r_site / count, l_site / count,
                            grid_label(Tier::vrm_die, "tsv_ubump", i, j));
            ++attached;
        }
    }
    if (attached == 0) throw NetlistError("microbump pitch leaves every chip tile unconnected");

    // The regulator die sits on the package through its own C4 field, which keeps
    // the package and board decoupling on the output rail.
    const auto& c4 = config.package.c4_bump;
    const int bumps = std::max(1, static_cast<int>(std::floor(chip.width_mm * 1000.0 / c4.pitch_um)) *
                                      static_cast<int>(std::floor(chip.height_mm * 1000.0 / c4.pitch_um)));
    n.add_series_rl(out, package_node(n, chip.tile_count_x / 2, chip.tile_count_y / 2),
                    c4.resistance_per_bump_mohm * kMilli / bumps, c4.inductance_per_bump_pH * kPico / bumps,
                    lumped_label(Tier::vrm_die, "c4_array"));
}

}  // namespace

Netlist build_chip_grid(const ChipSpec& chip, const DecapPolicy& decaps, const PowerMap& map) {
    Netlist n;
    add_chip_grid(n, chip, decaps, map);
    return n;
}

Netlist build_package_network(const PackageSpec& pkg, const ChipSpec& chip) {
    Netlist n;
    add_package_grid(n, pkg, chip);
    return n;
}

Netlist assemble_netlist(const ScenarioConfig& config) {
    if (config.power_map.density_A_per_mm2.empty()) {
        throw NetlistError("config has no resolved power map; run validate_config first");
    }
    Netlist n;
    add_chip_grid(n, config.chip, config.decaps, config.power_map);
    add_package_grid(n, config.package, config.chip);
    add_package_decaps(n, config.decaps.package_decaps, config.chip);
    add_board(n, config);

    struct Attach {
        Netlist& n;
        const ScenarioConfig& config;
        void operator()(const OnPackage& p) const {
            add_c4_array(n, config);
            attach_on_package(n, config, p);
        }
        void operator()(const BacksidePackage& p) const {
            add_c4_array(n, config);
            attach_backside(n, config, p);
        }
        void operator()(const ChipOnVrm3D& p) const { attach_chip_on_vrm(n, config, p); }
    };
    std::visit(Attach{n, config}, config.placement);
    check_connectivity(n);
    return n;
}

}  // namespace pdn

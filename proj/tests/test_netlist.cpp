#include "oracles.hpp"

#include "pdn/netlist.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

using namespace pdn;

namespace {

const Element* find_element(const Netlist& n, const std::string& label) {
    for (const auto& e : n.elements()) {
        if (e.label == label) return &e;
    }
    return nullptr;
}

std::size_t count_if_label(const Netlist& n, ElementKind kind, const std::string& role) {
    return static_cast<std::size_t>(std::count_if(n.elements().begin(), n.elements().end(), [&](const Element& e) {
        return e.kind == kind && parse_label(e.label).role == role;
    }));
}

ScenarioConfig small(VrmPlacement placement, int tiles = 2) {
    ScenarioConfig c = default_config();
    c.placement = std::move(placement);
    c.chip.tile_count_x = tiles;
    c.chip.tile_count_y = tiles;
    c.power_map_spec.kind = PowerMapKind::uniform;
    c.decaps.package_decaps.clear();
    c.decaps.board_decaps.clear();
    return validate_config(c);
}

// V(source) - V(tile) with a single 1 A load at the tile and every other load off.
double path_resistance(const ScenarioConfig& config, int i, int j) {
    Netlist n = assemble_netlist(config);
    Netlist single;
    for (std::size_t k = 1; k < n.node_count(); ++k) single.add_node(n.nodes()[k].name);
    const std::string target = format_label({Tier::chip, "load", std::nullopt, GridPos{i, j}});
    for (auto e : n.elements()) {
        if (e.kind == ElementKind::current_source) e.value = e.label == target ? 1.0 : 0.0;
        single.add_element(e);
    }
    const auto v = oracle::dense_dc(single);
    const auto tile = *single.find_node(format_label({Tier::chip, "node", std::nullopt, GridPos{i, j}}));
    return config.vrm.output_voltage_v - v[tile.value];
}

}  // namespace

TEST_CASE("wire resistance is rho L / (t w)") {
    WireSpec w;  // 17.1e-9 ohm m, 5 um thick, 3.3 um wide
    CHECK(wire_resistance(w, 30.0) == doctest::Approx(31.09e-3).epsilon(1e-3));
    CHECK(wire_resistance(w, 0.0) == 0.0);
    WireSpec wide = w;
    wide.width_um = 6.6;
    CHECK(wire_resistance(wide, 30.0) == doctest::Approx(15.55e-3).epsilon(1e-3));
    CHECK(wire_resistance(wide, 30.0) == doctest::Approx(wire_resistance(w, 30.0) / 2.0));
}

TEST_CASE("via resistance is rho h / (pi r^2) per via, in parallel per site") {
    ViaSpec v{80e-9, 50.0, 10.0, 20.0, 1};
    CHECK(via_resistance(v) == doctest::Approx(50.93e-3).epsilon(1e-3));
    v.count_per_site = 4;
    CHECK(via_resistance(v) == doctest::Approx(12.73e-3).epsilon(1e-3));
    v.height_um = 0.0;
    CHECK(via_resistance(v) == 0.0);
}

TEST_CASE("package sheet: ten 10 um layers merge to 0.171 mOhm per square") {
    const PackageSpec pkg;
    CHECK(package_sheet_resistance(pkg) == doctest::Approx(0.171e-3).epsilon(1e-9));
    // Square segments of any size share one resistance.
    ChipSpec coarse;
    coarse.tile_count_x = coarse.tile_count_y = 4;
    ChipSpec fine;
    fine.tile_count_x = fine.tile_count_y = 40;
    const auto a = build_package_network(pkg, coarse);
    const auto b = build_package_network(pkg, fine);
    CHECK(find_element(a, "package_top/seg_h_r[0,0]")->value == doctest::Approx(find_element(b, "package_top/seg_h_r[0,0]")->value));
}

TEST_CASE("tile aggregation on the default 50 x 50 grid") {
    const ChipSpec chip;
    CHECK(wires_per_boundary(chip.onchip_wire, 200.0) == 6);
    const ScenarioConfig c = validate_config(default_config());
    const Netlist n = build_chip_grid(c.chip, c.decaps, c.power_map);
    // 31.09 mOhm per 30 um, over 200 um, six wires in parallel.
    const double expected = 31.09e-3 * (200.0 / 30.0) / 6.0;
    CHECK(find_element(n, "chip/grid_h[0,0]")->value == doctest::Approx(expected).epsilon(1e-3));
    CHECK(find_element(n, "chip/grid_v[7,3]")->value == doctest::Approx(expected).epsilon(1e-3));
    // 5.3 nF/mm^2 on a 0.04 mm^2 tile.
    CHECK(find_element(n, "chip/decap[0,0]")->value == doctest::Approx(0.212e-9));
    CHECK(find_element(n, "chip/decap_esr[0,0]")->value == doctest::Approx(0.1));
}

TEST_CASE("2 x 2 chip grid element counts") {
    ChipSpec chip;
    chip.tile_count_x = chip.tile_count_y = 2;
    const PowerMap map = builtin_power_map(PowerMapKind::uniform, chip);
    const Netlist n = build_chip_grid(chip, DecapPolicy{}, map);
    std::size_t tile_nodes = 0;
    for (const auto& info : n.nodes()) {
        if (info.tier && parse_label(info.name).role == "node") ++tile_nodes;
    }
    CHECK(tile_nodes == 4);
    CHECK(count_if_label(n, ElementKind::resistor, "grid_h") + count_if_label(n, ElementKind::resistor, "grid_v") == 4);
    CHECK(count_if_label(n, ElementKind::current_source, "load") == 4);
    CHECK(count_if_label(n, ElementKind::capacitor, "decap") == 4);
}

TEST_CASE("regulator count per placement") {
    for (int count : {1, 2, 4}) {
        const Netlist n = assemble_netlist(validate_config(on_package_config(count)));
        CHECK(n.source_set().size() == static_cast<std::size_t>(count));
    }
    CHECK(assemble_netlist(validate_config(backside_config())).source_set().size() == 1);
    CHECK(assemble_netlist(validate_config(chip_on_vrm_config())).source_set().size() == 1);
}

TEST_CASE("labels round-trip for every node and element") {
    for (const auto& config : benchmark_configs()) {
        const Netlist n = assemble_netlist(validate_config(config));
        for (std::size_t k = 1; k < n.node_count(); ++k) {
            const auto& info = n.nodes()[k];
            const Label l = parse_label(info.name);
            CHECK(format_label(l) == info.name);
            CHECK(l.tier == *info.tier);
        }
        for (const auto& e : n.elements()) CHECK(format_label(parse_label(e.label)) == e.label);
    }
    const Label l = parse_label("chip/grid_h[12,7]");
    CHECK(l.tier == Tier::chip);
    CHECK(l.role == "grid_h");
    CHECK(l.pos == GridPos{12, 7});
    CHECK(parse_label("vrm_die/src#0").index == 0);
    CHECK_THROWS_AS(parse_label("nowhere"), std::invalid_argument);
    CHECK_THROWS_AS(parse_label("chip/x[1,"), std::invalid_argument);
}

TEST_CASE("all passive values are positive") {
    for (const auto& config : benchmark_configs()) {
        const Netlist n = assemble_netlist(validate_config(config));
        for (const auto& e : n.elements()) {
            if (e.kind == ElementKind::resistor || e.kind == ElementKind::inductor || e.kind == ElementKind::capacitor) {
                CHECK(e.value > 0.0);
            }
        }
    }
}

TEST_CASE("four regulators add attachments to the single-regulator chip and package verbatim") {
    const Netlist one = assemble_netlist(validate_config(on_package_config(1)));
    const Netlist four = assemble_netlist(validate_config(on_package_config(4)));
    std::map<std::string, const Element*> by_label;
    for (const auto& e : four.elements()) by_label[e.label] = &e;
    for (const auto& e : one.elements()) {
        const Label l = parse_label(e.label);
        if (l.tier != Tier::chip && !(l.tier == Tier::package_top && l.role.rfind("seg_", 0) == 0)) continue;
        const auto it = by_label.find(e.label);
        REQUIRE(it != by_label.end());
        CHECK(it->second->value == e.value);
        CHECK(four.nodes()[it->second->a.value].name == one.nodes()[e.a.value].name);
        CHECK(four.nodes()[it->second->b.value].name == one.nodes()[e.b.value].name);
    }
}

TEST_CASE("stacked regulator path is shorter than the backside path") {
    const double stacked = path_resistance(small(ChipOnVrm3D{}), 0, 0);
    const double backside = path_resistance(small(BacksidePackage{}), 0, 0);
    CHECK(stacked > 0.0);
    CHECK(stacked < backside);
}

TEST_CASE("a node with no path to ground is named") {
    Netlist n;
    const NodeId a = n.add_node("chip/island_a");
    const NodeId b = n.add_node("chip/island_b");
    const NodeId c = n.add_node("chip/tied");
    n.add_resistor(a, b, 1.0, {Tier::chip, "r", 0, std::nullopt});
    n.add_resistor(c, ground_node, 1.0, {Tier::chip, "r", 1, std::nullopt});
    try {
        check_connectivity(n);
        FAIL("expected NetlistError");
    } catch (const NetlistError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("island_a") != std::string::npos);
        CHECK(msg.find("island_b") != std::string::npos);
        CHECK(msg.find("tied") == std::string::npos);
    }
}

TEST_CASE("netlist rejects malformed elements") {
    Netlist n;
    const NodeId a = n.add_node("chip/a");
    CHECK_THROWS_AS(n.add_resistor(a, a, 1.0, {Tier::chip, "r", 0, std::nullopt}), NetlistError);
    CHECK_THROWS_AS(n.add_resistor(a, ground_node, 0.0, {Tier::chip, "r", 1, std::nullopt}), NetlistError);
    n.add_resistor(a, ground_node, 1.0, {Tier::chip, "r", 2, std::nullopt});
    CHECK_THROWS_AS(n.add_resistor(a, ground_node, 1.0, {Tier::chip, "r", 2, std::nullopt}), NetlistError);
}

TEST_CASE("text form round-trips exactly") {
    for (const auto& config : {small(ChipOnVrm3D{}, 3), small(OnPackage{2, 1.0}, 3), small(BacksidePackage{}, 4)}) {
        const std::string text = netlist_to_text(assemble_netlist(config));
        std::istringstream is(text);
        CHECK(netlist_to_text(read_netlist(is)) == text);
    }
}

TEST_CASE("golden netlist: stacked regulator on a 2 x 2 grid") {
    const std::string text = netlist_to_text(assemble_netlist(small(ChipOnVrm3D{})));
    const std::string path = std::string(PDN_TEST_DATA_DIR) + "/golden_netlist_3d_2x2.txt";
    if (std::getenv("PDN_UPDATE_GOLDEN")) {
        std::ofstream(path, std::ios::binary) << text;
    }
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream golden;
    golden << is.rdbuf();
    CHECK(text == golden.str());
}

TEST_CASE("tile aggregation matches the full 30 um mesh on a 2 mm die within 10%") {
    // Physical mesh: 66 x 66 wire crossings at 30 um pitch, 31.09 mOhm per
    // segment. A tile node stands for the tile centre, so the physical
    // counterpart contacts the crossings nearest (100, 100) and (1900, 1900) um.
    const WireSpec wire;
    const int crossings = static_cast<int>(std::floor(2000.0 / wire.pitch_um));
    const double physical = oracle::mesh_point_resistance(crossings, wire.pitch_um, 2000.0,
                                                          wire_resistance(wire, wire.pitch_um), 100.0, 100.0,
                                                          1900.0, 1900.0);

    ChipSpec chip;
    chip.width_mm = chip.height_mm = 2.0;
    chip.tile_count_x = chip.tile_count_y = 10;
    DecapPolicy none;
    none.onchip_density_nF_per_mm2 = 0.0;
    Netlist grid = build_chip_grid(chip, none, builtin_power_map(PowerMapKind::uniform, chip));
    Netlist probe;
    for (std::size_t k = 1; k < grid.node_count(); ++k) probe.add_node(grid.nodes()[k].name);
    for (const auto& e : grid.elements()) {
        if (e.kind == ElementKind::resistor) probe.add_element(e);
    }
    const NodeId near = *probe.find_node("chip/node[0,0]");
    const NodeId far = *probe.find_node("chip/node[9,9]");
    probe.add_current_source(ground_node, near, 1.0, {Tier::chip, "inject", std::nullopt, std::nullopt});
    probe.add_voltage_source(far, ground_node, 0.0, {Tier::chip, "sink", std::nullopt, std::nullopt});
    const double tiled = oracle::dense_dc(probe)[near.value];

    MESSAGE("corner-to-corner: mesh " << physical * 1e3 << " mOhm, tiles " << tiled * 1e3 << " mOhm");
    CHECK(std::abs(tiled - physical) / physical < 0.10);
}

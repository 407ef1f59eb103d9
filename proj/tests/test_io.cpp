#include "pdn/io.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pdn;

namespace {

std::size_t count(const std::string& text, const std::string& what) {
    std::size_t n = 0;
    for (auto at = text.find(what); at != std::string::npos; at = text.find(what, at + 1)) ++n;
    return n;
}

std::string rejection(const std::string& text) {
    try {
        config_from_json(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("pdn_io_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("scenario JSON round-trips every benchmark exactly") {
    for (const auto& c : benchmark_configs()) {
        const std::string text = config_to_json(c);
        const ScenarioConfig back = config_from_json(text);
        CHECK(back == c);
        CHECK(config_to_json(back) == text);
        CHECK(text.back() == '\n');
    }
}

TEST_CASE("awkward numbers survive the round trip") {
    ScenarioConfig c = default_config();
    c.chip.total_power_w = 0.1 + 0.2;
    c.vrm.series_inductance_nH = 1e-300;
    c.decaps.onchip_density_nF_per_mm2 = 5.3;
    CHECK(config_from_json(config_to_json(c)) == c);
}

TEST_CASE("missing keys keep their defaults") {
    const ScenarioConfig c = config_from_json(R"({"chip": {"total_power_w": 50}})");
    ScenarioConfig expected = default_config();
    expected.chip.total_power_w = 50.0;
    CHECK(c.chip == expected.chip);
    CHECK(c.package == expected.package);
}

TEST_CASE("unknown keys and wrong types name their path") {
    CHECK(rejection(R"({"chip": {"widht_mm": 10}})").find("chip.widht_mm") != std::string::npos);
    CHECK(rejection(R"({"chip": {"width_mm": "ten"}})").find("chip.width_mm") != std::string::npos);
    CHECK(rejection(R"({"placement": {"kind": "on_the_moon"}})").find("placement") != std::string::npos);
    CHECK_THROWS_AS(config_from_json("{not json"), ConfigError);
}

TEST_CASE("config hash is deterministic and sensitive") {
    const ScenarioConfig a = default_config();
    ScenarioConfig b = a;
    CHECK(config_hash(a) == config_hash(b));
    b.chip.total_power_w = 100.0000001;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(hash_hex(0x1234).size() == 16);
    CHECK(hash_hex(0x1234) == "0000000000001234");
}

TEST_CASE("format_double is the shortest round-trip text") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5e-12) == "-2.5e-12");
    for (double v : {0.1 + 0.2, 1.0 / 3.0, 6.02214076e23, 5e-324}) CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
}

TEST_CASE("IR map CSV layout") {
    ChipSpec chip;
    chip.tile_count_x = chip.tile_count_y = 2;
    const IrDropMap m = ir_drop_map(2, 2, 1.0, {0.95, 0.97, 0.96, 0.98});
    std::ostringstream os;
    write_ir_map_csv(os, m, chip);
    const std::string text = os.str();
    CHECK(text.rfind("i,j,x_mm,y_mm,voltage_v,ir_drop_mv\n", 0) == 0);
    CHECK(count(text, "\n") == 5);
    CHECK(text.find("\n1,0,7.5,2.5,0.97,") != std::string::npos);
}

TEST_CASE("waveform, sweep and comparison CSV headers") {
    TransientWaveform w;
    w.time_s = {0.0, 1e-11};
    w.probe_names = {"chip_min", "chip/node[0,0]"};
    w.series = {{1.0, 0.99}, {1.0, 0.995}};
    std::ostringstream wave;
    write_waveform_csv(wave, w);
    CHECK(wave.str() == "time_s,chip_min,chip/node[0,0]\n0,1,1\n1e-11,0.99,0.995\n");

    SweepResult s;
    s.axis = SweepAxis::vrm_gap;
    s.points.push_back({0.1, 0xab, true, 10.5, std::nullopt, ""});
    s.points.push_back({1.0, 0xcd, false, 0.0, std::nullopt, "boom"});
    std::ostringstream sweep;
    write_sweep_csv(sweep, s);
    CHECK(sweep.str() ==
          "axis_value,max_ir_drop_mv,max_psn_mv,config_hash\n0.1,10.5,,00000000000000ab\n1,,,00000000000000cd\n");

    ComparisonReport r;
    r.rows.push_back({"a", 10.0, 100.0, 0.0, 0.0});
    r.rows.push_back({"b", 7.5, std::nullopt, 0.25, std::nullopt});
    std::ostringstream cmp;
    write_comparison_csv(cmp, r);
    CHECK(cmp.str() == "label,max_ir_drop_mv,max_psn_mv,ir_improvement,psn_improvement\na,10,100,0,0\nb,7.5,,0.25,\n");
    const std::string table = format_comparison_table(r);
    CHECK(table.find("a") != std::string::npos);
    CHECK(count(table, "\n") >= 3);
}

TEST_CASE("heatmap: one rect per tile and a min-max legend") {
    const IrDropMap m = ir_drop_map(2, 2, 1.0, {1.0, 0.99, 0.98, 0.97});
    const std::string svg = render_heatmap_svg(m);
    CHECK(svg.rfind("<?xml", 0) == 0);
    const auto tiles = svg.substr(svg.find("<g id=\"tiles\""), svg.find("</g>") - svg.find("<g id=\"tiles\""));
    CHECK(count(tiles, "<rect") == 4);
    CHECK(svg.find(">0–30 mV</text>") != std::string::npos);
    CHECK(render_heatmap_svg(m) == svg);
}

TEST_CASE("heatmap of a uniform map uses a single colour") {
    const IrDropMap m = ir_drop_map(3, 3, 1.0, std::vector<double>(9, 0.99));
    const std::string svg = render_heatmap_svg(m);
    const auto first = svg.find("fill=\"#", svg.find("<g id=\"tiles\""));
    const std::string colour = svg.substr(first, 14);
    const auto tiles = svg.substr(svg.find("<g id=\"tiles\""), svg.find("</g>") - svg.find("<g id=\"tiles\""));
    CHECK(count(tiles, colour) == 9);
    CHECK_THROWS_AS(render_heatmap_svg(IrDropMap{}), IoError);
}

TEST_CASE("golden heatmap bytes for a 5 x 5 gradient") {
    std::vector<double> volts;
    for (int j = 0; j < 5; ++j) {
        for (int i = 0; i < 5; ++i) volts.push_back(1.0 - 0.001 * (i + 2 * j));
    }
    HeatmapStyle style;
    style.title = "golden";
    const std::string svg = render_heatmap_svg(ir_drop_map(5, 5, 1.0, volts), style);
    const std::string path = std::string(PDN_TEST_DATA_DIR) + "/golden_heatmap_5x5.svg";
    if (std::getenv("PDN_UPDATE_GOLDEN")) std::ofstream(path, std::ios::binary) << svg;
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream golden;
    golden << is.rdbuf();
    CHECK(svg == golden.str());
}

TEST_CASE("manifest embeds a loadable config snapshot") {
    ScenarioConfig c = backside_config();
    c.chip.total_power_w = 80.0;
    RunManifest m;
    m.command = "dc";
    m.arguments = "dc --preset backside_package";
    m.config_paths = {"a.json"};
    m.resolved_config_json = config_to_json(c);
    m.outputs = {"ir_map.csv"};
    m.tool_version = "1.0.0";
    m.wall_time_s = 0.25;
    const std::string text = format_manifest(m);
    CHECK(text.find("command: dc\n") != std::string::npos);
    CHECK(config_from_manifest(text) == c);
    CHECK_THROWS_AS(config_from_manifest("command: dc\n"), ConfigError);

    const auto dir = scratch_dir("manifest");
    write_text_file(dir / "nested" / "manifest.txt", text);
    CHECK(read_text_file(dir / "nested" / "manifest.txt") == text);
    CHECK(load_config(dir / "nested" / "manifest.txt") == c);
    save_config(dir / "scenario.json", c);
    CHECK(load_config(dir / "scenario.json") == c);
    CHECK_THROWS_AS(read_text_file(dir / "missing.txt"), IoError);
    std::filesystem::remove_all(dir);
}

#include "pdn/config.hpp"
#include "pdn/io.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace pdn;

namespace {

bool names_field(const std::vector<Violation>& v, const std::string& field) {
    return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.field == field; });
}

// Direct summation of P = Σ d·A·V over the tiles.
double summed_power(const PowerMap& map, const ChipSpec& chip) {
    double sum = 0.0;
    for (double d : map.density_A_per_mm2) sum += d * chip.tile_area_mm2() * chip.supply_voltage_v;
    return sum;
}

}  // namespace

TEST_CASE("default scenario holds the reference chip and validates") {
    const ScenarioConfig c = default_config();
    CHECK(c.chip.width_mm == 10.0);
    CHECK(c.chip.height_mm == 10.0);
    CHECK(c.chip.supply_voltage_v == 1.0);
    CHECK(c.chip.total_power_w == 100.0);
    CHECK(c.chip.onchip_wire.resistivity_ohm_m == doctest::Approx(17.1e-9));
    CHECK(c.decaps.onchip_density_nF_per_mm2 == 5.3);
    CHECK(c.package.metal_layer_count == 10);
    CHECK(c.package.merged_thickness_mm() == doctest::Approx(0.1));
    CHECK(check_config(c).empty());
    for (const auto& b : benchmark_configs()) CHECK(check_config(b).empty());
}

TEST_CASE("zero width is reported against chip.width_mm") {
    ScenarioConfig c = default_config();
    c.chip.width_mm = 0.0;
    const auto v = check_config(c);
    REQUIRE(names_field(v, "chip.width_mm"));
    try {
        validate_config(c);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("chip.width_mm") != std::string::npos);
        CHECK(std::string(e.what()).find("must be > 0") != std::string::npos);
    }
}

TEST_CASE("every violation is collected, not just the first") {
    ScenarioConfig c = default_config();
    c.chip.tile_count_x = 1;
    c.vrm.series_resistance_mohm = -1.0;
    c.decaps.onchip_density_nF_per_mm2 = -2.0;
    const auto v = check_config(c);
    CHECK(names_field(v, "chip.tile_count_x"));
    CHECK(names_field(v, "vrm.series_resistance_mohm"));
    CHECK(names_field(v, "decaps.onchip_density_nF_per_mm2"));
}

TEST_CASE("stimulus checks") {
    ScenarioConfig c = default_config();
    c.stimulus.rise_time_ns = 0.0;
    CHECK(names_field(check_config(c), "stimulus.rise_time_ns"));
    c = default_config();
    c.stimulus.load_start_fraction = 1.0;
    CHECK(names_field(check_config(c), "stimulus.load_start_fraction"));
    c = default_config();
    c.stimulus.kind = StimulusKind::supply_step;
    c.stimulus.v_end_v = 0.9;
    CHECK(names_field(check_config(c), "stimulus.v_end_v"));
    c.stimulus.kind = StimulusKind::dc;
    c.stimulus.rise_time_ns = 0.0;
    CHECK(check_config(c).empty());
}

TEST_CASE("total load current is P / V") {
    ScenarioConfig c = default_config();
    CHECK(total_load_current(c) == doctest::Approx(100.0));
    c.chip.supply_voltage_v = 0.8;
    CHECK(total_load_current(c) == doctest::Approx(125.0));
    c.chip.total_power_w = 0.0;
    CHECK(total_load_current(c) == 0.0);
}

TEST_CASE("uniform map: 100 A over 100 mm² is 1 A/mm² everywhere") {
    const ChipSpec chip;
    const PowerMap m = builtin_power_map(PowerMapKind::uniform, chip);
    REQUIRE(m.density_A_per_mm2.size() == 2500);
    for (double d : m.density_A_per_mm2) CHECK(d == doctest::Approx(1.0).epsilon(1e-12));
    // Mirror symmetry about both axes.
    for (int j = 0; j < m.ny; ++j) {
        for (int i = 0; i < m.nx; ++i) {
            CHECK(m.at(i, j) == m.at(m.nx - 1 - i, j));
            CHECK(m.at(i, j) == m.at(i, m.ny - 1 - j));
        }
    }
}

TEST_CASE("hotspot map keeps total power and the block contrast") {
    const ChipSpec chip;
    const PowerMapSpec spec;
    const PowerMap m = builtin_power_map(PowerMapKind::hotspot, chip, spec);
    CHECK(summed_power(m, chip) == doctest::Approx(100.0).epsilon(1e-6));

    const auto [lo, hi] = std::minmax_element(m.density_A_per_mm2.begin(), m.density_A_per_mm2.end());
    CHECK(*hi / *lo == doctest::Approx(3.0).epsilon(1e-12));

    // Two 0.2 x 0.2 blocks cover 8% of the die at 3x background, so
    // max / mean = 3 / (0.92 + 0.08 * 3).
    const double mean = std::accumulate(m.density_A_per_mm2.begin(), m.density_A_per_mm2.end(), 0.0) /
                        static_cast<double>(m.density_A_per_mm2.size());
    CHECK(*hi / mean == doctest::Approx(3.0 / 1.16).epsilon(1e-9));

    // Block tiles: 10 x 10 around (15, 15) and (35, 35).
    CHECK(m.at(12, 12) == *hi);
    CHECK(m.at(37, 37) == *hi);
    CHECK(m.at(25, 25) == *lo);
}

TEST_CASE("explicit map at half the target power is scaled by two") {
    ScenarioConfig c = default_config();
    c.chip.tile_count_x = 4;
    c.chip.tile_count_y = 4;
    c.power_map_spec.kind = PowerMapKind::explicit_grid;
    // 0.5 A/mm² everywhere gives 50 W on 100 mm².
    c.power_map_spec.densities_A_per_mm2.assign(16, 0.5);
    const ScenarioConfig v = validate_config(c);
    for (double d : v.power_map.density_A_per_mm2) CHECK(d == doctest::Approx(1.0));
    CHECK(summed_power(v.power_map, v.chip) == doctest::Approx(100.0).epsilon(1e-9));

    c.power_map_spec.densities_A_per_mm2.assign(15, 0.5);
    CHECK(names_field(check_config(c), "power_map.densities_A_per_mm2"));
    c.power_map_spec.densities_A_per_mm2.assign(16, 0.0);
    CHECK(names_field(check_config(c), "power_map.densities_A_per_mm2"));
}

TEST_CASE("zero power is allowed and yields an all-zero map") {
    ScenarioConfig c = default_config();
    c.chip.total_power_w = 0.0;
    const ScenarioConfig v = validate_config(c);
    for (double d : v.power_map.density_A_per_mm2) CHECK(d == 0.0);
}

TEST_CASE("validate_config is idempotent") {
    for (const auto& c : benchmark_configs()) {
        const ScenarioConfig once = validate_config(c);
        CHECK(validate_config(once) == once);
    }
}

TEST_CASE("placement names") {
    CHECK(placement_name(OnPackage{1, 1.0}) == "on_package_1vrm");
    CHECK(placement_name(OnPackage{4, 1.0}) == "on_package_4vrm");
    CHECK(placement_name(BacksidePackage{}) == "backside_package");
    CHECK(placement_name(ChipOnVrm3D{}) == "chip_on_vrm_3d");
    const auto all = benchmark_configs();
    REQUIRE(all.size() == 5);
    CHECK(all[0].label == "on_package_1vrm");
    CHECK(all[4].label == "chip_on_vrm_3d");
}

TEST_CASE("on-package count must be 1, 2 or 4") {
    ScenarioConfig c = on_package_config(3);
    CHECK_FALSE(check_config(c).empty());
}

TEST_CASE("string conversions round-trip") {
    for (auto k : {PowerMapKind::uniform, PowerMapKind::hotspot, PowerMapKind::explicit_grid}) {
        CHECK(power_map_kind_from_string(to_string(k)) == k);
    }
    for (auto k : {StimulusKind::dc, StimulusKind::supply_step, StimulusKind::load_step}) {
        CHECK(stimulus_kind_from_string(to_string(k)) == k);
    }
    for (auto t : {Tier::chip, Tier::package_top, Tier::package_bottom, Tier::vrm_die, Tier::board}) {
        CHECK(tier_from_string(to_string(t)) == t);
    }
    CHECK_THROWS_AS(power_map_kind_from_string("spiral"), std::invalid_argument);
}

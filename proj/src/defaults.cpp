#include "pdn/config.hpp"

// Reference benchmark scenarios. Table values (wire geometry and resistivity,
// TSV resistivity, package layer stack, C4 geometry, on-die decap density,
// 1 cm chip at 1 V / 100 W) are fixed; regulator, board, package-inductance
// and discrete decap parasitics are calibration knobs (see `pdnsim calibrate`).

namespace pdn {

namespace {

std::vector<DiscreteDecap> package_decap_grid() {
    std::vector<DiscreteDecap> decaps;
    for (int j = 0; j < 4; ++j) {
        for (int i = 0; i < 4; ++i) {
            DiscreteDecap cap;
            cap.capacitance_uF = 1.0;
            cap.esr_mohm = 20.0;
            cap.esl_nH = 0.02;
            cap.site = {Tier::package_top, (i + 0.5) / 4.0, (j + 0.5) / 4.0};
            decaps.push_back(cap);
        }
    }
    return decaps;
}

std::vector<DiscreteDecap> board_decap_bank() {
    std::vector<DiscreteDecap> decaps(10);
    for (auto& cap : decaps) {
        cap.capacitance_uF = 100.0;
        cap.esr_mohm = 1.0;
        cap.esl_nH = 1.0;
        cap.site = {Tier::board, 0.5, 0.5};
    }
    return decaps;
}

}  // namespace

ScenarioConfig default_config() {
    ScenarioConfig config;
    config.decaps.package_decaps = package_decap_grid();
    config.decaps.board_decaps = board_decap_bank();
    return config;
}

ScenarioConfig on_package_config(int vrm_count, double gap_mm) {
    ScenarioConfig config = default_config();
    config.placement = OnPackage{vrm_count, gap_mm};
    config.label = placement_name(config.placement);
    return config;
}

ScenarioConfig backside_config() {
    ScenarioConfig config = default_config();
    config.placement = BacksidePackage{};
    config.label = placement_name(config.placement);
    return config;
}

ScenarioConfig chip_on_vrm_config() {
    ScenarioConfig config = default_config();
    config.placement = ChipOnVrm3D{};
    config.label = placement_name(config.placement);
    return config;
}

std::vector<ScenarioConfig> benchmark_configs() {
    return {on_package_config(1), on_package_config(2), on_package_config(4), backside_config(),
            chip_on_vrm_config()};
}

}  // namespace pdn

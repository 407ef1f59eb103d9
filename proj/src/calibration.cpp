#include "pdn/analysis.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>

namespace pdn {

CalibrationKnobs knobs_of(const ScenarioConfig& config) {
    return {config.vrm.series_resistance_mohm, config.vrm.series_inductance_nH,
            config.package.sheet_inductance_pH_per_sq, config.board.lumped_inductance_nH};
}

ScenarioConfig with_knobs(ScenarioConfig config, const CalibrationKnobs& knobs) {
    config.vrm.series_resistance_mohm = knobs.vrm_resistance_mohm;
    config.vrm.series_inductance_nH = knobs.vrm_inductance_nH;
    config.package.sheet_inductance_pH_per_sq = knobs.package_inductance_pH_per_sq;
    config.board.lumped_inductance_nH = knobs.board_inductance_nH;
    return config;
}

CalibrationSet calibration_set(const ScenarioConfig& base) {
    auto variant = [&](VrmPlacement placement) {
        ScenarioConfig c = base;
        c.placement = std::move(placement);
        c.label = placement_name(c.placement);
        return c;
    };
    const auto* on = std::get_if<OnPackage>(&base.placement);
    const double gap = on ? on->gap_mm : OnPackage{}.gap_mm;
    const auto* back = std::get_if<BacksidePackage>(&base.placement);
    const auto* stack = std::get_if<ChipOnVrm3D>(&base.placement);
    const ScenarioConfig defaults_back = backside_config();
    const ScenarioConfig defaults_stack = chip_on_vrm_config();
    return {variant(OnPackage{1, gap}), variant(OnPackage{4, gap}),
            variant(back ? VrmPlacement{*back} : defaults_back.placement),
            variant(stack ? VrmPlacement{*stack} : defaults_stack.placement)};
}

CalibrationResult calibrate(const CalibrationSet& set, const CalibrationGrid& grid, const CalibrationTargets& targets,
                            const SweepOptions& options) {
    const CalibrationKnobs base = knobs_of(set.stacked);
    auto axis = [](const std::vector<double>& values, double fallback) {
        return values.empty() ? std::vector<double>{fallback} : values;
    };
    const auto rs = axis(grid.vrm_resistance_mohm, base.vrm_resistance_mohm);
    const auto ls = axis(grid.vrm_inductance_nH, base.vrm_inductance_nH);
    const auto ps = axis(grid.package_inductance_pH_per_sq, base.package_inductance_pH_per_sq);
    const auto bs = axis(grid.board_inductance_nH, base.board_inductance_nH);

    CalibrationResult result;
    for (double r : rs) {
        for (double l : ls) {
            for (double p : ps) {
                for (double b : bs) result.samples.push_back({{r, l, p, b}});
            }
        }
    }
    const ScenarioConfig* members[] = {&set.one_vrm, &set.four_vrm, &set.backside, &set.stacked};
    constexpr std::size_t kMembers = 4;
    std::vector<double> psn(result.samples.size() * kMembers, 0.0);
    std::vector<std::string> errors(psn.size());
    detail::parallel_for(psn.size(), options.workers, [&](std::size_t task) {
        const auto& knobs = result.samples[task / kMembers].knobs;
        try {
            EvaluationOptions eval = options.evaluation;
            eval.run_transient = true;
            psn[task] = evaluate_scenario(with_knobs(*members[task % kMembers], knobs), eval).psn->max_psn_mV;
        } catch (const std::exception& e) {
            errors[task] = e.what();
        }
    });
    for (const auto& e : errors) {
        if (!e.empty()) throw AnalysisError("calibration run failed: " + e);
    }

    auto squared = [](double value, double target) { return std::pow((value - target) / target, 2.0); };
    for (std::size_t k = 0; k < result.samples.size(); ++k) {
        auto& s = result.samples[k];
        const double one = psn[k * kMembers];
        const double four = psn[k * kMembers + 1];
        s.backside_psn_mV = psn[k * kMembers + 2];
        s.stacked_psn_mV = psn[k * kMembers + 3];
        s.four_vs_one_psn_improvement = relative_improvement(one, four);
        s.cost = squared(s.backside_psn_mV, targets.backside_psn_mV) + squared(s.stacked_psn_mV, targets.stacked_psn_mV) +
                 squared(s.four_vs_one_psn_improvement, targets.four_vs_one_psn_improvement);
        if (s.cost < result.samples[result.best].cost) result.best = k;
    }
    return result;
}

CalibrationGrid default_calibration_grid() {
    const CalibrationKnobs k = knobs_of(default_config());
    return {{k.vrm_resistance_mohm},
            {k.vrm_inductance_nH * 0.5, k.vrm_inductance_nH, k.vrm_inductance_nH * 2.0},
            {k.package_inductance_pH_per_sq * 0.5, k.package_inductance_pH_per_sq, k.package_inductance_pH_per_sq * 2.0},
            {k.board_inductance_nH}};
}

}  // namespace pdn

#include "pdn/analysis.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pdn {

std::string to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::vrm_count: return "vrm_count";
        case SweepAxis::vrm_gap: return "vrm_gap";
        case SweepAxis::onchip_decap: return "onchip_decap";
        case SweepAxis::power_scale: return "power_scale";
    }
    return "unknown";
}

SweepAxis sweep_axis_from_string(const std::string& text) {
    for (auto axis : {SweepAxis::vrm_count, SweepAxis::vrm_gap, SweepAxis::onchip_decap, SweepAxis::power_scale}) {
        if (to_string(axis) == text) return axis;
    }
    throw std::invalid_argument("unknown sweep axis '" + text + "'");
}

ScenarioConfig apply_axis(const ScenarioConfig& base, SweepAxis axis, double value) {
    ScenarioConfig c = base;
    switch (axis) {
        case SweepAxis::vrm_count: {
            auto* p = std::get_if<OnPackage>(&c.placement);
            if (!p) throw AnalysisError("vrm_count applies only to on-package regulators");
            if (value != 1.0 && value != 2.0 && value != 4.0) throw AnalysisError("vrm_count must be 1, 2 or 4");
            p->count = static_cast<int>(value);
            c.label = placement_name(c.placement);
            break;
        }
        case SweepAxis::vrm_gap: {
            auto* p = std::get_if<OnPackage>(&c.placement);
            if (!p) throw AnalysisError("vrm_gap applies only to on-package regulators");
            p->gap_mm = value;
            break;
        }
        case SweepAxis::onchip_decap: c.decaps.onchip_density_nF_per_mm2 = value; break;
        case SweepAxis::power_scale:
            if (!(value >= 0.0)) throw AnalysisError("power_scale must be >= 0");
            c.chip.total_power_w *= value;
            break;
    }
    return c;
}

std::vector<const SweepPoint*> SweepResult::failures() const {
    std::vector<const SweepPoint*> out;
    for (const auto& p : points) {
        if (!p.ok) out.push_back(&p);
    }
    return out;
}

SweepResult run_sweep(const ScenarioConfig& base, SweepAxis axis, std::vector<double> values,
                      const SweepOptions& options) {
    if (values.empty()) throw AnalysisError("sweep needs at least one axis value");
    std::sort(values.begin(), values.end());
    if (std::adjacent_find(values.begin(), values.end()) != values.end()) {
        throw AnalysisError("sweep axis values must be distinct");
    }
    std::vector<ScenarioConfig> configs;
    for (double v : values) {
        ScenarioConfig c = apply_axis(base, axis, v);
        if (auto violations = check_config(c); !violations.empty()) {
            throw ConfigError(std::move(violations));
        }
        configs.push_back(std::move(c));
    }

    SweepResult result;
    result.axis = axis;
    result.points.resize(values.size());
    detail::parallel_for(values.size(), options.workers, [&](std::size_t k) {
        SweepPoint& p = result.points[k];
        p.axis_value = values[k];
        try {
            const ScenarioResult r = evaluate_scenario(configs[k], options.evaluation);
            p.config_hash = r.config_hash;
            p.max_ir_drop_mV = r.ir.max_mV;
            if (r.psn) p.max_psn_mV = r.psn->max_psn_mV;
            p.ok = true;
        } catch (const std::exception& e) {
            p.error = e.what();
        }
    });
    return result;
}

double relative_improvement(double reference, double value) {
    if (reference == 0.0) return value == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    return (reference - value) / reference;
}

ComparisonReport compare_results(const std::vector<ScenarioResult>& results) {
    if (results.empty()) throw AnalysisError("nothing to compare");
    const ScenarioResult& ref = results.front();
    ComparisonReport report;
    for (const auto& r : results) {
        ComparisonRow row;
        row.label = r.label;
        row.max_ir_drop_mV = r.ir.max_mV;
        row.ir_improvement = relative_improvement(ref.ir.max_mV, r.ir.max_mV);
        if (r.psn) {
            row.max_psn_mV = r.psn->max_psn_mV;
            if (ref.psn) row.psn_improvement = relative_improvement(ref.psn->max_psn_mV, r.psn->max_psn_mV);
        }
        report.rows.push_back(row);
    }
    return report;
}

ComparisonReport compare_configurations(const std::vector<ScenarioConfig>& configs, const SweepOptions& options) {
    if (configs.size() < 2) throw AnalysisError("compare needs at least two configurations");
    for (std::size_t k = 1; k < configs.size(); ++k) {
        if (!(configs[k].chip == configs.front().chip)) {
            throw AnalysisError("configuration '" + configs[k].label + "' has a different chip spec than '" +
                                configs.front().label + "'");
        }
    }
    std::vector<ScenarioResult> results(configs.size());
    std::vector<std::string> errors(configs.size());
    detail::parallel_for(configs.size(), options.workers, [&](std::size_t k) {
        try {
            results[k] = evaluate_scenario(configs[k], options.evaluation);
        } catch (const std::exception& e) {
            errors[k] = configs[k].label + ": " + e.what();
        }
    });
    for (const auto& e : errors) {
        if (!e.empty()) throw AnalysisError("compare failed for " + e);
    }
    return compare_results(results);
}

}  // namespace pdn

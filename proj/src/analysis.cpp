#include "pdn/analysis.hpp"

#include "pdn/io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pdn {

IrDropMap ir_drop_map(int nx, int ny, double supply_v, std::vector<double> tile_voltage_v) {
    if (nx <= 0 || ny <= 0 || tile_voltage_v.size() != static_cast<std::size_t>(nx) * ny) {
        throw AnalysisError("ir_drop_map: tile voltages do not match the grid");
    }
    IrDropMap map;
    map.nx = nx;
    map.ny = ny;
    map.supply_v = supply_v;
    map.voltage_v = std::move(tile_voltage_v);
    map.drop_mV.resize(map.voltage_v.size());
    double sum = 0.0;
    std::size_t worst = 0;
    for (std::size_t k = 0; k < map.voltage_v.size(); ++k) {
        map.drop_mV[k] = (supply_v - map.voltage_v[k]) * 1e3;
        sum += map.drop_mV[k];
        if (map.drop_mV[k] > map.drop_mV[worst]) worst = k;
    }
    map.max_mV = map.drop_mV[worst];
    map.mean_mV = sum / static_cast<double>(map.drop_mV.size());
    map.argmax = {static_cast<int>(worst % static_cast<std::size_t>(nx)), static_cast<int>(worst / static_cast<std::size_t>(nx))};
    return map;
}

IrDropMap ir_drop_map(const std::vector<double>& node_voltage, const Netlist& netlist, const ScenarioConfig& config) {
    const int nx = config.chip.tile_count_x;
    const int ny = config.chip.tile_count_y;
    std::vector<double> tiles(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const auto id = netlist.find_node(format_label({Tier::chip, "node", std::nullopt, GridPos{i, j}}));
            if (!id) throw AnalysisError("ir_drop_map: netlist has no chip tile (" + std::to_string(i) + "," +
                                         std::to_string(j) + ")");
            tiles[static_cast<std::size_t>(j) * nx + i] = node_voltage.at(id->value);
        }
    }
    return ir_drop_map(nx, ny, config.chip.supply_voltage_v, std::move(tiles));
}

IrDropMap ir_drop_map(const DcSolution& dc, const Netlist& netlist, const ScenarioConfig& config) {
    return ir_drop_map(dc.node_voltage, netlist, config);
}

namespace {

/// Height of the peak d[first..last] (a plateau) above the higher of the two
/// lowest points reached before the signal climbs past it on either side.
double prominence(const std::vector<double>& d, std::size_t first, std::size_t last) {
    const double peak = d[first];
    double left = peak;
    for (std::size_t k = first; k-- > 0;) {
        if (d[k] > peak) break;
        left = std::min(left, d[k]);
    }
    double right = peak;
    for (std::size_t k = last + 1; k < d.size(); ++k) {
        if (d[k] > peak) break;
        right = std::min(right, d[k]);
    }
    return peak - std::max(left, right);
}

}  // namespace

PsnMetrics extract_psn(const std::vector<double>& time_s, const std::vector<std::vector<double>>& series,
                       double v_final, double rise_time_s, const PsnOptions& options) {
    if (time_s.empty() || series.empty()) throw AnalysisError("extract_psn: empty waveform");
    for (const auto& s : series) {
        if (s.size() != time_s.size()) throw AnalysisError("extract_psn: series length differs from time axis");
    }
    const double t0 = time_s.front();
    const double span = time_s.back() - t0;
    const double tail_needed = rise_time_s * (1.0 + options.min_tail_rise_times);
    if (rise_time_s > 0.0 && span < tail_needed * (1.0 - 1e-9)) {
        throw AnalysisError("extract_psn: waveform too short; need " + std::to_string(tail_needed) +
                            " s after the start, have " + std::to_string(span) + " s");
    }
    std::size_t start = 0;
    while (start < time_s.size() && time_s[start] - t0 < rise_time_s * (1.0 - 1e-9)) ++start;

    std::vector<double> deficit(time_s.size() - start);
    for (std::size_t k = start; k < time_s.size(); ++k) {
        double lowest = series.front()[k];
        for (const auto& s : series) lowest = std::min(lowest, s[k]);
        deficit[k - start] = v_final - lowest;
    }

    PsnMetrics m;
    const auto worst = static_cast<std::size_t>(std::max_element(deficit.begin(), deficit.end()) - deficit.begin());
    m.max_psn_mV = deficit[worst] * 1e3;
    m.max_psn_time_s = time_s[start + worst];
    m.settling_mV = deficit.back() * 1e3;

    const double threshold = options.prominence_mV * 1e-3;
    for (std::size_t k = 1; k + 1 < deficit.size(); ++k) {
        if (!(deficit[k] > deficit[k - 1])) continue;
        std::size_t last = k;
        while (last + 1 < deficit.size() && deficit[last + 1] == deficit[k]) ++last;
        if (last + 1 >= deficit.size() || !(deficit[last + 1] < deficit[k])) {
            k = last;
            continue;
        }
        if (prominence(deficit, k, last) >= threshold) {
            m.first_droop_mV = deficit[k] * 1e3;
            m.first_droop_time_s = time_s[start + k];
            break;
        }
        k = last;
    }
    return m;
}

PsnMetrics extract_psn(const TransientWaveform& waveform, const ScenarioConfig& config, const PsnOptions& options) {
    const double rise = waveform.stimulus.kind == StimulusKind::dc ? 0.0 : waveform.stimulus.rise_time_s;
    return extract_psn(waveform.time_s, waveform.series, config.chip.supply_voltage_v, rise, options);
}

TransientOptions default_transient_options() { return TransientOptions{}; }

ScenarioResult evaluate_scenario(const ScenarioConfig& config, const EvaluationOptions& options) {
    const ScenarioConfig resolved = validate_config(config);
    const Netlist netlist = assemble_netlist(resolved);
    const DcSolution dc = dc_solve(netlist);

    ScenarioResult result;
    result.label = resolved.label;
    result.config_hash = config_hash(resolved);
    result.ir = ir_drop_map(dc, netlist, resolved);
    if (options.run_transient) {
        TransientOptions topts = options.transient;
        topts.probes.clear();
        topts.record_envelope = true;
        TransientWaveform w = transient_solve(netlist, Stimulus::from_spec(resolved.stimulus), topts);
        result.psn = extract_psn(w, resolved, options.psn);
        result.transient_final = ir_drop_map(w.final_node_voltage, netlist, resolved);
        result.waveform = std::move(w);
    }
    return result;
}

}  // namespace pdn

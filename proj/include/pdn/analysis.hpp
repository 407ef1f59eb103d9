#pragma once

// Metrics on solutions (IR-drop maps, supply-noise figures), parameter sweeps,
// configuration comparison and the calibration grid search.

#include "pdn/mna.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdn {

class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- IR drop -------------------------------------------------------------------------

struct IrDropMap {
    int nx = 0;
    int ny = 0;
    double supply_v = 0.0;
    std::vector<double> voltage_v;  // row-major, x fastest
    std::vector<double> drop_mV;
    double max_mV = 0.0;
    double mean_mV = 0.0;
    GridPos argmax;

    double at(int i, int j) const { return drop_mV[static_cast<std::size_t>(j) * nx + i]; }
};

/// Per-tile drops from tile voltages (row-major, x fastest).
IrDropMap ir_drop_map(int nx, int ny, double supply_v, std::vector<double> tile_voltage_v);

/// Drops of the chip tile nodes of an assembled netlist.
IrDropMap ir_drop_map(const std::vector<double>& node_voltage, const Netlist& netlist, const ScenarioConfig& config);
IrDropMap ir_drop_map(const DcSolution& dc, const Netlist& netlist, const ScenarioConfig& config);

// --- supply noise ----------------------------------------------------------------------

struct PsnOptions {
    /// A droop counts once it rises this far above the deficit on both sides.
    double prominence_mV = 1.0;
    /// Required coverage after the ramp ends, in rise times.
    double min_tail_rise_times = 5.0;
};

struct PsnMetrics {
    double max_psn_mV = 0.0;
    double max_psn_time_s = 0.0;
    std::optional<double> first_droop_mV;
    std::optional<double> first_droop_time_s;
    double settling_mV = 0.0;
};

/// Deficit d(t) = v_final - min over series v(t), evaluated from the end of the
/// ramp (time[0] + rise) onwards. Times in the result are absolute.
PsnMetrics extract_psn(const std::vector<double>& time_s, const std::vector<std::vector<double>>& series,
                       double v_final, double rise_time_s, const PsnOptions& options = {});

/// Uses every recorded series of the waveform; v_final is the supply voltage.
PsnMetrics extract_psn(const TransientWaveform& waveform, const ScenarioConfig& config, const PsnOptions& options = {});

// --- evaluation of one scenario ----------------------------------------------------------

struct EvaluationOptions {
    bool run_transient = true;
    TransientOptions transient;  // probes are ignored; the chip envelope is recorded
    PsnOptions psn;
};

struct ScenarioResult {
    std::string label;
    std::uint64_t config_hash = 0;
    IrDropMap ir;
    std::optional<PsnMetrics> psn;
    std::optional<TransientWaveform> waveform;
    /// Chip drops at t_end, for comparison with the DC map.
    std::optional<IrDropMap> transient_final;
};

/// Validates, builds, solves DC and, when requested, the transient.
ScenarioResult evaluate_scenario(const ScenarioConfig& config, const EvaluationOptions& options = {});

TransientOptions default_transient_options();

// --- sweeps ----------------------------------------------------------------------------

enum class SweepAxis { vrm_count, vrm_gap, onchip_decap, power_scale };

std::string to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(const std::string& text);

/// Copy of base with one axis set; power_scale multiplies the base total power.
/// Throws AnalysisError when the axis does not apply to the placement.
ScenarioConfig apply_axis(const ScenarioConfig& base, SweepAxis axis, double value);

struct SweepPoint {
    double axis_value = 0.0;
    std::uint64_t config_hash = 0;
    bool ok = false;
    double max_ir_drop_mV = 0.0;
    std::optional<double> max_psn_mV;
    std::string error;
};

struct SweepResult {
    SweepAxis axis = SweepAxis::power_scale;
    std::vector<SweepPoint> points;  // ascending axis value

    std::vector<const SweepPoint*> failures() const;
};

struct SweepOptions {
    EvaluationOptions evaluation;
    /// 0 picks the hardware concurrency.
    unsigned workers = 0;
};

/// One build and solve per value, spread over a worker pool; failures are
/// recorded per point and the sweep continues.
SweepResult run_sweep(const ScenarioConfig& base, SweepAxis axis, std::vector<double> values,
                      const SweepOptions& options = {});

// --- comparison ---------------------------------------------------------------------------

struct ComparisonRow {
    std::string label;
    double max_ir_drop_mV = 0.0;
    std::optional<double> max_psn_mV;
    /// (reference - metric) / reference against the first row.
    double ir_improvement = 0.0;
    std::optional<double> psn_improvement;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
};

double relative_improvement(double reference, double value);

ComparisonReport compare_results(const std::vector<ScenarioResult>& results);

/// Needs at least two configs with identical chip specs.
ComparisonReport compare_configurations(const std::vector<ScenarioConfig>& configs, const SweepOptions& options = {});

// --- calibration -----------------------------------------------------------------------------

/// The parasitics the reference results leave open.
struct CalibrationKnobs {
    double vrm_resistance_mohm = 0.0;
    double vrm_inductance_nH = 0.0;
    double package_inductance_pH_per_sq = 0.0;
    double board_inductance_nH = 0.0;
};

CalibrationKnobs knobs_of(const ScenarioConfig& config);
ScenarioConfig with_knobs(ScenarioConfig config, const CalibrationKnobs& knobs);

struct CalibrationTargets {
    double backside_psn_mV = 82.64;
    double stacked_psn_mV = 58.8;
    double four_vs_one_psn_improvement = 0.2445;
};

struct CalibrationGrid {
    std::vector<double> vrm_resistance_mohm;
    std::vector<double> vrm_inductance_nH;
    std::vector<double> package_inductance_pH_per_sq;
    std::vector<double> board_inductance_nH;
};

struct CalibrationSample {
    CalibrationKnobs knobs;
    double backside_psn_mV = 0.0;
    double stacked_psn_mV = 0.0;
    double four_vs_one_psn_improvement = 0.0;
    /// Sum of squared relative errors against the targets.
    double cost = 0.0;
};

struct CalibrationResult {
    std::vector<CalibrationSample> samples;  // grid order
    std::size_t best = 0;
};

/// The four placements the targets refer to, sharing everything but the
/// placement with base (which keeps its own placement parameters when it is
/// already one of them).
struct CalibrationSet {
    ScenarioConfig one_vrm;
    ScenarioConfig four_vrm;
    ScenarioConfig backside;
    ScenarioConfig stacked;
};

CalibrationSet calibration_set(const ScenarioConfig& base);

/// Evaluates the set at every grid point (grid order: resistance slowest,
/// board inductance fastest).
CalibrationResult calibrate(const CalibrationSet& set, const CalibrationGrid& grid,
                            const CalibrationTargets& targets = {}, const SweepOptions& options = {});

/// Small grid centred on the shipped defaults.
CalibrationGrid default_calibration_grid();

}  // namespace pdn

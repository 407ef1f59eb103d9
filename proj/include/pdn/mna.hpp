#pragma once

// Modified nodal analysis: stamping, DC operating point and fixed-step
// transient integration with companion models.

#include "pdn/netlist.hpp"

#include <Eigen/SparseCore>

#include <stdexcept>
#include <string>
#include <vector>

namespace pdn {

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class AnalysisMode { dc, transient };
enum class Integrator { trapezoidal, backward_euler };

std::string to_string(Integrator method);
Integrator integrator_from_string(const std::string& text);

/// Assembled linear system A x = b.
///
/// Unknowns are the non-ground node voltages followed by one branch current per
/// voltage source and, in DC mode, one per inductor (a 0 V branch). In transient
/// mode inductors and capacitors become companion conductances (L -> dt/L or
/// dt/2L, C -> C/dt or 2C/dt) with zero history in `rhs`. Branch rows are
/// stamped symmetrically, so `matrix` is symmetric.
struct MnaSystem {
    std::size_t dimension = 0;
    Eigen::SparseMatrix<double> matrix;
    Eigen::VectorXd rhs;
    std::vector<int> node_row;     // per NodeId; -1 for ground
    std::vector<int> element_row;  // per element; -1 when it has no branch unknown
    std::vector<std::string> row_names;
};

/// Throws SolverError naming the nodes of any subgraph with no conducting path
/// to ground in the given mode (capacitors conduct only in transient mode).
MnaSystem stamp_mna(const Netlist& netlist, AnalysisMode mode, double dt_s = 0.0,
                    Integrator method = Integrator::trapezoidal);

struct DcSolution {
    std::vector<double> node_voltage;     // per NodeId, ground = 0
    std::vector<double> element_current;  // per element, flowing a -> b
    double max_kcl_residual_a = 0.0;
    double total_load_a = 0.0;
};

/// Throws SolverError naming nodes with no conducting path to ground.
void check_grounded(const Netlist& netlist, AnalysisMode mode);

/// Contracts inductor shorts and pins grounded sources, then solves the SPD
/// remainder by sparse Cholesky; falls back to mna_dc_solve when sources float
/// or shorts form loops.
DcSolution dc_solve(const Netlist& netlist);

/// Direct LU solve of the full MNA system.
DcSolution mna_dc_solve(const Netlist& netlist);

/// Largest |Σ element currents leaving| over non-ground nodes.
double kcl_residual(const Netlist& netlist, const std::vector<double>& element_current);

// --- transient -----------------------------------------------------------------

/// Time-dependent source values; see StimulusSpec for the two step kinds.
struct Stimulus {
    StimulusKind kind = StimulusKind::load_step;
    double v_start = 0.0;
    double v_end = 1.0;
    double rise_time_s = 1e-9;
    double load_start_fraction = 0.0;

    static Stimulus dc() { return {StimulusKind::dc, 0.0, 0.0, 0.0}; }
    static Stimulus supply_step(double v_start, double v_end, double rise_time_s) {
        return {StimulusKind::supply_step, v_start, v_end, rise_time_s};
    }
    static Stimulus load_step(double rise_time_s, double start_fraction = 0.0) {
        return {StimulusKind::load_step, 0.0, 0.0, rise_time_s, start_fraction};
    }

    /// Instantaneous value of a source of the given role and nominal value.
    double source_value(SourceRole role, double nominal, double t) const;
    double ramp(double t) const;

    static Stimulus from_spec(const StimulusSpec& spec) {
        return {spec.kind, spec.v_start_v, spec.v_end_v, spec.rise_time_ns * 1e-9, spec.load_start_fraction};
    }
};

enum class InitialState { automatic, cold, operating_point };

struct TransientOptions {
    double dt_s = 10e-12;
    double t_end_s = 200e-9;
    Integrator method = Integrator::trapezoidal;
    /// automatic: operating point for load_step / dc, cold for supply_step.
    InitialState initial = InitialState::automatic;
    /// Node or probe names recorded as full series.
    std::vector<std::string> probes;
    /// Adds a "chip_min" series: the minimum over the netlist probe set per sample.
    bool record_envelope = true;
    int record_stride = 1;
    double divergence_factor = 10.0;
};

struct TransientWaveform {
    std::vector<double> time_s;
    std::vector<std::string> probe_names;
    std::vector<std::vector<double>> series;
    Integrator method = Integrator::trapezoidal;
    double dt_s = 0.0;
    Stimulus stimulus;
    std::vector<double> final_node_voltage;  // per NodeId at t_end
    std::vector<double> final_element_current;

    const std::vector<double>& probe(const std::string& name) const;
};

TransientWaveform transient_solve(const Netlist& netlist, const Stimulus& stimulus, const TransientOptions& options = {});

/// Copy of the netlist with every source frozen at its value at time t.
Netlist freeze_sources(const Netlist& netlist, const Stimulus& stimulus, double t);

}  // namespace pdn

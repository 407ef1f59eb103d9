#include "oracles.hpp"

#include "pdn/analysis.hpp"
#include "pdn/mna.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace pdn;

namespace {

Label tag(const char* role, int k = 0) { return {Tier::chip, role, k, std::nullopt}; }

double max_abs_error(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
    return worst;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Copy of n keeping only the independent source at `keep` (others zeroed);
// keep = npos keeps none.
Netlist only_source(const Netlist& n, std::size_t keep) {
    Netlist out;
    for (std::size_t k = 1; k < n.node_count(); ++k) out.add_node(n.nodes()[k].name);
    for (std::size_t k = 0; k < n.elements().size(); ++k) {
        Element e = n.elements()[k];
        const bool source = e.kind == ElementKind::voltage_source || e.kind == ElementKind::current_source;
        if (source && k != keep) e.value = 0.0;
        out.add_element(e);
    }
    return out;
}

struct StepCircuit {
    Netlist netlist;
    std::string probe;
};

StepCircuit series_rl(double v, double r, double l) {
    StepCircuit c;
    const NodeId top = c.netlist.add_node("chip/top");
    const NodeId mid = c.netlist.add_node("chip/mid");
    c.netlist.add_voltage_source(top, ground_node, v, tag("v"));
    c.netlist.add_resistor(top, mid, r, tag("r"));
    c.netlist.add_inductor(mid, ground_node, l, tag("l"));
    c.probe = "chip/mid";
    return c;
}

StepCircuit series_rc(double v, double r, double cap) {
    StepCircuit c;
    const NodeId top = c.netlist.add_node("chip/top");
    const NodeId mid = c.netlist.add_node("chip/mid");
    c.netlist.add_voltage_source(top, ground_node, v, tag("v"));
    c.netlist.add_resistor(top, mid, r, tag("r"));
    c.netlist.add_capacitor(mid, ground_node, cap, tag("c"));
    c.probe = "chip/mid";
    return c;
}

StepCircuit series_rlc(double v, double r, double l, double cap) {
    StepCircuit c;
    const NodeId top = c.netlist.add_node("chip/top");
    const NodeId a = c.netlist.add_node("chip/a");
    const NodeId b = c.netlist.add_node("chip/b");
    c.netlist.add_voltage_source(top, ground_node, v, tag("v"));
    c.netlist.add_resistor(top, a, r, tag("r"));
    c.netlist.add_inductor(a, b, l, tag("l"));
    c.netlist.add_capacitor(b, ground_node, cap, tag("c"));
    c.probe = "chip/b";
    return c;
}

TransientWaveform step_response(const StepCircuit& c, double v, double dt, double t_end, Integrator method) {
    TransientOptions o;
    o.dt_s = dt;
    o.t_end_s = t_end;
    o.method = method;
    o.probes = {c.probe};
    o.record_envelope = false;
    // The source reaches its final value after one step.
    return transient_solve(c.netlist, Stimulus::supply_step(0.0, v, dt), o);
}

}  // namespace

TEST_CASE("stamps of single elements") {
    SUBCASE("resistor to ground") {
        Netlist n;
        const NodeId a = n.add_node("chip/a");
        n.add_resistor(a, ground_node, 4.0, tag("r"));
        const MnaSystem s = stamp_mna(n, AnalysisMode::dc);
        REQUIRE(s.dimension == 1);
        CHECK(s.matrix.coeff(0, 0) == doctest::Approx(0.25));
    }
    SUBCASE("voltage source") {
        Netlist n;
        const NodeId a = n.add_node("chip/a");
        n.add_voltage_source(a, ground_node, 1.5, tag("v"));
        const MnaSystem s = stamp_mna(n, AnalysisMode::dc);
        REQUIRE(s.dimension == 2);
        CHECK(s.matrix.coeff(0, 0) == 0.0);
        CHECK(std::abs(s.matrix.coeff(0, 1)) == 1.0);
        CHECK(s.matrix.coeff(0, 1) == s.matrix.coeff(1, 0));
        CHECK(s.rhs(0) == 0.0);
        CHECK(std::abs(s.rhs(1)) == 1.5);
    }
    SUBCASE("capacitor companion under backward Euler") {
        Netlist n;
        const NodeId a = n.add_node("chip/a");
        n.add_capacitor(a, ground_node, 1e-9, tag("c"));
        const MnaSystem be = stamp_mna(n, AnalysisMode::transient, 1e-12, Integrator::backward_euler);
        CHECK(be.matrix.coeff(0, 0) == doctest::Approx(1000.0));
        const MnaSystem tr = stamp_mna(n, AnalysisMode::transient, 1e-12, Integrator::trapezoidal);
        CHECK(tr.matrix.coeff(0, 0) == doctest::Approx(2000.0));
        CHECK_THROWS_AS(stamp_mna(n, AnalysisMode::dc), SolverError);
    }
    SUBCASE("inductor is a branch in DC and a conductance in transient") {
        Netlist n;
        const NodeId a = n.add_node("chip/a");
        n.add_inductor(a, ground_node, 1e-9, tag("l"));
        CHECK(stamp_mna(n, AnalysisMode::dc).dimension == 2);
        const MnaSystem be = stamp_mna(n, AnalysisMode::transient, 1e-12, Integrator::backward_euler);
        REQUIRE(be.dimension == 1);
        CHECK(be.matrix.coeff(0, 0) == doctest::Approx(1e-3));
    }
}

TEST_CASE("Ohm's law: 1 V, 1 mOhm, 100 A") {
    Netlist n;
    const NodeId src = n.add_node("chip/src");
    const NodeId load = n.add_node("chip/load");
    n.add_voltage_source(src, ground_node, 1.0, tag("v"));
    n.add_resistor(src, load, 1e-3, tag("r"));
    n.add_current_source(load, ground_node, 100.0, tag("i"));
    const DcSolution s = dc_solve(n);
    CHECK(s.node_voltage[load.value] == doctest::Approx(0.9));
    CHECK(s.total_load_a == doctest::Approx(100.0));
}

TEST_CASE("dc_solve matches the dense oracle on random netlists") {
    std::mt19937_64 rng(20240611);
    for (int trial = 0; trial < 40; ++trial) {
        const int nodes = 2 + trial % 9;
        const Netlist n = oracle::random_netlist(rng, nodes);
        const auto expected = oracle::dense_dc(n);
        const double scale = std::max(1.0, max_abs(expected));
        const DcSolution fast = dc_solve(n);
        const DcSolution full = mna_dc_solve(n);
        CHECK(max_abs_error(fast.node_voltage, expected) <= 1e-9 * scale);
        CHECK(max_abs_error(full.node_voltage, expected) <= 1e-9 * scale);
        CHECK(kcl_residual(n, fast.element_current) <= 1e-9 * std::max(1.0, fast.total_load_a));
        CHECK(max_abs_error(fast.element_current, full.element_current) <= 1e-8 * std::max(1.0, max_abs(full.element_current)));
    }
}

TEST_CASE("superposition over independent sources") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const Netlist n = oracle::random_netlist(rng, 8);
        const auto total = dc_solve(n).node_voltage;
        std::vector<double> sum(total.size(), 0.0);
        for (std::size_t k = 0; k < n.elements().size(); ++k) {
            const auto kind = n.elements()[k].kind;
            if (kind != ElementKind::voltage_source && kind != ElementKind::current_source) continue;
            const auto part = dc_solve(only_source(n, k)).node_voltage;
            for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += part[i];
        }
        CHECK(max_abs_error(total, sum) <= 1e-9 * std::max(1.0, max_abs(total)));
    }
}

TEST_CASE("a subgraph with no DC path to ground is named") {
    Netlist n;
    const NodeId a = n.add_node("chip/a");
    const NodeId b = n.add_node("chip/lonely");
    n.add_resistor(a, ground_node, 1.0, tag("r"));
    n.add_capacitor(b, ground_node, 1e-9, tag("c"));
    try {
        dc_solve(n);
        FAIL("expected SolverError");
    } catch (const SolverError& e) {
        CHECK(std::string(e.what()).find("lonely") != std::string::npos);
    }
    // A capacitor conducts in transient mode.
    CHECK_NOTHROW(stamp_mna(n, AnalysisMode::transient, 1e-12));
}

TEST_CASE("series R-L step matches (V/R)(1 - exp(-t/tau))") {
    const double v = 1.0, r = 2.0, l = 1e-9;
    const double tau = l / r;
    for (auto method : {Integrator::trapezoidal, Integrator::backward_euler}) {
        const auto w = step_response(series_rl(v, r, l), v, tau / 1000.0, 5.0 * tau, method);
        const auto& mid = w.probe("chip/mid");
        double worst = 0.0;
        for (std::size_t k = 1; k < w.time_s.size(); ++k) {
            const double current = (v - mid[k]) / r;
            worst = std::max(worst, std::abs(current - oracle::rl_current(v, r, l, w.time_s[k])) / (v / r));
        }
        CHECK(worst < 0.005);
    }
}

TEST_CASE("series R-C step matches V(1 - exp(-t/RC))") {
    const double v = 1.0, r = 50.0, c = 2e-12;
    const double tau = r * c;
    for (auto method : {Integrator::trapezoidal, Integrator::backward_euler}) {
        const auto w = step_response(series_rc(v, r, c), v, tau / 1000.0, 5.0 * tau, method);
        const auto& mid = w.probe("chip/mid");
        double worst = 0.0;
        for (std::size_t k = 1; k < w.time_s.size(); ++k) {
            worst = std::max(worst, std::abs(mid[k] - oracle::rc_voltage(v, r, c, w.time_s[k])) / v);
        }
        CHECK(worst < 0.005);
    }
}

TEST_CASE("underdamped series R-L-C step") {
    const double v = 1.0, r = 0.5, l = 1e-9, c = 1e-9;  // Q = 2
    const double period = 2.0 * std::numbers::pi * std::sqrt(l * c);
    const auto w = step_response(series_rlc(v, r, l, c), v, period / 2000.0, 5.0 * period, Integrator::trapezoidal);
    const auto& b = w.probe("chip/b");
    double worst = 0.0;
    double peak = 0.0;
    for (std::size_t k = 1; k < w.time_s.size(); ++k) {
        worst = std::max(worst, std::abs(b[k] - oracle::rlc_voltage(v, r, l, c, w.time_s[k])) / v);
        peak = std::max(peak, b[k]);
    }
    CHECK(worst < 0.01);
    CHECK(peak > 1.3 * v);  // it really rings
}

TEST_CASE("backward Euler and trapezoidal agree within 1% at dt = tau / 100") {
    const double v = 1.0, r = 10.0, c = 1e-12;
    const double tau = r * c;
    const auto tr = step_response(series_rc(v, r, c), v, tau / 100.0, 5.0 * tau, Integrator::trapezoidal);
    const auto be = step_response(series_rc(v, r, c), v, tau / 100.0, 5.0 * tau, Integrator::backward_euler);
    REQUIRE(tr.time_s.size() == be.time_s.size());
    CHECK(max_abs_error(tr.probe("chip/mid"), be.probe("chip/mid")) < 0.01 * v);
}

TEST_CASE("waveform bookkeeping") {
    const auto w = step_response(series_rc(1.0, 1.0, 1e-12), 1.0, 1e-14, 1e-12, Integrator::trapezoidal);
    CHECK(w.time_s.size() == 101);
    CHECK(std::adjacent_find(w.time_s.begin(), w.time_s.end(), std::greater_equal<>()) == w.time_s.end());
    for (const auto& s : w.series) CHECK(s.size() == w.time_s.size());
    CHECK_THROWS_AS(w.probe("chip/nope"), std::out_of_range);
}

TEST_CASE("transient settles to the DC operating point") {
    Netlist n;
    const NodeId src = n.add_node("chip/src");
    const NodeId mid = n.add_node("chip/mid");
    const NodeId load = n.add_node("chip/load");
    n.add_voltage_source(src, ground_node, 1.0, tag("v"), SourceRole::supply);
    n.add_resistor(src, mid, 1e-3, tag("r"));
    n.add_inductor(mid, load, 1e-12, tag("l"));
    n.add_capacitor(load, ground_node, 1e-9, tag("c"));
    n.add_resistor(load, ground_node, 1.0, tag("r", 1));
    n.add_current_source(load, ground_node, 10.0, tag("i"), SourceRole::load);
    const double expected = dc_solve(n).node_voltage[load.value];
    TransientOptions o;
    o.dt_s = 1e-12;
    o.t_end_s = 20e-9;
    o.probes = {"chip/load"};
    o.record_envelope = false;
    for (auto stimulus : {Stimulus::load_step(1e-10), Stimulus::load_step(1e-10, 0.4), Stimulus::supply_step(0.0, 1.0, 1e-10)}) {
        const auto w = transient_solve(n, stimulus, o);
        CHECK(w.probe("chip/load").back() == doctest::Approx(expected).epsilon(1e-6));
        CHECK(w.final_node_voltage[load.value] == doctest::Approx(expected).epsilon(1e-6));
    }
    // Warm start begins at the operating point of the starting load.
    const auto w = transient_solve(n, Stimulus::load_step(1e-10, 0.4), o);
    Netlist start = freeze_sources(n, Stimulus::load_step(1e-10, 0.4), 0.0);
    CHECK(w.probe("chip/load").front() == doctest::Approx(dc_solve(start).node_voltage[load.value]).epsilon(1e-12));
}

TEST_CASE("load step source values") {
    const Stimulus s = Stimulus::load_step(1e-9, 0.25);
    CHECK(s.source_value(SourceRole::load, 8.0, 0.0) == doctest::Approx(2.0));
    CHECK(s.source_value(SourceRole::load, 8.0, 0.5e-9) == doctest::Approx(5.0));
    CHECK(s.source_value(SourceRole::load, 8.0, 2e-9) == doctest::Approx(8.0));
    CHECK(s.source_value(SourceRole::supply, 1.0, 0.0) == 1.0);
    const Stimulus up = Stimulus::supply_step(0.0, 1.0, 1e-9);
    CHECK(up.source_value(SourceRole::supply, 1.0, 0.25e-9) == doctest::Approx(0.25));
    CHECK(up.source_value(SourceRole::load, 3.0, 0.0) == 3.0);
}

TEST_CASE("divergence guard names the method and step") {
    const auto c = series_rlc(1.0, 0.01, 1e-9, 1e-9);
    TransientOptions o;
    o.dt_s = 1e-11;
    o.t_end_s = 1e-9;
    o.probes = {c.probe};
    o.divergence_factor = 0.5;
    try {
        transient_solve(c.netlist, Stimulus::supply_step(0.0, 1.0, 1e-11), o);
        FAIL("expected SolverError");
    } catch (const SolverError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("trapezoidal") != std::string::npos);
        CHECK(msg.find("dt") != std::string::npos);
    }
}

TEST_CASE("bad transient options") {
    const auto c = series_rc(1.0, 1.0, 1e-12);
    TransientOptions o;
    o.dt_s = 0.0;
    CHECK_THROWS_AS(transient_solve(c.netlist, Stimulus::supply_step(0.0, 1.0, 1e-12), o), SolverError);
    o.dt_s = 1e-13;
    CHECK_THROWS_AS(transient_solve(c.netlist, Stimulus::supply_step(0.0, 1.0, 0.0), o), SolverError);
}

TEST_CASE("DC linearity: scaling loads scales every drop") {
    ScenarioConfig c = chip_on_vrm_config();
    c.chip.tile_count_x = c.chip.tile_count_y = 6;
    const ScenarioConfig base = validate_config(c);
    const Netlist n = assemble_netlist(base);
    const auto v1 = dc_solve(n).node_voltage;
    for (double k : {0.5, 2.0, 3.0}) {
        ScenarioConfig scaled = c;
        scaled.chip.total_power_w *= k;
        const Netlist m = assemble_netlist(validate_config(scaled));
        const auto vk = dc_solve(m).node_voltage;
        for (std::size_t i = 1; i < n.node_count(); ++i) {
            const double d1 = 1.0 - v1[i];
            const double dk = 1.0 - vk[i];
            CHECK(dk == doctest::Approx(k * d1).epsilon(1e-9).scale(1e-6));
        }
    }
}

TEST_CASE("uniform load on the stacked die gives a mirror-symmetric map") {
    ScenarioConfig c = chip_on_vrm_config();
    c.power_map_spec.kind = PowerMapKind::uniform;
    const ScenarioConfig v = validate_config(c);
    const Netlist n = assemble_netlist(v);
    const IrDropMap m = ir_drop_map(dc_solve(n), n, v);
    double worst = 0.0;
    for (int j = 0; j < m.ny; ++j) {
        for (int i = 0; i < m.nx; ++i) {
            worst = std::max(worst, std::abs(m.at(i, j) - m.at(m.nx - 1 - i, j)));
            worst = std::max(worst, std::abs(m.at(i, j) - m.at(i, m.ny - 1 - j)));
        }
    }
    CHECK(worst * 1e-3 < 1e-6);  // volts
}

TEST_CASE("full-scale benchmark DC solve: KCL and passivity") {
    for (const auto& config : benchmark_configs()) {
        const ScenarioConfig v = validate_config(config);
        const Netlist n = assemble_netlist(v);
        const DcSolution s = dc_solve(n);
        CHECK(s.total_load_a == doctest::Approx(100.0));
        CHECK(s.max_kcl_residual_a <= 1e-9 * s.total_load_a);
        const IrDropMap m = ir_drop_map(s, n, v);
        for (double volt : m.voltage_v) {
            CHECK(volt >= 0.0);
            CHECK(volt <= v.vrm.output_voltage_v);
        }
    }
}

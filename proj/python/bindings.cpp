#include "pdn/analysis.hpp"
#include "pdn/io.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace pdn;

namespace {

ScenarioConfig preset(const std::string& name) {
    if (name.empty() || name == "default") return default_config();
    for (const auto& c : benchmark_configs()) {
        if (c.label == name) return c;
    }
    throw std::invalid_argument("unknown preset '" + name + "'");
}

py::array_t<double> grid(const std::vector<double>& values, int nx, int ny) {
    py::array_t<double> out({ny, nx});
    std::copy(values.begin(), values.end(), out.mutable_data());
    return out;
}

py::dict ir_dict(const IrDropMap& m) {
    py::dict d;
    d["max_mV"] = m.max_mV;
    d["mean_mV"] = m.mean_mV;
    d["argmax"] = py::make_tuple(m.argmax.i, m.argmax.j);
    d["drop_mV"] = grid(m.drop_mV, m.nx, m.ny);  // indexed [j, i]
    return d;
}

py::dict psn_dict(const PsnMetrics& m) {
    py::dict d;
    d["max_psn_mV"] = m.max_psn_mV;
    d["max_psn_time_s"] = m.max_psn_time_s;
    d["first_droop_mV"] = m.first_droop_mV ? py::cast(*m.first_droop_mV) : py::none();
    d["first_droop_time_s"] = m.first_droop_time_s ? py::cast(*m.first_droop_time_s) : py::none();
    d["settling_mV"] = m.settling_mV;
    return d;
}

TransientOptions transient_options(double dt, double t_end, const std::string& method) {
    TransientOptions o;
    o.dt_s = dt;
    o.t_end_s = t_end;
    o.method = integrator_from_string(method);
    return o;
}

py::dict dc(const std::string& config_json) {
    EvaluationOptions o;
    o.run_transient = false;
    ScenarioResult r;
    {
        py::gil_scoped_release release;
        r = evaluate_scenario(config_from_json(config_json), o);
    }
    py::dict d = ir_dict(r.ir);
    d["label"] = r.label;
    d["config_hash"] = hash_hex(r.config_hash);
    return d;
}

py::dict transient(const std::string& config_json, double dt, double t_end, const std::string& method,
                   const std::vector<std::string>& probes, int stride) {
    const ScenarioConfig c = validate_config(config_from_json(config_json));
    TransientOptions o = transient_options(dt, t_end, method);
    o.probes = probes;
    o.record_stride = stride;
    TransientWaveform w;
    PsnMetrics m;
    {
        py::gil_scoped_release release;
        w = transient_solve(assemble_netlist(c), Stimulus::from_spec(c.stimulus), o);
        m = extract_psn(w.time_s, {w.probe("chip_min")}, c.chip.supply_voltage_v,
                        c.stimulus.kind == StimulusKind::dc ? 0.0 : w.stimulus.rise_time_s);
    }
    py::dict series;
    for (std::size_t k = 0; k < w.probe_names.size(); ++k) series[py::str(w.probe_names[k])] = py::array(py::cast(w.series[k]));
    py::dict d = psn_dict(m);
    d["time_s"] = py::array(py::cast(w.time_s));
    d["series"] = series;
    return d;
}

py::list sweep(const std::string& config_json, const std::string& axis, std::vector<double> values, bool dc_only,
               double dt, double t_end, unsigned workers) {
    SweepOptions o;
    o.workers = workers;
    o.evaluation.run_transient = !dc_only;
    o.evaluation.transient = transient_options(dt, t_end, "trap");
    SweepResult r;
    {
        py::gil_scoped_release release;
        r = run_sweep(config_from_json(config_json), sweep_axis_from_string(axis), std::move(values), o);
    }
    py::list out;
    for (const auto& p : r.points) {
        py::dict d;
        d["axis_value"] = p.axis_value;
        d["ok"] = p.ok;
        d["max_ir_drop_mV"] = p.ok ? py::cast(p.max_ir_drop_mV) : py::none();
        d["max_psn_mV"] = p.max_psn_mV ? py::cast(*p.max_psn_mV) : py::none();
        d["error"] = p.error;
        out.append(d);
    }
    return out;
}

py::list compare(const std::vector<std::string>& configs_json, bool dc_only, double dt, double t_end) {
    std::vector<ScenarioConfig> configs;
    for (const auto& text : configs_json) configs.push_back(config_from_json(text));
    SweepOptions o;
    o.evaluation.run_transient = !dc_only;
    o.evaluation.transient = transient_options(dt, t_end, "trap");
    ComparisonReport report;
    {
        py::gil_scoped_release release;
        report = compare_configurations(configs, o);
    }
    py::list out;
    for (const auto& r : report.rows) {
        py::dict d;
        d["label"] = r.label;
        d["max_ir_drop_mV"] = r.max_ir_drop_mV;
        d["max_psn_mV"] = r.max_psn_mV ? py::cast(*r.max_psn_mV) : py::none();
        d["ir_improvement"] = r.ir_improvement;
        d["psn_improvement"] = r.psn_improvement ? py::cast(*r.psn_improvement) : py::none();
        out.append(d);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Power delivery network simulator: IR drop and supply noise of regulator placements.";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
    py::register_exception<AnalysisError>(m, "AnalysisError", PyExc_RuntimeError);
    py::register_exception<NetlistError>(m, "NetlistError", PyExc_RuntimeError);

    m.def("presets", [] {
        std::vector<std::string> names{"default"};
        for (const auto& c : benchmark_configs()) names.push_back(c.label);
        return names;
    });
    m.def("default_config", [](const std::string& name) { return config_to_json(preset(name)); },
          py::arg("preset") = "default", "Scenario JSON of a built-in preset.");
    m.def("validate",
          [](const std::string& config_json) {
              std::vector<std::pair<std::string, std::string>> out;
              for (const auto& v : check_config(config_from_json(config_json))) out.emplace_back(v.field, v.constraint);
              return out;
          },
          py::arg("config"), "List of (field, constraint) violations; empty when valid.");
    m.def("config_hash", [](const std::string& config_json) { return hash_hex(config_hash(config_from_json(config_json))); },
          py::arg("config"));
    m.def("netlist", [](const std::string& config_json) {
        return netlist_to_text(assemble_netlist(validate_config(config_from_json(config_json))));
    }, py::arg("config"));
    m.def("dc", &dc, py::arg("config"), "DC IR-drop map; drop_mV is indexed [j, i].");
    m.def("transient", &transient, py::arg("config"), py::arg("dt") = 10e-12, py::arg("t_end") = 200e-9,
          py::arg("method") = "trap", py::arg("probes") = std::vector<std::string>{}, py::arg("stride") = 1,
          "Transient run with supply-noise metrics; series always holds chip_min.");
    m.def("sweep", &sweep, py::arg("config"), py::arg("axis"), py::arg("values"), py::arg("dc_only") = false,
          py::arg("dt") = 10e-12, py::arg("t_end") = 200e-9, py::arg("workers") = 0);
    m.def("compare", &compare, py::arg("configs"), py::arg("dc_only") = false, py::arg("dt") = 10e-12,
          py::arg("t_end") = 200e-9);
}

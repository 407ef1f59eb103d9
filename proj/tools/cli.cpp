#include "cli.hpp"

#include "pdn/analysis.hpp"
#include "pdn/io.hpp"
#include "pdn/netlist.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#ifndef PDN_VERSION
#define PDN_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;

namespace pdn {

double parse_time(const std::string& text) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw CLI::ValidationError("time", "not a number: '" + text + "'");
    }
    std::string unit = text.substr(used);
    if (!unit.empty() && unit.back() == 's') unit.pop_back();
    double scale = 1.0;
    if (unit == "f") {
        scale = 1e-15;
    } else if (unit == "p") {
        scale = 1e-12;
    } else if (unit == "n") {
        scale = 1e-9;
    } else if (unit == "u") {
        scale = 1e-6;
    } else if (unit == "m") {
        scale = 1e-3;
    } else if (!unit.empty()) {
        throw CLI::ValidationError("time", "unknown unit in '" + text + "'");
    }
    return value * scale;
}

namespace {

struct Options {
    std::vector<std::string> configs;
    std::string out_dir = ".";
    std::string out;
    std::string preset;
    std::string dt = "10p";
    std::string t_end = "200n";
    std::string method = "trap";
    std::string power_map;
    std::string axis;
    std::string values;
    std::vector<std::string> probes;
    int stride = 1;
    unsigned workers = 0;
    bool dc_only = false;
    long seed = 0;  // accepted for script compatibility; every solve is deterministic
};

ScenarioConfig preset_config(const std::string& name) {
    if (name.empty() || name == "default") return default_config();
    for (const auto& c : benchmark_configs()) {
        if (c.label == name) return c;
    }
    throw CLI::ValidationError("--preset", "unknown preset '" + name + "'");
}

ScenarioConfig resolve(const Options& o, const std::string& path) {
    ScenarioConfig c = path.empty() ? preset_config(o.preset) : load_config(path);
    if (!o.power_map.empty()) c.power_map_spec.kind = power_map_kind_from_string(o.power_map);
    return c;
}

ScenarioConfig single_config(const Options& o) {
    if (o.configs.size() > 1) throw CLI::ValidationError("--config", "this command takes one config");
    return resolve(o, o.configs.empty() ? std::string{} : o.configs.front());
}

TransientOptions transient_options(const Options& o) {
    TransientOptions t;
    t.dt_s = parse_time(o.dt);
    t.t_end_s = parse_time(o.t_end);
    t.method = integrator_from_string(o.method);
    t.record_stride = o.stride;
    return t;
}

EvaluationOptions evaluation_options(const Options& o) {
    EvaluationOptions e;
    e.run_transient = !o.dc_only;
    e.transient = transient_options(o);
    return e;
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw CLI::ValidationError("--values", "not a number: '" + item + "'");
        }
    }
    if (values.empty()) throw CLI::ValidationError("--values", "empty list");
    return values;
}

class Run {
public:
    Run(std::string command, const std::vector<std::string>& args, const Options& o)
        : started_(std::chrono::steady_clock::now()), out_dir_(o.out_dir) {
        manifest_.command = std::move(command);
        for (std::size_t k = 0; k < args.size(); ++k) manifest_.arguments += (k ? " " : "") + args[k];
        manifest_.config_paths = o.configs;
        manifest_.tool_version = PDN_VERSION;
    }

    void snapshot(const ScenarioConfig& config) { manifest_.resolved_config_json += config_to_json(config); }

    fs::path emit(const std::string& name, const std::string& text) {
        const fs::path path = out_dir_ / name;
        write_text_file(path, text);
        manifest_.outputs.push_back(path.string());
        return path;
    }

    void finish() {
        manifest_.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
        const fs::path path = out_dir_ / "manifest.txt";
        write_text_file(path, format_manifest(manifest_));
        std::cout << "manifest: " << path.string() << '\n';
    }

private:
    std::chrono::steady_clock::time_point started_;
    fs::path out_dir_;
    RunManifest manifest_;
};

template <typename Write>
std::string to_text(Write write) {
    std::ostringstream os;
    write(os);
    return os.str();
}

std::string mv(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f mV", value);
    return buf;
}

int cmd_default_config(const Options& o) {
    const std::string text = config_to_json(preset_config(o.preset));
    if (o.out.empty() || o.out == "-") {
        std::cout << text;
    } else {
        write_text_file(o.out, text);
    }
    return kExitOk;
}

int cmd_validate(const Options& o) {
    const ScenarioConfig c = single_config(o);
    const auto violations = check_config(c);
    if (violations.empty()) {
        std::cout << "ok: " << c.label << " (" << hash_hex(config_hash(c)) << ")\n";
        return kExitOk;
    }
    for (const auto& v : violations) std::cerr << v.field << ": " << v.constraint << '\n';
    return kExitValidation;
}

int cmd_netlist(const Options& o) {
    const Netlist n = assemble_netlist(validate_config(single_config(o)));
    const std::string text = netlist_to_text(n);
    if (o.out == "-") {
        std::cout << text;
    } else {
        const fs::path path = o.out.empty() ? fs::path(o.out_dir) / "netlist.txt" : fs::path(o.out);
        write_text_file(path, text);
        std::cout << "netlist: " << path.string() << " (" << n.node_count() - 1 << " nodes, "
                  << n.elements().size() << " elements)\n";
    }
    return kExitOk;
}

int cmd_dc(const Options& o, const std::vector<std::string>& args) {
    Run run("dc", args, o);
    const ScenarioConfig c = single_config(o);
    EvaluationOptions e;
    e.run_transient = false;
    const ScenarioResult r = evaluate_scenario(c, e);
    run.snapshot(c);
    run.emit("ir_map.csv", to_text([&](std::ostream& os) { write_ir_map_csv(os, r.ir, c.chip); }));
    HeatmapStyle style;
    style.title = "IR drop: " + c.label;
    run.emit("ir_map.svg", render_heatmap_svg(r.ir, style));
    run.finish();
    std::cout << c.label << ": max IR drop " << mv(r.ir.max_mV) << " at tile (" << r.ir.argmax.i << ','
              << r.ir.argmax.j << "), mean " << mv(r.ir.mean_mV) << '\n';
    return kExitOk;
}

int cmd_tran(const Options& o, const std::vector<std::string>& args) {
    Run run("tran", args, o);
    const ScenarioConfig c = validate_config(single_config(o));
    const Netlist n = assemble_netlist(c);
    TransientOptions t = transient_options(o);
    t.probes = o.probes;
    const TransientWaveform w = transient_solve(n, Stimulus::from_spec(c.stimulus), t);
    run.snapshot(c);
    run.emit("waveform.csv", to_text([&](std::ostream& os) { write_waveform_csv(os, w); }));
    run.finish();
    const PsnMetrics m = extract_psn(w.time_s, {w.probe("chip_min")}, c.chip.supply_voltage_v,
                                     c.stimulus.kind == StimulusKind::dc ? 0.0 : c.stimulus.rise_time_ns * 1e-9);
    std::cout << c.label << ": max PSN " << mv(m.max_psn_mV) << " at " << m.max_psn_time_s * 1e9 << " ns";
    if (m.first_droop_mV) std::cout << ", first droop " << mv(*m.first_droop_mV);
    std::cout << ", settled " << mv(m.settling_mV) << '\n';
    return kExitOk;
}

int cmd_sweep(const Options& o, const std::vector<std::string>& args) {
    Run run("sweep", args, o);
    const ScenarioConfig c = single_config(o);
    SweepOptions s;
    s.evaluation = evaluation_options(o);
    s.workers = o.workers;
    SweepResult r;
    try {
        r = run_sweep(c, sweep_axis_from_string(o.axis), parse_values(o.values), s);
    } catch (const AnalysisError& e) {
        // Per-point solver failures are recorded, so this is a bad axis or value list.
        throw CLI::ValidationError("--axis/--values", e.what());
    }
    run.snapshot(c);
    run.emit("sweep.csv", to_text([&](std::ostream& os) { write_sweep_csv(os, r); }));
    run.finish();
    for (const auto& p : r.points) {
        std::cout << to_string(r.axis) << '=' << p.axis_value << ": ";
        if (!p.ok) {
            std::cout << "failed: " << p.error << '\n';
            continue;
        }
        std::cout << "max IR " << mv(p.max_ir_drop_mV);
        if (p.max_psn_mV) std::cout << ", max PSN " << mv(*p.max_psn_mV);
        std::cout << '\n';
    }
    return r.failures().empty() ? kExitOk : kExitSolver;
}

int cmd_compare(const Options& o, const std::vector<std::string>& args) {
    Run run("compare", args, o);
    std::vector<ScenarioConfig> configs;
    if (o.configs.empty()) {
        for (auto c : benchmark_configs()) {
            if (!o.power_map.empty()) c.power_map_spec.kind = power_map_kind_from_string(o.power_map);
            configs.push_back(std::move(c));
        }
    } else {
        for (const auto& path : o.configs) configs.push_back(resolve(o, path));
    }
    SweepOptions s;
    s.evaluation = evaluation_options(o);
    s.workers = o.workers;
    const ComparisonReport report = compare_configurations(configs, s);
    for (const auto& c : configs) run.snapshot(c);
    run.emit("comparison.csv", to_text([&](std::ostream& os) { write_comparison_csv(os, report); }));
    run.finish();
    std::cout << format_comparison_table(report);
    return kExitOk;
}

int cmd_calibrate(const Options& o, const std::vector<std::string>& args) {
    Run run("calibrate", args, o);
    const ScenarioConfig base = single_config(o);
    SweepOptions s;
    s.evaluation = evaluation_options(o);
    s.evaluation.run_transient = true;
    s.workers = o.workers;
    const CalibrationResult r = calibrate(calibration_set(base), default_calibration_grid(), {}, s);
    run.snapshot(base);
    run.emit("calibration.csv", to_text([&](std::ostream& os) {
        os << "vrm_resistance_mohm,vrm_inductance_nh,package_inductance_ph_per_sq,board_inductance_nh,"
              "backside_psn_mv,stacked_psn_mv,four_vs_one_psn_improvement,cost\n";
        for (const auto& p : r.samples) {
            os << format_double(p.knobs.vrm_resistance_mohm) << ',' << format_double(p.knobs.vrm_inductance_nH)
               << ',' << format_double(p.knobs.package_inductance_pH_per_sq) << ','
               << format_double(p.knobs.board_inductance_nH) << ',' << format_double(p.backside_psn_mV) << ','
               << format_double(p.stacked_psn_mV) << ',' << format_double(p.four_vs_one_psn_improvement) << ','
               << format_double(p.cost) << '\n';
        }
    }));
    const auto& best = r.samples[r.best];
    run.emit("calibrated.json", config_to_json(with_knobs(base, best.knobs)));
    run.finish();
    std::cout << "best: vrm " << best.knobs.vrm_resistance_mohm << " mOhm / " << best.knobs.vrm_inductance_nH
              << " nH, package " << best.knobs.package_inductance_pH_per_sq << " pH/sq, board "
              << best.knobs.board_inductance_nH << " nH (cost " << best.cost << ")\n";
    return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
    CLI::App app{"pdnsim: power delivery network IR-drop and supply-noise simulator", "pdnsim"};
    app.set_version_flag("--version", PDN_VERSION);
    app.require_subcommand(1);
    Options o;

    auto add_config = [&](CLI::App* sub, bool many = false) {
        auto* opt = sub->add_option("--config", o.configs, "scenario JSON file or run manifest");
        if (!many) opt->expected(0, 1);
        sub->add_option("--preset", o.preset, "built-in scenario when no --config is given")
            ->check(CLI::IsMember({"default", "on_package_1vrm", "on_package_2vrm", "on_package_4vrm",
                                   "backside_package", "chip_on_vrm_3d"}));
        sub->add_option("--power-map", o.power_map, "override the power map kind")
            ->check(CLI::IsMember({"uniform", "hotspot"}));
        sub->add_option("--seed", o.seed, "accepted and ignored; results are deterministic");
    };
    auto add_out_dir = [&](CLI::App* sub) { sub->add_option("--out-dir", o.out_dir, "output directory"); };
    auto add_transient = [&](CLI::App* sub) {
        sub->add_option("--dt", o.dt, "time step, e.g. 10p");
        sub->add_option("--t-end", o.t_end, "simulated time, e.g. 200n");
        sub->add_option("--method", o.method, "integrator")->check(CLI::IsMember({"trap", "be"}));
        sub->add_option("--workers", o.workers, "worker threads (0: all cores)");
    };

    auto* def = app.add_subcommand("default-config", "print the default scenario as JSON");
    def->add_option("--preset", o.preset, "built-in scenario")
        ->check(CLI::IsMember({"default", "on_package_1vrm", "on_package_2vrm", "on_package_4vrm",
                               "backside_package", "chip_on_vrm_3d"}));
    def->add_option("--out", o.out, "output file (default stdout)");

    auto* val = app.add_subcommand("validate", "check a scenario file");
    add_config(val);

    auto* net = app.add_subcommand("netlist", "export the assembled netlist as text");
    add_config(net);
    add_out_dir(net);
    net->add_option("--out", o.out, "output file, '-' for stdout");

    auto* dc = app.add_subcommand("dc", "DC IR-drop map (CSV and SVG heatmap)");
    add_config(dc);
    add_out_dir(dc);

    auto* tran = app.add_subcommand("tran", "transient waveform CSV");
    add_config(tran);
    add_out_dir(tran);
    add_transient(tran);
    tran->add_option("--probe", o.probes, "extra node to record, e.g. chip/node[25,25]");
    tran->add_option("--stride", o.stride, "record every n-th step")->check(CLI::PositiveNumber);

    auto* sweep = app.add_subcommand("sweep", "sweep one parameter");
    add_config(sweep);
    add_out_dir(sweep);
    add_transient(sweep);
    sweep->add_option("--axis", o.axis, "swept parameter")
        ->required()
        ->check(CLI::IsMember({"vrm_count", "vrm_gap", "onchip_decap", "power_scale"}));
    sweep->add_option("--values", o.values, "comma-separated axis values")->required();
    sweep->add_flag("--dc-only", o.dc_only, "skip the transient");

    auto* cmp = app.add_subcommand("compare", "compare configurations (default: the five benchmarks)");
    add_config(cmp, true);
    add_out_dir(cmp);
    add_transient(cmp);
    cmp->add_flag("--dc-only", o.dc_only, "skip the transient");

    auto* cal = app.add_subcommand("calibrate", "grid search over the open parasitics");
    add_config(cal);
    add_out_dir(cal);
    add_transient(cal);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return kExitUsage;
    }

    try {
        if (*def) return cmd_default_config(o);
        if (*val) return cmd_validate(o);
        if (*net) return cmd_netlist(o);
        if (*dc) return cmd_dc(o, args);
        if (*tran) return cmd_tran(o, args);
        if (*sweep) return cmd_sweep(o, args);
        if (*cmp) return cmd_compare(o, args);
        if (*cal) return cmd_calibrate(o, args);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "invalid config:\n" << e.what() << '\n';
        return kExitValidation;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSolver;
    }
    return kExitUsage;
}

}  // namespace pdn

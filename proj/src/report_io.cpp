#include "pdn/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace pdn {

std::string format_double(double value) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return {buf, end};
}

void write_ir_map_csv(std::ostream& os, const IrDropMap& map, const ChipSpec& chip) {
    os << "i,j,x_mm,y_mm,voltage_v,ir_drop_mv\n";
    for (int j = 0; j < map.ny; ++j) {
        for (int i = 0; i < map.nx; ++i) {
            const std::size_t k = static_cast<std::size_t>(j) * map.nx + i;
            os << i << ',' << j << ',' << format_double((i + 0.5) * chip.tile_width_mm()) << ','
               << format_double((j + 0.5) * chip.tile_height_mm()) << ',' << format_double(map.voltage_v[k]) << ','
               << format_double(map.drop_mV[k]) << '\n';
        }
    }
}

void write_waveform_csv(std::ostream& os, const TransientWaveform& waveform) {
    os << "time_s";
    for (const auto& name : waveform.probe_names) os << ',' << name;
    os << '\n';
    for (std::size_t k = 0; k < waveform.time_s.size(); ++k) {
        os << format_double(waveform.time_s[k]);
        for (const auto& s : waveform.series) os << ',' << format_double(s[k]);
        os << '\n';
    }
}

void write_sweep_csv(std::ostream& os, const SweepResult& result) {
    os << "axis_value,max_ir_drop_mv,max_psn_mv,config_hash\n";
    for (const auto& p : result.points) {
        os << format_double(p.axis_value) << ',';
        if (p.ok) {
            os << format_double(p.max_ir_drop_mV) << ',' << (p.max_psn_mV ? format_double(*p.max_psn_mV) : "");
        } else {
            os << ',';
        }
        os << ',' << hash_hex(p.config_hash) << '\n';
    }
}

void write_comparison_csv(std::ostream& os, const ComparisonReport& report) {
    os << "label,max_ir_drop_mv,max_psn_mv,ir_improvement,psn_improvement\n";
    for (const auto& r : report.rows) {
        os << r.label << ',' << format_double(r.max_ir_drop_mV) << ','
           << (r.max_psn_mV ? format_double(*r.max_psn_mV) : "") << ',' << format_double(r.ir_improvement) << ','
           << (r.psn_improvement ? format_double(*r.psn_improvement) : "") << '\n';
    }
}

std::string format_comparison_table(const ComparisonReport& report) {
    std::size_t width = 6;
    for (const auto& r : report.rows) width = std::max(width, r.label.size());
    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(width)) << "config" << std::right << std::setw(14) << "max IR (mV)"
       << std::setw(14) << "max PSN (mV)" << std::setw(12) << "IR gain" << std::setw(12) << "PSN gain" << '\n';
    os << std::fixed;
    for (const auto& r : report.rows) {
        os << std::left << std::setw(static_cast<int>(width)) << r.label << std::right << std::setprecision(3)
           << std::setw(14) << r.max_ir_drop_mV;
        if (r.max_psn_mV) {
            os << std::setw(14) << *r.max_psn_mV;
        } else {
            os << std::setw(14) << "-";
        }
        os << std::setprecision(2) << std::setw(11) << r.ir_improvement * 100.0 << '%';
        if (r.psn_improvement) {
            os << std::setw(11) << *r.psn_improvement * 100.0 << '%';
        } else {
            os << std::setw(12) << "-";
        }
        os << '\n';
    }
    return os.str();
}

namespace {

std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return std::string(buf) == "-0" ? "0" : buf;
}

std::string ramp_color(double t) {
    // Linear blend from a cool blue to a warm red.
    constexpr int lo[3] = {49, 54, 149};
    constexpr int hi[3] = {215, 48, 39};
    char buf[8];
    int rgb[3];
    for (int c = 0; c < 3; ++c) rgb[c] = static_cast<int>(std::lround(lo[c] + (hi[c] - lo[c]) * t));
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

}  // namespace

std::string render_heatmap_svg(const IrDropMap& map, const HeatmapStyle& style) {
    if (map.nx <= 0 || map.ny <= 0 || map.drop_mV.empty()) throw IoError("heatmap: empty map");
    const auto [lo_it, hi_it] = std::minmax_element(map.drop_mV.begin(), map.drop_mV.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const int cell = style.cell_px;
    const int margin = 10;
    const int title_h = 24;
    const int legend_h = 40;
    const int grid_w = map.nx * cell;
    const int grid_h = map.ny * cell;
    const int width = std::max(grid_w, 200) + 2 * margin;
    const int height = title_h + grid_h + legend_h + 2 * margin;

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"#ffffff\"/>\n";
    os << "<text x=\"" << margin << "\" y=\"" << margin + 14 << "\" font-family=\"sans-serif\" font-size=\"14\">"
       << style.title << "</text>\n";
    os << "<g id=\"tiles\" shape-rendering=\"crispEdges\">\n";
    const int top = margin + title_h;
    for (int j = 0; j < map.ny; ++j) {
        for (int i = 0; i < map.nx; ++i) {
            const double v = map.at(i, j);
            const double t = hi > lo ? (v - lo) / (hi - lo) : 0.0;
            os << "<rect x=\"" << margin + i * cell << "\" y=\"" << top + (map.ny - 1 - j) * cell << "\" width=\""
               << cell << "\" height=\"" << cell << "\" fill=\"" << ramp_color(t) << "\"/>\n";
        }
    }
    os << "</g>\n";
    const int legend_y = top + grid_h + 10;
    os << "<defs><linearGradient id=\"scale\" x1=\"0\" x2=\"1\" y1=\"0\" y2=\"0\">"
       << "<stop offset=\"0\" stop-color=\"" << ramp_color(0.0) << "\"/>"
       << "<stop offset=\"1\" stop-color=\"" << ramp_color(1.0) << "\"/></linearGradient></defs>\n";
    os << "<rect x=\"" << margin << "\" y=\"" << legend_y << "\" width=\"120\" height=\"10\" fill=\"url(#scale)\"/>\n";
    os << "<text id=\"legend\" x=\"" << margin + 130 << "\" y=\"" << legend_y + 10
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << short_number(lo) << "–" << short_number(hi)
       << " mV</text>\n";
    os << "</svg>\n";
    return os.str();
}

std::string format_manifest(const RunManifest& m) {
    std::ostringstream os;
    os << "pdnsim manifest v1\n";
    os << "command: " << m.command << '\n';
    os << "arguments: " << m.arguments << '\n';
    os << "tool_version: " << m.tool_version << '\n';
    os << "wall_time_s: " << format_double(m.wall_time_s) << '\n';
    for (const auto& p : m.config_paths) os << "config_path: " << p << '\n';
    for (const auto& p : m.outputs) os << "output: " << p << '\n';
    os << "config:\n" << m.resolved_config_json;
    return os.str();
}

ScenarioConfig config_from_manifest(const std::string& text) {
    const std::string marker = "\nconfig:\n";
    const auto at = text.find(marker);
    if (text.rfind("pdnsim manifest", 0) != 0 || at == std::string::npos) {
        throw ConfigError(std::vector<Violation>{{"<manifest>", "holds no config snapshot"}});
    }
    return config_from_json(text.substr(at + marker.size()));
}

}  // namespace pdn

#include "pdn/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace pdn {

using Json = nlohmann::ordered_json;

namespace {

// --- writing -----------------------------------------------------------------------

Json wire_json(const WireSpec& w) {
    return {{"resistivity_ohm_m", w.resistivity_ohm_m},
            {"thickness_um", w.thickness_um},
            {"width_um", w.width_um},
            {"pitch_um", w.pitch_um}};
}

Json via_json(const ViaSpec& v) {
    return {{"resistivity_ohm_m", v.resistivity_ohm_m},
            {"height_um", v.height_um},
            {"diameter_um", v.diameter_um},
            {"inductance_per_via_pH", v.inductance_per_via_pH},
            {"count_per_site", v.count_per_site}};
}

Json bump_json(const BumpSpec& b) {
    return {{"diameter_um", b.diameter_um},
            {"pitch_um", b.pitch_um},
            {"resistance_per_bump_mohm", b.resistance_per_bump_mohm},
            {"inductance_per_bump_pH", b.inductance_per_bump_pH}};
}

Json decap_list_json(const std::vector<DiscreteDecap>& list) {
    Json out = Json::array();
    for (const auto& cap : list) {
        out.push_back({{"capacitance_uF", cap.capacitance_uF},
                       {"esr_mohm", cap.esr_mohm},
                       {"esl_nH", cap.esl_nH},
                       {"site", {{"tier", to_string(cap.site.tier)}, {"x", cap.site.x}, {"y", cap.site.y}}}});
    }
    return out;
}

Json placement_json(const VrmPlacement& placement) {
    struct Visitor {
        Json operator()(const OnPackage& p) const {
            return {{"kind", "on_package"}, {"count", p.count}, {"gap_mm", p.gap_mm}};
        }
        Json operator()(const BacksidePackage& p) const {
            return {{"kind", "backside_package"},
                    {"footprint_fraction", p.footprint_fraction},
                    {"via_site_pitch_um", p.via_site_pitch_um}};
        }
        Json operator()(const ChipOnVrm3D& p) const {
            return {{"kind", "chip_on_vrm_3d"}, {"microbump", bump_json(p.microbump)}, {"vrm_tsv", via_json(p.vrm_tsv)}};
        }
    };
    return std::visit(Visitor{}, placement);
}

Json to_json_tree(const ScenarioConfig& c) {
    Json j;
    j["label"] = c.label;
    j["chip"] = {{"width_mm", c.chip.width_mm},
                 {"height_mm", c.chip.height_mm},
                 {"supply_voltage_v", c.chip.supply_voltage_v},
                 {"total_power_w", c.chip.total_power_w},
                 {"tile_count_x", c.chip.tile_count_x},
                 {"tile_count_y", c.chip.tile_count_y},
                 {"onchip_wire", wire_json(c.chip.onchip_wire)}};
    j["package"] = {{"metal_layer_count", c.package.metal_layer_count},
                    {"layer_thickness_mm", c.package.layer_thickness_mm},
                    {"size_x_mm", c.package.size_x_mm},
                    {"size_y_mm", c.package.size_y_mm},
                    {"sheet_resistivity_ohm_m", c.package.sheet_resistivity_ohm_m},
                    {"sheet_inductance_pH_per_sq", c.package.sheet_inductance_pH_per_sq},
                    {"c4_bump", bump_json(c.package.c4_bump)},
                    {"solder_bump", bump_json(c.package.solder_bump)},
                    {"through_package_via", via_json(c.package.through_package_via)}};
    j["board"] = {{"lumped_resistance_mohm", c.board.lumped_resistance_mohm},
                  {"lumped_inductance_nH", c.board.lumped_inductance_nH}};
    j["vrm"] = {{"series_resistance_mohm", c.vrm.series_resistance_mohm},
                {"series_inductance_nH", c.vrm.series_inductance_nH},
                {"output_voltage_v", c.vrm.output_voltage_v}};
    j["placement"] = placement_json(c.placement);
    j["decaps"] = {{"onchip_density_nF_per_mm2", c.decaps.onchip_density_nF_per_mm2},
                   {"onchip_esr_ohm_mm2", c.decaps.onchip_esr_ohm_mm2},
                   {"package_decaps", decap_list_json(c.decaps.package_decaps)},
                   {"board_decaps", decap_list_json(c.decaps.board_decaps)}};
    Json pm;
    pm["kind"] = to_string(c.power_map_spec.kind);
    pm["hotspot_ratio"] = c.power_map_spec.hotspot_ratio;
    pm["blocks"] = Json::array();
    for (const auto& b : c.power_map_spec.blocks) {
        pm["blocks"].push_back(
            {{"center_x", b.center_x}, {"center_y", b.center_y}, {"size_x", b.size_x}, {"size_y", b.size_y}});
    }
    pm["densities_A_per_mm2"] = c.power_map_spec.densities_A_per_mm2;
    j["power_map"] = pm;
    j["stimulus"] = {{"kind", to_string(c.stimulus.kind)},
                     {"v_start_v", c.stimulus.v_start_v},
                     {"v_end_v", c.stimulus.v_end_v},
                     {"rise_time_ns", c.stimulus.rise_time_ns},
                     {"load_start_fraction", c.stimulus.load_start_fraction}};
    return j;
}

// --- reading ----------------------------------------------------------------------

/// Walks one JSON object, recording type errors and unknown keys as violations.
class ObjectReader {
public:
    ObjectReader(const Json& j, std::string path, std::vector<Violation>& errors)
        : j_(j), path_(std::move(path)), errors_(errors) {
        if (!j_.is_object()) {
            errors_.push_back({path_.empty() ? "<root>" : path_, "must be an object"});
            valid_ = false;
        }
    }
    ~ObjectReader() {
        if (!valid_) return;
        for (const auto& [key, value] : j_.items()) {
            if (!used_.contains(key)) errors_.push_back({field(key), "is not a known key"});
        }
    }
    ObjectReader(const ObjectReader&) = delete;
    ObjectReader& operator=(const ObjectReader&) = delete;

    void number(const char* key, double& out) {
        if (const Json* v = get(key)) {
            if (v->is_number()) {
                out = v->get<double>();
            } else {
                errors_.push_back({field(key), "must be a number"});
            }
        }
    }
    void integer(const char* key, int& out) {
        if (const Json* v = get(key)) {
            if (v->is_number_integer()) {
                out = v->get<int>();
            } else {
                errors_.push_back({field(key), "must be an integer"});
            }
        }
    }
    void text(const char* key, std::string& out) {
        if (const Json* v = get(key)) {
            if (v->is_string()) {
                out = v->get<std::string>();
            } else {
                errors_.push_back({field(key), "must be a string"});
            }
        }
    }
    template <class Parse>
    void enumeration(const char* key, Parse parse) {
        std::string value;
        const std::size_t before = errors_.size();
        text(key, value);
        if (value.empty() || errors_.size() != before) return;
        try {
            parse(value);
        } catch (const std::invalid_argument& e) {
            errors_.push_back({field(key), e.what()});
        }
    }
    template <class Fn>
    void object(const char* key, Fn fn) {
        if (const Json* v = get(key)) {
            ObjectReader child(*v, field(key), errors_);
            if (child.valid_) fn(child);
        }
    }
    template <class Fn>
    void array(const char* key, Fn fn) {
        if (const Json* v = get(key)) {
            if (!v->is_array()) {
                errors_.push_back({field(key), "must be an array"});
                return;
            }
            for (std::size_t k = 0; k < v->size(); ++k) fn((*v)[k], field(key) + "[" + std::to_string(k) + "]");
        }
    }
    std::vector<Violation>& errors() { return errors_; }
    bool has(const char* key) const { return valid_ && j_.contains(key); }

private:
    const Json* get(const char* key) {
        if (!valid_) return nullptr;
        used_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }
    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const Json& j_;
    std::string path_;
    std::vector<Violation>& errors_;
    std::set<std::string> used_;
    bool valid_ = true;
};

void read_wire(ObjectReader& r, WireSpec& w) {
    r.number("resistivity_ohm_m", w.resistivity_ohm_m);
    r.number("thickness_um", w.thickness_um);
    r.number("width_um", w.width_um);
    r.number("pitch_um", w.pitch_um);
}

void read_via(ObjectReader& r, ViaSpec& v) {
    r.number("resistivity_ohm_m", v.resistivity_ohm_m);
    r.number("height_um", v.height_um);
    r.number("diameter_um", v.diameter_um);
    r.number("inductance_per_via_pH", v.inductance_per_via_pH);
    r.integer("count_per_site", v.count_per_site);
}

void read_bump(ObjectReader& r, BumpSpec& b) {
    r.number("diameter_um", b.diameter_um);
    r.number("pitch_um", b.pitch_um);
    r.number("resistance_per_bump_mohm", b.resistance_per_bump_mohm);
    r.number("inductance_per_bump_pH", b.inductance_per_bump_pH);
}

void read_decaps(ObjectReader& r, const char* key, std::vector<DiscreteDecap>& out, Tier default_tier) {
    if (!r.has(key)) return;
    out.clear();
    r.array(key, [&](const Json& item, const std::string& path) {
        DiscreteDecap cap;
        cap.site.tier = default_tier;
        ObjectReader c(item, path, r.errors());
        c.number("capacitance_uF", cap.capacitance_uF);
        c.number("esr_mohm", cap.esr_mohm);
        c.number("esl_nH", cap.esl_nH);
        c.object("site", [&](ObjectReader& s) {
            s.enumeration("tier", [&](const std::string& t) { cap.site.tier = tier_from_string(t); });
            s.number("x", cap.site.x);
            s.number("y", cap.site.y);
        });
        out.push_back(cap);
    });
}

void read_placement(ObjectReader& r, VrmPlacement& placement) {
    std::string kind = placement_name(placement);
    if (kind.rfind("on_package", 0) == 0) kind = "on_package";
    r.text("kind", kind);
    if (kind == "on_package") {
        OnPackage p = std::holds_alternative<OnPackage>(placement) ? std::get<OnPackage>(placement) : OnPackage{};
        r.integer("count", p.count);
        r.number("gap_mm", p.gap_mm);
        placement = p;
    } else if (kind == "backside_package") {
        BacksidePackage p = std::holds_alternative<BacksidePackage>(placement) ? std::get<BacksidePackage>(placement)
                                                                                : BacksidePackage{};
        r.number("footprint_fraction", p.footprint_fraction);
        r.number("via_site_pitch_um", p.via_site_pitch_um);
        placement = p;
    } else if (kind == "chip_on_vrm_3d") {
        ChipOnVrm3D p = std::holds_alternative<ChipOnVrm3D>(placement) ? std::get<ChipOnVrm3D>(placement)
                                                                        : ChipOnVrm3D{};
        r.object("microbump", [&](ObjectReader& b) { read_bump(b, p.microbump); });
        r.object("vrm_tsv", [&](ObjectReader& v) { read_via(v, p.vrm_tsv); });
        placement = p;
    } else {
        r.errors().push_back({"placement.kind", "must be on_package, backside_package or chip_on_vrm_3d"});
    }
}

void read_config(ObjectReader& r, ScenarioConfig& c) {
    r.text("label", c.label);
    r.object("chip", [&](ObjectReader& o) {
        o.number("width_mm", c.chip.width_mm);
        o.number("height_mm", c.chip.height_mm);
        o.number("supply_voltage_v", c.chip.supply_voltage_v);
        o.number("total_power_w", c.chip.total_power_w);
        o.integer("tile_count_x", c.chip.tile_count_x);
        o.integer("tile_count_y", c.chip.tile_count_y);
        o.object("onchip_wire", [&](ObjectReader& w) { read_wire(w, c.chip.onchip_wire); });
    });
    r.object("package", [&](ObjectReader& o) {
        o.integer("metal_layer_count", c.package.metal_layer_count);
        o.number("layer_thickness_mm", c.package.layer_thickness_mm);
        o.number("size_x_mm", c.package.size_x_mm);
        o.number("size_y_mm", c.package.size_y_mm);
        o.number("sheet_resistivity_ohm_m", c.package.sheet_resistivity_ohm_m);
        o.number("sheet_inductance_pH_per_sq", c.package.sheet_inductance_pH_per_sq);
        o.object("c4_bump", [&](ObjectReader& b) { read_bump(b, c.package.c4_bump); });
        o.object("solder_bump", [&](ObjectReader& b) { read_bump(b, c.package.solder_bump); });
        o.object("through_package_via", [&](ObjectReader& v) { read_via(v, c.package.through_package_via); });
    });
    r.object("board", [&](ObjectReader& o) {
        o.number("lumped_resistance_mohm", c.board.lumped_resistance_mohm);
        o.number("lumped_inductance_nH", c.board.lumped_inductance_nH);
    });
    r.object("vrm", [&](ObjectReader& o) {
        o.number("series_resistance_mohm", c.vrm.series_resistance_mohm);
        o.number("series_inductance_nH", c.vrm.series_inductance_nH);
        o.number("output_voltage_v", c.vrm.output_voltage_v);
    });
    r.object("placement", [&](ObjectReader& o) { read_placement(o, c.placement); });
    r.object("decaps", [&](ObjectReader& o) {
        o.number("onchip_density_nF_per_mm2", c.decaps.onchip_density_nF_per_mm2);
        o.number("onchip_esr_ohm_mm2", c.decaps.onchip_esr_ohm_mm2);
        read_decaps(o, "package_decaps", c.decaps.package_decaps, Tier::package_top);
        read_decaps(o, "board_decaps", c.decaps.board_decaps, Tier::board);
    });
    r.object("power_map", [&](ObjectReader& o) {
        auto& pm = c.power_map_spec;
        o.enumeration("kind", [&](const std::string& t) { pm.kind = power_map_kind_from_string(t); });
        o.number("hotspot_ratio", pm.hotspot_ratio);
        if (o.has("blocks")) {
            pm.blocks.clear();
            o.array("blocks", [&](const Json& item, const std::string& path) {
                HotspotBlock b;
                ObjectReader br(item, path, o.errors());
                br.number("center_x", b.center_x);
                br.number("center_y", b.center_y);
                br.number("size_x", b.size_x);
                br.number("size_y", b.size_y);
                pm.blocks.push_back(b);
            });
        }
        if (o.has("densities_A_per_mm2")) {
            pm.densities_A_per_mm2.clear();
            o.array("densities_A_per_mm2", [&](const Json& item, const std::string& path) {
                if (item.is_number()) {
                    pm.densities_A_per_mm2.push_back(item.get<double>());
                } else {
                    o.errors().push_back({path, "must be a number"});
                }
            });
        }
    });
    r.object("stimulus", [&](ObjectReader& o) {
        o.enumeration("kind", [&](const std::string& t) { c.stimulus.kind = stimulus_kind_from_string(t); });
        o.number("v_start_v", c.stimulus.v_start_v);
        o.number("v_end_v", c.stimulus.v_end_v);
        o.number("rise_time_ns", c.stimulus.rise_time_ns);
        o.number("load_start_fraction", c.stimulus.load_start_fraction);
    });
}

}  // namespace

std::string config_to_json(const ScenarioConfig& config) { return to_json_tree(config).dump(2) + "\n"; }

ScenarioConfig config_from_json(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::vector<Violation>{{"<root>", std::string("is not valid JSON: ") + e.what()}});
    }
    ScenarioConfig config = default_config();
    std::vector<Violation> errors;
    {
        ObjectReader reader(j, "", errors);
        read_config(reader, config);
    }
    if (!errors.empty()) throw ConfigError(std::move(errors));
    return config;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    if (text.rfind("pdnsim manifest", 0) == 0) return config_from_manifest(text);
    return config_from_json(text);
}

void save_config(const std::filesystem::path& path, const ScenarioConfig& config) {
    write_text_file(path, config_to_json(config));
}

std::uint64_t config_hash(const ScenarioConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : config_to_json(config)) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hash_hex(std::uint64_t hash) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    os << text;
    os.flush();
    if (!os) throw IoError("write to '" + path.string() + "' failed");
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace pdn

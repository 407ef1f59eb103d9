#include "pdn/netlist.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace pdn {

namespace {

constexpr const char* kGroundName = "ground";

int parse_int(std::string_view text, const std::string& whole) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw std::invalid_argument("malformed label '" + whole + "'");
    }
    return value;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string format_label(const Label& label) {
    std::string out = to_string(label.tier) + "/" + label.role;
    if (label.index) out += "#" + std::to_string(*label.index);
    if (label.pos) out += "[" + std::to_string(label.pos->i) + "," + std::to_string(label.pos->j) + "]";
    return out;
}

Label parse_label(const std::string& text) {
    const auto slash = text.find('/');
    if (slash == std::string::npos) throw std::invalid_argument("malformed label '" + text + "'");
    Label label;
    label.tier = tier_from_string(text.substr(0, slash));
    std::string_view rest(text);
    rest.remove_prefix(slash + 1);

    if (!rest.empty() && rest.back() == ']') {
        const auto open = rest.rfind('[');
        const auto comma = rest.find(',', open);
        if (open == std::string_view::npos || comma == std::string_view::npos) {
            throw std::invalid_argument("malformed label '" + text + "'");
        }
        label.pos = GridPos{parse_int(rest.substr(open + 1, comma - open - 1), text),
                            parse_int(rest.substr(comma + 1, rest.size() - comma - 2), text)};
        rest = rest.substr(0, open);
    }
    if (const auto hash = rest.find('#'); hash != std::string_view::npos) {
        label.index = parse_int(rest.substr(hash + 1), text);
        rest = rest.substr(0, hash);
    }
    if (rest.empty() || rest.find_first_of("/#[],") != std::string_view::npos) {
        throw std::invalid_argument("malformed label '" + text + "'");
    }
    label.role = std::string(rest);
    return label;
}

char element_code(ElementKind kind) {
    switch (kind) {
        case ElementKind::resistor: return 'R';
        case ElementKind::inductor: return 'L';
        case ElementKind::capacitor: return 'C';
        case ElementKind::current_source: return 'I';
        case ElementKind::voltage_source: return 'V';
    }
    return '?';
}

std::string to_string(SourceRole role) {
    switch (role) {
        case SourceRole::constant: return "constant";
        case SourceRole::supply: return "supply";
        case SourceRole::load: return "load";
    }
    return "unknown";
}

namespace {

SourceRole source_role_from_string(const std::string& text) {
    for (SourceRole r : {SourceRole::constant, SourceRole::supply, SourceRole::load}) {
        if (to_string(r) == text) return r;
    }
    throw std::invalid_argument("unknown source role '" + text + "'");
}

ElementKind element_kind_from_code(char code) {
    switch (code) {
        case 'R': return ElementKind::resistor;
        case 'L': return ElementKind::inductor;
        case 'C': return ElementKind::capacitor;
        case 'I': return ElementKind::current_source;
        case 'V': return ElementKind::voltage_source;
        default: throw std::invalid_argument(std::string("unknown element kind '") + code + "'");
    }
}

bool is_source(ElementKind kind) {
    return kind == ElementKind::current_source || kind == ElementKind::voltage_source;
}

}  // namespace

// --- Netlist ---------------------------------------------------------------------

Netlist::Netlist() {
    nodes_.push_back({kGroundName, std::nullopt, std::nullopt});
    by_name_.emplace(kGroundName, ground_node);
}

NodeId Netlist::add_node(const Label& label) {
    const std::string name = format_label(label);
    if (by_name_.contains(name)) throw NetlistError("duplicate node '" + name + "'");
    const NodeId id{static_cast<std::uint32_t>(nodes_.size())};
    nodes_.push_back({name, label.tier, label.pos});
    by_name_.emplace(name, id);
    return id;
}

NodeId Netlist::add_node(const std::string& name) {
    if (name == kGroundName) return ground_node;
    return add_node(parse_label(name));
}

NodeId Netlist::node(const Label& label) {
    if (auto found = find_node(format_label(label))) return *found;
    return add_node(label);
}

std::optional<NodeId> Netlist::find_node(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

std::size_t Netlist::add_element(Element element) {
    if (element.a == element.b) throw NetlistError("element '" + element.label + "' shorts a node to itself");
    if (element.a.value >= nodes_.size() || element.b.value >= nodes_.size()) {
        throw NetlistError("element '" + element.label + "' references an unknown node");
    }
    if (!is_source(element.kind) && !(element.value > 0.0)) {
        throw NetlistError("element '" + element.label + "' must have a positive value");
    }
    if (!labels_.insert(element.label).second) throw NetlistError("duplicate element label '" + element.label + "'");
    elements_.push_back(std::move(element));
    return elements_.size() - 1;
}

std::size_t Netlist::add_resistor(NodeId a, NodeId b, double ohm, const Label& label) {
    return add_element({ElementKind::resistor, a, b, ohm, format_label(label), SourceRole::constant});
}

std::size_t Netlist::add_inductor(NodeId a, NodeId b, double henry, const Label& label) {
    return add_element({ElementKind::inductor, a, b, henry, format_label(label), SourceRole::constant});
}

std::size_t Netlist::add_capacitor(NodeId a, NodeId b, double farad, const Label& label) {
    return add_element({ElementKind::capacitor, a, b, farad, format_label(label), SourceRole::constant});
}

std::size_t Netlist::add_current_source(NodeId from, NodeId to, double ampere, const Label& label, SourceRole role) {
    return add_element({ElementKind::current_source, from, to, ampere, format_label(label), role});
}

std::size_t Netlist::add_voltage_source(NodeId plus, NodeId minus, double volt, const Label& label, SourceRole role) {
    return add_element({ElementKind::voltage_source, plus, minus, volt, format_label(label), role});
}

void Netlist::add_series_rl(NodeId a, NodeId b, double ohm, double henry, const Label& label) {
    Label r = label;
    r.role += "_r";
    Label l = label;
    l.role += "_l";
    if (ohm > 0.0 && henry > 0.0) {
        Label mid = label;
        mid.role += "_mid";
        const NodeId m = add_node(mid);
        add_resistor(a, m, ohm, r);
        add_inductor(m, b, henry, l);
    } else if (henry > 0.0) {
        add_inductor(a, b, henry, l);
    } else if (ohm > 0.0) {
        add_resistor(a, b, ohm, r);
    } else {
        throw NetlistError("series branch '" + format_label(label) + "' has neither resistance nor inductance");
    }
}

void Netlist::add_probe(const std::string& name, NodeId node) { probes_.emplace_back(name, node); }

std::vector<std::size_t> Netlist::source_set() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < elements_.size(); ++k) {
        if (elements_[k].kind == ElementKind::voltage_source) out.push_back(k);
    }
    return out;
}

// --- parasitics ------------------------------------------------------------------

double wire_resistance(const WireSpec& wire, double segment_length_um) {
    const double length_m = segment_length_um * 1e-6;
    return wire.resistivity_ohm_m * length_m / (wire.thickness_um * 1e-6 * wire.width_um * 1e-6);
}

double via_resistance(const ViaSpec& via) {
    const double r = via.diameter_um * 1e-6 / 2.0;
    const double single = via.resistivity_ohm_m * via.height_um * 1e-6 / (std::numbers::pi * r * r);
    return single / via.count_per_site;
}

int wires_per_boundary(const WireSpec& wire, double boundary_length_um) {
    return std::max(1, static_cast<int>(std::floor(boundary_length_um / wire.pitch_um + 1e-9)));
}

double package_sheet_resistance(const PackageSpec& pkg) {
    return pkg.sheet_resistivity_ohm_m / (pkg.merged_thickness_mm() * 1e-3);
}

int sites_in_span(double lo_um, double hi_um, double pitch_um, double extent_um) {
    constexpr double eps = 1e-9;
    const double first = pitch_um / 2.0;
    const auto k_lo = static_cast<long>(std::ceil((lo_um - first) / pitch_um - eps));
    const double top = std::min(hi_um, extent_um);
    const auto k_hi = static_cast<long>(std::ceil((top - first) / pitch_um - eps)) - 1;
    return static_cast<int>(std::max(0L, k_hi - std::max(0L, k_lo) + 1));
}

// --- connectivity -----------------------------------------------------------------

void check_connectivity(const Netlist& netlist) {
    const std::size_t n = netlist.node_count();
    std::vector<std::vector<std::uint32_t>> adjacency(n);
    for (const auto& e : netlist.elements()) {
        adjacency[e.a.value].push_back(e.b.value);
        adjacency[e.b.value].push_back(e.a.value);
    }
    std::vector<char> seen(n, 0);
    std::vector<std::uint32_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        for (auto w : adjacency[v]) {
            if (!seen[w]) {
                seen[w] = 1;
                stack.push_back(w);
            }
        }
    }
    std::vector<std::string> floating;
    for (std::size_t k = 0; k < n; ++k) {
        if (!seen[k]) floating.push_back(netlist.nodes()[k].name);
    }
    if (!floating.empty()) {
        std::string msg = "netlist has " + std::to_string(floating.size()) + " node(s) with no path to ground:";
        for (std::size_t k = 0; k < std::min<std::size_t>(floating.size(), 8); ++k) msg += " " + floating[k];
        if (floating.size() > 8) msg += " ...";
        throw NetlistError(msg);
    }
}

// --- text form ----------------------------------------------------------------------

void write_netlist(std::ostream& os, const Netlist& netlist) {
    os << "* pdnsim netlist v1\n";
    os << "* nodes " << netlist.node_count() << " elements " << netlist.elements().size() << "\n";
    for (std::size_t k = 1; k < netlist.node_count(); ++k) {
        os << "N " << netlist.nodes()[k].name << "\n";
    }
    const auto& nodes = netlist.nodes();
    for (const auto& e : netlist.elements()) {
        os << element_code(e.kind) << ' ' << nodes[e.a.value].name << ' ' << nodes[e.b.value].name << ' '
           << format_double(e.value) << ' ' << e.label;
        if (is_source(e.kind)) os << ' ' << to_string(e.role);
        os << '\n';
    }
    for (const auto& [name, id] : netlist.probes()) {
        os << "P " << name << ' ' << nodes[id.value].name << '\n';
    }
}

std::string netlist_to_text(const Netlist& netlist) {
    std::ostringstream os;
    write_netlist(os, netlist);
    return os.str();
}

Netlist read_netlist(std::istream& is) {
    Netlist netlist;
    std::string line;
    std::size_t line_no = 0;
    auto lookup = [&](const std::string& name) {
        auto id = netlist.find_node(name);
        if (!id) throw NetlistError("line " + std::to_string(line_no) + ": unknown node '" + name + "'");
        return *id;
    };
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '*') continue;
        std::istringstream fields(line);
        std::string code;
        fields >> code;
        if (code == "N") {
            std::string name;
            fields >> name;
            netlist.add_node(name);
        } else if (code == "P") {
            std::string probe, node;
            fields >> probe >> node;
            netlist.add_probe(probe, lookup(node));
        } else if (code.size() == 1) {
            std::string a, b, value, label, role;
            fields >> a >> b >> value >> label;
            if (label.empty()) throw NetlistError("line " + std::to_string(line_no) + ": too few fields");
            Element e;
            e.kind = element_kind_from_code(code[0]);
            e.a = lookup(a);
            e.b = lookup(b);
            e.value = std::stod(value);
            e.label = label;
            if (is_source(e.kind)) {
                fields >> role;
                e.role = source_role_from_string(role);
            }
            netlist.add_element(std::move(e));
        } else {
            throw NetlistError("line " + std::to_string(line_no) + ": unknown record '" + code + "'");
        }
    }
    return netlist;
}

}  // namespace pdn

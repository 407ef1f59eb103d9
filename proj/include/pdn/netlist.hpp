#pragma once

// Flat two-terminal RLC netlist and the builders that turn a ScenarioConfig
// into one. Node 0 is ground.

#include "pdn/config.hpp"

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace pdn {

struct NodeId {
    std::uint32_t value = 0;

    auto operator<=>(const NodeId&) const = default;
};

inline constexpr NodeId ground_node{0};

struct GridPos {
    int i = 0;
    int j = 0;

    bool operator==(const GridPos&) const = default;
};

/// Structured form of node names and element labels:
///   <tier>/<role>[#index][[i,j]]    e.g. "chip/grid_h[12,7]", "vrm_die/src#0"
struct Label {
    Tier tier = Tier::chip;
    std::string role;
    std::optional<int> index;
    std::optional<GridPos> pos;

    bool operator==(const Label&) const = default;
};

std::string format_label(const Label& label);
/// Throws std::invalid_argument on malformed text.
Label parse_label(const std::string& text);

struct NodeInfo {
    std::string name;
    std::optional<Tier> tier;  // empty for ground
    std::optional<GridPos> pos;
};

enum class ElementKind { resistor, inductor, capacitor, current_source, voltage_source };

/// Which stimulus a source follows during a transient run.
enum class SourceRole { constant, supply, load };

char element_code(ElementKind kind);
std::string to_string(SourceRole role);

struct Element {
    ElementKind kind = ElementKind::resistor;
    NodeId a;
    NodeId b;
    /// Ω, H, F, A (flowing a -> b through the source) or V (v_a - v_b).
    double value = 0.0;
    std::string label;
    SourceRole role = SourceRole::constant;
};

class Netlist {
public:
    Netlist();

    NodeId add_node(const Label& label);
    NodeId add_node(const std::string& name);
    /// Existing node with this name, or a new one.
    NodeId node(const Label& label);
    std::optional<NodeId> find_node(const std::string& name) const;

    std::size_t add_element(Element element);
    std::size_t add_resistor(NodeId a, NodeId b, double ohm, const Label& label);
    std::size_t add_inductor(NodeId a, NodeId b, double henry, const Label& label);
    std::size_t add_capacitor(NodeId a, NodeId b, double farad, const Label& label);
    std::size_t add_current_source(NodeId from, NodeId to, double ampere, const Label& label,
                                   SourceRole role = SourceRole::load);
    std::size_t add_voltage_source(NodeId plus, NodeId minus, double volt, const Label& label,
                                   SourceRole role = SourceRole::supply);

    /// Series R then L from a to b through an internal node; zero-valued parts are omitted.
    void add_series_rl(NodeId a, NodeId b, double ohm, double henry, const Label& label);

    void add_probe(const std::string& name, NodeId node);

    const std::vector<NodeInfo>& nodes() const { return nodes_; }
    const std::vector<Element>& elements() const { return elements_; }
    const std::vector<std::pair<std::string, NodeId>>& probes() const { return probes_; }
    /// Indices of supply voltage sources (the regulators).
    std::vector<std::size_t> source_set() const;

    std::size_t node_count() const { return nodes_.size(); }
    const NodeInfo& info(NodeId id) const { return nodes_.at(id.value); }

private:
    std::vector<NodeInfo> nodes_;
    std::vector<Element> elements_;
    std::vector<std::pair<std::string, NodeId>> probes_;
    std::unordered_map<std::string, NodeId> by_name_;
    std::unordered_set<std::string> labels_;
};

class NetlistError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- lumped parasitics ---------------------------------------------------------

/// ρ·L/(t·w) for one wire of the given length (µm), in Ω.
double wire_resistance(const WireSpec& wire, double segment_length_um);

/// Parallel resistance of one via site, (ρ·h/(π r²)) / count, in Ω.
double via_resistance(const ViaSpec& via);

/// Number of whole wires of the given pitch crossing a tile boundary of this length.
int wires_per_boundary(const WireSpec& wire, double boundary_length_um);

/// Sheet resistance of the merged package plane, Ω per square.
double package_sheet_resistance(const PackageSpec& pkg);

/// Number of sites of a regular array (first centre at pitch/2) whose centres fall in [lo, hi).
int sites_in_span(double lo_um, double hi_um, double pitch_um, double extent_um);

// --- builders ------------------------------------------------------------------

/// On-die grid: tile nodes, boundary resistors aggregating the physical wires,
/// one load current source and one decap branch per tile.
Netlist build_chip_grid(const ChipSpec& chip, const DecapPolicy& decaps, const PowerMap& map);

/// Package power plane tile-aligned with the chip grid (all metal layers merged).
Netlist build_package_network(const PackageSpec& pkg, const ChipSpec& chip);

/// Full netlist for the placement variant. Expects a validated config.
Netlist assemble_netlist(const ScenarioConfig& config);

/// Throws NetlistError naming nodes that cannot reach ground through any element.
void check_connectivity(const Netlist& netlist);

// --- text form --------------------------------------------------------------------

/// Line-oriented dump: node table, elements (kind a b value label [role]), probes.
void write_netlist(std::ostream& os, const Netlist& netlist);
std::string netlist_to_text(const Netlist& netlist);
Netlist read_netlist(std::istream& is);

}  // namespace pdn

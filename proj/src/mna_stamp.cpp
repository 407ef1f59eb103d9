#include "pdn/mna.hpp"

#include <algorithm>
#include <numeric>

namespace pdn {

std::string to_string(Integrator method) {
    return method == Integrator::trapezoidal ? "trap" : "be";
}

Integrator integrator_from_string(const std::string& text) {
    if (text == "trap" || text == "trapezoidal") return Integrator::trapezoidal;
    if (text == "be" || text == "backward_euler") return Integrator::backward_euler;
    throw std::invalid_argument("unknown integration method '" + text + "'");
}

namespace {

class DisjointSet {
public:
    explicit DisjointSet(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0u); }
    std::uint32_t find(std::uint32_t v) {
        while (parent_[v] != v) {
            parent_[v] = parent_[parent_[v]];
            v = parent_[v];
        }
        return v;
    }
    void unite(std::uint32_t a, std::uint32_t b) { parent_[find(a)] = find(b); }

private:
    std::vector<std::uint32_t> parent_;
};

bool conducts(ElementKind kind, AnalysisMode mode) {
    switch (kind) {
        case ElementKind::resistor:
        case ElementKind::inductor:
        case ElementKind::voltage_source: return true;
        case ElementKind::capacitor: return mode == AnalysisMode::transient;
        case ElementKind::current_source: return false;
    }
    return false;
}

}  // namespace

void check_grounded(const Netlist& netlist, AnalysisMode mode) {
    DisjointSet sets(netlist.node_count());
    for (const auto& e : netlist.elements()) {
        if (conducts(e.kind, mode)) sets.unite(e.a.value, e.b.value);
    }
    const auto ground_root = sets.find(0);
    std::vector<std::string> floating;
    for (std::uint32_t k = 1; k < netlist.node_count(); ++k) {
        if (sets.find(k) != ground_root) floating.push_back(netlist.nodes()[k].name);
    }
    if (floating.empty()) return;
    std::string msg = "singular structure: " + std::to_string(floating.size()) +
                      " node(s) have no conducting path to ground in " +
                      (mode == AnalysisMode::dc ? "dc" : "transient") + " mode:";
    for (std::size_t k = 0; k < std::min<std::size_t>(floating.size(), 8); ++k) msg += " " + floating[k];
    if (floating.size() > 8) msg += " ...";
    throw SolverError(msg);
}

MnaSystem stamp_mna(const Netlist& netlist, AnalysisMode mode, double dt_s, Integrator method) {
    if (mode == AnalysisMode::transient && !(dt_s > 0.0)) throw SolverError("transient stamping needs dt > 0");
    check_grounded(netlist, mode);

    MnaSystem sys;
    const auto& nodes = netlist.nodes();
    const auto& elements = netlist.elements();
    sys.node_row.assign(nodes.size(), -1);
    int next = 0;
    for (std::size_t k = 1; k < nodes.size(); ++k) {
        sys.node_row[k] = next++;
        sys.row_names.push_back(nodes[k].name);
    }
    sys.element_row.assign(elements.size(), -1);
    for (std::size_t k = 0; k < elements.size(); ++k) {
        const auto kind = elements[k].kind;
        if (kind == ElementKind::voltage_source || (kind == ElementKind::inductor && mode == AnalysisMode::dc)) {
            sys.element_row[k] = next++;
            sys.row_names.push_back("I(" + elements[k].label + ")");
        }
    }
    sys.dimension = static_cast<std::size_t>(next);
    sys.rhs = Eigen::VectorXd::Zero(next);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(elements.size() * 4);
    auto conductance = [&](NodeId a, NodeId b, double g) {
        const int ra = sys.node_row[a.value];
        const int rb = sys.node_row[b.value];
        if (ra >= 0) triplets.emplace_back(ra, ra, g);
        if (rb >= 0) triplets.emplace_back(rb, rb, g);
        if (ra >= 0 && rb >= 0) {
            triplets.emplace_back(ra, rb, -g);
            triplets.emplace_back(rb, ra, -g);
        }
    };
    auto branch = [&](NodeId a, NodeId b, int row) {
        const int ra = sys.node_row[a.value];
        const int rb = sys.node_row[b.value];
        if (ra >= 0) {
            triplets.emplace_back(ra, row, 1.0);
            triplets.emplace_back(row, ra, 1.0);
        }
        if (rb >= 0) {
            triplets.emplace_back(rb, row, -1.0);
            triplets.emplace_back(row, rb, -1.0);
        }
    };
    const double trap = method == Integrator::trapezoidal ? 2.0 : 1.0;

    for (std::size_t k = 0; k < elements.size(); ++k) {
        const auto& e = elements[k];
        switch (e.kind) {
            case ElementKind::resistor: conductance(e.a, e.b, 1.0 / e.value); break;
            case ElementKind::capacitor:
                if (mode == AnalysisMode::transient) conductance(e.a, e.b, trap * e.value / dt_s);
                break;
            case ElementKind::inductor:
                if (mode == AnalysisMode::dc) {
                    branch(e.a, e.b, sys.element_row[k]);
                } else {
                    conductance(e.a, e.b, dt_s / (trap * e.value));
                }
                break;
            case ElementKind::voltage_source:
                branch(e.a, e.b, sys.element_row[k]);
                sys.rhs[sys.element_row[k]] = e.value;
                break;
            case ElementKind::current_source: {
                const int ra = sys.node_row[e.a.value];
                const int rb = sys.node_row[e.b.value];
                if (ra >= 0) sys.rhs[ra] -= e.value;
                if (rb >= 0) sys.rhs[rb] += e.value;
                break;
            }
        }
    }
    sys.matrix.resize(next, next);
    sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
    sys.matrix.makeCompressed();
    return sys;
}

}  // namespace pdn

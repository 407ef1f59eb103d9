#include "pdn/mna.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <ranges>

namespace pdn {

double kcl_residual(const Netlist& netlist, const std::vector<double>& element_current) {
    std::vector<double> leaving(netlist.node_count(), 0.0);
    const auto& elements = netlist.elements();
    for (std::size_t k = 0; k < elements.size(); ++k) {
        leaving[elements[k].a.value] += element_current[k];
        leaving[elements[k].b.value] -= element_current[k];
    }
    double worst = 0.0;
    for (std::size_t k = 1; k < leaving.size(); ++k) worst = std::max(worst, std::abs(leaving[k]));
    return worst;
}

namespace {

std::vector<double> element_currents(const Netlist& netlist, const MnaSystem& sys, const Eigen::VectorXd& x,
                                     const std::vector<double>& v) {
    const auto& elements = netlist.elements();
    std::vector<double> current(elements.size(), 0.0);
    for (std::size_t k = 0; k < elements.size(); ++k) {
        const auto& e = elements[k];
        switch (e.kind) {
            case ElementKind::resistor: current[k] = (v[e.a.value] - v[e.b.value]) / e.value; break;
            case ElementKind::inductor:
            case ElementKind::voltage_source: current[k] = x[sys.element_row[k]]; break;
            case ElementKind::current_source: current[k] = e.value; break;
            case ElementKind::capacitor: current[k] = 0.0; break;
        }
    }
    return current;
}

/// Inductors are shorts and grounded sources pin their node, so the remaining
/// unknowns form a graph Laplacian: symmetric positive definite once every
/// contracted node reaches a pinned one. Returns nothing when the netlist needs
/// full MNA (floating sources, loops of shorts).
std::optional<DcSolution> reduced_dc_solve(const Netlist& netlist) {
    const auto& elements = netlist.elements();
    const std::size_t n = netlist.node_count();

    std::vector<std::uint32_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::uint32_t v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (const auto& e : elements) {
        if (e.kind == ElementKind::inductor) parent[find(e.a.value)] = find(e.b.value);
    }
    // Pinned voltage per contracted node; ground is pinned at 0.
    std::vector<double> pinned(n, std::numeric_limits<double>::quiet_NaN());
    pinned[find(0)] = 0.0;
    for (const auto& e : elements) {
        if (e.kind != ElementKind::voltage_source) continue;
        if ((e.a == ground_node) == (e.b == ground_node)) return std::nullopt;
        const std::uint32_t node = find(e.a == ground_node ? e.b.value : e.a.value);
        if (!std::isnan(pinned[node])) return std::nullopt;
        pinned[node] = e.a == ground_node ? -e.value : e.value;
    }

    std::vector<int> row(n, -1);
    int dim = 0;
    for (std::uint32_t k = 0; k < n; ++k) {
        if (find(k) == k && std::isnan(pinned[k])) row[k] = dim++;
    }
    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    for (const auto& e : elements) {
        const std::uint32_t a = find(e.a.value);
        const std::uint32_t b = find(e.b.value);
        const int ra = row[a];
        const int rb = row[b];
        if (e.kind == ElementKind::resistor) {
            if (a == b) continue;
            const double g = 1.0 / e.value;
            if (ra >= 0) triplets.emplace_back(ra, ra, g);
            if (rb >= 0) triplets.emplace_back(rb, rb, g);
            if (ra >= 0 && rb >= 0) {
                triplets.emplace_back(ra, rb, -g);
                triplets.emplace_back(rb, ra, -g);
            }
            if (ra >= 0 && rb < 0) rhs[ra] += g * pinned[b];
            if (rb >= 0 && ra < 0) rhs[rb] += g * pinned[a];
        } else if (e.kind == ElementKind::current_source) {
            if (ra >= 0) rhs[ra] -= e.value;
            if (rb >= 0) rhs[rb] += e.value;
        }
    }
    Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
    if (dim > 0) {
        Eigen::SparseMatrix<double> m(dim, dim);
        m.setFromTriplets(triplets.begin(), triplets.end());
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(m);
        if (ldlt.info() != Eigen::Success) return std::nullopt;
        x = ldlt.solve(rhs);
        // Residuals from branch voltage differences: rhs - A x would lose the
        // small differences across the large conductances of bump fields.
        auto residual = [&] {
            std::vector<long double> r(static_cast<std::size_t>(dim), 0.0L);
            auto value = [&](std::uint32_t node) { return row[node] >= 0 ? x[row[node]] : pinned[node]; };
            for (const auto& e : elements) {
                const std::uint32_t a = find(e.a.value);
                const std::uint32_t b = find(e.b.value);
                long double i = 0.0L;
                if (e.kind == ElementKind::resistor && a != b) {
                    i = static_cast<long double>(value(a) - value(b)) / e.value;
                } else if (e.kind == ElementKind::current_source) {
                    i = e.value;
                } else {
                    continue;
                }
                if (row[a] >= 0) r[static_cast<std::size_t>(row[a])] -= i;
                if (row[b] >= 0) r[static_cast<std::size_t>(row[b])] += i;
            }
            Eigen::VectorXd out(dim);
            for (int k = 0; k < dim; ++k) out[k] = static_cast<double>(r[static_cast<std::size_t>(k)]);
            return out;
        };
        for (int round = 0; round < 3; ++round) x += ldlt.solve(residual());
        if (!x.allFinite()) return std::nullopt;
    }

    DcSolution sol;
    sol.node_voltage.assign(n, 0.0);
    for (std::uint32_t k = 1; k < n; ++k) {
        const std::uint32_t root = find(k);
        sol.node_voltage[k] = row[root] >= 0 ? x[row[root]] : pinned[root];
    }

    // Known currents first; the net injection they leave at each node is carried
    // by the inductor and source branches, which form a forest.
    sol.element_current.assign(elements.size(), 0.0);
    std::vector<double> excess(n, 0.0);  // current leaving each node through known elements
    std::vector<std::vector<std::pair<std::uint32_t, std::size_t>>> adjacent(n);
    for (std::size_t k = 0; k < elements.size(); ++k) {
        const auto& e = elements[k];
        double i = 0.0;
        switch (e.kind) {
            case ElementKind::resistor: i = (sol.node_voltage[e.a.value] - sol.node_voltage[e.b.value]) / e.value; break;
            case ElementKind::current_source: i = e.value; break;
            case ElementKind::capacitor: break;
            case ElementKind::inductor:
            case ElementKind::voltage_source:
                if (e.a == e.b) return std::nullopt;
                adjacent[e.a.value].emplace_back(e.b.value, k);
                adjacent[e.b.value].emplace_back(e.a.value, k);
                continue;
        }
        sol.element_current[k] = i;
        excess[e.a.value] += i;
        excess[e.b.value] -= i;
    }
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> via(n, 0);
    std::vector<std::uint32_t> order;
    for (std::uint32_t start : std::views::iota(0u, static_cast<std::uint32_t>(n))) {
        if (seen[start] || (start != 0 && adjacent[start].empty())) continue;
        const std::size_t first = order.size();
        seen[start] = 1;
        order.push_back(start);
        for (std::size_t q = first; q < order.size(); ++q) {
            const std::uint32_t u = order[q];
            for (const auto& [w, k] : adjacent[u]) {
                if (k == via[u] && q != first) continue;
                if (seen[w]) return std::nullopt;  // loop of shorts: split is undetermined
                seen[w] = 1;
                via[w] = k;
                order.push_back(w);
            }
        }
        // Peel leaves towards the component root.
        for (std::size_t q = order.size(); q-- > first + 1;) {
            const std::uint32_t u = order[q];
            const std::size_t k = via[u];
            const auto& e = elements[k];
            // Branch current must cancel the excess leaving u.
            const double i = e.a.value == u ? -excess[u] : excess[u];
            sol.element_current[k] = i;
            excess[e.a.value] += i;
            excess[e.b.value] -= i;
        }
    }
    return sol;
}

}  // namespace

DcSolution dc_solve(const Netlist& netlist) {
    check_grounded(netlist, AnalysisMode::dc);
    if (auto reduced = reduced_dc_solve(netlist)) {
        for (const auto& e : netlist.elements()) {
            if (e.kind == ElementKind::current_source) reduced->total_load_a += std::abs(e.value);
        }
        reduced->max_kcl_residual_a = kcl_residual(netlist, reduced->element_current);
        return *reduced;
    }
    return mna_dc_solve(netlist);
}

DcSolution mna_dc_solve(const Netlist& netlist) {
    const MnaSystem sys = stamp_mna(netlist, AnalysisMode::dc);

    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(sys.matrix);
    lu.factorize(sys.matrix);
    if (lu.info() != Eigen::Success) {
        throw SolverError("dc: numerically singular system (" + lu.lastErrorMessage() +
                          "); check for loops of voltage sources and inductors");
    }
    Eigen::VectorXd x = lu.solve(sys.rhs);
    // Two rounds of refinement tighten KCL on the widely scaled conductances.
    for (int round = 0; round < 2; ++round) {
        const Eigen::VectorXd r = sys.rhs - sys.matrix * x;
        x += lu.solve(r);
    }
    if (!x.allFinite()) throw SolverError("dc: solution is not finite; the system is singular");

    DcSolution sol;
    sol.node_voltage.assign(netlist.node_count(), 0.0);
    for (std::size_t k = 1; k < netlist.node_count(); ++k) sol.node_voltage[k] = x[sys.node_row[k]];
    sol.element_current = element_currents(netlist, sys, x, sol.node_voltage);
    for (const auto& e : netlist.elements()) {
        if (e.kind == ElementKind::current_source) sol.total_load_a += std::abs(e.value);
    }
    sol.max_kcl_residual_a = kcl_residual(netlist, sol.element_current);
    return sol;
}

}  // namespace pdn

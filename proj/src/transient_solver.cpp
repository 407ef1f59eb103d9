#include "pdn/mna.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <sstream>

namespace pdn {

double Stimulus::ramp(double t) const {
    if (t <= 0.0) return 0.0;
    if (rise_time_s <= 0.0 || t >= rise_time_s) return 1.0;
    return t / rise_time_s;
}

double Stimulus::source_value(SourceRole role, double nominal, double t) const {
    switch (kind) {
        case StimulusKind::dc: return nominal;
        case StimulusKind::supply_step:
            return role == SourceRole::supply ? v_start + (v_end - v_start) * ramp(t) : nominal;
        case StimulusKind::load_step:
            if (role != SourceRole::load) return nominal;
            return nominal * (load_start_fraction + (1.0 - load_start_fraction) * ramp(t));
    }
    return nominal;
}

const std::vector<double>& TransientWaveform::probe(const std::string& name) const {
    auto it = std::find(probe_names.begin(), probe_names.end(), name);
    if (it == probe_names.end()) throw std::out_of_range("waveform has no probe '" + name + "'");
    return series[static_cast<std::size_t>(it - probe_names.begin())];
}

Netlist freeze_sources(const Netlist& netlist, const Stimulus& stimulus, double t) {
    Netlist frozen;
    for (std::size_t k = 1; k < netlist.node_count(); ++k) frozen.add_node(netlist.nodes()[k].name);
    for (auto e : netlist.elements()) {
        if (e.kind == ElementKind::current_source || e.kind == ElementKind::voltage_source) {
            e.value = stimulus.source_value(e.role, e.value, t);
        }
        frozen.add_element(std::move(e));
    }
    for (const auto& [name, id] : netlist.probes()) frozen.add_probe(name, id);
    return frozen;
}

namespace {

struct Coupling {
    int row;
    double g;
    std::uint32_t fixed_node;
};

struct Reactive {
    std::uint32_t a;
    std::uint32_t b;
    double value;  // C or L
    double v = 0.0;
    double i = 0.0;
};

struct LoadTerm {
    int row_a;
    int row_b;
    double nominal;
    SourceRole role;
};

struct FloatingSource {
    int row;
    double nominal;
    SourceRole role;
};

struct FixedNode {
    std::uint32_t node;
    double sign;  // +1 when the node is the + terminal
    double nominal;
    SourceRole role;
    std::size_t element;
};

/// Factorised system for one integration method.
class Factor {
public:
    Factor(const Eigen::SparseMatrix<double>& m, bool definite) : definite_(definite) {
        if (definite_) {
            ldlt_ = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>(m);
            if (ldlt_->info() != Eigen::Success) throw SolverError("transient: factorisation failed");
        } else {
            lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
            lu_->analyzePattern(m);
            lu_->factorize(m);
            if (lu_->info() != Eigen::Success) throw SolverError("transient: factorisation failed");
        }
    }
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
        if (definite_) return ldlt_->solve(b);
        return lu_->solve(b);
    }

private:
    bool definite_;
    std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt_;
    std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

class Engine {
public:
    Engine(const Netlist& netlist, const Stimulus& stimulus, const TransientOptions& options)
        : netlist_(netlist), stimulus_(stimulus), options_(options) {
        classify();
    }

    TransientWaveform run();

private:
    void classify();
    Eigen::SparseMatrix<double> assemble(Integrator method);
    double fixed_voltage(const FixedNode& f, double t) const {
        return f.sign * stimulus_.source_value(f.role, f.nominal, t);
    }
    void initial_state();
    void step(const Factor& factor, Integrator method, double t_next);
    void record(TransientWaveform& w, double t) const;

    const Netlist& netlist_;
    Stimulus stimulus_;
    TransientOptions options_;

    std::vector<int> row_;             // per node, -1 when not an unknown
    std::vector<int> fixed_of_node_;   // per node, index into fixed_ or -1
    std::vector<FixedNode> fixed_;
    std::vector<FloatingSource> floating_;
    std::vector<std::size_t> floating_element_;
    std::vector<Reactive> caps_;
    std::vector<Reactive> inds_;
    std::vector<LoadTerm> loads_;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> resistors_;  // node pair
    std::vector<double> resistor_g_;
    std::vector<Coupling> couplings_;
    int dimension_ = 0;

    std::vector<double> v_;  // node voltages
    Eigen::VectorXd rhs_;
    std::vector<std::uint32_t> probe_nodes_;
    std::vector<std::uint32_t> envelope_nodes_;
    double divergence_limit_ = 0.0;
};

void Engine::classify() {
    const auto& nodes = netlist_.nodes();
    const auto& elements = netlist_.elements();
    fixed_of_node_.assign(nodes.size(), -1);
    for (std::size_t k = 0; k < elements.size(); ++k) {
        const auto& e = elements[k];
        if (e.kind != ElementKind::voltage_source) continue;
        const bool a_ground = e.a == ground_node;
        const bool b_ground = e.b == ground_node;
        const std::uint32_t other = a_ground ? e.b.value : e.a.value;
        if ((a_ground != b_ground) && fixed_of_node_[other] < 0) {
            fixed_of_node_[other] = static_cast<int>(fixed_.size());
            fixed_.push_back({other, a_ground ? -1.0 : 1.0, e.value, e.role, k});
        } else {
            floating_element_.push_back(k);
        }
    }
    row_.assign(nodes.size(), -1);
    int next = 0;
    for (std::size_t k = 1; k < nodes.size(); ++k) {
        if (fixed_of_node_[k] < 0) row_[k] = next++;
    }
    for (auto k : floating_element_) {
        floating_.push_back({next++, elements[k].value, elements[k].role});
    }
    dimension_ = next;

    double supply = 0.0;
    for (const auto& e : elements) {
        switch (e.kind) {
            case ElementKind::capacitor: caps_.push_back({e.a.value, e.b.value, e.value}); break;
            case ElementKind::inductor: inds_.push_back({e.a.value, e.b.value, e.value}); break;
            case ElementKind::resistor:
                resistors_.emplace_back(e.a.value, e.b.value);
                resistor_g_.push_back(1.0 / e.value);
                break;
            case ElementKind::current_source:
                loads_.push_back({row_[e.a.value], row_[e.b.value], e.value, e.role});
                break;
            case ElementKind::voltage_source:
                supply = std::max({supply, std::abs(e.value), std::abs(stimulus_.v_end), std::abs(stimulus_.v_start)});
                break;
        }
    }
    divergence_limit_ = options_.divergence_factor * (supply > 0.0 ? supply : 1.0);

    for (const auto& name : options_.probes) {
        std::optional<NodeId> id;
        for (const auto& [probe, node] : netlist_.probes()) {
            if (probe == name) id = node;
        }
        if (!id) id = netlist_.find_node(name);
        if (!id) throw SolverError("transient: unknown probe '" + name + "'");
        probe_nodes_.push_back(id->value);
    }
    for (const auto& [probe, node] : netlist_.probes()) envelope_nodes_.push_back(node.value);
}

Eigen::SparseMatrix<double> Engine::assemble(Integrator method) {
    const double dt = options_.dt_s;
    const double trap = method == Integrator::trapezoidal ? 2.0 : 1.0;
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve((resistors_.size() + caps_.size() + inds_.size()) * 4 + floating_.size() * 4);
    couplings_.clear();

    auto conductance = [&](std::uint32_t a, std::uint32_t b, double g) {
        const int ra = row_[a];
        const int rb = row_[b];
        if (ra >= 0) triplets.emplace_back(ra, ra, g);
        if (rb >= 0) triplets.emplace_back(rb, rb, g);
        if (ra >= 0 && rb >= 0) {
            triplets.emplace_back(ra, rb, -g);
            triplets.emplace_back(rb, ra, -g);
        }
        if (ra >= 0 && fixed_of_node_[b] >= 0) couplings_.push_back({ra, g, b});
        if (rb >= 0 && fixed_of_node_[a] >= 0) couplings_.push_back({rb, g, a});
    };
    for (std::size_t k = 0; k < resistors_.size(); ++k) {
        conductance(resistors_[k].first, resistors_[k].second, resistor_g_[k]);
    }
    for (const auto& c : caps_) conductance(c.a, c.b, trap * c.value / dt);
    for (const auto& l : inds_) conductance(l.a, l.b, dt / (trap * l.value));
    const auto& elements = netlist_.elements();
    for (std::size_t s = 0; s < floating_.size(); ++s) {
        const auto& e = elements[floating_element_[s]];
        const int row = floating_[s].row;
        const int ra = row_[e.a.value];
        const int rb = row_[e.b.value];
        if (ra >= 0) {
            triplets.emplace_back(ra, row, 1.0);
            triplets.emplace_back(row, ra, 1.0);
        }
        if (rb >= 0) {
            triplets.emplace_back(rb, row, -1.0);
            triplets.emplace_back(row, rb, -1.0);
        }
        if (fixed_of_node_[e.a.value] >= 0 || fixed_of_node_[e.b.value] >= 0) {
            throw SolverError("transient: source '" + e.label + "' is tied to a regulator-driven node");
        }
    }
    Eigen::SparseMatrix<double> m(dimension_, dimension_);
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.makeCompressed();
    return m;
}

void Engine::initial_state() {
    v_.assign(netlist_.node_count(), 0.0);
    InitialState initial = options_.initial;
    if (initial == InitialState::automatic) {
        initial = stimulus_.kind == StimulusKind::supply_step ? InitialState::cold : InitialState::operating_point;
    }
    if (initial == InitialState::cold) {
        for (auto& c : caps_) c.v = c.i = 0.0;
        for (auto& l : inds_) l.v = l.i = 0.0;
        for (const auto& f : fixed_) v_[f.node] = fixed_voltage(f, 0.0);
        return;
    }
    const DcSolution op = dc_solve(freeze_sources(netlist_, stimulus_, 0.0));
    v_ = op.node_voltage;
    std::size_t ci = 0;
    std::size_t li = 0;
    const auto& elements = netlist_.elements();
    for (std::size_t k = 0; k < elements.size(); ++k) {
        if (elements[k].kind == ElementKind::capacitor) {
            auto& c = caps_[ci++];
            c.v = v_[c.a] - v_[c.b];
            c.i = 0.0;
        } else if (elements[k].kind == ElementKind::inductor) {
            auto& l = inds_[li++];
            l.v = 0.0;
            l.i = op.element_current[k];
        }
    }
}

void Engine::step(const Factor& factor, Integrator method, double t_next) {
    const double dt = options_.dt_s;
    const bool trap = method == Integrator::trapezoidal;
    const double scale = trap ? 2.0 : 1.0;
    rhs_.setZero();
    for (const auto& s : loads_) {
        const double value = stimulus_.source_value(s.role, s.nominal, t_next);
        if (s.row_a >= 0) rhs_[s.row_a] -= value;
        if (s.row_b >= 0) rhs_[s.row_b] += value;
    }
    for (const auto& f : fixed_) v_[f.node] = fixed_voltage(f, t_next);
    for (const auto& c : couplings_) rhs_[c.row] += c.g * v_[c.fixed_node];
    for (auto& c : caps_) {
        const double g = scale * c.value / dt;
        const double j = trap ? g * c.v + c.i : g * c.v;
        if (row_[c.a] >= 0) rhs_[row_[c.a]] += j;
        if (row_[c.b] >= 0) rhs_[row_[c.b]] -= j;
        c.i = -j;  // completed after the solve
    }
    for (auto& l : inds_) {
        const double g = dt / (scale * l.value);
        const double h = trap ? l.i + g * l.v : l.i;
        if (row_[l.a] >= 0) rhs_[row_[l.a]] -= h;
        if (row_[l.b] >= 0) rhs_[row_[l.b]] += h;
        l.i = h;
    }
    for (const auto& s : floating_) rhs_[s.row] = stimulus_.source_value(s.role, s.nominal, t_next);

    const Eigen::VectorXd x = factor.solve(rhs_);
    for (std::size_t k = 1; k < v_.size(); ++k) {
        if (row_[k] >= 0) v_[k] = x[row_[k]];
    }
    for (auto& c : caps_) {
        c.v = v_[c.a] - v_[c.b];
        c.i += scale * c.value / dt * c.v;
    }
    for (auto& l : inds_) {
        l.v = v_[l.a] - v_[l.b];
        l.i += dt / (scale * l.value) * l.v;
    }
}

void Engine::record(TransientWaveform& w, double t) const {
    w.time_s.push_back(t);
    std::size_t s = 0;
    for (auto node : probe_nodes_) w.series[s++].push_back(v_[node]);
    if (options_.record_envelope) {
        double lowest = envelope_nodes_.empty() ? 0.0 : v_[envelope_nodes_.front()];
        for (auto node : envelope_nodes_) lowest = std::min(lowest, v_[node]);
        w.series[s].push_back(lowest);
    }
}

TransientWaveform Engine::run() {
    if (!(options_.dt_s > 0.0)) throw SolverError("transient: dt must be > 0");
    if (!(options_.t_end_s > 0.0)) throw SolverError("transient: t_end must be > 0");
    if (options_.record_stride < 1) throw SolverError("transient: record stride must be >= 1");
    if (stimulus_.kind != StimulusKind::dc && !(stimulus_.rise_time_s > 0.0)) {
        throw SolverError("transient: step stimulus needs rise_time > 0");
    }
    stamp_mna(netlist_, AnalysisMode::transient, options_.dt_s, options_.method);  // structural check

    TransientWaveform w;
    w.method = options_.method;
    w.dt_s = options_.dt_s;
    w.stimulus = stimulus_;
    for (const auto& name : options_.probes) w.probe_names.push_back(name);
    if (options_.record_envelope) w.probe_names.emplace_back("chip_min");
    w.series.resize(w.probe_names.size());

    initial_state();
    rhs_ = Eigen::VectorXd::Zero(dimension_);
    const bool definite = floating_.empty();
    const auto steps = static_cast<long>(std::llround(options_.t_end_s / options_.dt_s));
    const auto reserve = static_cast<std::size_t>(steps / options_.record_stride + 2);
    w.time_s.reserve(reserve);
    for (auto& s : w.series) s.reserve(reserve);
    record(w, 0.0);

    const Factor main(assemble(options_.method), definite);
    // Inconsistent cold-start currents would ring under the trapezoidal rule; one
    // backward Euler step damps them.
    std::unique_ptr<Factor> startup;
    const bool cold = options_.initial == InitialState::cold ||
                      (options_.initial == InitialState::automatic && stimulus_.kind == StimulusKind::supply_step);
    if (cold && options_.method == Integrator::trapezoidal) {
        startup = std::make_unique<Factor>(assemble(Integrator::backward_euler), definite);
        assemble(options_.method);  // restore couplings for the main matrix
    }

    for (long n = 1; n <= steps; ++n) {
        const double t = static_cast<double>(n) * options_.dt_s;
        if (n == 1 && startup) {
            step(*startup, Integrator::backward_euler, t);
        } else {
            step(main, options_.method, t);
        }
        for (std::size_t k = 1; k < v_.size(); ++k) {
            if (!(std::abs(v_[k]) <= divergence_limit_)) {
                std::ostringstream os;
                os << "transient diverged at t=" << t << " s on node " << netlist_.nodes()[k].name << " (|v|="
                   << std::abs(v_[k]) << " V > " << divergence_limit_ << " V) with method "
                   << (options_.method == Integrator::trapezoidal ? "trapezoidal" : "backward Euler") << ", dt=" << options_.dt_s << " s; reduce dt or use --method be";
                throw SolverError(os.str());
            }
        }
        if (n % options_.record_stride == 0) record(w, t);
    }

    w.final_node_voltage = v_;
    const auto& elements = netlist_.elements();
    w.final_element_current.assign(elements.size(), 0.0);
    std::size_t ci = 0;
    std::size_t li = 0;
    std::size_t ri = 0;
    for (std::size_t k = 0; k < elements.size(); ++k) {
        const auto& e = elements[k];
        switch (e.kind) {
            case ElementKind::resistor: w.final_element_current[k] = (v_[e.a.value] - v_[e.b.value]) * resistor_g_[ri++]; break;
            case ElementKind::capacitor: w.final_element_current[k] = caps_[ci++].i; break;
            case ElementKind::inductor: w.final_element_current[k] = inds_[li++].i; break;
            case ElementKind::current_source:
                w.final_element_current[k] = stimulus_.source_value(e.role, e.value, options_.t_end_s);
                break;
            case ElementKind::voltage_source: break;
        }
    }
    // Source currents from KCL at their + terminal.
    for (std::size_t k = 0; k < elements.size(); ++k) {
        const auto& e = elements[k];
        if (e.kind != ElementKind::voltage_source) continue;
        const std::uint32_t node = e.a == ground_node ? e.b.value : e.a.value;
        double leaving = 0.0;
        for (std::size_t m = 0; m < elements.size(); ++m) {
            if (m == k) continue;
            if (elements[m].a.value == node) leaving += w.final_element_current[m];
            if (elements[m].b.value == node) leaving -= w.final_element_current[m];
        }
        w.final_element_current[k] = e.a == ground_node ? leaving : -leaving;
    }
    return w;
}

}  // namespace

TransientWaveform transient_solve(const Netlist& netlist, const Stimulus& stimulus, const TransientOptions& options) {
    Engine engine(netlist, stimulus, options);
    return engine.run();
}

}  // namespace pdn

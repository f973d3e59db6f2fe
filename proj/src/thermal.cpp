#include "powertherm/thermal.hpp"

#include "powertherm/csv.hpp"
#include "powertherm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

namespace powertherm {

std::string to_string(InjectionRole role)
{
    switch (role) {
    case InjectionRole::Cpu: return "CPU";
    case InjectionRole::Transceiver: return "TRANSCEIVER";
    case InjectionRole::Base: return "BASE";
    }
    throw ConfigError("unknown injection role");
}

InjectionRole injection_role_from_string(std::string_view text)
{
    if (text == "CPU") return InjectionRole::Cpu;
    if (text == "TRANSCEIVER") return InjectionRole::Transceiver;
    if (text == "BASE") return InjectionRole::Base;
    throw ConfigError("unknown injection role '" + std::string(text) +
                      "' (expected CPU, TRANSCEIVER or BASE)");
}

void ThermalNetwork::validate() const
{
    if (nodes.empty()) {
        throw ConfigError("thermal network has no nodes");
    }
    std::set<std::string> ids;
    for (const auto& node : nodes) {
        if (node.id.empty() || node.id == kAmbientName) {
            throw ConfigError("invalid node id '" + node.id + "'");
        }
        if (!ids.insert(node.id).second) {
            throw ConfigError("duplicate node id '" + node.id + "'");
        }
        if (!(node.heat_capacity_j_per_c > 0.0) || !std::isfinite(node.heat_capacity_j_per_c)) {
            throw ConfigError("node '" + node.id + "' needs a positive heat capacity");
        }
    }

    auto known = [&](const std::string& id) {
        return id == kAmbientName || ids.count(id) > 0;
    };
    // Adjacency over node ids; AMBIENT is the boundary.
    std::map<std::string, std::vector<std::string>> adjacent;
    bool any_ambient_link = false;
    for (const auto& r : resistors) {
        if (!known(r.node_a) || !known(r.node_b)) {
            throw ConfigError("resistor references unknown node '" +
                              (known(r.node_a) ? r.node_b : r.node_a) + "'");
        }
        if (r.node_a == r.node_b) {
            throw ConfigError("resistor connects node '" + r.node_a + "' to itself");
        }
        if (!(r.resistance_c_per_w > 0.0) || !std::isfinite(r.resistance_c_per_w)) {
            throw ConfigError("resistor " + r.node_a + "-" + r.node_b +
                              " needs a positive resistance");
        }
        adjacent[r.node_a].push_back(r.node_b);
        adjacent[r.node_b].push_back(r.node_a);
        if (r.node_a == kAmbientName || r.node_b == kAmbientName) {
            any_ambient_link = true;
        }
    }
    if (!any_ambient_link) {
        throw ConfigError("no resistor connects the network to AMBIENT");
    }

    // Every node must reach AMBIENT.
    std::set<std::string> reached;
    std::deque<std::string> frontier{std::string(kAmbientName)};
    reached.insert(std::string(kAmbientName));
    while (!frontier.empty()) {
        const std::string id = frontier.front();
        frontier.pop_front();
        for (const auto& next : adjacent[id]) {
            if (reached.insert(next).second) {
                frontier.push_back(next);
            }
        }
    }
    for (const auto& node : nodes) {
        if (!reached.count(node.id)) {
            throw ConfigError("node '" + node.id + "' is not connected to AMBIENT");
        }
    }

    for (const auto& [id, role] : injections) {
        if (!ids.count(id)) {
            throw ConfigError("injection role " + to_string(role) +
                              " assigned to unknown node '" + id + "'");
        }
    }
    if (skin_node.empty()) {
        throw ConfigError("no skin node designated");
    }
    if (!ids.count(skin_node)) {
        throw ConfigError("skin node '" + skin_node + "' is not a network node");
    }
}

std::size_t ThermalNetwork::node_index(std::string_view id) const
{
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].id == id) {
            return i;
        }
    }
    throw ConfigError("unknown node '" + std::string(id) + "'");
}

std::string ThermalNetwork::node_for_role(InjectionRole role) const
{
    for (const auto& [id, r] : injections) {
        if (r == role) {
            return id;
        }
    }
    throw ConfigError("network has no node with injection role " + to_string(role));
}

ThermalNetwork ThermalNetwork::load(std::istream& in, const std::string& source_name)
{
    ThermalNetwork net;
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& msg) -> void {
        throw IoError(source_name + ":" + std::to_string(line_no) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream tokens(line);
        std::string kind;
        if (!(tokens >> kind) || kind[0] == '#') {
            continue;
        }
        try {
            if (kind == "node") {
                ThermalNode node;
                std::string cap;
                if (!(tokens >> node.id >> cap)) {
                    fail("expected: node <id> <heat_capacity_j_per_c>");
                }
                node.heat_capacity_j_per_c = csv::parse_double(cap);
                net.nodes.push_back(std::move(node));
            } else if (kind == "resistor") {
                ThermalResistor r;
                std::string res;
                if (!(tokens >> r.node_a >> r.node_b >> res)) {
                    fail("expected: resistor <a> <b|AMBIENT> <resistance_c_per_w>");
                }
                r.resistance_c_per_w = csv::parse_double(res);
                net.resistors.push_back(std::move(r));
            } else if (kind == "inject") {
                std::string id;
                std::string role;
                if (!(tokens >> id >> role)) {
                    fail("expected: inject <node> <CPU|TRANSCEIVER|BASE>");
                }
                if (!net.injections.emplace(id, injection_role_from_string(role)).second) {
                    fail("node '" + id + "' already has an injection role");
                }
            } else if (kind == "skin") {
                if (!(tokens >> net.skin_node)) {
                    fail("expected: skin <node>");
                }
            } else {
                fail("unknown directive '" + kind + "'");
            }
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        } catch (const ConfigError& e) {
            fail(e.what());
        }
    }
    try {
        net.validate();
    } catch (const ConfigError& e) {
        throw IoError(source_name + ": " + e.what());
    }
    return net;
}

ThermalNetwork ThermalNetwork::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open thermal network file: " + path.string());
    }
    return load(in, path.string());
}

void ThermalNetwork::save(std::ostream& out) const
{
    out << "# thermal network\n";
    for (const auto& node : nodes) {
        out << "node " << node.id << " " << csv::format_double(node.heat_capacity_j_per_c)
            << "\n";
    }
    for (const auto& r : resistors) {
        out << "resistor " << r.node_a << " " << r.node_b << " "
            << csv::format_double(r.resistance_c_per_w) << "\n";
    }
    for (const auto& [id, role] : injections) {
        out << "inject " << id << " " << to_string(role) << "\n";
    }
    out << "skin " << skin_node << "\n";
    if (!out) {
        throw IoError("failed writing thermal network");
    }
}

void ThermalNetwork::save(const std::filesystem::path& path) const
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    save(out);
}

ThermalNetwork default_phone_network(double r4_c_per_mw, const DefaultNetworkOptions& opts)
{
    if (!(r4_c_per_mw > 0.0)) {
        throw ConfigError("r4_c_per_mw must be > 0");
    }
    ThermalNetwork net;
    net.nodes = {{"cpu", opts.source_capacity_j_per_c},
                 {"transceiver", opts.source_capacity_j_per_c},
                 {"base", opts.source_capacity_j_per_c},
                 {"skin", opts.skin_capacity_j_per_c}};
    net.resistors = {{"cpu", "skin", opts.internal_resistance_c_per_w},
                     {"transceiver", "skin", opts.internal_resistance_c_per_w},
                     {"base", "skin", opts.internal_resistance_c_per_w},
                     {"skin", std::string(kAmbientName), c_per_w_from_c_per_mw(r4_c_per_mw)}};
    net.injections = {{"cpu", InjectionRole::Cpu},
                      {"transceiver", InjectionRole::Transceiver},
                      {"base", InjectionRole::Base}};
    net.skin_node = "skin";
    net.validate();
    return net;
}

void SteadyThermalModel::validate() const
{
    if (!(r4_c_per_mw > 0.0) || !std::isfinite(r4_c_per_mw)) {
        throw ConfigError("r4_c_per_mw must be > 0");
    }
    if (!std::isfinite(throttle_threshold_c)) {
        throw ConfigError("throttle_threshold_c must be finite");
    }
}

R4Fit estimate_r4(std::span<const SteadySample> samples)
{
    if (samples.empty()) {
        throw ConfigError("estimate_r4 needs at least one sample");
    }
    std::vector<double> rise_c;
    std::vector<double> power_mw;
    R4Fit fit;
    fit.n_samples = samples.size();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const SteadySample& s = samples[i];
        if (!std::isfinite(s.skin_temp_c) || !std::isfinite(s.ambient_temp_c)) {
            throw ConfigError("steady sample temperatures must be finite");
        }
        if (!(s.total_power_mw > 0.0) || !std::isfinite(s.total_power_mw)) {
            throw ConfigError("steady sample total_power_mw must be > 0");
        }
        if (s.skin_temp_c < s.ambient_temp_c) {
            fit.warnings.push_back("sample " + std::to_string(i) +
                                   ": skin temperature below ambient");
        }
        rise_c.push_back(s.skin_temp_c - s.ambient_temp_c);
        power_mw.push_back(s.total_power_mw);
    }

    fit.r4_c_per_mw = fit_through_origin(power_mw, rise_c);
    if (!(fit.r4_c_per_mw > 0.0)) {
        throw FitError("estimated R4 = " + std::to_string(fit.r4_c_per_mw) +
                       " C/mW is not a physical resistance");
    }

    std::vector<double> predicted(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        predicted[i] = fit.r4_c_per_mw * power_mw[i];
    }
    fit.residual_rmse_c = rmse(predicted, rise_c);
    return fit;
}

double skin_temp_steady(const SteadyThermalModel& model, double p_tot_mw, double t_amb_c)
{
    model.validate();
    if (p_tot_mw < 0.0) {
        throw ConfigError("p_tot_mw must be >= 0");
    }
    return t_amb_c + model.r4_c_per_mw * p_tot_mw;
}

namespace {

// Grounded Laplacian L (conductances, W/C) and the ambient coupling vector.
void build_conductance(const ThermalNetwork& net, std::vector<double>& laplacian,
                       std::vector<double>& g_ambient)
{
    const std::size_t n = net.nodes.size();
    laplacian.assign(n * n, 0.0);
    g_ambient.assign(n, 0.0);
    for (const auto& r : net.resistors) {
        const double g = 1.0 / r.resistance_c_per_w;
        const bool a_ambient = r.node_a == kAmbientName;
        const bool b_ambient = r.node_b == kAmbientName;
        if (a_ambient || b_ambient) {
            const std::size_t i = net.node_index(a_ambient ? r.node_b : r.node_a);
            laplacian[i * n + i] += g;
            g_ambient[i] += g;
        } else {
            const std::size_t i = net.node_index(r.node_a);
            const std::size_t j = net.node_index(r.node_b);
            laplacian[i * n + i] += g;
            laplacian[j * n + j] += g;
            laplacian[i * n + j] -= g;
            laplacian[j * n + i] -= g;
        }
    }
}

std::vector<double> injections_in_watts(const ThermalNetwork& net,
                                        const std::map<std::string, double>& injected_powers_mw)
{
    std::vector<double> p_w(net.nodes.size(), 0.0);
    for (const auto& [id, p_mw] : injected_powers_mw) {
        if (!std::isfinite(p_mw) || p_mw < 0.0) {
            throw ConfigError("injected power at node '" + id + "' must be >= 0");
        }
        p_w[net.node_index(id)] += watts_from_milliwatts(p_mw);
    }
    return p_w;
}

} // namespace

std::map<std::string, double> steady_state_temps(const ThermalNetwork& net,
                                                 const std::map<std::string, double>& injected_powers_mw,
                                                 double t_amb_c)
{
    net.validate();
    const std::size_t n = net.nodes.size();

    std::vector<double> laplacian;
    std::vector<double> g_ambient;
    build_conductance(net, laplacian, g_ambient);
    const std::vector<double> p_w = injections_in_watts(net, injected_powers_mw);

    std::vector<std::string> labels;
    for (const auto& node : net.nodes) {
        labels.push_back(node.id);
    }
    DesignMatrix G(n, n, std::move(labels));
    G.values = laplacian;
    std::vector<double> rhs(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        rhs[i] = p_w[i] + g_ambient[i] * t_amb_c;
    }

    std::vector<double> temps;
    try {
        temps = HouseholderQr(G).solve(rhs);
    } catch (const FitError& e) {
        throw ConfigError(std::string("singular conductance system: ") + e.what());
    }

    std::map<std::string, double> out;
    for (std::size_t i = 0; i < n; ++i) {
        out[net.nodes[i].id] = temps[i];
    }
    return out;
}

TransientStepper::TransientStepper(const ThermalNetwork& net, double t_amb_c, double dt_s)
    : dt_s_(dt_s)
{
    net.validate();
    if (!(dt_s > 0.0) || !std::isfinite(dt_s)) {
        throw ConfigError("dt_s must be > 0");
    }
    if (!std::isfinite(t_amb_c)) {
        throw ConfigError("t_amb_c must be finite");
    }
    n_ = net.nodes.size();
    for (const auto& node : net.nodes) {
        node_ids_.push_back(node.id);
    }
    temps_.assign(n_, t_amb_c);
    injections_w_.assign(n_, 0.0);

    std::vector<double> laplacian;
    std::vector<double> g_ambient;
    build_conductance(net, laplacian, g_ambient);

    cap_over_dt_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        cap_over_dt_[i] = net.nodes[i].heat_capacity_j_per_c / dt_s;
    }
    rhs_const_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        rhs_const_[i] = g_ambient[i] * t_amb_c;
    }

    DesignMatrix M(n_, n_, node_ids_);
    M.values = laplacian;
    for (std::size_t i = 0; i < n_; ++i) {
        M.values[i * n_ + i] += cap_over_dt_[i];
    }
    step_matrix_ = std::make_unique<HouseholderQr>(M);
    if (!step_matrix_->full_rank()) {
        throw ConfigError("thermal step matrix is singular");
    }
}

void TransientStepper::set_injections_mw(const std::map<std::string, double>& injections_mw)
{
    injections_w_.assign(n_, 0.0);
    for (const auto& [id, p_mw] : injections_mw) {
        if (!std::isfinite(p_mw) || p_mw < 0.0) {
            throw ConfigError("injected power at node '" + id + "' must be >= 0");
        }
        auto it = std::find(node_ids_.begin(), node_ids_.end(), id);
        if (it == node_ids_.end()) {
            throw ConfigError("unknown node '" + id + "'");
        }
        injections_w_[static_cast<std::size_t>(it - node_ids_.begin())] +=
            watts_from_milliwatts(p_mw);
    }
}

void TransientStepper::step()
{
    // (C/dt + L) T_next = C/dt T + P + g_amb T_amb
    std::vector<double> rhs(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        rhs[i] = cap_over_dt_[i] * temps_[i] + injections_w_[i] + rhs_const_[i];
    }
    temps_ = step_matrix_->solve(rhs);
    for (double t : temps_) {
        if (!std::isfinite(t)) {
            throw FitError("transient integration produced a non-finite temperature");
        }
    }
    time_s_ += dt_s_;
}

double TransientStepper::temp_c(std::string_view node_id) const
{
    for (std::size_t i = 0; i < n_; ++i) {
        if (node_ids_[i] == node_id) {
            return temps_[i];
        }
    }
    throw ConfigError("unknown node '" + std::string(node_id) + "'");
}

void TransientStepper::set_temps_c(const std::map<std::string, double>& t0)
{
    for (const auto& [id, temp] : t0) {
        if (!std::isfinite(temp)) {
            throw ConfigError("initial temperature at node '" + id + "' must be finite");
        }
        auto it = std::find(node_ids_.begin(), node_ids_.end(), id);
        if (it == node_ids_.end()) {
            throw ConfigError("unknown node '" + id + "'");
        }
        temps_[static_cast<std::size_t>(it - node_ids_.begin())] = temp;
    }
}

TransientSeries simulate_transient(const ThermalNetwork& net,
                                   std::span<const PowerScheduleSegment> schedule,
                                   double t_amb_c,
                                   const std::map<std::string, double>& t0_temps,
                                   double dt_s,
                                   double duration_s)
{
    if (!(dt_s > 0.0)) {
        throw ConfigError("dt_s must be > 0");
    }
    if (!(duration_s >= dt_s)) {
        throw ConfigError("duration_s must be >= dt_s");
    }
    const double steps_exact = duration_s / dt_s;
    if (std::abs(steps_exact - std::round(steps_exact)) > 1e-9 * steps_exact) {
        throw ConfigError("duration_s must be an integer multiple of dt_s");
    }
    if (schedule.empty() || schedule.front().start_s > 0.0) {
        throw ConfigError("power schedule must cover t = 0");
    }
    for (std::size_t i = 1; i < schedule.size(); ++i) {
        if (schedule[i].start_s <= schedule[i - 1].start_s) {
            throw ConfigError("power schedule segments must have increasing start times");
        }
    }

    TransientStepper stepper(net, t_amb_c, dt_s);
    stepper.set_temps_c(t0_temps);

    TransientSeries series;
    series.node_ids = stepper.node_ids();
    const auto record = [&]() {
        series.t_s.push_back(stepper.time_s());
        series.temps_c.push_back(stepper.temps_c());
    };
    record();

    const auto n_steps = static_cast<std::size_t>(std::llround(duration_s / dt_s));
    std::size_t segment = 0;
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double t = static_cast<double>(k) * dt_s;
        while (segment + 1 < schedule.size() && schedule[segment + 1].start_s <= t) {
            ++segment;
        }
        stepper.set_injections_mw(schedule[segment].injections_mw);
        stepper.step();
        record();
    }
    return series;
}

void save_transient_csv(const TransientSeries& series, std::ostream& out)
{
    out << "t_s,node_id,temp_c\n";
    for (std::size_t k = 0; k < series.t_s.size(); ++k) {
        for (std::size_t i = 0; i < series.node_ids.size(); ++i) {
            out << csv::format_double(series.t_s[k]) << ',' << series.node_ids[i] << ','
                << csv::format_double(series.temps_c[k][i]) << '\n';
        }
    }
    if (!out) {
        throw IoError("failed writing transient series");
    }
}

void save_transient_csv(const TransientSeries& series, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    save_transient_csv(series, out);
}

} // namespace powertherm

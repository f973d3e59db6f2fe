#pragma once

#include "powertherm/estimation.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace powertherm {

// The thermal network is the electrical dual of an RC circuit: temperature
// plays voltage, power plays current, thermal resistance plays electrical
// resistance and heat capacity plays capacitance. Internal resistances are
// kept in C/W; the skin-to-ambient resistance is usually quoted in C/mW to
// match handset-scale magnitudes, hence the explicit converters.
constexpr double c_per_w_from_c_per_mw(double r_c_per_mw) { return r_c_per_mw * 1000.0; }
constexpr double c_per_mw_from_c_per_w(double r_c_per_w) { return r_c_per_w / 1000.0; }
constexpr double watts_from_milliwatts(double p_mw) { return p_mw / 1000.0; }

enum class InjectionRole { Cpu, Transceiver, Base };

std::string to_string(InjectionRole role);
InjectionRole injection_role_from_string(std::string_view text);

inline constexpr std::string_view kAmbientName = "AMBIENT";

struct ThermalNode {
    std::string id;
    double heat_capacity_j_per_c = 0.0;
};

struct ThermalResistor {
    std::string node_a;
    std::string node_b; // node id or kAmbientName
    double resistance_c_per_w = 0.0;
};

struct ThermalNetwork {
    std::vector<ThermalNode> nodes;
    std::vector<ThermalResistor> resistors;
    std::map<std::string, InjectionRole> injections; // node id -> power source role
    std::string skin_node;

    // Positive capacities/resistances, known endpoints, every node reaches
    // AMBIENT, designated skin node exists. Throws ConfigError naming the
    // offending node.
    void validate() const;

    std::size_t node_index(std::string_view id) const; // throws if unknown
    std::string node_for_role(InjectionRole role) const;

    // Config file: `node <id> <heat_capacity_j_per_c>`,
    // `resistor <a> <b|AMBIENT> <resistance_c_per_w>`,
    // `inject <node> <CPU|TRANSCEIVER|BASE>`, `skin <node>`; '#' comments.
    static ThermalNetwork load(std::istream& in, const std::string& source_name);
    static ThermalNetwork load(const std::filesystem::path& path);
    void save(std::ostream& out) const;
    void save(const std::filesystem::path& path) const;
};

struct DefaultNetworkOptions {
    double internal_resistance_c_per_w = 0.5;
    double source_capacity_j_per_c = 15.0;
    double skin_capacity_j_per_c = 120.0;
};

// Minimal handset topology: cpu, transceiver and base nodes joined to a
// skin node, with the skin-to-ambient resistor carrying the full heat flow.
ThermalNetwork default_phone_network(double r4_c_per_mw,
                                     const DefaultNetworkOptions& opts = {});

// Steady-state abstraction: one resistance from skin to ambient plus the
// skin temperature at which throttling starts.
struct SteadyThermalModel {
    double r4_c_per_mw = 0.0;
    double throttle_threshold_c = 0.0;

    void validate() const;
};

struct SteadySample {
    double skin_temp_c = 0.0;
    double ambient_temp_c = 0.0;
    double total_power_mw = 0.0;
};

struct R4Fit {
    double r4_c_per_mw = 0.0;
    double residual_rmse_c = 0.0;
    std::size_t n_samples = 0;
    std::vector<std::string> warnings; // e.g. skin below ambient in a sample
};

// Through-origin regression of (skin - ambient) on total power. A fitted
// slope <= 0 is rejected as a non-physical resistance.
R4Fit estimate_r4(std::span<const SteadySample> samples);

// t_amb + r4 * p_tot.
double skin_temp_steady(const SteadyThermalModel& model, double p_tot_mw, double t_amb_c);

// Solves the nodal heat balance with capacitors dropped. Injections are in
// mW keyed by node id; nodes absent from the map inject nothing.
std::map<std::string, double> steady_state_temps(const ThermalNetwork& net,
                                                 const std::map<std::string, double>& injected_powers_mw,
                                                 double t_amb_c);

// Implicit-Euler integrator for the full RC network. The step matrix is
// factored once per (network, dt), so per-step cost is a pair of triangular
// solves. Unconditionally stable for any dt.
class TransientStepper {
public:
    TransientStepper(const ThermalNetwork& net, double t_amb_c, double dt_s);

    void set_injections_mw(const std::map<std::string, double>& injections_mw);
    void step();

    double time_s() const { return time_s_; }
    double temp_c(std::string_view node_id) const;
    const std::vector<std::string>& node_ids() const { return node_ids_; }
    const std::vector<double>& temps_c() const { return temps_; }
    void set_temps_c(const std::map<std::string, double>& t0);

private:
    std::vector<std::string> node_ids_;
    std::vector<double> temps_;
    std::vector<double> rhs_const_; // conductance-to-ambient * t_amb
    std::vector<double> injections_w_;
    std::vector<double> cap_over_dt_;
    std::unique_ptr<HouseholderQr> step_matrix_; // factored (C/dt + L)
    std::size_t n_ = 0;
    double dt_s_ = 0.0;
    double time_s_ = 0.0;
};

struct PowerScheduleSegment {
    double start_s = 0.0;
    std::map<std::string, double> injections_mw;
};

struct TransientSeries {
    std::vector<std::string> node_ids;
    std::vector<double> t_s;
    std::vector<std::vector<double>> temps_c; // [step][node]
};

// Piecewise-constant schedule must cover t = 0; initial temperatures default
// to ambient when t0_temps is empty. Emits the state at every multiple of
// dt_s from 0 to duration_s inclusive.
TransientSeries simulate_transient(const ThermalNetwork& net,
                                   std::span<const PowerScheduleSegment> schedule,
                                   double t_amb_c,
                                   const std::map<std::string, double>& t0_temps,
                                   double dt_s,
                                   double duration_s);

// Long-format CSV: t_s,node_id,temp_c.
void save_transient_csv(const TransientSeries& series, std::ostream& out);
void save_transient_csv(const TransientSeries& series, const std::filesystem::path& path);

} // namespace powertherm

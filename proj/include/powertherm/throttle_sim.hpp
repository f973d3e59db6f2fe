#pragma once

#include "powertherm/power_model.hpp"
#include "powertherm/thermal.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace powertherm {

// Piecewise-constant traffic/CPU demand. Segments are keyed by start time
// and must tile [0, duration) contiguously.
struct WorkloadSegment {
    double start_s = 0.0;
    double dl_demand_mbps = 0.0;
    double ul_demand_mbps = 0.0;
    double ut_pct = 0.0;
    double u6_pct = 0.0;
    double u7_pct = 0.0;
};

struct Workload {
    std::vector<WorkloadSegment> segments;
    double duration_s = 0.0;

    void validate() const;
    const WorkloadSegment& at(double t_s) const;
};

// Additive-increase / multiplicative-decrease policy on the granted
// downlink rate. Backoff triggers at skin >= threshold; recovery requires
// skin < threshold - hysteresis. threshold = +infinity disables throttling.
struct GovernorConfig {
    double threshold_c = 0.0;
    double hysteresis_c = 0.0;
    double control_period_s = 1.0;
    double backoff_factor = 0.5;     // in (0, 1)
    double recovery_step_mbps = 10.0;

    void validate() const;
};

struct SimStep {
    double t_s = 0.0;
    double offered_mbps = 0.0;
    double granted_mbps = 0.0;
    double power_mw = 0.0;
    double skin_temp_c = 0.0;
    bool throttled = false; // granted < offered at this step
};

struct SimSummary {
    // Mean granted rate over the trailing quarter of the run; absent when
    // the run is shorter than two control periods.
    std::optional<double> sustained_rate_mbps;
    double peak_temp_c = 0.0;
    std::optional<double> time_to_first_throttle_s;
    std::size_t throttle_events = 0; // number of backoff actions
};

struct SimResult {
    std::vector<SimStep> steps; // one per dt, t = 0 through duration inclusive
    SimSummary summary;
    double dt_s = 0.0;
    double control_period_s = 0.0;
    double duration_s = 0.0;
};

inline constexpr double kDefaultSettleFraction = 0.25;

// Drives the power model into the transient thermal network under the
// workload, applying the governor to the granted downlink rate once per
// control period (CPU load is never shed, uplink is never throttled).
// Requires dt_s <= control_period_s with both the control period and the
// workload duration integer multiples of dt_s. Deterministic.
SimResult run_closed_loop(const PowerModel& model, const ThermalNetwork& net,
                          const GovernorConfig& gov, const Workload& wl,
                          double t_amb_c, double dt_s);

// Mean granted rate over the trailing settle_fraction of the run. Requires
// 0 < settle_fraction < 1 and a run of at least two control periods.
double sustained_rate(const SimResult& result, double settle_fraction);

struct StressCell {
    std::string scenario; // idle, cpu_only, trans_only, both
    std::string freq_profile_id;
    double power_mw = 0.0;
    double skin_temp_c = 0.0;
};

// Steady power and steady skin temperature for {idle, CPU-only,
// transceiver-only, both} under the high- and low-frequency profile models.
// CPU-only runs with the 5G link inactive at full usage on every cluster;
// transceiver scenarios saturate the downlink.
std::vector<StressCell> run_stress_matrix(const ModelRegistry& registry, int channel_number,
                                          const std::string& high_profile_id,
                                          const std::string& low_profile_id,
                                          const ThermalNetwork& net, double t_amb_c,
                                          double saturation_rate_mbps = 2000.0);

// CSV: t_s,offered_mbps,granted_mbps,power_mw,skin_temp_c,throttled.
void save_sim_csv(const SimResult& result, std::ostream& out);
void save_sim_csv(const SimResult& result, const std::filesystem::path& path);

// Key-value footer: sustained_rate_mbps, peak_temp_c,
// time_to_first_throttle_s, throttle_events (absent optionals print none).
void save_sim_summary(const SimResult& result, std::ostream& out);
void save_sim_summary(const SimResult& result, const std::filesystem::path& path);

// CSV: scenario,freq_profile_id,power_mw,skin_temp_c.
void save_stress_csv(const std::vector<StressCell>& cells, std::ostream& out);
void save_stress_csv(const std::vector<StressCell>& cells, const std::filesystem::path& path);

} // namespace powertherm

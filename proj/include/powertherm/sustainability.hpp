#pragma once

#include "powertherm/power_model.hpp"
#include "powertherm/thermal.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace powertherm {

// Fixed CPU activity assumed while inverting the power model for the
// maximum non-throttling rate. Defaults to a fully idle CPU; exposed
// because real devices never idle at exactly zero.
struct CpuBaseline {
    double ut_pct = 0.0;
    double u6_pct = 0.0;
    double u7_pct = 0.0;

    void validate() const; // each percentage in [0, 100]
};

struct SustainabilityConfig {
    SteadyThermalModel steady;
    PowerModel power_model;
    double reference_power_mw = 5700.0;
    double link_cap_mbps = 2000.0;
    CpuBaseline cpu_baseline;

    void validate() const; // reference_power > 0, link_cap > 0
};

// Largest total power whose steady skin temperature stays at the throttle
// threshold: (threshold - t_amb) / r4. Ambient at or above the threshold
// leaves no positive budget and is a ConfigError.
double max_acceptable_power(const SteadyThermalModel& steady, double t_amb_c);

// Inverts the downlink term of the power model at UL = 0 under the CPU
// baseline: (p_max - power at zero rate) / alpha_d, clamped to
// [0, link_cap_mbps]. A budget below the zero-rate power clamps to 0.
double max_rate_without_throttling(const SustainabilityConfig& cfg, double t_amb_c);

// max(0, 1 - p_max / reference_power) * 100, capped at 100.
double percent_power_reduction(const SustainabilityConfig& cfg, double t_amb_c);

struct SustainabilityPoint {
    double ambient_temp_c = 0.0;
    // NaN on infeasible rows (ambient at or above the threshold).
    double p_max_mw = 0.0;
    double max_rate_mbps = 0.0;
    double pct_reduction = 0.0;
    bool feasible = true;
};

struct SustainabilityCurve {
    std::vector<SustainabilityPoint> rows;

    // Ambient strictly increasing; over feasible rows, p_max strictly
    // decreasing, max_rate nonincreasing, pct_reduction nondecreasing and
    // within [0, 100]. Throws FitError on violation.
    void validate() const;
};

// Evaluates the three functions at t_lo, t_lo + step, ... up to t_hi
// inclusive. Ambients at or above the threshold produce marked infeasible
// rows instead of failing the sweep. The returned curve is validated.
SustainabilityCurve sweep(const SustainabilityConfig& cfg, double t_amb_lo_c,
                          double t_amb_hi_c, double step_c);

// CSV: ambient_temp_c,p_max_mw,max_rate_mbps,pct_reduction,feasible.
// Infeasible rows carry empty numeric cells and feasible = 0.
void save_curve_csv(const SustainabilityCurve& curve, std::ostream& out);
void save_curve_csv(const SustainabilityCurve& curve, const std::filesystem::path& path);

} // namespace powertherm

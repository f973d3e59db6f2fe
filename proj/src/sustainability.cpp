#include "powertherm/sustainability.hpp"

#include "powertherm/csv.hpp"
#include "powertherm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace powertherm {

namespace {

void check_pct(double value, const char* name)
{
    if (!(value >= 0.0 && value <= 100.0)) {
        throw ConfigError(std::string(name) + " must be in [0, 100]");
    }
}

} // namespace

void CpuBaseline::validate() const
{
    check_pct(ut_pct, "cpu_baseline.ut_pct");
    check_pct(u6_pct, "cpu_baseline.u6_pct");
    check_pct(u7_pct, "cpu_baseline.u7_pct");
}

void SustainabilityConfig::validate() const
{
    steady.validate();
    power_model.validate();
    cpu_baseline.validate();
    if (!(reference_power_mw > 0.0)) {
        throw ConfigError("reference_power_mw must be > 0");
    }
    if (!(link_cap_mbps > 0.0)) {
        throw ConfigError("link_cap_mbps must be > 0");
    }
}

double max_acceptable_power(const SteadyThermalModel& steady, double t_amb_c)
{
    steady.validate();
    if (!(t_amb_c < steady.throttle_threshold_c)) {
        throw ConfigError("ambient " + csv::format_double(t_amb_c) +
                          " C is at or above the throttle threshold " +
                          csv::format_double(steady.throttle_threshold_c) +
                          " C; no positive power budget exists");
    }
    return (steady.throttle_threshold_c - t_amb_c) / steady.r4_c_per_mw;
}

namespace {

// Power drawn at the CPU baseline with the 5G link active but idle.
double zero_rate_power_mw(const SustainabilityConfig& cfg)
{
    TraceSample state;
    state.i5g = true;
    state.ut_pct = cfg.cpu_baseline.ut_pct;
    state.u6_pct = cfg.cpu_baseline.u6_pct;
    state.u7_pct = cfg.cpu_baseline.u7_pct;
    state.channel_number = cfg.power_model.key.channel_number;
    state.freq_profile_id = cfg.power_model.key.freq_profile_id;
    return predict_power(cfg.power_model, state);
}

} // namespace

double max_rate_without_throttling(const SustainabilityConfig& cfg, double t_amb_c)
{
    cfg.validate();
    if (!(cfg.power_model.alpha_d_mw_per_mbps > 0.0)) {
        throw FitError("alpha_d = " + csv::format_double(cfg.power_model.alpha_d_mw_per_mbps) +
                       " mW/Mbps is not invertible for a rate limit");
    }
    const double p_max_mw = max_acceptable_power(cfg.steady, t_amb_c);
    const double rate = (p_max_mw - zero_rate_power_mw(cfg)) / cfg.power_model.alpha_d_mw_per_mbps;
    return std::clamp(rate, 0.0, cfg.link_cap_mbps);
}

double percent_power_reduction(const SustainabilityConfig& cfg, double t_amb_c)
{
    cfg.validate();
    const double p_max_mw = max_acceptable_power(cfg.steady, t_amb_c);
    const double pct = (1.0 - p_max_mw / cfg.reference_power_mw) * 100.0;
    return std::clamp(pct, 0.0, 100.0);
}

void SustainabilityCurve::validate() const
{
    const SustainabilityPoint* prev_any = nullptr;
    const SustainabilityPoint* prev_feasible = nullptr;
    for (const auto& row : rows) {
        if (prev_any && !(row.ambient_temp_c > prev_any->ambient_temp_c)) {
            throw FitError("curve ambient temperatures must be strictly increasing");
        }
        prev_any = &row;
        if (!row.feasible) {
            continue;
        }
        if (!(row.pct_reduction >= 0.0 && row.pct_reduction <= 100.0)) {
            throw FitError("pct_reduction out of [0, 100] at ambient " +
                           csv::format_double(row.ambient_temp_c));
        }
        if (prev_feasible) {
            if (!(row.p_max_mw < prev_feasible->p_max_mw)) {
                throw FitError("p_max_mw must strictly decrease with ambient temperature");
            }
            if (row.max_rate_mbps > prev_feasible->max_rate_mbps) {
                throw FitError("max_rate_mbps must not increase with ambient temperature");
            }
            if (row.pct_reduction < prev_feasible->pct_reduction) {
                throw FitError("pct_reduction must not decrease with ambient temperature");
            }
        }
        prev_feasible = &row;
    }
}

SustainabilityCurve sweep(const SustainabilityConfig& cfg, double t_amb_lo_c,
                          double t_amb_hi_c, double step_c)
{
    cfg.validate();
    if (!(step_c > 0.0)) {
        throw ConfigError("step_c must be > 0");
    }
    if (!(t_amb_hi_c >= t_amb_lo_c)) {
        throw ConfigError("sweep range is empty (hi < lo)");
    }

    const auto n_rows =
        static_cast<std::size_t>(std::floor((t_amb_hi_c - t_amb_lo_c) / step_c + 1e-9)) + 1;
    SustainabilityCurve curve;
    curve.rows.reserve(n_rows);
    for (std::size_t k = 0; k < n_rows; ++k) {
        SustainabilityPoint row;
        row.ambient_temp_c = t_amb_lo_c + static_cast<double>(k) * step_c;
        if (row.ambient_temp_c < cfg.steady.throttle_threshold_c) {
            row.p_max_mw = max_acceptable_power(cfg.steady, row.ambient_temp_c);
            row.max_rate_mbps = max_rate_without_throttling(cfg, row.ambient_temp_c);
            row.pct_reduction = percent_power_reduction(cfg, row.ambient_temp_c);
            row.feasible = true;
        } else {
            row.p_max_mw = std::numeric_limits<double>::quiet_NaN();
            row.max_rate_mbps = std::numeric_limits<double>::quiet_NaN();
            row.pct_reduction = std::numeric_limits<double>::quiet_NaN();
            row.feasible = false;
        }
        curve.rows.push_back(row);
    }
    curve.validate();
    return curve;
}

void save_curve_csv(const SustainabilityCurve& curve, std::ostream& out)
{
    out << "ambient_temp_c,p_max_mw,max_rate_mbps,pct_reduction,feasible\n";
    for (const auto& row : curve.rows) {
        out << csv::format_double(row.ambient_temp_c) << ',';
        if (row.feasible) {
            out << csv::format_double(row.p_max_mw) << ','
                << csv::format_double(row.max_rate_mbps) << ','
                << csv::format_double(row.pct_reduction) << ",1\n";
        } else {
            out << ",,,0\n";
        }
    }
    if (!out) {
        throw IoError("failed writing sustainability curve");
    }
}

void save_curve_csv(const SustainabilityCurve& curve, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    save_curve_csv(curve, out);
}

} // namespace powertherm

#include "powertherm/throttle_sim.hpp"

#include "powertherm/csv.hpp"
#include "powertherm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace powertherm {

namespace {

void check_pct(double value, const char* name)
{
    if (!(value >= 0.0 && value <= 100.0)) {
        throw ConfigError(std::string(name) + " must be in [0, 100]");
    }
}

} // namespace

void Workload::validate() const
{
    if (!(duration_s > 0.0) || !std::isfinite(duration_s)) {
        throw ConfigError("workload duration_s must be > 0");
    }
    if (segments.empty()) {
        throw ConfigError("workload has no segments");
    }
    if (segments.front().start_s != 0.0) {
        throw ConfigError("first workload segment must start at t = 0");
    }
    double prev_start = -1.0;
    for (const auto& seg : segments) {
        if (seg.start_s <= prev_start) {
            throw ConfigError("workload segments must have strictly increasing start times");
        }
        if (seg.start_s >= duration_s) {
            throw ConfigError("workload segment starts at or after duration_s");
        }
        if (seg.dl_demand_mbps < 0.0 || seg.ul_demand_mbps < 0.0) {
            throw ConfigError("workload demands must be >= 0");
        }
        check_pct(seg.ut_pct, "workload ut_pct");
        check_pct(seg.u6_pct, "workload u6_pct");
        check_pct(seg.u7_pct, "workload u7_pct");
        prev_start = seg.start_s;
    }
}

const WorkloadSegment& Workload::at(double t_s) const
{
    const WorkloadSegment* current = &segments.front();
    for (const auto& seg : segments) {
        if (seg.start_s <= t_s) {
            current = &seg;
        } else {
            break;
        }
    }
    return *current;
}

void GovernorConfig::validate() const
{
    if (std::isnan(threshold_c)) {
        throw ConfigError("threshold_c must not be NaN");
    }
    if (!(hysteresis_c >= 0.0) || !std::isfinite(hysteresis_c)) {
        throw ConfigError("hysteresis_c must be >= 0");
    }
    if (!(control_period_s > 0.0) || !std::isfinite(control_period_s)) {
        throw ConfigError("control_period_s must be > 0");
    }
    if (!(backoff_factor > 0.0 && backoff_factor < 1.0)) {
        throw ConfigError("backoff_factor must be in (0, 1)");
    }
    if (!(recovery_step_mbps > 0.0) || !std::isfinite(recovery_step_mbps)) {
        throw ConfigError("recovery_step_mbps must be > 0");
    }
}

namespace {

std::size_t integer_multiple(double whole, double part, const char* what)
{
    const double ratio = whole / part;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio) {
        throw ConfigError(std::string(what) + " must be a positive integer multiple of dt_s");
    }
    return static_cast<std::size_t>(rounded);
}

TraceSample granted_state(const PowerModel& model, const WorkloadSegment& seg,
                          double granted_dl_mbps)
{
    TraceSample state;
    state.i5g = true;
    state.ut_pct = seg.ut_pct;
    state.u6_pct = seg.u6_pct;
    state.u7_pct = seg.u7_pct;
    state.dl_mbps = granted_dl_mbps;
    state.ul_mbps = seg.ul_demand_mbps;
    state.channel_number = model.key.channel_number;
    state.freq_profile_id = model.key.freq_profile_id;
    return state;
}

} // namespace

SimResult run_closed_loop(const PowerModel& model, const ThermalNetwork& net,
                          const GovernorConfig& gov, const Workload& wl,
                          double t_amb_c, double dt_s)
{
    model.validate();
    gov.validate();
    wl.validate();
    if (!(dt_s > 0.0) || !std::isfinite(dt_s)) {
        throw ConfigError("dt_s must be > 0");
    }
    if (dt_s > gov.control_period_s) {
        throw ConfigError("dt_s must not exceed control_period_s");
    }
    const std::size_t steps_per_control =
        integer_multiple(gov.control_period_s, dt_s, "control_period_s");
    const std::size_t n_steps = integer_multiple(wl.duration_s, dt_s, "duration_s");

    const std::string cpu_node = net.node_for_role(InjectionRole::Cpu);
    const std::string trans_node = net.node_for_role(InjectionRole::Transceiver);
    const std::string base_node = net.node_for_role(InjectionRole::Base);

    TransientStepper stepper(net, t_amb_c, dt_s);
    const std::string& skin = net.skin_node;

    SimResult result;
    result.dt_s = dt_s;
    result.control_period_s = gov.control_period_s;
    result.duration_s = wl.duration_s;
    result.steps.reserve(n_steps + 1);

    double granted = wl.segments.front().dl_demand_mbps;
    for (std::size_t k = 0; k <= n_steps; ++k) {
        const double t = static_cast<double>(k) * dt_s;
        const WorkloadSegment& seg = wl.at(t);
        const double offered = seg.dl_demand_mbps;
        granted = std::min(granted, offered);

        const double skin_temp = stepper.temp_c(skin);
        if (k % steps_per_control == 0) {
            if (skin_temp >= gov.threshold_c) {
                granted *= gov.backoff_factor;
                ++result.summary.throttle_events;
                if (!result.summary.time_to_first_throttle_s) {
                    result.summary.time_to_first_throttle_s = t;
                }
            } else if (skin_temp < gov.threshold_c - gov.hysteresis_c) {
                granted = std::min(offered, granted + gov.recovery_step_mbps);
            }
        }

        const PowerBreakdown parts = decompose_power(model, granted_state(model, seg, granted));
        result.steps.push_back({t, offered, granted, parts.total_mw, skin_temp,
                                granted < offered});

        if (k < n_steps) {
            stepper.set_injections_mw({{cpu_node, parts.cpu_mw},
                                       {trans_node, parts.transceiver_mw},
                                       {base_node, parts.base_mw}});
            stepper.step();
        }
    }

    result.summary.peak_temp_c = t_amb_c;
    for (const auto& step : result.steps) {
        result.summary.peak_temp_c = std::max(result.summary.peak_temp_c, step.skin_temp_c);
    }
    if (wl.duration_s >= 2.0 * gov.control_period_s) {
        result.summary.sustained_rate_mbps = sustained_rate(result, kDefaultSettleFraction);
    }
    return result;
}

double sustained_rate(const SimResult& result, double settle_fraction)
{
    if (!(settle_fraction > 0.0 && settle_fraction < 1.0)) {
        throw ConfigError("settle_fraction must be in (0, 1)");
    }
    if (result.steps.empty() || result.duration_s < 2.0 * result.control_period_s) {
        throw ConfigError("run too short for a sustained rate (need >= 2 control periods)");
    }
    const double window_start_s = result.duration_s * (1.0 - settle_fraction);
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& step : result.steps) {
        if (step.t_s >= window_start_s) {
            sum += step.granted_mbps;
            ++n;
        }
    }
    if (n == 0) {
        throw ConfigError("settle window contains no samples");
    }
    return sum / static_cast<double>(n);
}

std::vector<StressCell> run_stress_matrix(const ModelRegistry& registry, int channel_number,
                                          const std::string& high_profile_id,
                                          const std::string& low_profile_id,
                                          const ThermalNetwork& net, double t_amb_c,
                                          double saturation_rate_mbps)
{
    if (!(saturation_rate_mbps > 0.0)) {
        throw ConfigError("saturation_rate_mbps must be > 0");
    }
    net.validate();
    const std::string cpu_node = net.node_for_role(InjectionRole::Cpu);
    const std::string trans_node = net.node_for_role(InjectionRole::Transceiver);
    const std::string base_node = net.node_for_role(InjectionRole::Base);

    std::vector<StressCell> cells;
    for (const std::string& profile : {high_profile_id, low_profile_id}) {
        const PowerModel& model = registry.get({channel_number, profile});

        struct Scenario {
            const char* name;
            bool i5g;
            double usage_pct;
            double dl_mbps;
        };
        const Scenario scenarios[] = {
            {"idle", true, 0.0, 0.0},
            {"cpu_only", false, 100.0, 0.0},
            {"trans_only", true, 0.0, saturation_rate_mbps},
            {"both", true, 100.0, saturation_rate_mbps},
        };
        for (const Scenario& sc : scenarios) {
            TraceSample state;
            state.i5g = sc.i5g;
            state.ut_pct = sc.usage_pct;
            state.u6_pct = sc.usage_pct;
            state.u7_pct = sc.usage_pct;
            state.dl_mbps = sc.dl_mbps;
            state.channel_number = channel_number;
            state.freq_profile_id = profile;

            const PowerBreakdown parts = decompose_power(model, state);
            const auto temps = steady_state_temps(net,
                                                  {{cpu_node, parts.cpu_mw},
                                                   {trans_node, parts.transceiver_mw},
                                                   {base_node, parts.base_mw}},
                                                  t_amb_c);
            cells.push_back({sc.name, profile, parts.total_mw, temps.at(net.skin_node)});
        }
    }
    return cells;
}

void save_sim_csv(const SimResult& result, std::ostream& out)
{
    out << "t_s,offered_mbps,granted_mbps,power_mw,skin_temp_c,throttled\n";
    for (const auto& step : result.steps) {
        out << csv::format_double(step.t_s) << ',' << csv::format_double(step.offered_mbps)
            << ',' << csv::format_double(step.granted_mbps) << ','
            << csv::format_double(step.power_mw) << ','
            << csv::format_double(step.skin_temp_c) << ',' << (step.throttled ? '1' : '0')
            << '\n';
    }
    if (!out) {
        throw IoError("failed writing simulation series");
    }
}

void save_sim_csv(const SimResult& result, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    save_sim_csv(result, out);
}

void save_sim_summary(const SimResult& result, std::ostream& out)
{
    const auto opt = [](const std::optional<double>& v) {
        return v ? csv::format_double(*v) : std::string("none");
    };
    out << "sustained_rate_mbps = " << opt(result.summary.sustained_rate_mbps) << '\n'
        << "peak_temp_c = " << csv::format_double(result.summary.peak_temp_c) << '\n'
        << "time_to_first_throttle_s = " << opt(result.summary.time_to_first_throttle_s)
        << '\n'
        << "throttle_events = " << result.summary.throttle_events << '\n';
    if (!out) {
        throw IoError("failed writing simulation summary");
    }
}

void save_sim_summary(const SimResult& result, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    save_sim_summary(result, out);
}

void save_stress_csv(const std::vector<StressCell>& cells, std::ostream& out)
{
    out << "scenario,freq_profile_id,power_mw,skin_temp_c\n";
    for (const auto& cell : cells) {
        out << cell.scenario << ',' << cell.freq_profile_id << ','
            << csv::format_double(cell.power_mw) << ','
            << csv::format_double(cell.skin_temp_c) << '\n';
    }
    if (!out) {
        throw IoError("failed writing stress matrix");
    }
}

void save_stress_csv(const std::vector<StressCell>& cells, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    save_stress_csv(cells, out);
}

} // namespace powertherm

// Command-line front end for the power/thermal toolkit: trace synthesis,
// model fitting, evaluation, sustainability sweeps and closed-loop
// throttling simulation.

#include "powertherm/csv.hpp"
#include "powertherm/errors.hpp"
#include "powertherm/power_model.hpp"
#include "powertherm/sustainability.hpp"
#include "powertherm/svg_plot.hpp"
#include "powertherm/thermal.hpp"
#include "powertherm/throttle_sim.hpp"
#include "powertherm/traces.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <utility>

namespace {

using namespace powertherm;

// Human-readable numeric output is printed at 6 significant digits so
// golden transcripts stay portable; machine-readable files always use full
// round-trip precision via csv::format_double.
std::string fmt6(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

ModelKey resolve_key(std::span<const TraceSample> samples, bool have_channel, int channel,
                     bool have_profile, const std::string& profile)
{
    if (have_channel != have_profile) {
        throw ConfigError("pass both --channel and --freq-profile, or neither");
    }
    if (have_channel) {
        return {channel, profile};
    }
    std::set<std::pair<int, std::string>> keys;
    for (const auto& s : samples) {
        keys.insert({s.channel_number, s.freq_profile_id});
    }
    if (keys.size() != 1) {
        throw ConfigError("trace contains " + std::to_string(keys.size()) +
                          " model keys; pass --channel and --freq-profile to choose one");
    }
    return {keys.begin()->first, keys.begin()->second};
}

std::vector<TraceSample> filter_key(std::vector<TraceSample> samples, const ModelKey& key)
{
    std::erase_if(samples, [&](const TraceSample& s) {
        return s.channel_number != key.channel_number ||
               s.freq_profile_id != key.freq_profile_id;
    });
    if (samples.empty()) {
        throw ConfigError("no trace rows match key " + to_string(key));
    }
    return samples;
}

constexpr const char* kSteadyHeader = "skin_temp_c,ambient_temp_c,power_mw";

std::vector<SteadySample> load_steady_samples(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open steady-sample file: " + path.string());
    }
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& msg) -> void {
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + msg);
    };
    if (!std::getline(in, line)) {
        throw IoError(path.string() + ": empty file");
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != kSteadyHeader) {
        fail(std::string("expected header ") + kSteadyHeader);
    }
    std::vector<SteadySample> samples;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = csv::split(line);
        if (fields.size() != 3) {
            fail("expected 3 columns, got " + std::to_string(fields.size()));
        }
        try {
            samples.push_back({csv::parse_double(fields[0]), csv::parse_double(fields[1]),
                               csv::parse_double(fields[2])});
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
    }
    if (samples.empty()) {
        throw IoError(path.string() + ": no samples");
    }
    return samples;
}

ThermalNetwork make_network(const std::string& network_path, double r4_c_per_mw)
{
    if (!network_path.empty()) {
        return ThermalNetwork::load(std::filesystem::path(network_path));
    }
    return default_phone_network(r4_c_per_mw);
}

// ---------------------------------------------------------------- gen-traces

struct GenTracesArgs {
    std::string out;
    std::string registry;
    std::string freq_profile;
    int channel = 1;
    std::vector<int> threads{0, 2, 4, 7, 8};
    double per_thread_frac = 0.125;
    std::vector<double> dl_rates;
    std::vector<double> ul_rates{400.0, 800.0, 1200.0, 1600.0, 2000.0};
    bool cpu_only_rows = true;
    double dwell_s = 10.0;
    std::size_t repeats = 1;
    double noise_sigma_mw = 0.0;
    std::uint64_t seed = 42;
};

void run_gen_traces(const GenTracesArgs& a)
{
    const ModelRegistry registry = ModelRegistry::load(std::filesystem::path(a.registry));
    const PowerModel& truth = registry.get({a.channel, a.freq_profile});

    TrainingGridConfig grid;
    grid.thread_counts = a.threads;
    grid.per_thread_usage_frac = a.per_thread_frac;
    grid.throughput_settings_mbps = a.dl_rates;
    grid.dwell_s = a.dwell_s;
    grid.freq_profile_id = a.freq_profile;
    grid.channel_number = a.channel;

    auto rows = generate_training_grid(grid);
    rows = augment_training_grid(std::move(rows), grid, {a.cpu_only_rows, a.ul_rates});
    if (a.repeats > 1) {
        rows = replicate_trace(rows, a.repeats, a.dwell_s);
    }
    rows = synth_traces(truth, std::move(rows), a.noise_sigma_mw, a.seed);
    save_traces(rows, std::filesystem::path(a.out));
    std::cout << "wrote " << rows.size() << " samples to " << a.out << '\n';
}

// ----------------------------------------------------------------- fit-power

struct FitPowerArgs {
    std::string in;
    std::string registry;
    std::string report;
    std::string freq_profile;
    int channel = 0;
    bool have_channel = false;
    bool have_profile = false;
    double fixed_bp_cpu_mw = 0.0;
    bool have_fixed_bp_cpu = false;
};

void run_fit_power(const FitPowerArgs& a)
{
    auto samples = load_traces(std::filesystem::path(a.in));
    const ModelKey key =
        resolve_key(samples, a.have_channel, a.channel, a.have_profile, a.freq_profile);
    samples = filter_key(std::move(samples), key);

    FitOptions options;
    if (a.have_fixed_bp_cpu) {
        options.fixed_bp_cpu_mw = a.fixed_bp_cpu_mw;
    }
    const auto [model, report] = fit_power_model(samples, key, options);

    ModelRegistry registry;
    const std::filesystem::path registry_path(a.registry);
    if (std::filesystem::exists(registry_path)) {
        registry = ModelRegistry::load(registry_path);
    }
    registry.put(model);
    registry.save(registry_path);

    std::cout << "fitted " << to_string(key) << " on " << report.n_samples << " samples\n";
    const std::pair<const char*, double> coeffs[] = {
        {"bp_cpu_mw", model.bp_cpu_mw},
        {"bp_5g_mw", model.bp_5g_mw},
        {"c_ut_mw_per_pct", model.c_ut_mw_per_pct},
        {"c_u6_mw_per_pct", model.c_u6_mw_per_pct},
        {"c_u7_mw_per_pct", model.c_u7_mw_per_pct},
        {"alpha_d_mw_per_mbps", model.alpha_d_mw_per_mbps},
        {"alpha_u_mw_per_mbps", model.alpha_u_mw_per_mbps},
    };
    for (const auto& [name, value] : coeffs) {
        std::printf("  %-20s = %s\n", name, fmt6(value).c_str());
    }
    std::printf("  %-20s = %s\n", "rmse_mw", fmt6(report.rmse_mw).c_str());
    std::printf("  %-20s = %s\n", "pearson_rho", fmt6(report.pearson_rho).c_str());
    std::printf("  %-20s = %s\n", "accuracy", fmt6(report.mean_accuracy).c_str());
    for (const auto& flag : model.plausibility_flags) {
        std::cerr << "warning: " << flag << '\n';
    }

    if (!a.report.empty()) {
        nlohmann::json doc{
            {"key",
             {{"channel_number", key.channel_number}, {"freq_profile_id", key.freq_profile_id}}},
            {"coefficients",
             {{"bp_cpu_mw", model.bp_cpu_mw},
              {"bp_5g_mw", model.bp_5g_mw},
              {"c_ut_mw_per_pct", model.c_ut_mw_per_pct},
              {"c_u6_mw_per_pct", model.c_u6_mw_per_pct},
              {"c_u7_mw_per_pct", model.c_u7_mw_per_pct},
              {"alpha_d_mw_per_mbps", model.alpha_d_mw_per_mbps},
              {"alpha_u_mw_per_mbps", model.alpha_u_mw_per_mbps}}},
            {"plausibility_flags", model.plausibility_flags},
            {"metrics",
             {{"rmse_mw", report.rmse_mw},
              {"pearson_rho", report.pearson_rho},
              {"mean_accuracy", report.mean_accuracy},
              {"n_samples", report.n_samples}}},
        };
        std::ofstream f(a.report, std::ios::binary);
        if (!f) {
            throw IoError("cannot open for writing: " + a.report);
        }
        f << doc.dump(2) << '\n';
    }
}

// ---------------------------------------------------------------- eval-power

struct EvalPowerArgs {
    std::string in;
    std::string registry;
    std::string out;
    std::string freq_profile;
    int channel = 0;
    bool have_channel = false;
    bool have_profile = false;
};

void run_eval_power(const EvalPowerArgs& a)
{
    auto samples = load_traces(std::filesystem::path(a.in));
    const ModelKey key =
        resolve_key(samples, a.have_channel, a.channel, a.have_profile, a.freq_profile);
    samples = filter_key(std::move(samples), key);

    const ModelRegistry registry = ModelRegistry::load(std::filesystem::path(a.registry));
    const PowerModel& model = registry.get(key);

    std::vector<double> predicted;
    std::vector<double> measured;
    predicted.reserve(samples.size());
    measured.reserve(samples.size());
    for (const auto& s : samples) {
        if (!s.power_mw) {
            throw FitError("sample at t = " + csv::format_double(s.t_s) +
                           " s has no measured power_mw");
        }
        predicted.push_back(predict_power(model, s));
        measured.push_back(*s.power_mw);
    }
    const FitReport report = make_fit_report(predicted, measured);

    std::printf("%-28s %10s %10s %10s %8s\n", "dataset", "rho", "rmse_mw", "accuracy", "n");
    std::printf("%-28s %10s %10s %10s %8zu\n", to_string(key).c_str(),
                fmt6(report.pearson_rho).c_str(), fmt6(report.rmse_mw).c_str(),
                fmt6(report.mean_accuracy).c_str(), report.n_samples);

    std::ofstream out(a.out, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + a.out);
    }
    out << "t_s,power_mw,predicted_mw,residual_mw\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out << csv::format_double(samples[i].t_s) << ',' << csv::format_double(measured[i])
            << ',' << csv::format_double(predicted[i]) << ','
            << csv::format_double(measured[i] - predicted[i]) << '\n';
    }
    if (!out) {
        throw IoError("failed writing predictions: " + a.out);
    }
}

// --------------------------------------------------------------- fit-thermal

struct FitThermalArgs {
    std::string in;
    std::string out;
};

void run_fit_thermal(const FitThermalArgs& a)
{
    const auto samples = load_steady_samples(std::filesystem::path(a.in));
    const R4Fit fit = estimate_r4(samples);
    for (const auto& w : fit.warnings) {
        std::cerr << "warning: " << w << '\n';
    }
    std::printf("R4 = %.6f C/mW\n", fit.r4_c_per_mw);
    std::printf("residual RMSE = %.6f C\n", fit.residual_rmse_c);
    std::printf("samples = %zu\n", fit.n_samples);

    if (!a.out.empty()) {
        std::ofstream f(a.out, std::ios::binary);
        if (!f) {
            throw IoError("cannot open for writing: " + a.out);
        }
        f << "r4_c_per_mw = " << csv::format_double(fit.r4_c_per_mw) << '\n'
          << "residual_rmse_c = " << csv::format_double(fit.residual_rmse_c) << '\n'
          << "n_samples = " << fit.n_samples << '\n';
    }
}

// ------------------------------------------------------------------- sustain

struct SustainArgs {
    std::string registry;
    std::string freq_profile;
    std::string out;
    std::string svg_prefix;
    int channel = 1;
    double r4_c_per_mw = 0.005;
    double threshold_c = 40.0;
    double ambient_lo_c = 15.0;
    double ambient_hi_c = 39.0;
    double step_c = 1.0;
    double reference_mw = 5700.0;
    double link_cap_mbps = 2000.0;
    double base_ut_pct = 0.0;
    double base_u6_pct = 0.0;
    double base_u7_pct = 0.0;
};

void run_sustain(const SustainArgs& a)
{
    const ModelRegistry registry = ModelRegistry::load(std::filesystem::path(a.registry));

    SustainabilityConfig cfg;
    cfg.power_model = registry.get({a.channel, a.freq_profile});
    cfg.steady = {a.r4_c_per_mw, a.threshold_c};
    cfg.reference_power_mw = a.reference_mw;
    cfg.link_cap_mbps = a.link_cap_mbps;
    cfg.cpu_baseline = {a.base_ut_pct, a.base_u6_pct, a.base_u7_pct};

    const SustainabilityCurve curve = sweep(cfg, a.ambient_lo_c, a.ambient_hi_c, a.step_c);
    save_curve_csv(curve, std::filesystem::path(a.out));
    std::cout << "wrote " << curve.rows.size() << " rows to " << a.out << '\n';

    if (a.svg_prefix.empty()) {
        return;
    }
    std::vector<double> t;
    std::vector<double> p_max;
    std::vector<double> rate;
    std::vector<double> reduction;
    for (const auto& row : curve.rows) {
        if (!row.feasible) {
            continue;
        }
        t.push_back(row.ambient_temp_c);
        p_max.push_back(row.p_max_mw);
        rate.push_back(row.max_rate_mbps);
        reduction.push_back(row.pct_reduction);
    }
    if (t.empty()) {
        std::cerr << "warning: no feasible rows; skipping SVG plots\n";
        return;
    }
    write_line_plot({"Maximum acceptable power", "ambient temperature (C)", "p_max (mW)"}, t,
                    p_max, std::filesystem::path(a.svg_prefix + "_pmax.svg"));
    write_line_plot({"Maximum downlink rate without throttling", "ambient temperature (C)",
                     "rate (Mbps)"},
                    t, rate, std::filesystem::path(a.svg_prefix + "_rate.svg"));
    write_line_plot({"Required overall power reduction", "ambient temperature (C)",
                     "reduction (%)"},
                    t, reduction, std::filesystem::path(a.svg_prefix + "_reduction.svg"));
}

// ------------------------------------------------------------------ simulate

struct SimulateArgs {
    std::string registry;
    std::string freq_profile;
    std::string network;
    std::string out;
    int channel = 1;
    double r4_c_per_mw = 0.005;
    double threshold_c = 40.0;
    double hysteresis_c = 0.5;
    double control_period_s = 1.0;
    double backoff_factor = 0.95;
    double recovery_step_mbps = 20.0;
    double dl_demand_mbps = 0.0;
    double ul_demand_mbps = 0.0;
    double ut_pct = 0.0;
    double u6_pct = 0.0;
    double u7_pct = 0.0;
    double duration_s = 0.0;
    double dt_s = 0.25;
    double ambient_c = 25.0;
};

void run_simulate(const SimulateArgs& a)
{
    const ModelRegistry registry = ModelRegistry::load(std::filesystem::path(a.registry));
    const PowerModel& model = registry.get({a.channel, a.freq_profile});
    const ThermalNetwork net = make_network(a.network, a.r4_c_per_mw);

    GovernorConfig gov;
    gov.threshold_c = a.threshold_c;
    gov.hysteresis_c = a.hysteresis_c;
    gov.control_period_s = a.control_period_s;
    gov.backoff_factor = a.backoff_factor;
    gov.recovery_step_mbps = a.recovery_step_mbps;

    Workload wl;
    wl.duration_s = a.duration_s;
    wl.segments = {{0.0, a.dl_demand_mbps, a.ul_demand_mbps, a.ut_pct, a.u6_pct, a.u7_pct}};

    const SimResult result = run_closed_loop(model, net, gov, wl, a.ambient_c, a.dt_s);
    save_sim_csv(result, std::filesystem::path(a.out));
    save_sim_summary(result, std::filesystem::path(a.out + ".summary"));
    save_sim_summary(result, std::cout);
}

// -------------------------------------------------------------- stress-matrix

struct StressMatrixArgs {
    std::string registry;
    std::string high_profile;
    std::string low_profile;
    std::string network;
    std::string out;
    int channel = 1;
    double r4_c_per_mw = 0.005;
    double ambient_c = 25.0;
    double saturation_rate_mbps = 2000.0;
};

void run_stress_matrix_cmd(const StressMatrixArgs& a)
{
    const ModelRegistry registry = ModelRegistry::load(std::filesystem::path(a.registry));
    const ThermalNetwork net = make_network(a.network, a.r4_c_per_mw);
    const auto cells = run_stress_matrix(registry, a.channel, a.high_profile, a.low_profile,
                                         net, a.ambient_c, a.saturation_rate_mbps);
    save_stress_csv(cells, std::filesystem::path(a.out));
    std::printf("%-12s %-10s %12s %12s\n", "scenario", "profile", "power_mw", "skin_temp_c");
    for (const auto& cell : cells) {
        std::printf("%-12s %-10s %12s %12s\n", cell.scenario.c_str(),
                    cell.freq_profile_id.c_str(), fmt6(cell.power_mw).c_str(),
                    fmt6(cell.skin_temp_c).c_str());
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Mobile power/thermal modeling toolkit"};
    app.require_subcommand(1);

    auto gen = std::make_shared<GenTracesArgs>();
    for (int i = 1; i <= 16; ++i) {
        gen->dl_rates.push_back(125.0 * i);
    }
    auto* gen_cmd = app.add_subcommand("gen-traces", "Generate a synthetic training trace");
    gen_cmd->add_option("--out", gen->out, "Output trace CSV")->required();
    gen_cmd->add_option("--registry", gen->registry, "Registry holding the ground-truth model")
        ->required();
    gen_cmd->add_option("--channel", gen->channel, "Channel number of the truth model")
        ->capture_default_str();
    gen_cmd->add_option("--freq-profile", gen->freq_profile, "Frequency profile id")
        ->required();
    gen_cmd->add_option("--threads", gen->threads, "Worker thread counts")
        ->capture_default_str();
    gen_cmd->add_option("--per-thread-frac", gen->per_thread_frac,
                        "Total-CPU fraction one thread consumes")
        ->capture_default_str();
    gen_cmd->add_option("--dl-rates", gen->dl_rates, "Downlink throughput settings (Mbps)");
    gen_cmd->add_option("--ul-rates", gen->ul_rates, "Uplink-only rows (Mbps)")
        ->capture_default_str();
    gen_cmd->add_flag("--cpu-only-rows,!--no-cpu-only-rows", gen->cpu_only_rows,
                      "Append 5G-inactive rows (one per thread count)");
    gen_cmd->add_option("--dwell", gen->dwell_s, "Seconds per grid cell")->capture_default_str();
    gen_cmd->add_option("--repeats", gen->repeats, "Repeated measurements per cell")
        ->capture_default_str();
    gen_cmd->add_option("--noise-sigma", gen->noise_sigma_mw, "Gaussian power noise (mW)")
        ->capture_default_str();
    gen_cmd->add_option("--seed", gen->seed, "Noise RNG seed")->capture_default_str();
    gen_cmd->callback([gen] { run_gen_traces(*gen); });

    auto fitp = std::make_shared<FitPowerArgs>();
    auto* fitp_cmd = app.add_subcommand("fit-power", "Fit a power model from a trace");
    fitp_cmd->add_option("--in", fitp->in, "Input trace CSV")->required();
    fitp_cmd->add_option("--registry", fitp->registry, "Model registry to create or update")
        ->required();
    auto* fitp_channel = fitp_cmd->add_option("--channel", fitp->channel, "Model key channel");
    auto* fitp_profile =
        fitp_cmd->add_option("--freq-profile", fitp->freq_profile, "Model key profile id");
    auto* fitp_fixed = fitp_cmd->add_option("--fixed-bp-cpu", fitp->fixed_bp_cpu_mw,
                                            "Pin the 5G-inactive intercept (mW)");
    fitp_cmd->add_option("--report", fitp->report, "Optional JSON fit report path");
    fitp_cmd->callback([fitp, fitp_channel, fitp_profile, fitp_fixed] {
        fitp->have_channel = fitp_channel->count() > 0;
        fitp->have_profile = fitp_profile->count() > 0;
        fitp->have_fixed_bp_cpu = fitp_fixed->count() > 0;
        run_fit_power(*fitp);
    });

    auto evalp = std::make_shared<EvalPowerArgs>();
    auto* evalp_cmd = app.add_subcommand("eval-power", "Evaluate a fitted model on a trace");
    evalp_cmd->add_option("--in", evalp->in, "Evaluation trace CSV")->required();
    evalp_cmd->add_option("--registry", evalp->registry, "Model registry")->required();
    evalp_cmd->add_option("--out", evalp->out, "Per-sample predictions CSV")->required();
    auto* evalp_channel = evalp_cmd->add_option("--channel", evalp->channel, "Model key channel");
    auto* evalp_profile =
        evalp_cmd->add_option("--freq-profile", evalp->freq_profile, "Model key profile id");
    evalp_cmd->callback([evalp, evalp_channel, evalp_profile] {
        evalp->have_channel = evalp_channel->count() > 0;
        evalp->have_profile = evalp_profile->count() > 0;
        run_eval_power(*evalp);
    });

    auto fitt = std::make_shared<FitThermalArgs>();
    auto* fitt_cmd =
        app.add_subcommand("fit-thermal", "Estimate the skin-to-ambient thermal resistance");
    fitt_cmd->add_option("--in", fitt->in,
                         "Steady-sample CSV (skin_temp_c,ambient_temp_c,power_mw)")
        ->required();
    fitt_cmd->add_option("--out", fitt->out, "Optional key-value result file");
    fitt_cmd->callback([fitt] { run_fit_thermal(*fitt); });

    auto sus = std::make_shared<SustainArgs>();
    auto* sus_cmd =
        app.add_subcommand("sustain", "Sweep ambient temperature for sustainability limits");
    sus_cmd->add_option("--registry", sus->registry, "Model registry")->required();
    sus_cmd->add_option("--channel", sus->channel, "Model key channel")->capture_default_str();
    sus_cmd->add_option("--freq-profile", sus->freq_profile, "Model key profile id")
        ->required();
    sus_cmd->add_option("--out", sus->out, "Curve CSV")->required();
    sus_cmd->add_option("--svg", sus->svg_prefix, "Prefix for optional SVG plots");
    sus_cmd->add_option("--r4", sus->r4_c_per_mw, "Skin-to-ambient resistance (C/mW)")
        ->capture_default_str();
    sus_cmd->add_option("--threshold-c", sus->threshold_c, "Throttle threshold (C)")
        ->capture_default_str();
    sus_cmd->add_option("--ambient-lo-c", sus->ambient_lo_c, "Sweep start (C)")
        ->capture_default_str();
    sus_cmd->add_option("--ambient-hi-c", sus->ambient_hi_c, "Sweep end (C)")
        ->capture_default_str();
    sus_cmd->add_option("--step-c", sus->step_c, "Sweep step (C)")->capture_default_str();
    sus_cmd->add_option("--reference-mw", sus->reference_mw, "Reference power (mW)")
        ->capture_default_str();
    sus_cmd->add_option("--link-cap", sus->link_cap_mbps, "Downlink saturation rate (Mbps)")
        ->capture_default_str();
    sus_cmd->add_option("--base-ut", sus->base_ut_pct, "Baseline total CPU usage (%)")
        ->capture_default_str();
    sus_cmd->add_option("--base-u6", sus->base_u6_pct, "Baseline core-6 usage (%)")
        ->capture_default_str();
    sus_cmd->add_option("--base-u7", sus->base_u7_pct, "Baseline core-7 usage (%)")
        ->capture_default_str();
    sus_cmd->callback([sus] { run_sustain(*sus); });

    auto sim = std::make_shared<SimulateArgs>();
    auto* sim_cmd =
        app.add_subcommand("simulate", "Closed-loop throttling simulation of a workload");
    sim_cmd->add_option("--registry", sim->registry, "Model registry")->required();
    sim_cmd->add_option("--channel", sim->channel, "Model key channel")->capture_default_str();
    sim_cmd->add_option("--freq-profile", sim->freq_profile, "Model key profile id")
        ->required();
    sim_cmd->add_option("--out", sim->out, "Time-series CSV (summary at <out>.summary)")
        ->required();
    sim_cmd->add_option("--network", sim->network, "Thermal network config file");
    sim_cmd->add_option("--r4", sim->r4_c_per_mw,
                        "Skin-to-ambient resistance for the default network (C/mW)")
        ->capture_default_str();
    sim_cmd->add_option("--threshold-c", sim->threshold_c, "Throttle threshold (C)")
        ->capture_default_str();
    sim_cmd->add_option("--hysteresis-c", sim->hysteresis_c, "Recovery hysteresis (C)")
        ->capture_default_str();
    sim_cmd->add_option("--control-period", sim->control_period_s, "Governor period (s)")
        ->capture_default_str();
    sim_cmd->add_option("--backoff", sim->backoff_factor, "Multiplicative backoff factor")
        ->capture_default_str();
    sim_cmd->add_option("--recovery-step", sim->recovery_step_mbps, "Additive recovery (Mbps)")
        ->capture_default_str();
    sim_cmd->add_option("--dl-demand", sim->dl_demand_mbps, "Offered downlink rate (Mbps)")
        ->required();
    sim_cmd->add_option("--ul-demand", sim->ul_demand_mbps, "Offered uplink rate (Mbps)")
        ->capture_default_str();
    sim_cmd->add_option("--ut", sim->ut_pct, "Total CPU usage (%)")->capture_default_str();
    sim_cmd->add_option("--u6", sim->u6_pct, "Core-6 usage (%)")->capture_default_str();
    sim_cmd->add_option("--u7", sim->u7_pct, "Core-7 usage (%)")->capture_default_str();
    sim_cmd->add_option("--duration", sim->duration_s, "Run length (s)")->required();
    sim_cmd->add_option("--dt", sim->dt_s, "Integration step (s)")->capture_default_str();
    sim_cmd->add_option("--ambient-c", sim->ambient_c, "Ambient temperature (C)")
        ->capture_default_str();
    sim_cmd->callback([sim] { run_simulate(*sim); });

    auto stress = std::make_shared<StressMatrixArgs>();
    auto* stress_cmd =
        app.add_subcommand("stress-matrix", "Steady stress scenarios for two profiles");
    stress_cmd->add_option("--registry", stress->registry, "Model registry")->required();
    stress_cmd->add_option("--channel", stress->channel, "Model key channel")
        ->capture_default_str();
    stress_cmd->add_option("--high-profile", stress->high_profile, "High-frequency profile id")
        ->required();
    stress_cmd->add_option("--low-profile", stress->low_profile, "Low-frequency profile id")
        ->required();
    stress_cmd->add_option("--out", stress->out, "Output CSV")->required();
    stress_cmd->add_option("--network", stress->network, "Thermal network config file");
    stress_cmd->add_option("--r4", stress->r4_c_per_mw,
                           "Skin-to-ambient resistance for the default network (C/mW)")
        ->capture_default_str();
    stress_cmd->add_option("--ambient-c", stress->ambient_c, "Ambient temperature (C)")
        ->capture_default_str();
    stress_cmd->add_option("--saturation-rate", stress->saturation_rate_mbps,
                           "Transceiver saturation rate (Mbps)")
        ->capture_default_str();
    stress_cmd->callback([stress] { run_stress_matrix_cmd(*stress); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 4;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const FitError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

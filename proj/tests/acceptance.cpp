// Acceptance checks for the power/thermal toolkit. Each criterion prints a
// single PASS/FAIL line (with key measured numbers); the process exits
// nonzero if any criterion fails. All tolerances are pinned inline.

#include "powertherm/errors.hpp"
#include "powertherm/estimation.hpp"
#include "powertherm/power_model.hpp"
#include "powertherm/rng.hpp"
#include "powertherm/sustainability.hpp"
#include "powertherm/thermal.hpp"
#include "powertherm/throttle_sim.hpp"
#include "powertherm/traces.hpp"

#include "test_util.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

using namespace powertherm;

namespace {

struct CheckFailure {
    std::string reason;
};

void require(bool ok, const std::string& reason)
{
    if (!ok) {
        throw CheckFailure{reason};
    }
}

double rel_err(double actual, double expected)
{
    return std::abs(actual - expected) / std::abs(expected);
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int failures = 0;

// Runs one criterion; the body returns a detail string shown on PASS and
// throws CheckFailure (or anything) to FAIL.
void criterion(int number, const char* name, const std::function<std::string()>& body)
{
    try {
        const std::string detail = body();
        std::printf("PASS  %d  %-42s %s\n", number, name, detail.c_str());
    } catch (const CheckFailure& f) {
        ++failures;
        std::printf("FAIL  %d  %-42s %s\n", number, name, f.reason.c_str());
    } catch (const std::exception& e) {
        ++failures;
        std::printf("FAIL  %d  %-42s unexpected error: %s\n", number, name, e.what());
    }
}

// ---------------------------------------------------------------- criterion 1

PowerModel recovery_truth()
{
    PowerModel m;
    m.key = {1, "acc"};
    m.bp_cpu_mw = 1000.0;
    m.bp_5g_mw = 1500.0;
    m.c_ut_mw_per_pct = 25.0;
    m.c_u6_mw_per_pct = 18.0;
    m.c_u7_mw_per_pct = 14.0;
    m.alpha_d_mw_per_mbps = 2.1;
    m.alpha_u_mw_per_mbps = 1.6;
    return m;
}

double max_coefficient_rel_err(const PowerModel& fitted, const PowerModel& truth)
{
    const double errs[] = {
        rel_err(fitted.bp_cpu_mw, truth.bp_cpu_mw),
        rel_err(fitted.bp_5g_mw, truth.bp_5g_mw),
        rel_err(fitted.c_ut_mw_per_pct, truth.c_ut_mw_per_pct),
        rel_err(fitted.c_u6_mw_per_pct, truth.c_u6_mw_per_pct),
        rel_err(fitted.c_u7_mw_per_pct, truth.c_u7_mw_per_pct),
        rel_err(fitted.alpha_d_mw_per_mbps, truth.alpha_d_mw_per_mbps),
        rel_err(fitted.alpha_u_mw_per_mbps, truth.alpha_u_mw_per_mbps),
    };
    double worst = 0.0;
    for (double e : errs) {
        worst = std::max(worst, e);
    }
    return worst;
}

std::string check_coefficient_recovery()
{
    const auto start = std::chrono::steady_clock::now();
    const PowerModel truth = recovery_truth();

    // Noiseless: 5 thread counts x 16 throughput settings plus the 5G-off
    // and uplink-only rows that make all seven coefficients identifiable.
    TrainingGridConfig cfg;
    cfg.thread_counts = {0, 2, 4, 7, 8};
    cfg.freq_profile_id = truth.key.freq_profile_id;
    cfg.channel_number = truth.key.channel_number;
    for (int i = 1; i <= 16; ++i) {
        cfg.throughput_settings_mbps.push_back(125.0 * i);
    }
    const GridAugmentation aug{true, {400.0, 800.0, 1200.0, 1600.0, 2000.0}};

    auto exact_rows = synth_traces(
        truth, augment_training_grid(generate_training_grid(cfg), cfg, aug), 0.0, 1);
    const auto [exact_fit, exact_report] = fit_power_model(exact_rows, truth.key);
    const double exact_err = max_coefficient_rel_err(exact_fit, truth);
    require(exact_err <= 1e-6,
            "noiseless fit missed a coefficient by " + fmt(exact_err) + " rel");

    // Noisy: 300 samples (100-row design replicated three times), Gaussian
    // power noise sigma = 100 mW, fixed seed. The 5G-off and uplink rows are
    // repeated four times per block so the intercept and uplink slope carry
    // enough weight for a 5% recovery band (roughly 3 standard errors for
    // the weakest coefficient at sigma = 100).
    TrainingGridConfig noisy_cfg = cfg;
    noisy_cfg.throughput_settings_mbps.clear();
    for (int i = 1; i <= 12; ++i) {
        noisy_cfg.throughput_settings_mbps.push_back(150.0 * i);
    }
    TrainingGridConfig aug_cfg = noisy_cfg;
    aug_cfg.thread_counts.clear();
    GridAugmentation noisy_aug;
    for (int copy = 0; copy < 4; ++copy) {
        aug_cfg.thread_counts.insert(aug_cfg.thread_counts.end(),
                                     noisy_cfg.thread_counts.begin(),
                                     noisy_cfg.thread_counts.end());
        noisy_aug.ul_rates_mbps.insert(noisy_aug.ul_rates_mbps.end(),
                                       aug.ul_rates_mbps.begin(), aug.ul_rates_mbps.end());
    }
    auto noisy_rows = synth_traces(
        truth,
        replicate_trace(
            augment_training_grid(generate_training_grid(noisy_cfg), aug_cfg, noisy_aug), 3,
            noisy_cfg.dwell_s),
        100.0, 42);
    require(noisy_rows.size() == 300,
            "noisy design has " + std::to_string(noisy_rows.size()) + " rows, wanted 300");
    const auto [noisy_fit, noisy_report] = fit_power_model(noisy_rows, truth.key);
    const double noisy_err = max_coefficient_rel_err(noisy_fit, truth);
    require(noisy_err <= 0.05,
            "noisy fit missed a coefficient by " + fmt(noisy_err * 100.0) + "%");
    require(noisy_report.rmse_mw >= 80.0 && noisy_report.rmse_mw <= 120.0,
            "noisy rmse " + fmt(noisy_report.rmse_mw) + " mW outside [80, 120]");

    const double elapsed = seconds_since(start);
    require(elapsed < 1.0, "took " + fmt(elapsed) + " s, limit 1 s");
    return "(noiseless " + fmt(exact_err) + " rel, noisy worst " +
           fmt(noisy_err * 100.0) + "%, rmse " + fmt(noisy_report.rmse_mw) + " mW, " +
           fmt(elapsed) + " s)";
}

// ---------------------------------------------------------------- criterion 2

std::string check_r4_estimation()
{
    // 200 steady samples, power ramp 500..4500 mW, rise = 0.005 * P plus
    // Gaussian noise sigma = 0.2 C, fixed seed.
    GaussianSampler noise(7);
    std::vector<SteadySample> samples;
    for (int i = 0; i < 200; ++i) {
        const double p = 500.0 + 4000.0 * static_cast<double>(i) / 199.0;
        const double rise = 0.005 * p + noise.normal(0.0, 0.2);
        samples.push_back({25.0 + rise, 25.0, p});
    }
    const R4Fit fit = estimate_r4(samples);
    const double err = rel_err(fit.r4_c_per_mw, 0.005);
    require(err <= 0.01, "noisy slope off by " + fmt(err * 100.0) + "%");

    // A single sample is an exact division: (35 - 25) / 2000 = 0.005.
    const R4Fit one = estimate_r4(std::vector<SteadySample>{{35.0, 25.0, 2000.0}});
    require(one.r4_c_per_mw == 0.005,
            "single-sample slope " + fmt(one.r4_c_per_mw) + " != 0.005 exactly");

    return "(noisy err " + fmt(err * 100.0) + "%, single sample exact)";
}

// ---------------------------------------------------------------- criterion 3

std::string check_metrics()
{
    const double acc = accuracy(std::vector<double>{900.0}, std::vector<double>{1000.0});
    require(std::abs(acc - 0.9) <= 1e-12, "accuracy(900|1000) = " + fmt(acc));

    const double r = rmse(std::vector<double>{0.0, 0.0}, std::vector<double>{3.0, 4.0});
    require(std::abs(r - std::sqrt(12.5)) <= 1e-12, "rmse((0,0),(3,4)) = " + fmt(r));

    std::vector<double> x;
    std::vector<double> y;
    for (int i = 0; i < 50; ++i) {
        x.push_back(0.5 * i + 3.0);
        y.push_back(3.0 * x.back() + 7.0); // exact affine relation
    }
    const double rho = pearson(x, y);
    require(std::abs(rho - 1.0) <= 1e-12, "pearson of affine pair = " + fmt(rho));

    // The published reference metrics for the original hardware traces
    // (rho 0.978 / 0.887, rmse 441.24 / 880.82 mW, accuracy 0.862 / 0.834)
    // cannot be recomputed here: those traces were never released. The
    // verifiable substitute is the noiseless self-fit, whose metrics must
    // reach their ideal limits.
    std::printf("      3  note: reference metrics from the original hardware traces are not\n"
                "         reproducible without those traces; checking the noiseless self-fit\n"
                "         reaches rho -> 1, rmse -> 0, accuracy -> 1 instead\n");
    const PowerModel truth = recovery_truth();
    TrainingGridConfig cfg;
    cfg.thread_counts = {0, 2, 4, 7, 8};
    cfg.throughput_settings_mbps = {250.0, 500.0, 1000.0, 1500.0, 2000.0};
    cfg.freq_profile_id = truth.key.freq_profile_id;
    cfg.channel_number = truth.key.channel_number;
    auto rows = synth_traces(
        truth,
        augment_training_grid(generate_training_grid(cfg), cfg, {true, {500.0, 1500.0}}),
        0.0, 1);
    const auto [fitted, report] = fit_power_model(rows, truth.key);
    require(report.pearson_rho > 1.0 - 1e-9,
            "self-fit rho = " + fmt(report.pearson_rho));
    require(report.rmse_mw < 1e-6, "self-fit rmse = " + fmt(report.rmse_mw) + " mW");
    require(report.mean_accuracy > 1.0 - 1e-9,
            "self-fit accuracy = " + fmt(report.mean_accuracy));

    return "(hand metrics exact, self-fit rho/rmse/accuracy at limits)";
}

// ---------------------------------------------------------------- criterion 4

std::string check_additivity()
{
    const double high = additivity_check(3700.0, 5700.0, 8800.0, 500.0);
    require(std::abs(high - 100.0) <= 1e-9, "high-profile residual = " + fmt(high));
    const double low = additivity_check(1250.0, 5600.0, 6300.0, 500.0);
    require(std::abs(low - 50.0) <= 1e-9, "low-profile residual = " + fmt(low));

    // The committed registry models reproduce those stress powers through
    // the stress-matrix pipeline (steady solve included).
    const auto reg = ModelRegistry::load(testutil::fixture_dir() / "truth_registry.json");
    const auto cells =
        run_stress_matrix(reg, 1, "high", "low", default_phone_network(0.005), 25.0);
    std::map<std::string, double> power;
    for (const auto& c : cells) {
        power[c.scenario + "/" + c.freq_profile_id] = c.power_mw;
    }
    require(std::abs(additivity_check(power.at("cpu_only/high"), power.at("trans_only/high"),
                                      power.at("both/high"), 500.0) -
                     100.0) <= 1e-9,
            "stress-matrix high residual drifted");
    require(std::abs(additivity_check(power.at("cpu_only/low"), power.at("trans_only/low"),
                                      power.at("both/low"), 500.0) -
                     50.0) <= 1e-9,
            "stress-matrix low residual drifted");

    // Four predictions of one linear model cancel to zero by construction.
    const PowerModel m = reg.get({1, "high"});
    TraceSample cpu_only;
    cpu_only.ut_pct = cpu_only.u6_pct = cpu_only.u7_pct = 100.0;
    cpu_only.i5g = false;
    cpu_only.channel_number = 1;
    cpu_only.freq_profile_id = "high";
    TraceSample trans_only;
    trans_only.dl_mbps = 2000.0;
    trans_only.i5g = true;
    trans_only.channel_number = 1;
    trans_only.freq_profile_id = "high";
    TraceSample both = trans_only;
    both.ut_pct = both.u6_pct = both.u7_pct = 100.0;
    const double self = additivity_check(predict_power(m, cpu_only),
                                         predict_power(m, trans_only),
                                         predict_power(m, both), m.bp_cpu_mw);
    require(std::abs(self) <= 1e-9, "single-model residual = " + fmt(self));

    return "(residuals 100 / 50 / 0 mW as documented)";
}

// ---------------------------------------------------------------- criterion 5

std::string check_transient_integrator()
{
    const auto start = std::chrono::steady_clock::now();

    // One node, R = 5 C/W, C = 100 J/C (tau = 500 s), 4 W injected,
    // dt = tau/100, simulated for 15 time constants.
    const double r = 5.0;
    const double cap = 100.0;
    const double tau = r * cap;
    const double amb = 25.0;
    const double p_w = 4.0;
    const double dt = tau / 100.0;
    const double duration = 15.0 * tau;

    ThermalNetwork net;
    net.nodes = {{"core", cap}};
    net.resistors = {{"core", std::string(kAmbientName), r}};
    net.injections = {{"core", InjectionRole::Cpu}};
    net.skin_node = "core";

    std::vector<PowerScheduleSegment> schedule = {{0.0, {{"core", p_w * 1000.0}}}};
    const TransientSeries series = simulate_transient(net, schedule, amb, {}, dt, duration);

    // Every emitted step within 0.05 C of the continuous closed form
    // T(t) = amb + P R (1 - exp(-t / tau)).
    double worst = 0.0;
    for (std::size_t k = 0; k < series.t_s.size(); ++k) {
        const double closed = amb + p_w * r * (1.0 - std::exp(-series.t_s[k] / tau));
        worst = std::max(worst, std::abs(series.temps_c[k][0] - closed));
    }
    require(worst <= 0.05, "worst closed-form deviation " + fmt(worst) + " C");

    // After 15 tau the trajectory must sit on the steady nodal solve.
    const auto steady = steady_state_temps(net, {{"core", p_w * 1000.0}}, amb);
    const double final_err = std::abs(series.temps_c.back()[0] - steady.at("core"));
    require(final_err <= 1e-3, "final vs steady solve differs by " + fmt(final_err) + " C");

    const double elapsed = seconds_since(start);
    require(elapsed < 1.0, "took " + fmt(elapsed) + " s, limit 1 s");
    return "(worst dev " + fmt(worst) + " C, final err " + fmt(final_err) + " C, " +
           fmt(elapsed) + " s)";
}

// ---------------------------------------------------------------- criterion 6

std::string check_sustainability_sweep()
{
    SustainabilityConfig cfg;
    cfg.steady = {0.005, 40.0};
    cfg.power_model.key = {1, "sweep"};
    cfg.power_model.bp_cpu_mw = 500.0;
    cfg.power_model.bp_5g_mw = 800.0;
    cfg.power_model.alpha_d_mw_per_mbps = 2.0;
    cfg.power_model.alpha_u_mw_per_mbps = 1.0;

    const SustainabilityCurve curve = sweep(cfg, 15.0, 39.0, 1.0);
    require(curve.rows.size() == 25,
            "sweep produced " + std::to_string(curve.rows.size()) + " rows");

    // Budget exactly linear with slope -1/r4 = -200 mW/C.
    for (std::size_t i = 1; i < curve.rows.size(); ++i) {
        const double slope = curve.rows[i].p_max_mw - curve.rows[i - 1].p_max_mw;
        require(std::abs(slope + 200.0) <= 1e-9,
                "budget slope " + fmt(slope) + " at row " + std::to_string(i));
        if (i >= 2) {
            const double dd = curve.rows[i].p_max_mw - 2.0 * curve.rows[i - 1].p_max_mw +
                              curve.rows[i - 2].p_max_mw;
            require(std::abs(dd) <= 1e-9, "budget second difference " + fmt(dd));
        }
    }

    std::size_t clamped = 0;
    for (std::size_t i = 0; i < curve.rows.size(); ++i) {
        const auto& row = curve.rows[i];
        require(row.feasible, "row below threshold marked infeasible");
        require(row.pct_reduction >= 0.0 && row.pct_reduction <= 100.0,
                "pct_reduction " + fmt(row.pct_reduction) + " outside [0, 100]");
        if (i > 0) {
            require(row.pct_reduction >= curve.rows[i - 1].pct_reduction - 1e-12,
                    "pct_reduction decreased at row " + std::to_string(i));
            require(row.max_rate_mbps <= curve.rows[i - 1].max_rate_mbps + 1e-12,
                    "max rate increased at row " + std::to_string(i));
        }
        require(row.max_rate_mbps <= cfg.link_cap_mbps + 1e-12,
                "rate " + fmt(row.max_rate_mbps) + " above the link cap");
        // Composition identity: running the budget back through the steady
        // skin abstraction lands exactly on the throttle threshold.
        const double skin = skin_temp_steady(cfg.steady, row.p_max_mw, row.ambient_temp_c);
        require(std::abs(skin - cfg.steady.throttle_threshold_c) <= 1e-9,
                "skin(p_max) off the threshold by " + fmt(skin - 40.0) + " C");
        if (row.max_rate_mbps >= cfg.link_cap_mbps) {
            ++clamped;
        } else if (row.max_rate_mbps > 0.0) {
            // And pushing the rate through the power model recovers the
            // budget on interior (unclamped) rows.
            const double recomposed =
                cfg.power_model.bp_5g_mw +
                row.max_rate_mbps * cfg.power_model.alpha_d_mw_per_mbps;
            require(std::abs(recomposed - row.p_max_mw) <= 1e-9,
                    "composition identity off by " + fmt(recomposed - row.p_max_mw));
        }
    }
    // The 15 C row (budget 5000 -> raw rate 2100) must exercise the clamp;
    // at 16 C the raw rate hits the cap exactly.
    require(clamped >= 2, "link-cap clamp never exercised");
    require(curve.rows[0].max_rate_mbps == 2000.0, "15 C row not clamped to 2000");
    require(std::abs(curve.rows[1].max_rate_mbps - 2000.0) <= 1e-9,
            "16 C row missed the exact cap boundary");

    return "(25 rows, slope -200 mW/C, clamp + composition identity hold)";
}

// ---------------------------------------------------------------- criterion 7

std::string check_closed_loop_convergence()
{
    const auto start = std::chrono::steady_clock::now();

    PowerModel model;
    model.key = {1, "sim"};
    model.bp_cpu_mw = 600.0;
    model.bp_5g_mw = 600.0;
    model.alpha_d_mw_per_mbps = 1.4;
    model.alpha_u_mw_per_mbps = 0.8;

    // The stock handset topology with reduced heat capacities: the loop's
    // equilibrium rate is set by resistances and the power model alone, so
    // shrinking the capacities only accelerates settling (time constants of
    // seconds instead of tens of minutes).
    DefaultNetworkOptions opts;
    opts.source_capacity_j_per_c = 0.5;
    opts.skin_capacity_j_per_c = 2.0;
    const ThermalNetwork net = default_phone_network(0.005, opts);

    GovernorConfig gov;
    gov.threshold_c = 40.0;
    gov.hysteresis_c = 0.01;
    gov.control_period_s = 1.0;
    gov.backoff_factor = 0.99;
    gov.recovery_step_mbps = 2.5;

    Workload wl;
    wl.segments = {{0.0, 2000.0, 0.0, 0.0, 0.0, 0.0}};
    wl.duration_s = 1500.0;

    std::string detail = "(";
    for (double amb : {15.0, 25.0, 35.0}) {
        // Analytic sustainable rate: invert the downlink term against the
        // thermal budget, capped by the offered demand.
        const double budget = (gov.threshold_c - amb) / 0.005;
        const double analytic =
            std::min(2000.0, (budget - model.bp_5g_mw) / model.alpha_d_mw_per_mbps);

        const SimResult res = run_closed_loop(model, net, gov, wl, amb, 0.25);
        const double settled = sustained_rate(res, kDefaultSettleFraction);
        const double err = rel_err(settled, analytic);
        require(err <= 0.02, "at " + fmt(amb) + " C settled " + fmt(settled) +
                                 " vs analytic " + fmt(analytic) + " (" +
                                 fmt(err * 100.0) + "%)");
        detail += fmt(amb) + "C: " + fmt(err * 100.0) + "%  ";
    }

    const double elapsed = seconds_since(start);
    require(elapsed < 10.0, "took " + fmt(elapsed) + " s, limit 10 s");
    return detail + fmt(elapsed) + " s)";
}

// ---------------------------------------------------------------- criterion 8

std::string check_pipeline_determinism()
{
    testutil::TempDir dir;
    const std::string truth = (testutil::fixture_dir() / "truth_registry.json").string();

    const auto run_pipeline = [&](const std::string& tag) {
        const auto sub = dir.file(tag);
        std::filesystem::create_directory(sub);
        const auto p = [&](const char* name) { return (sub / name).string(); };

        const std::string steps[] = {
            "gen-traces --out " + p("train.csv") + " --registry " + truth +
                " --freq-profile high --noise-sigma 100 --seed 42",
            "fit-power --in " + p("train.csv") + " --registry " + p("models.json") +
                " --report " + p("report.json"),
            "eval-power --in " + p("train.csv") + " --registry " + p("models.json") +
                " --out " + p("pred.csv"),
            "sustain --registry " + p("models.json") + " --freq-profile high --out " +
                p("curve.csv") + " --svg " + (sub / "fig").string(),
            "simulate --registry " + p("models.json") + " --freq-profile high --out " +
                p("sim.csv") + " --dl-demand 1500 --duration 120",
        };
        for (const auto& args : steps) {
            const auto r = testutil::run_cli(args, dir);
            require(r.exit_code == 0,
                    tag + ": `" + args.substr(0, args.find(' ')) + "` exited " +
                        std::to_string(r.exit_code) + ": " + r.err);
        }
        return sub;
    };

    const auto run1 = run_pipeline("run1");
    const auto run2 = run_pipeline("run2");

    const char* files[] = {"train.csv",     "models.json",   "report.json",
                           "pred.csv",      "curve.csv",     "fig_pmax.svg",
                           "fig_rate.svg",  "fig_reduction.svg", "sim.csv",
                           "sim.csv.summary"};
    for (const char* name : files) {
        const std::string a = testutil::read_file(run1 / name);
        const std::string b = testutil::read_file(run2 / name);
        require(!a.empty(), std::string(name) + " is empty");
        require(a == b, std::string(name) + " differs between identical runs");
    }

    return "(10 artifacts byte-identical across two runs)";
}

} // namespace

int main()
{
    std::printf("acceptance checks\n-----------------\n");
    criterion(1, "power-model coefficient recovery", check_coefficient_recovery);
    criterion(2, "skin-to-ambient resistance estimation", check_r4_estimation);
    criterion(3, "evaluation metrics", check_metrics);
    criterion(4, "power additivity decomposition", check_additivity);
    criterion(5, "transient thermal integrator", check_transient_integrator);
    criterion(6, "sustainability sweep", check_sustainability_sweep);
    criterion(7, "closed-loop throttling convergence", check_closed_loop_convergence);
    criterion(8, "pipeline determinism", check_pipeline_determinism);

    if (failures > 0) {
        std::printf("-----------------\n%d of 8 criteria failed\n", failures);
        return 1;
    }
    std::printf("-----------------\nall 8 criteria passed\n");
    return 0;
}

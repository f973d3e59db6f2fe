#include "powertherm/csv.hpp"
#include "powertherm/power_model.hpp"
#include "powertherm/traces.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

using namespace powertherm;
using testutil::TempDir;
using testutil::read_file;
using testutil::run_cli;

namespace {

std::string q(const std::filesystem::path& p) { return p.string(); }

std::string truth_registry() { return (testutil::fixture_dir() / "truth_registry.json").string(); }

} // namespace

TEST_CASE("the training-to-simulation pipeline runs end to end")
{
    TempDir dir;
    const auto trace = dir.file("train.csv");
    const auto registry = dir.file("models.json");
    const auto pred = dir.file("pred.csv");
    const auto curve = dir.file("curve.csv");
    const auto sim = dir.file("sim.csv");

    auto gen = run_cli("gen-traces --out " + q(trace) + " --registry " + truth_registry() +
                           " --freq-profile high",
                       dir);
    REQUIRE(gen.exit_code == 0);
    CHECK(gen.out.find("wrote") != std::string::npos);
    CHECK(gen.out.find(trace.string()) != std::string::npos);

    auto fit = run_cli("fit-power --in " + q(trace) + " --registry " + q(registry) +
                           " --report " + q(dir.file("report.json")),
                       dir);
    REQUIRE(fit.exit_code == 0);
    CHECK(fit.out.find("fitted (channel 1, profile high)") != std::string::npos);
    CHECK(fit.out.find("bp_cpu_mw") != std::string::npos);
    CHECK(std::filesystem::exists(dir.file("report.json")));

    auto eval = run_cli("eval-power --in " + q(trace) + " --registry " + q(registry) +
                            " --out " + q(pred),
                        dir);
    REQUIRE(eval.exit_code == 0);
    // Noiseless data fitted and evaluated on itself: the metrics line is
    // fully deterministic, so it is pinned byte for byte.
    CHECK(eval.out == read_file(testutil::golden_dir() / "eval_stdout.txt"));

    std::ifstream pred_in(pred);
    std::string header;
    std::getline(pred_in, header);
    CHECK(header == "t_s,power_mw,predicted_mw,residual_mw");

    auto sus = run_cli("sustain --registry " + q(registry) +
                           " --freq-profile high --out " + q(curve) + " --svg " +
                           q(dir.file("fig")),
                       dir);
    REQUIRE(sus.exit_code == 0);
    std::ifstream curve_in(curve);
    std::getline(curve_in, header);
    CHECK(header == "ambient_temp_c,p_max_mw,max_rate_mbps,pct_reduction,feasible");
    CHECK(std::filesystem::exists(dir.file("fig_pmax.svg")));
    CHECK(std::filesystem::exists(dir.file("fig_rate.svg")));
    CHECK(std::filesystem::exists(dir.file("fig_reduction.svg")));

    auto simulate = run_cli("simulate --registry " + q(registry) +
                                " --freq-profile high --out " + q(sim) +
                                " --dl-demand 1200 --duration 60",
                            dir);
    REQUIRE(simulate.exit_code == 0);
    std::ifstream sim_in(sim);
    std::getline(sim_in, header);
    CHECK(header == "t_s,offered_mbps,granted_mbps,power_mw,skin_temp_c,throttled");
    const std::string summary = read_file(sim.string() + ".summary");
    CHECK(summary.find("peak_temp_c = ") != std::string::npos);
    CHECK(summary.find("throttle_events = ") != std::string::npos);
    CHECK(simulate.out.find("peak_temp_c") != std::string::npos);
}

TEST_CASE("missing input files exit 2 and name the path")
{
    TempDir dir;
    auto r = run_cli("fit-power --in " + q(dir.file("absent.csv")) + " --registry " +
                         q(dir.file("models.json")),
                     dir);
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("absent.csv") != std::string::npos);
}

TEST_CASE("a trace without 5G-off rows cannot pin the CPU intercept")
{
    TempDir dir;
    const auto trace = dir.file("train.csv");
    auto gen = run_cli("gen-traces --out " + q(trace) + " --registry " + truth_registry() +
                           " --freq-profile high --no-cpu-only-rows",
                       dir);
    REQUIRE(gen.exit_code == 0);

    auto fit =
        run_cli("fit-power --in " + q(trace) + " --registry " + q(dir.file("m.json")), dir);
    CHECK(fit.exit_code == 3);
    CHECK(fit.err.find("bp_cpu_mw") != std::string::npos);

    // Pinning the intercept on the command line rescues the fit.
    auto pinned = run_cli("fit-power --in " + q(trace) + " --registry " +
                              q(dir.file("m.json")) + " --fixed-bp-cpu 600",
                          dir);
    CHECK(pinned.exit_code == 0);
}

TEST_CASE("asking for a model key the registry lacks exits 3")
{
    TempDir dir;
    const auto trace_high = dir.file("high.csv");
    const auto trace_low = dir.file("low.csv");
    const auto registry = dir.file("models.json");

    REQUIRE(run_cli("gen-traces --out " + q(trace_high) + " --registry " + truth_registry() +
                        " --freq-profile high",
                    dir)
                .exit_code == 0);
    REQUIRE(run_cli("gen-traces --out " + q(trace_low) + " --registry " + truth_registry() +
                        " --freq-profile low",
                    dir)
                .exit_code == 0);
    REQUIRE(run_cli("fit-power --in " + q(trace_low) + " --registry " + q(registry), dir)
                .exit_code == 0);

    auto eval = run_cli("eval-power --in " + q(trace_high) + " --registry " + q(registry) +
                            " --out " + q(dir.file("pred.csv")),
                        dir);
    CHECK(eval.exit_code == 3);
    CHECK(eval.err.find("(channel 1, profile high)") != std::string::npos);
}

TEST_CASE("fit-thermal prints the resistance at fixed precision")
{
    TempDir dir;
    const auto steady = dir.file("steady.csv");
    {
        std::ofstream out(steady);
        out << "skin_temp_c,ambient_temp_c,power_mw\n35,25,2000\n";
    }
    auto r = run_cli("fit-thermal --in " + q(steady) + " --out " + q(dir.file("r4.txt")), dir);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("R4 = 0.005000 C/mW") != std::string::npos);
    CHECK(r.out.find("samples = 1") != std::string::npos);
    const std::string saved = read_file(dir.file("r4.txt"));
    CHECK(saved.find("r4_c_per_mw = ") != std::string::npos);
}

TEST_CASE("usage errors exit 4")
{
    TempDir dir;
    CHECK(run_cli("simulate --frobnicate", dir).exit_code == 4);
    CHECK(run_cli("gen-traces --out x.csv", dir).exit_code == 4); // missing required
    CHECK(run_cli("no-such-command", dir).exit_code == 4);
    CHECK(run_cli("", dir).exit_code == 4); // a subcommand is required
    CHECK(run_cli("--help", dir).exit_code == 0);
}

TEST_CASE("the stress matrix table prints all eight cells")
{
    TempDir dir;
    const auto out = dir.file("stress.csv");
    auto r = run_cli("stress-matrix --registry " + truth_registry() +
                         " --high-profile high --low-profile low --out " + q(out),
                     dir);
    REQUIRE(r.exit_code == 0);
    for (const char* scenario : {"idle", "cpu_only", "trans_only", "both"}) {
        CHECK(r.out.find(scenario) != std::string::npos);
    }
    const std::string csv = read_file(out);
    CHECK(csv.find("scenario,freq_profile_id,power_mw,skin_temp_c") == 0);
    CHECK(csv.find("cpu_only,high,3700,") != std::string::npos);
    CHECK(csv.find("both,low,6300,") != std::string::npos);
}

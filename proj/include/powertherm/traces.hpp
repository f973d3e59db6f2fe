#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace powertherm {

struct PowerModel; // power_model.hpp

// A named CPU frequency operating point, one frequency per cluster (MHz).
struct CpuFreqProfile {
    std::string id;
    std::vector<double> cluster_freqs_mhz;

    void validate() const;
};

// Sidecar registry of frequency profiles. File format is one profile per
// line: `id = f1, f2, f3` (MHz), with `#` comments.
class ProfileRegistry {
public:
    void put(CpuFreqProfile profile); // throws ConfigError on duplicate id
    bool contains(std::string_view id) const;
    const CpuFreqProfile& get(std::string_view id) const;
    std::size_t size() const { return profiles_.size(); }
    const std::map<std::string, CpuFreqProfile>& all() const { return profiles_; }

    static ProfileRegistry load(std::istream& in, const std::string& source_name);
    static ProfileRegistry load(const std::filesystem::path& path);
    void save(std::ostream& out) const;
    void save(const std::filesystem::path& path) const;

private:
    std::map<std::string, CpuFreqProfile> profiles_;
};

// One timestamped observation of the system variables plus, when available,
// measured power and temperatures. ut/u6/u7 are distinct counters: total CPU
// usage and the two big-core usages, each independently in [0, 100].
struct TraceSample {
    double t_s = 0.0;
    double ut_pct = 0.0;
    double u6_pct = 0.0;
    double u7_pct = 0.0;
    double dl_mbps = 0.0;
    double ul_mbps = 0.0;
    bool i5g = false;
    int channel_number = 0;
    std::string freq_profile_id;
    std::optional<double> power_mw;
    std::optional<double> skin_temp_c;
    std::optional<double> ambient_temp_c;

    bool operator==(const TraceSample&) const = default;
};

inline constexpr std::string_view kTraceCsvHeader =
    "t_s,ut_pct,u6_pct,u7_pct,dl_mbps,ul_mbps,i5g,channel_number,"
    "freq_profile_id,power_mw,skin_temp_c,ambient_temp_c";

// Per-sample invariants; throws ConfigError naming the offending field.
void validate_sample(const TraceSample& sample);

// validate_sample for every entry plus nondecreasing t_s across the trace.
void validate_trace(std::span<const TraceSample> samples);

// Canonical CSV (see kTraceCsvHeader): '.' decimal, LF line endings, empty
// cells for absent optionals, doubles at full round-trip precision. Extra
// or missing columns are rejected.
std::vector<TraceSample> load_traces(std::istream& in, const std::string& source_name);
std::vector<TraceSample> load_traces(const std::filesystem::path& path);
void save_traces(std::span<const TraceSample> samples, std::ostream& out);
void save_traces(std::span<const TraceSample> samples, const std::filesystem::path& path);

// Training-grid generator configuration. One synthetic worker thread
// consumes `per_thread_usage_frac` of total CPU; the default 0.125 saturates
// one of eight cores.
struct TrainingGridConfig {
    std::vector<int> thread_counts;
    double per_thread_usage_frac = 0.125;
    std::vector<double> throughput_settings_mbps;
    double dwell_s = 10.0;
    std::string freq_profile_id;
    int channel_number = 0;

    void validate() const;
};

// One sample per (thread_count, throughput) cell, 5G active, uplink zero,
// power left unset. Threads fill cores 0..7 in order, each loading its core
// at min(1, 8 * per_thread_usage_frac); u6/u7 report the occupancy of cores
// 6 and 7, so they decouple from ut once the thread count passes 6.
std::vector<TraceSample> generate_training_grid(const TrainingGridConfig& cfg);

// Extra rows appended after the grid so every model coefficient stays
// identifiable: 5G-inactive rows expose the CPU-only intercept, uplink-only
// rows expose the uplink slope.
struct GridAugmentation {
    bool cpu_only_rows = true;         // one 5G-off row per thread count
    std::vector<double> ul_rates_mbps; // 5G-on, zero CPU, uplink-only rows
};

std::vector<TraceSample> augment_training_grid(std::vector<TraceSample> grid,
                                               const TrainingGridConfig& cfg,
                                               const GridAugmentation& aug);

// Tiles the trace `repeats` times (repeated measurements of each cell),
// restamping t_s at dwell_s spacing so timestamps keep increasing.
std::vector<TraceSample> replicate_trace(std::span<const TraceSample> samples,
                                         std::size_t repeats, double dwell_s);

// Fills power_mw with the truth model's prediction plus Gaussian noise
// (see rng.hpp for the exact noise algorithm). Deterministic given seed.
// Every grid sample must carry the truth model's key.
std::vector<TraceSample> synth_traces(const PowerModel& truth,
                                      std::vector<TraceSample> grid,
                                      double noise_sigma_mw,
                                      std::uint64_t seed);

} // namespace powertherm

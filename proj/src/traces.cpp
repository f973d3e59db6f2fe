#include "powertherm/traces.hpp"

#include "powertherm/csv.hpp"
#include "powertherm/errors.hpp"
#include "powertherm/power_model.hpp"
#include "powertherm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace powertherm {

namespace {

bool valid_id_char(char c)
{
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
}

void check_id(const std::string& id, const char* what)
{
    if (id.empty()) {
        throw ConfigError(std::string(what) + " must be nonempty");
    }
    for (char c : id) {
        if (!valid_id_char(c)) {
            throw ConfigError(std::string(what) + " '" + id +
                              "' contains a character outside [A-Za-z0-9_.-]");
        }
    }
}

std::string trim(std::string_view s)
{
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) {
        ++b;
    }
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

void check_finite(double v, const char* field)
{
    if (!std::isfinite(v)) {
        throw ConfigError(std::string(field) + " must be finite");
    }
}

void check_pct(double v, const char* field)
{
    check_finite(v, field);
    if (v < 0.0 || v > 100.0) {
        throw ConfigError(std::string(field) + " must lie in [0, 100]");
    }
}

} // namespace

void CpuFreqProfile::validate() const
{
    check_id(id, "profile id");
    if (cluster_freqs_mhz.empty()) {
        throw ConfigError("profile '" + id + "' needs at least one cluster frequency");
    }
    for (double f : cluster_freqs_mhz) {
        if (!(f > 0.0) || !std::isfinite(f)) {
            throw ConfigError("profile '" + id + "' has a non-positive cluster frequency");
        }
    }
}

void ProfileRegistry::put(CpuFreqProfile profile)
{
    profile.validate();
    auto [it, inserted] = profiles_.emplace(profile.id, std::move(profile));
    if (!inserted) {
        throw ConfigError("duplicate profile id '" + it->first + "'");
    }
}

bool ProfileRegistry::contains(std::string_view id) const
{
    return profiles_.find(std::string(id)) != profiles_.end();
}

const CpuFreqProfile& ProfileRegistry::get(std::string_view id) const
{
    auto it = profiles_.find(std::string(id));
    if (it == profiles_.end()) {
        throw ConfigError("unknown frequency profile '" + std::string(id) + "'");
    }
    return it->second;
}

ProfileRegistry ProfileRegistry::load(std::istream& in, const std::string& source_name)
{
    ProfileRegistry reg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') {
            continue;
        }
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw IoError(source_name + ":" + std::to_string(line_no) +
                          ": expected 'id = freq, freq, ...'");
        }
        CpuFreqProfile profile;
        profile.id = trim(stripped.substr(0, eq));
        for (const auto& field : csv::split(stripped.substr(eq + 1))) {
            try {
                profile.cluster_freqs_mhz.push_back(csv::parse_double(trim(field)));
            } catch (const std::invalid_argument& e) {
                throw IoError(source_name + ":" + std::to_string(line_no) + ": " + e.what());
            }
        }
        try {
            reg.put(std::move(profile));
        } catch (const ConfigError& e) {
            throw IoError(source_name + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return reg;
}

ProfileRegistry ProfileRegistry::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open profile file: " + path.string());
    }
    return load(in, path.string());
}

void ProfileRegistry::save(std::ostream& out) const
{
    out << "# frequency profiles: id = MHz per cluster\n";
    for (const auto& [id, profile] : profiles_) {
        out << id << " =";
        for (std::size_t i = 0; i < profile.cluster_freqs_mhz.size(); ++i) {
            out << (i == 0 ? " " : ", ") << csv::format_double(profile.cluster_freqs_mhz[i]);
        }
        out << "\n";
    }
    if (!out) {
        throw IoError("failed writing profile registry");
    }
}

void ProfileRegistry::save(const std::filesystem::path& path) const
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    save(out);
}

void validate_sample(const TraceSample& sample)
{
    check_finite(sample.t_s, "t_s");
    check_pct(sample.ut_pct, "ut_pct");
    check_pct(sample.u6_pct, "u6_pct");
    check_pct(sample.u7_pct, "u7_pct");
    check_finite(sample.dl_mbps, "dl_mbps");
    check_finite(sample.ul_mbps, "ul_mbps");
    if (sample.dl_mbps < 0.0) {
        throw ConfigError("dl_mbps must be >= 0");
    }
    if (sample.ul_mbps < 0.0) {
        throw ConfigError("ul_mbps must be >= 0");
    }
    if (!sample.i5g && (sample.dl_mbps != 0.0 || sample.ul_mbps != 0.0)) {
        throw ConfigError(sample.dl_mbps != 0.0
                              ? "dl_mbps must be 0 when i5g = 0"
                              : "ul_mbps must be 0 when i5g = 0");
    }
    if (sample.channel_number < 0) {
        throw ConfigError("channel_number must be >= 0");
    }
    check_id(sample.freq_profile_id, "freq_profile_id");
    if (sample.power_mw) {
        check_finite(*sample.power_mw, "power_mw");
        if (*sample.power_mw < 0.0) {
            throw ConfigError("power_mw must be >= 0");
        }
    }
    if (sample.skin_temp_c) {
        check_finite(*sample.skin_temp_c, "skin_temp_c");
    }
    if (sample.ambient_temp_c) {
        check_finite(*sample.ambient_temp_c, "ambient_temp_c");
    }
}

void validate_trace(std::span<const TraceSample> samples)
{
    double prev_t = -std::numeric_limits<double>::infinity();
    for (const auto& sample : samples) {
        validate_sample(sample);
        if (sample.t_s < prev_t) {
            throw ConfigError("t_s must be nondecreasing within a trace");
        }
        prev_t = sample.t_s;
    }
}

namespace {

constexpr std::size_t kTraceColumns = 12;

std::optional<double> parse_optional(const std::string& field)
{
    if (field.empty()) {
        return std::nullopt;
    }
    return csv::parse_double(field);
}

TraceSample parse_row(const std::vector<std::string>& fields)
{
    TraceSample s;
    s.t_s = csv::parse_double(fields[0]);
    s.ut_pct = csv::parse_double(fields[1]);
    s.u6_pct = csv::parse_double(fields[2]);
    s.u7_pct = csv::parse_double(fields[3]);
    s.dl_mbps = csv::parse_double(fields[4]);
    s.ul_mbps = csv::parse_double(fields[5]);
    const long long flag = csv::parse_int(fields[6]);
    if (flag != 0 && flag != 1) {
        throw std::invalid_argument("i5g must be 0 or 1");
    }
    s.i5g = flag == 1;
    const long long cn = csv::parse_int(fields[7]);
    if (cn < 0 || cn > std::numeric_limits<int>::max()) {
        throw std::invalid_argument("channel_number out of range");
    }
    s.channel_number = static_cast<int>(cn);
    s.freq_profile_id = fields[8];
    s.power_mw = parse_optional(fields[9]);
    s.skin_temp_c = parse_optional(fields[10]);
    s.ambient_temp_c = parse_optional(fields[11]);
    return s;
}

} // namespace

std::vector<TraceSample> load_traces(std::istream& in, const std::string& source_name)
{
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError(source_name + ": empty trace file");
    }
    if (trim(line) != kTraceCsvHeader) {
        throw IoError(source_name + ":1: header does not match the trace schema");
    }

    std::vector<TraceSample> samples;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() && in.peek() == std::char_traits<char>::eof()) {
            break; // tolerate one trailing newline
        }
        const auto fields = csv::split(trim(line));
        if (fields.size() != kTraceColumns) {
            throw IoError(source_name + ":" + std::to_string(line_no) + ": expected " +
                          std::to_string(kTraceColumns) + " columns, got " +
                          std::to_string(fields.size()));
        }
        try {
            TraceSample s = parse_row(fields);
            validate_sample(s);
            samples.push_back(std::move(s));
        } catch (const std::invalid_argument& e) {
            throw IoError(source_name + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const ConfigError& e) {
            throw IoError(source_name + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (samples.empty()) {
        throw IoError(source_name + ": trace file contains no samples");
    }
    try {
        validate_trace(samples);
    } catch (const ConfigError& e) {
        throw IoError(source_name + ": " + e.what());
    }
    return samples;
}

std::vector<TraceSample> load_traces(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open trace file: " + path.string());
    }
    return load_traces(in, path.string());
}

namespace {

std::string optional_cell(const std::optional<double>& v)
{
    return v ? csv::format_double(*v) : std::string();
}

} // namespace

void save_traces(std::span<const TraceSample> samples, std::ostream& out)
{
    if (samples.empty()) {
        throw ConfigError("cannot save an empty trace");
    }
    validate_trace(samples);
    out << kTraceCsvHeader << "\n";
    for (const auto& s : samples) {
        out << csv::format_double(s.t_s) << ','
            << csv::format_double(s.ut_pct) << ','
            << csv::format_double(s.u6_pct) << ','
            << csv::format_double(s.u7_pct) << ','
            << csv::format_double(s.dl_mbps) << ','
            << csv::format_double(s.ul_mbps) << ','
            << (s.i5g ? '1' : '0') << ','
            << csv::format_int(s.channel_number) << ','
            << s.freq_profile_id << ','
            << optional_cell(s.power_mw) << ','
            << optional_cell(s.skin_temp_c) << ','
            << optional_cell(s.ambient_temp_c) << '\n';
    }
    if (!out) {
        throw IoError("failed writing trace data");
    }
}

void save_traces(std::span<const TraceSample> samples, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    save_traces(samples, out);
}

void TrainingGridConfig::validate() const
{
    if (thread_counts.empty()) {
        throw ConfigError("thread_counts must be nonempty");
    }
    for (int c : thread_counts) {
        if (c < 0) {
            throw ConfigError("thread counts must be >= 0");
        }
        if (static_cast<double>(c) * per_thread_usage_frac > 1.0) {
            throw ConfigError("grid cell exceeds 100% total CPU usage (" +
                              std::to_string(c) + " threads at fraction " +
                              std::to_string(per_thread_usage_frac) + ")");
        }
    }
    if (!(per_thread_usage_frac > 0.0) || per_thread_usage_frac > 1.0) {
        throw ConfigError("per_thread_usage_frac must lie in (0, 1]");
    }
    if (throughput_settings_mbps.empty()) {
        throw ConfigError("throughput_settings_mbps must be nonempty");
    }
    for (double r : throughput_settings_mbps) {
        if (!(r >= 0.0) || !std::isfinite(r)) {
            throw ConfigError("throughput settings must be >= 0");
        }
    }
    if (!(dwell_s > 0.0)) {
        throw ConfigError("dwell_s must be > 0");
    }
    check_id(freq_profile_id, "freq_profile_id");
    if (channel_number < 0) {
        throw ConfigError("channel_number must be >= 0");
    }
}

std::vector<TraceSample> generate_training_grid(const TrainingGridConfig& cfg)
{
    cfg.validate();

    constexpr int kCores = 8;
    const double per_core_pct = std::min(1.0, cfg.per_thread_usage_frac * kCores) * 100.0;

    std::vector<TraceSample> samples;
    samples.reserve(cfg.thread_counts.size() * cfg.throughput_settings_mbps.size());
    std::size_t cell = 0;
    for (int threads : cfg.thread_counts) {
        for (double rate : cfg.throughput_settings_mbps) {
            TraceSample s;
            s.t_s = static_cast<double>(cell) * cfg.dwell_s;
            s.ut_pct = static_cast<double>(threads) * cfg.per_thread_usage_frac * 100.0;
            s.u6_pct = threads > 6 ? per_core_pct : 0.0;
            s.u7_pct = threads > 7 ? per_core_pct : 0.0;
            s.dl_mbps = rate;
            s.ul_mbps = 0.0;
            s.i5g = true;
            s.channel_number = cfg.channel_number;
            s.freq_profile_id = cfg.freq_profile_id;
            samples.push_back(std::move(s));
            ++cell;
        }
    }
    validate_trace(samples);
    return samples;
}

std::vector<TraceSample> augment_training_grid(std::vector<TraceSample> grid,
                                               const TrainingGridConfig& cfg,
                                               const GridAugmentation& aug)
{
    cfg.validate();

    constexpr int kCores = 8;
    const double per_core_pct = std::min(1.0, cfg.per_thread_usage_frac * kCores) * 100.0;
    std::size_t cell = grid.size();
    const auto stamp = [&](TraceSample s) {
        s.t_s = static_cast<double>(cell++) * cfg.dwell_s;
        s.channel_number = cfg.channel_number;
        s.freq_profile_id = cfg.freq_profile_id;
        grid.push_back(std::move(s));
    };

    if (aug.cpu_only_rows) {
        for (int threads : cfg.thread_counts) {
            TraceSample s;
            s.ut_pct = static_cast<double>(threads) * cfg.per_thread_usage_frac * 100.0;
            s.u6_pct = threads > 6 ? per_core_pct : 0.0;
            s.u7_pct = threads > 7 ? per_core_pct : 0.0;
            s.i5g = false;
            stamp(std::move(s));
        }
    }
    for (double ul : aug.ul_rates_mbps) {
        if (!(ul >= 0.0) || !std::isfinite(ul)) {
            throw ConfigError("uplink rates must be >= 0");
        }
        TraceSample s;
        s.ul_mbps = ul;
        s.i5g = true;
        stamp(std::move(s));
    }
    validate_trace(grid);
    return grid;
}

std::vector<TraceSample> replicate_trace(std::span<const TraceSample> samples,
                                         std::size_t repeats, double dwell_s)
{
    if (repeats == 0) {
        throw ConfigError("repeats must be >= 1");
    }
    if (!(dwell_s > 0.0)) {
        throw ConfigError("dwell_s must be > 0");
    }
    std::vector<TraceSample> out;
    out.reserve(samples.size() * repeats);
    for (std::size_t r = 0; r < repeats; ++r) {
        for (const TraceSample& sample : samples) {
            TraceSample copy = sample;
            copy.t_s = static_cast<double>(out.size()) * dwell_s;
            out.push_back(std::move(copy));
        }
    }
    validate_trace(out);
    return out;
}

std::vector<TraceSample> synth_traces(const PowerModel& truth,
                                      std::vector<TraceSample> grid,
                                      double noise_sigma_mw,
                                      std::uint64_t seed)
{
    if (noise_sigma_mw < 0.0 || !std::isfinite(noise_sigma_mw)) {
        throw ConfigError("noise_sigma_mw must be >= 0");
    }
    GaussianSampler noise(seed);
    for (auto& sample : grid) {
        if (sample.channel_number != truth.key.channel_number ||
            sample.freq_profile_id != truth.key.freq_profile_id) {
            throw ConfigError("sample key (" + std::to_string(sample.channel_number) +
                              ", " + sample.freq_profile_id +
                              ") does not match truth model key " + to_string(truth.key));
        }
        const double p = predict_power(truth, sample);
        sample.power_mw = noise_sigma_mw == 0.0 ? p : noise.normal(p, noise_sigma_mw);
    }
    validate_trace(grid);
    return grid;
}

} // namespace powertherm

#pragma once

#include "powertherm/estimation.hpp"
#include "powertherm/traces.hpp"

#include <compare>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace powertherm {

// Models are fitted per channel and CPU frequency profile; the channel
// number is a key, not a regressor.
struct ModelKey {
    int channel_number = 0;
    std::string freq_profile_id;

    auto operator<=>(const ModelKey&) const = default;
};

std::string to_string(const ModelKey& key);

// Fitted linear power model. Total power is the sum of an intercept chosen
// by the 5G indicator (bp_cpu when inactive, bp_5g when active at zero
// throughput), three CPU usage terms, and two throughput terms.
struct PowerModel {
    ModelKey key;
    double bp_cpu_mw = 0.0;
    double bp_5g_mw = 0.0;
    double c_ut_mw_per_pct = 0.0;
    double c_u6_mw_per_pct = 0.0;
    double c_u7_mw_per_pct = 0.0;
    double alpha_d_mw_per_mbps = 0.0;
    double alpha_u_mw_per_mbps = 0.0;
    std::vector<std::string> plausibility_flags;

    void validate() const; // finite coefficients, nonnegative intercepts
};

struct PowerBreakdown {
    double base_mw = 0.0;        // active intercept
    double cpu_mw = 0.0;         // usage terms
    double transceiver_mw = 0.0; // throughput terms
    double total_mw = 0.0;       // always base + cpu + transceiver
};

struct FitOptions {
    // Pins bp_cpu instead of fitting it; required when the training set has
    // no 5G-inactive rows (the intercept is unidentifiable otherwise).
    std::optional<double> fixed_bp_cpu_mw;
};

inline constexpr const char* kPowerDesignLabels[7] = {
    "bp_cpu_mw",         "bp_5g_mw",          "c_ut_mw_per_pct",
    "c_u6_mw_per_pct",   "c_u7_mw_per_pct",   "alpha_d_mw_per_mbps",
    "alpha_u_mw_per_mbps"};

// Regressor matrix with columns (1 - i5g), i5g, ut, u6, u7, dl, ul; the
// first column is dropped when include_bp_cpu_column is false.
DesignMatrix build_power_design(std::span<const TraceSample> samples,
                                bool include_bp_cpu_column = true);

// Fits the model on samples that all carry power_mw and match `key`.
// Needs n >= 7. Negative fitted intercepts are an error; negative slope
// coefficients are recorded in plausibility_flags. The report is computed
// on the training samples themselves.
std::pair<PowerModel, FitReport> fit_power_model(std::span<const TraceSample> samples,
                                                 const ModelKey& key,
                                                 const FitOptions& options = {});

double predict_power(const PowerModel& model, const TraceSample& sample);

PowerBreakdown decompose_power(const PowerModel& model, const TraceSample& sample);

// (p_cpu_only + p_trans_only) - (p_both + bp_cpu). A small residual means
// the CPU contributes next to nothing while the transceiver is stressed.
double additivity_check(double p_cpu_only_mw, double p_trans_only_mw,
                        double p_both_mw, double bp_cpu_mw);

// Persistent collection of fitted models, one per key. Serialized as a JSON
// document with a format version; duplicate keys in a file are rejected.
class ModelRegistry {
public:
    static constexpr int kFormatVersion = 1;

    void put(PowerModel model); // replaces any existing model for the key
    bool contains(const ModelKey& key) const;
    const PowerModel& get(const ModelKey& key) const;
    std::size_t size() const { return models_.size(); }
    const std::map<ModelKey, PowerModel>& all() const { return models_; }

    static ModelRegistry load(std::istream& in, const std::string& source_name);
    static ModelRegistry load(const std::filesystem::path& path);
    void save(std::ostream& out) const;
    void save(const std::filesystem::path& path) const;

private:
    std::map<ModelKey, PowerModel> models_;
};

} // namespace powertherm

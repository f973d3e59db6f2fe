#include "powertherm/power_model.hpp"

#include "powertherm/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace powertherm {

using nlohmann::json;

std::string to_string(const ModelKey& key)
{
    return "(channel " + std::to_string(key.channel_number) + ", profile " +
           key.freq_profile_id + ")";
}

void PowerModel::validate() const
{
    const double coeffs[] = {bp_cpu_mw,        bp_5g_mw,          c_ut_mw_per_pct,
                             c_u6_mw_per_pct,  c_u7_mw_per_pct,   alpha_d_mw_per_mbps,
                             alpha_u_mw_per_mbps};
    for (double c : coeffs) {
        if (!std::isfinite(c)) {
            throw ConfigError("power model " + to_string(key) +
                              " has a non-finite coefficient");
        }
    }
    if (bp_cpu_mw < 0.0 || bp_5g_mw < 0.0) {
        throw FitError("power model " + to_string(key) +
                       " has a negative base power intercept");
    }
    if (key.freq_profile_id.empty()) {
        throw ConfigError("power model key needs a frequency profile id");
    }
    if (key.channel_number < 0) {
        throw ConfigError("power model key needs channel_number >= 0");
    }
}

DesignMatrix build_power_design(std::span<const TraceSample> samples,
                                bool include_bp_cpu_column)
{
    if (samples.empty()) {
        throw ConfigError("cannot build a design matrix from zero samples");
    }
    std::vector<std::string> labels;
    for (std::size_t j = include_bp_cpu_column ? 0 : 1; j < 7; ++j) {
        labels.emplace_back(kPowerDesignLabels[j]);
    }
    const std::size_t n_cols = labels.size();
    DesignMatrix X(samples.size(), n_cols, std::move(labels));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const TraceSample& s = samples[i];
        const double i5g = s.i5g ? 1.0 : 0.0;
        std::size_t j = 0;
        if (include_bp_cpu_column) {
            X.at(i, j++) = 1.0 - i5g;
        }
        X.at(i, j++) = i5g;
        X.at(i, j++) = s.ut_pct;
        X.at(i, j++) = s.u6_pct;
        X.at(i, j++) = s.u7_pct;
        X.at(i, j++) = s.dl_mbps;
        X.at(i, j++) = s.ul_mbps;
    }
    return X;
}

std::pair<PowerModel, FitReport> fit_power_model(std::span<const TraceSample> samples,
                                                 const ModelKey& key,
                                                 const FitOptions& options)
{
    if (samples.size() < 7) {
        throw FitError("underdetermined fit: need at least 7 samples, got " +
                       std::to_string(samples.size()));
    }
    if (options.fixed_bp_cpu_mw && *options.fixed_bp_cpu_mw < 0.0) {
        throw ConfigError("fixed_bp_cpu_mw must be >= 0");
    }

    std::vector<double> y;
    y.reserve(samples.size());
    for (const auto& s : samples) {
        validate_sample(s);
        if (s.channel_number != key.channel_number || s.freq_profile_id != key.freq_profile_id) {
            throw FitError("mixed keys in training set: expected " + to_string(key) +
                           ", found (" + std::to_string(s.channel_number) + ", " +
                           s.freq_profile_id + ")");
        }
        if (!s.power_mw) {
            throw FitError("training sample at t_s=" + std::to_string(s.t_s) +
                           " has no measured power_mw");
        }
        y.push_back(*s.power_mw);
    }

    const bool fit_bp_cpu = !options.fixed_bp_cpu_mw.has_value();
    if (!fit_bp_cpu) {
        // Pinned intercept: remove its contribution from the response.
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (!samples[i].i5g) {
                y[i] -= *options.fixed_bp_cpu_mw;
            }
        }
    }

    const DesignMatrix X = build_power_design(samples, fit_bp_cpu);
    const LsqSolution sol = least_squares(X, y);

    PowerModel model;
    model.key = key;
    std::size_t j = 0;
    model.bp_cpu_mw = fit_bp_cpu ? sol.coefficients[j++] : *options.fixed_bp_cpu_mw;
    model.bp_5g_mw = sol.coefficients[j++];
    model.c_ut_mw_per_pct = sol.coefficients[j++];
    model.c_u6_mw_per_pct = sol.coefficients[j++];
    model.c_u7_mw_per_pct = sol.coefficients[j++];
    model.alpha_d_mw_per_mbps = sol.coefficients[j++];
    model.alpha_u_mw_per_mbps = sol.coefficients[j++];

    if (model.bp_cpu_mw < 0.0) {
        throw FitError("fit rejected: negative base power bp_cpu_mw = " +
                       std::to_string(model.bp_cpu_mw));
    }
    if (model.bp_5g_mw < 0.0) {
        throw FitError("fit rejected: negative base power bp_5g_mw = " +
                       std::to_string(model.bp_5g_mw));
    }
    const std::pair<const char*, double> slopes[] = {
        {"c_ut_mw_per_pct", model.c_ut_mw_per_pct},
        {"c_u6_mw_per_pct", model.c_u6_mw_per_pct},
        {"c_u7_mw_per_pct", model.c_u7_mw_per_pct},
        {"alpha_d_mw_per_mbps", model.alpha_d_mw_per_mbps},
        {"alpha_u_mw_per_mbps", model.alpha_u_mw_per_mbps},
    };
    for (const auto& [name, value] : slopes) {
        if (value < 0.0) {
            model.plausibility_flags.push_back(std::string("negative coefficient ") +
                                               name + " = " + std::to_string(value));
        }
    }
    model.validate();

    std::vector<double> predicted;
    std::vector<double> measured;
    predicted.reserve(samples.size());
    measured.reserve(samples.size());
    for (const auto& s : samples) {
        predicted.push_back(predict_power(model, s));
        measured.push_back(*s.power_mw);
    }
    return {std::move(model), make_fit_report(predicted, measured)};
}

PowerBreakdown decompose_power(const PowerModel& model, const TraceSample& sample)
{
    if (sample.channel_number != model.key.channel_number ||
        sample.freq_profile_id != model.key.freq_profile_id) {
        throw FitError("sample key (" + std::to_string(sample.channel_number) + ", " +
                       sample.freq_profile_id + ") does not match model key " +
                       to_string(model.key));
    }
    PowerBreakdown b;
    b.base_mw = sample.i5g ? model.bp_5g_mw : model.bp_cpu_mw;
    b.cpu_mw = sample.ut_pct * model.c_ut_mw_per_pct +
               sample.u6_pct * model.c_u6_mw_per_pct +
               sample.u7_pct * model.c_u7_mw_per_pct;
    b.transceiver_mw = sample.dl_mbps * model.alpha_d_mw_per_mbps +
                       sample.ul_mbps * model.alpha_u_mw_per_mbps;
    b.total_mw = b.base_mw + b.cpu_mw + b.transceiver_mw;
    return b;
}

double predict_power(const PowerModel& model, const TraceSample& sample)
{
    return decompose_power(model, sample).total_mw;
}

double additivity_check(double p_cpu_only_mw, double p_trans_only_mw,
                        double p_both_mw, double bp_cpu_mw)
{
    const double inputs[] = {p_cpu_only_mw, p_trans_only_mw, p_both_mw, bp_cpu_mw};
    for (double v : inputs) {
        if (!std::isfinite(v) || v < 0.0) {
            throw ConfigError("additivity_check inputs must be finite and >= 0");
        }
    }
    return (p_cpu_only_mw + p_trans_only_mw) - (p_both_mw + bp_cpu_mw);
}

void ModelRegistry::put(PowerModel model)
{
    model.validate();
    models_.insert_or_assign(model.key, std::move(model));
}

bool ModelRegistry::contains(const ModelKey& key) const
{
    return models_.find(key) != models_.end();
}

const PowerModel& ModelRegistry::get(const ModelKey& key) const
{
    auto it = models_.find(key);
    if (it == models_.end()) {
        throw FitError("no model for key " + to_string(key) + " in registry");
    }
    return it->second;
}

void ModelRegistry::save(std::ostream& out) const
{
    json doc;
    doc["version"] = kFormatVersion;
    json models = json::array();
    for (const auto& [key, m] : models_) {
        json entry;
        entry["channel_number"] = key.channel_number;
        entry["freq_profile_id"] = key.freq_profile_id;
        entry["bp_cpu_mw"] = m.bp_cpu_mw;
        entry["bp_5g_mw"] = m.bp_5g_mw;
        entry["c_ut_mw_per_pct"] = m.c_ut_mw_per_pct;
        entry["c_u6_mw_per_pct"] = m.c_u6_mw_per_pct;
        entry["c_u7_mw_per_pct"] = m.c_u7_mw_per_pct;
        entry["alpha_d_mw_per_mbps"] = m.alpha_d_mw_per_mbps;
        entry["alpha_u_mw_per_mbps"] = m.alpha_u_mw_per_mbps;
        entry["plausibility_flags"] = m.plausibility_flags;
        models.push_back(std::move(entry));
    }
    doc["models"] = std::move(models);
    out << doc.dump(2) << "\n";
    if (!out) {
        throw IoError("failed writing model registry");
    }
}

void ModelRegistry::save(const std::filesystem::path& path) const
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    save(out);
}

ModelRegistry ModelRegistry::load(std::istream& in, const std::string& source_name)
{
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError(source_name + ": invalid JSON: " + e.what());
    }

    ModelRegistry reg;
    try {
        const int version = doc.at("version").get<int>();
        if (version != kFormatVersion) {
            throw IoError(source_name + ": registry format version " +
                          std::to_string(version) + " not supported (expected " +
                          std::to_string(kFormatVersion) + ")");
        }
        for (const auto& entry : doc.at("models")) {
            PowerModel m;
            m.key.channel_number = entry.at("channel_number").get<int>();
            m.key.freq_profile_id = entry.at("freq_profile_id").get<std::string>();
            m.bp_cpu_mw = entry.at("bp_cpu_mw").get<double>();
            m.bp_5g_mw = entry.at("bp_5g_mw").get<double>();
            m.c_ut_mw_per_pct = entry.at("c_ut_mw_per_pct").get<double>();
            m.c_u6_mw_per_pct = entry.at("c_u6_mw_per_pct").get<double>();
            m.c_u7_mw_per_pct = entry.at("c_u7_mw_per_pct").get<double>();
            m.alpha_d_mw_per_mbps = entry.at("alpha_d_mw_per_mbps").get<double>();
            m.alpha_u_mw_per_mbps = entry.at("alpha_u_mw_per_mbps").get<double>();
            if (entry.contains("plausibility_flags")) {
                m.plausibility_flags =
                    entry.at("plausibility_flags").get<std::vector<std::string>>();
            }
            if (reg.contains(m.key)) {
                throw IoError(source_name + ": duplicate registry entry for key " +
                              to_string(m.key));
            }
            reg.put(std::move(m));
        }
    } catch (const json::exception& e) {
        throw IoError(source_name + ": malformed registry document: " + e.what());
    }
    return reg;
}

ModelRegistry ModelRegistry::load(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open registry file: " + path.string());
    }
    return load(in, path.string());
}

} // namespace powertherm

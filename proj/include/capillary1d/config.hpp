#pragma once

/// Run configuration: JSON ingestion with defaults, dotted-path overrides and
/// resolution of every "auto" value, so that the resolved document alone
/// reproduces a run.

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "capillary1d/error.hpp"
#include "capillary1d/galerkin.hpp"
#include "capillary1d/model.hpp"
#include "capillary1d/spectral_basis.hpp"

namespace capillary1d {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

struct InitialData {
    std::string kind = "cosine_bump";
    json parameters = json::object();
};

struct DiagnosticsOptions {
    std::vector<double> r_values{1.5, 2.0};
    std::optional<double> tol_zero;  ///< unset: 1e-7 max(1, |u0|_inf)
    std::optional<double> tol_neg;   ///< unset: 1e-8 |u0|_inf
    bool holder_probe = true;
    bool entropy = true;  ///< track int G(u) and reject data with infinite limiting entropy
};

struct OutputOptions {
    std::string directory = "out";
    std::vector<std::string> formats{"csv", "json"};
};

struct SimulationConfig {
    DomainSpec domain;
    ModelParams model;
    IntegratorSpec integrator;
    std::optional<int> snapshot_count = 10;  ///< used when the explicit list is empty
    InitialData initial_data;
    DiagnosticsOptions diagnostics;
    OutputOptions output;

    std::vector<double> snapshot_times() const {
        if (!integrator.snapshot_times.empty()) return integrator.snapshot_times;
        return uniform_snapshots(integrator.t_end, snapshot_count.value_or(10));
    }
};

namespace detail {

template <class T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

inline std::optional<double> read_auto(const json& j, const char* key, std::optional<double> fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    const json& v = j.at(key);
    if (v.is_string()) {
        if (v.get<std::string>() == "auto") return std::nullopt;
        throw ValidationError(std::string("config: '") + key + "' must be a number or \"auto\"");
    }
    return v.get<double>();
}

inline json auto_or(const std::optional<double>& v) { return v ? json(*v) : json("auto"); }

}  // namespace detail

inline SimulationConfig config_from_json(const json& j) {
    SimulationConfig c;
    try {
        if (!j.is_object()) throw ValidationError("config: top level must be an object");
        const int version = j.value("schema_version", kSchemaVersion);
        if (version != kSchemaVersion)
            throw ValidationError("config: unsupported schema_version " + std::to_string(version));

        if (j.contains("domain")) {
            const json& d = j.at("domain");
            detail::read(d, "l", c.domain.half_length);
            detail::read(d, "N", c.domain.modes);
            detail::read(d, "oversample", c.domain.oversample);
        }
        if (j.contains("model")) {
            const json& m = j.at("model");
            detail::read(m, "n", c.model.n);
            detail::read(m, "delta", c.model.delta);
            detail::read(m, "epsilon", c.model.epsilon);
            detail::read(m, "eta", c.model.eta);
            if (m.contains("pressure_mode"))
                c.model.pressure_mode = pressure_mode_from_string(m.at("pressure_mode").get<std::string>());
            c.model.entropy_anchor = detail::read_auto(m, "entropy_anchor", std::nullopt);
            if (m.contains("constant_mobility") && !m.at("constant_mobility").is_null())
                c.model.constant_mobility = m.at("constant_mobility").get<double>();
        }
        if (j.contains("integrator")) {
            const json& i = j.at("integrator");
            if (i.contains("method"))
                c.integrator.method = integrator_method_from_string(i.at("method").get<std::string>());
            detail::read(i, "rtol", c.integrator.rtol);
            detail::read(i, "atol", c.integrator.atol);
            detail::read(i, "dt", c.integrator.dt);
            detail::read(i, "T", c.integrator.t_end);
            detail::read(i, "dt_min", c.integrator.dt_min);
            detail::read(i, "max_steps", c.integrator.max_steps);
            if (i.contains("snapshots")) {
                const json& s = i.at("snapshots");
                if (s.is_number_integer()) {
                    c.snapshot_count = s.get<int>();
                    if (*c.snapshot_count < 1) throw ValidationError("config: snapshots must be >= 1");
                } else if (s.is_array()) {
                    c.integrator.snapshot_times = s.get<std::vector<double>>();
                    c.snapshot_count.reset();
                } else {
                    throw ValidationError("config: snapshots must be a count or a list of times");
                }
            }
        }
        if (j.contains("initial_data")) {
            const json& u = j.at("initial_data");
            detail::read(u, "kind", c.initial_data.kind);
            if (u.contains("parameters")) c.initial_data.parameters = u.at("parameters");
        }
        if (j.contains("diagnostics")) {
            const json& d = j.at("diagnostics");
            detail::read(d, "r_values", c.diagnostics.r_values);
            c.diagnostics.tol_zero = detail::read_auto(d, "tol_zero", std::nullopt);
            c.diagnostics.tol_neg = detail::read_auto(d, "tol_neg", std::nullopt);
            detail::read(d, "holder_probe", c.diagnostics.holder_probe);
            detail::read(d, "entropy", c.diagnostics.entropy);
        }
        if (j.contains("output")) {
            const json& o = j.at("output");
            detail::read(o, "directory", c.output.directory);
            detail::read(o, "formats", c.output.formats);
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    c.domain.validate();
    c.model.validate();
    c.integrator.validate();
    for (double t : c.snapshot_times())
        if (t < 0.0 || t > c.integrator.t_end) throw ValidationError("config: snapshot time outside [0, T]");
    return c;
}

inline json config_to_json(const SimulationConfig& c) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["domain"] = {{"l", c.domain.half_length}, {"N", c.domain.modes}, {"oversample", c.domain.oversample}};
    j["model"] = {{"n", c.model.n},
                  {"delta", c.model.delta},
                  {"epsilon", c.model.epsilon},
                  {"eta", c.model.eta},
                  {"pressure_mode", to_string(c.model.pressure_mode)},
                  {"entropy_anchor", detail::auto_or(c.model.entropy_anchor)}};
    if (c.model.constant_mobility) j["model"]["constant_mobility"] = *c.model.constant_mobility;
    json snaps = c.snapshot_count ? json(*c.snapshot_count) : json(c.integrator.snapshot_times);
    j["integrator"] = {{"method", to_string(c.integrator.method)},
                       {"rtol", c.integrator.rtol},
                       {"atol", c.integrator.atol},
                       {"dt", c.integrator.dt},
                       {"T", c.integrator.t_end},
                       {"dt_min", c.integrator.dt_min},
                       {"max_steps", c.integrator.max_steps},
                       {"snapshots", snaps}};
    j["initial_data"] = {{"kind", c.initial_data.kind}, {"parameters", c.initial_data.parameters}};
    j["diagnostics"] = {{"r_values", c.diagnostics.r_values},
                        {"tol_zero", detail::auto_or(c.diagnostics.tol_zero)},
                        {"tol_neg", detail::auto_or(c.diagnostics.tol_neg)},
                        {"holder_probe", c.diagnostics.holder_probe},
                        {"entropy", c.diagnostics.entropy}};
    j["output"] = {{"directory", c.output.directory}, {"formats", c.output.formats}};
    return j;
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("config file '" + path + "' is not valid JSON: " + e.what());
    }
}

/// Applies "a.b.c=value"; the value is parsed as JSON when possible and kept
/// as a string otherwise.
inline void apply_override(json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ValidationError("override '" + assignment + "' is not of the form key=value");
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    json* node = &j;
    std::stringstream ss(path);
    std::string key;
    std::vector<std::string> keys;
    while (std::getline(ss, key, '.')) keys.push_back(key);
    for (std::size_t k = 0; k + 1 < keys.size(); ++k) {
        if (!node->contains(keys[k]) || !(*node)[keys[k]].is_object()) (*node)[keys[k]] = json::object();
        node = &(*node)[keys[k]];
    }
    (*node)[keys.back()] = value;
}

// ---------------------------------------------------------------------------
// Initial data
// ---------------------------------------------------------------------------

namespace detail {

inline double param(const json& p, const char* key, double fallback) {
    if (!p.contains(key)) return fallback;
    if (!p.at(key).is_number()) throw ValidationError(std::string("initial_data: '") + key + "' must be a number");
    return p.at(key).get<double>();
}

}  // namespace detail

/// Pointwise profile for the function-valued kinds.
inline std::function<double(double)> initial_profile(const InitialData& data, double half_length) {
    const json& p = data.parameters;
    if (data.kind == "constant") {
        const double v = detail::param(p, "value", 1.0);
        return [v](double) { return v; };
    }
    if (data.kind == "cosine_bump") {
        const double b = detail::param(p, "base", 0.5);
        const double a = detail::param(p, "amplitude", 0.5);
        const double l = half_length;
        return [=](double x) { return b + a * (1.0 + std::cos(std::numbers::pi * x / l)) / 2.0; };
    }
    if (data.kind == "droplet") {
        // Gaussian cap on a thin precursor; tails fall below 1e-6 inside the domain
        // for the default width, standing in for compact support.
        const double a = detail::param(p, "amplitude", 0.5);
        const double w = detail::param(p, "width", 0.25 * half_length);
        const double floor = detail::param(p, "floor", 1e-6);
        const double x0 = detail::param(p, "center", 0.0);
        if (!(w > 0.0)) throw ValidationError("initial_data: droplet width must be positive");
        return [=](double x) { return floor + a * std::exp(-(x - x0) * (x - x0) / (w * w)); };
    }
    throw ValidationError("initial_data: kind '" + data.kind + "' has no pointwise profile");
}

/// u0^N = P_N u0.
inline SpectralField initial_coefficients(const InitialData& data, const SpectralBasis& basis) {
    if (data.kind == "coeffs") {
        if (!data.parameters.contains("values") || !data.parameters.at("values").is_array())
            throw ValidationError("initial_data: kind 'coeffs' needs parameters.values");
        const auto v = data.parameters.at("values").get<std::vector<double>>();
        Vector c = Vector::Zero(basis.modes() + 1);
        for (std::size_t j = 0; j < v.size() && j <= static_cast<std::size_t>(basis.modes()); ++j)
            c[static_cast<Eigen::Index>(j)] = v[j];
        if (!c.allFinite()) throw ValidationError("initial_data: non-finite coefficients");
        return SpectralField(c);
    }
    return basis.project(initial_profile(data, basis.domain().half_length));
}

}  // namespace capillary1d

#pragma once

/// Output files: CSV series and snapshots, JSON summaries and study reports.
/// Numbers in CSV use format_double; files are written in binary mode so the
/// line endings are LF on every platform.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "capillary1d/config.hpp"
#include "capillary1d/experiments.hpp"
#include "capillary1d/format.hpp"
#include "capillary1d/runner.hpp"

namespace capillary1d {

inline constexpr const char* kSeriesHeader =
    "t,mass,energy_surface,energy_delta,dissipation_cum,entropy,entropy_dissipation_cum,min_u,max_u,zero_frac,"
    "y_max,h1,h2,weak_residual";
inline constexpr const char* kSnapshotHeader = "x,u,ux,uxx,p,Q";

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

/// Rows of doubles joined by commas.
inline std::string csv(const std::string& header, const std::vector<std::vector<double>>& rows) {
    std::string s = header + "\n";
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k) s += ',';
            s += format_double(row[k]);
        }
        s += '\n';
    }
    return s;
}

/// JSON cannot hold NaN or infinity; those become null.
inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json optional_number(const std::optional<double>& v) { return v ? number_or_null(*v) : json(nullptr); }

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

inline std::string series_csv(const std::vector<DiagnosticsRecord>& records) {
    std::vector<std::vector<double>> rows;
    for (const auto& r : records)
        rows.push_back({r.t, r.mass, r.energy_surface, r.energy_delta, r.dissipation_cum, r.entropy,
                        r.entropy_dissipation_cum, r.min_u, r.max_u, r.zero_frac, r.y_max, r.h1, r.h2,
                        r.weak_residual});
    return csv(kSeriesHeader, rows);
}

inline std::string snapshot_csv(const Snapshot& snap, const ModelParams& params, const SpectralBasis& basis) {
    CollocationField f = basis.synthesize(snap.c, 2);
    pressure(f, params);
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < f.size(); ++i) rows.push_back({f.x[i], f.u[i], f.ux[i], f.uxx[i], (*f.p)[i], (*f.Q)[i]});
    return csv(kSnapshotHeader, rows);
}

inline json to_json(const HolderFit& f) {
    return {{"exponent", number_or_null(f.exponent)},
            {"constant", number_or_null(f.constant)},
            {"resolution", number_or_null(f.resolution)},
            {"samples", f.samples},
            {"conclusive", f.conclusive}};
}

inline json to_json(const PositivityReport& p) {
    json j = {{"min_u", number_or_null(p.min_u)},
              {"max_zero_frac", p.max_zero_frac},
              {"grid_resolution", p.grid_resolution},
              {"nonnegative", p.nonnegative}};
    j["zero_set_negligible"] = p.zero_set_negligible ? json(*p.zero_set_negligible) : json(nullptr);
    j["stays_positive"] = p.stays_positive ? json(*p.stays_positive) : json(nullptr);
    return j;
}

inline json to_json(const RunVerdicts& v) {
    json j = {{"mass_drift", v.mass_drift},
              {"energy_residual_max", v.energy_residual_max},
              {"energy_monotone", v.energy_monotone},
              {"entropy_residual_max", optional_number(v.entropy_residual_max)},
              {"entropy_sup_ratio", optional_number(v.entropy_sup_ratio)},
              {"weak_residual_max", v.weak_residual_max},
              {"slope_margin_min", v.slope_margin_min},
              {"positivity", to_json(v.positivity)}};
    if (v.holder)
        j["holder"] = {{"time", to_json(v.holder->time)}, {"space", to_json(v.holder->space)}};
    else
        j["holder"] = nullptr;
    return j;
}

inline json to_json(const InitialDataReport& r) {
    return {{"valid", r.valid},
            {"min_value", r.min_value},
            {"max_value", r.max_value},
            {"zero_fraction", r.zero_fraction},
            {"limit_entropy", number_or_null(r.limit_entropy)},
            {"entropy_finite", r.entropy_finite},
            {"warnings", r.warnings},
            {"errors", r.errors}};
}

inline json summary_json(const RunOutput& run, double wall_clock_seconds) {
    json j;
    j["config"] = config_to_json(run.config);
    j["initial_data"] = to_json(run.validation);
    j["verdicts"] = to_json(run.verdicts);
    json bounds = json::array();
    for (std::size_t k = 0; k < run.slope_bounds.size(); ++k) {
        const auto& s = run.slope_bounds[k];
        bounds.push_back({{"t", run.records[k].t},
                          {"y_max", s.y_max},
                          {"threshold", s.threshold},
                          {"c1", s.c1},
                          {"c2", s.c2},
                          {"k", s.k},
                          {"g_min", s.g_min},
                          {"u_h2", s.u_h2},
                          {"holds", s.holds}});
    }
    j["slope_bounds"] = bounds;
    j["steps"] = {{"accepted", run.result.stats.accepted}, {"rejected", run.result.stats.rejected}};
    j["flags"] = run.flags;
    j["wall_clock_seconds"] = wall_clock_seconds;
    return j;
}

/// series.csv, snap_<k>.csv and summary.json under `dir`.
inline void write_simulation(const std::filesystem::path& dir, const RunOutput& run, double wall_clock_seconds) {
    write_text(dir / "series.csv", series_csv(run.records));
    for (std::size_t k = 0; k < run.result.snapshots.size(); ++k)
        write_text(dir / ("snap_" + std::to_string(k) + ".csv"),
                   snapshot_csv(run.result.snapshots[k], run.config.model, *run.basis));
    write_json(dir / "summary.json", summary_json(run, wall_clock_seconds));
}

// ---------------------------------------------------------------------------
// studies
// ---------------------------------------------------------------------------

inline json to_json(const SweepReport& r) {
    json j;
    j["parameter"] = to_string(r.parameter);
    j["values"] = r.values;
    j["complete"] = r.complete;
    j["error"] = r.complete ? json(nullptr) : json(r.error);
    json members = json::array();
    for (const auto& m : r.members) {
        members.push_back({{"value", m.value},
                           {"energy_max", m.energy_max},
                           {"entropy_max", optional_number(m.entropy_max)},
                           {"h2_max", m.h2_max},
                           {"y_max", m.y_max},
                           {"min_u", m.min_u},
                           {"slope_margin_min", m.slope_margin_min},
                           {"holder_constant", optional_number(m.holder_constant)},
                           {"mass_drift", m.mass_drift},
                           {"energy_residual_max", m.energy_residual_max},
                           {"config", config_to_json(m.config)}});
    }
    j["members"] = members;
    j["cauchy_l2"] = r.cauchy;
    j["cauchy_decreasing"] = r.cauchy_decreasing;
    json plateaus = json::array();
    for (const auto& p : r.plateaus)
        plateaus.push_back({{"quantity", p.quantity},
                            {"tail", p.tail},
                            {"verdict", p.bounded ? "bounded-uniformly" : "growing"}});
    j["plateaus"] = plateaus;
    j["delta_uniform"] = r.delta_uniform ? json(*r.delta_uniform) : json(nullptr);
    return j;
}

inline std::string sweep_csv(const SweepReport& r) {
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < r.members.size(); ++k) {
        const auto& m = r.members[k];
        const double nan = std::numeric_limits<double>::quiet_NaN();
        rows.push_back({m.value, m.energy_max, m.entropy_max.value_or(nan), m.h2_max, m.y_max, m.min_u,
                        m.slope_margin_min, m.holder_constant.value_or(nan), k ? r.cauchy[k - 1] : nan});
    }
    return csv("value,energy_max,entropy_max,h2_max,y_max,min_u,slope_margin_min,holder_constant,cauchy_l2_prev",
               rows);
}

inline void write_sweep(const std::filesystem::path& dir, const SweepReport& r) {
    write_json(dir / "sweep_report.json", to_json(r));
    write_text(dir / "sweep.csv", sweep_csv(r));
}

inline json to_json(const CoreStatistic& s) {
    return {{"cov", number_or_null(s.cov)}, {"mean", s.mean}, {"degenerate", s.degenerate}};
}

inline json to_json(const ProfileRun& r) {
    auto state = [](const ProfileState& s) {
        return json{{"t", s.t}, {"cov_kappa", to_json(s.cov_kappa)}, {"cov_uxx", to_json(s.cov_uxx)}};
    };
    return {{"pressure_mode", to_string(r.mode)},
            {"initial", state(r.initial)},
            {"final", state(r.final)},
            {"config", config_to_json(r.config)}};
}

inline json to_json(const ProfileReport& r) {
    return {{"nonlinear", to_json(r.nonlinear)},
            {"linear", to_json(r.linear)},
            {"degenerate", r.degenerate},
            {"nonlinear_kappa_decreases", r.nonlinear_kappa_decreases},
            {"linear_uxx_decreases", r.linear_uxx_decreases},
            {"curvature_equilibrates", r.curvature_equilibrates},
            {"note", "compact support is realized by smooth bumps on a thin floor"}};
}

inline std::string profile_csv(const ProfileRun& r) {
    std::vector<std::vector<double>> rows;
    const auto& a = r.initial;
    const auto& b = r.final;
    for (Eigen::Index i = 0; i < a.field.size(); ++i)
        rows.push_back({a.field.x[i], a.field.u[i], b.field.u[i], a.kappa[i], b.kappa[i], a.field.uxx[i],
                        b.field.uxx[i]});
    return csv("x,u_initial,u_final,kappa_initial,kappa_final,uxx_initial,uxx_final", rows);
}

inline void write_profile(const std::filesystem::path& dir, const ProfileReport& r) {
    write_json(dir / "profile_report.json", to_json(r));
    write_text(dir / "profile_nonlinear.csv", profile_csv(r.nonlinear));
    write_text(dir / "profile_linear.csv", profile_csv(r.linear));
}

inline json to_json(const ThresholdReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows) {
        json j = {{"n", row.n}, {"skipped", row.skipped}};
        if (row.skipped) {
            j["reason"] = row.reason;
        } else {
            j["limit_entropy_u0"] = number_or_null(row.initial_entropy);
            j["positivity"] = to_json(row.positivity);
        }
        j["config"] = config_to_json(row.config);
        rows.push_back(j);
    }
    return {{"epsilon", r.epsilon},
            {"rows", rows},
            {"note", "trends at finite epsilon; limit statements are not decided numerically"}};
}

inline std::string threshold_csv(const ThresholdReport& r) {
    std::vector<std::vector<double>> rows;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& row : r.rows) {
        if (row.skipped)
            rows.push_back({row.n, 1.0, nan, nan});
        else
            rows.push_back({row.n, 0.0, row.positivity.min_u, row.positivity.max_zero_frac});
    }
    return csv("n,skipped,min_u,max_zero_frac", rows);
}

inline void write_thresholds(const std::filesystem::path& dir, const ThresholdReport& r) {
    write_json(dir / "thresholds_report.json", to_json(r));
    write_text(dir / "thresholds.csv", threshold_csv(r));
}

}  // namespace capillary1d

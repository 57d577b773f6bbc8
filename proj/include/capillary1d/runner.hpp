#pragma once

/// One configured run end to end: resolve the config, validate the initial
/// data, integrate, and evaluate diagnostics at every snapshot.

#include <memory>
#include <string>
#include <vector>

#include "capillary1d/config.hpp"
#include "capillary1d/diagnostics.hpp"
#include "capillary1d/galerkin.hpp"
#include "capillary1d/model.hpp"

namespace capillary1d {

struct RunVerdicts {
    double mass_drift = 0.0;             ///< max_t |M(t) - M(0)| / |M(0)|
    double energy_residual_max = 0.0;    ///< max_t |E(t) + int D - E(0)|
    bool energy_monotone = true;
    std::optional<double> entropy_residual_max;
    std::optional<double> entropy_sup_ratio;  ///< sup_t int G(u(t)) / int G(u0)
    double weak_residual_max = 0.0;
    double slope_margin_min = 1.0;  ///< min_t (M - y_max)
    PositivityReport positivity;
    std::optional<HolderProbe> holder;
};

struct RunOutput {
    SimulationConfig config;  ///< fully resolved
    std::shared_ptr<const SpectralBasis> basis;
    SpectralField u0;
    InitialDataReport validation;
    SimulationResult result;
    std::vector<DiagnosticsRecord> records;
    std::vector<SlopeBoundReport> slope_bounds;
    RunVerdicts verdicts;
    std::vector<std::string> flags;
};

/// Fills every "auto" field from the projected initial data.
inline SimulationConfig resolve_config(SimulationConfig cfg, const SpectralBasis& basis, const SpectralField& u0) {
    const Vector u = basis.evaluate(u0);
    const double sup = u.cwiseAbs().maxCoeff();
    if (!cfg.model.entropy_anchor) cfg.model.entropy_anchor = auto_entropy_anchor(u);
    if (!cfg.diagnostics.tol_zero) cfg.diagnostics.tol_zero = 1e-7 * std::max(1.0, sup);
    if (!cfg.diagnostics.tol_neg) cfg.diagnostics.tol_neg = 1e-8 * sup;
    if (cfg.integrator.snapshot_times.empty()) cfg.integrator.snapshot_times = cfg.snapshot_times();
    cfg.snapshot_count.reset();
    return cfg;
}

inline DiagnosticsSettings diagnostics_settings(const SimulationConfig& resolved) {
    DiagnosticsSettings s;
    s.r_values = resolved.diagnostics.r_values;
    s.tol_zero = resolved.diagnostics.tol_zero.value();
    s.tol_neg = resolved.diagnostics.tol_neg.value();
    return s;
}

inline RunOutput run_simulation(const SimulationConfig& config, const Observers& observers = {}) {
    RunOutput out;
    out.basis = std::make_shared<const SpectralBasis>(config.domain);
    const SpectralBasis& basis = *out.basis;
    out.u0 = initial_coefficients(config.initial_data, basis);
    out.config = resolve_config(config, basis, out.u0);
    const SimulationConfig& cfg = out.config;
    const DiagnosticsSettings settings = diagnostics_settings(cfg);

    out.validation = validate_initial_data(out.u0, cfg.model, basis,
                                           {settings.tol_zero, settings.tol_neg}, cfg.diagnostics.entropy);
    if (!out.validation.valid) {
        std::string msg = "initial data rejected:";
        for (const auto& e : out.validation.errors) msg += " " + e + ";";
        throw ValidationError(msg);
    }
    for (const auto& w : out.validation.warnings) out.flags.push_back("warning: " + w);
    if (cfg.model.eta == 0.0 && !cfg.model.constant_mobility)
        out.flags.push_back("eta = 0: unbounded mobility, outside the discrete existence theory");

    std::optional<EntropyEval> entropy;
    if (cfg.diagnostics.entropy) entropy.emplace(cfg.model, *cfg.model.entropy_anchor);

    SimulationOptions opts;
    opts.rhs.r_values = settings.r_values;
    opts.rhs.tol_zero = settings.tol_zero;
    if (entropy) opts.entropy_anchor = entropy->anchor();

    IntegratorSpec spec = cfg.integrator;
    out.result = simulate(out.u0, spec, cfg.model, basis, opts, observers);

    for (const auto& snap : out.result.snapshots) {
        out.records.push_back(snapshot_diagnostics(snap, cfg.model, entropy ? &*entropy : nullptr, basis, settings));
        out.slope_bounds.push_back(slope_bound_quantities(snap.c, basis));
    }

    RunVerdicts& v = out.verdicts;
    if (!out.records.empty()) {
        const double m0 = out.records.front().mass;
        for (const auto& r : out.records)
            v.mass_drift = std::max(v.mass_drift, std::abs(r.mass - m0) / std::max(std::abs(m0), 1e-300));
        const ResidualSeries er = energy_identity_residual(out.records);
        v.energy_residual_max = er.max;
        const double e0 = out.records.front().energy();
        v.energy_monotone = energy_monotone(out.records, 1e-6 * e0);
        if (entropy) {
            const ResidualSeries sr = entropy_identity_residual(out.records);
            v.entropy_residual_max = sr.max;
            const double g0 = out.records.front().entropy;
            double sup = 0.0;
            for (const auto& r : out.records) sup = std::max(sup, r.entropy);
            if (g0 > 0.0) v.entropy_sup_ratio = sup / g0;
        }
        for (const auto& r : out.records) v.weak_residual_max = std::max(v.weak_residual_max, r.weak_residual);
        for (const auto& s : out.slope_bounds) v.slope_margin_min = std::min(v.slope_margin_min, s.threshold - s.y_max);
        v.positivity = positivity_report(out.records, cfg.model.n, settings,
                                         static_cast<std::size_t>(basis.grid_size()), settings.tol_zero);
    }
    if (cfg.diagnostics.holder_probe) v.holder = holder_probe(out.result.snapshots, basis);
    return out;
}

}  // namespace capillary1d

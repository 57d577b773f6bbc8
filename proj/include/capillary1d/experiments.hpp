#pragma once

/// Parameter sweeps, the curvature-profile comparison and the degeneracy
/// threshold study. Every report embeds the resolved config of each member
/// run so that a report alone reproduces its numbers.

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "capillary1d/config.hpp"
#include "capillary1d/format.hpp"
#include "capillary1d/runner.hpp"

namespace capillary1d {

enum class SweepParameter { eta, epsilon, delta, N };

inline const char* to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::eta: return "eta";
        case SweepParameter::epsilon: return "epsilon";
        case SweepParameter::delta: return "delta";
        case SweepParameter::N: return "N";
    }
    return "?";
}

inline SweepParameter sweep_parameter_from_string(const std::string& s) {
    if (s == "eta") return SweepParameter::eta;
    if (s == "epsilon") return SweepParameter::epsilon;
    if (s == "delta") return SweepParameter::delta;
    if (s == "N") return SweepParameter::N;
    throw ValidationError("unknown sweep parameter '" + s + "' (eta, epsilon, delta, N)");
}

struct SweepSpec {
    SweepParameter parameter = SweepParameter::delta;
    std::vector<double> values;
    SimulationConfig base;

    void validate() const {
        if (values.size() < 3) throw ValidationError("sweep: at least 3 values are required");
        const bool up = values[1] > values[0];
        for (std::size_t k = 1; k < values.size(); ++k) {
            if (!std::isfinite(values[k]) || values[k] == values[k - 1] || (values[k] > values[k - 1]) != up)
                throw ValidationError("sweep: values must be strictly monotone");
        }
        if (parameter == SweepParameter::N)
            for (double v : values)
                if (v != std::floor(v) || v < 1) throw ValidationError("sweep: N values must be positive integers");
    }

    SimulationConfig member_config(double value) const {
        SimulationConfig c = base;
        switch (parameter) {
            case SweepParameter::eta: c.model.eta = value; break;
            case SweepParameter::epsilon: c.model.epsilon = value; break;
            case SweepParameter::delta: c.model.delta = value; break;
            case SweepParameter::N: c.domain.modes = static_cast<int>(value); break;
        }
        // Members share one time grid so trajectories can be compared.
        c.integrator.snapshot_times = base.snapshot_times();
        c.snapshot_count.reset();
        return c;
    }
};

struct SweepMember {
    double value = 0.0;
    SimulationConfig config;
    double energy_max = 0.0;
    std::optional<double> entropy_max;
    double h2_max = 0.0;
    double y_max = 0.0;
    double min_u = 0.0;
    double slope_margin_min = 1.0;
    std::optional<double> holder_constant;  ///< time probe constant
    double mass_drift = 0.0;
    double energy_residual_max = 0.0;
    std::vector<double> times;
    std::vector<SpectralField> trajectory;
};

struct PlateauVerdict {
    std::string quantity;
    std::vector<double> tail;  ///< the last three values
    bool bounded = false;       ///< max / min <= 2 over the tail
};

struct SweepReport {
    SweepParameter parameter = SweepParameter::delta;
    std::vector<double> values;
    std::vector<SweepMember> members;
    std::vector<double> cauchy;  ///< L2(Omega_T) difference between consecutive members
    bool cauchy_decreasing = false;
    std::vector<PlateauVerdict> plateaus;
    std::optional<bool> delta_uniform;  ///< delta sweeps only
    bool complete = true;
    std::string error;
};

namespace detail {

inline PlateauVerdict plateau(const std::string& name, const std::vector<double>& series) {
    PlateauVerdict v;
    v.quantity = name;
    if (series.size() < 3) return v;
    v.tail.assign(series.end() - 3, series.end());
    const auto [lo, hi] = std::minmax_element(v.tail.begin(), v.tail.end());
    v.bounded = *lo > 0.0 ? *hi / *lo <= 2.0 : *hi == 0.0;
    return v;
}

/// Runs fn(k) for k in [0, count) on up to `jobs` threads. Each index writes
/// only its own slot, so results do not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
    if (workers <= 1) {
        for (std::size_t k = 0; k < count; ++k) fn(k);
        return;
    }
    std::mutex m;
    std::size_t next = 0;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t k;
                {
                    std::lock_guard<std::mutex> lock(m);
                    if (next >= count) return;
                    k = next++;
                }
                fn(k);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace detail

/// |u - v|_{L2(Omega_T)} from coefficient trajectories on a common time grid.
/// The basis is orthonormal, so the spatial norm is the coefficient norm;
/// shorter expansions are padded with zeros. Trapezoid rule in time.
inline double trajectory_l2_difference(const std::vector<double>& t, const std::vector<SpectralField>& a,
                                       const std::vector<SpectralField>& b) {
    if (a.size() != t.size() || b.size() != t.size())
        throw std::invalid_argument("trajectory_l2_difference: snapshot counts differ");
    std::vector<double> sq(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
        const int n = std::max(a[k].modes(), b[k].modes());
        sq[k] = (resize_modes(a[k], n).coeffs - resize_modes(b[k], n).coeffs).squaredNorm();
    }
    if (t.size() == 1) return std::sqrt(sq[0]);
    double acc = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) acc += 0.5 * (t[k] - t[k - 1]) * (sq[k] + sq[k - 1]);
    return std::sqrt(acc);
}

inline SweepMember summarize_member(double value, const RunOutput& run) {
    SweepMember m;
    m.value = value;
    m.config = run.config;
    m.min_u = std::numeric_limits<double>::infinity();
    for (const auto& r : run.records) {
        m.energy_max = std::max(m.energy_max, r.energy());
        if (std::isfinite(r.entropy)) m.entropy_max = std::max(m.entropy_max.value_or(r.entropy), r.entropy);
        m.h2_max = std::max(m.h2_max, r.h2);
        m.y_max = std::max(m.y_max, r.y_max);
        m.min_u = std::min(m.min_u, r.min_u);
    }
    m.slope_margin_min = run.verdicts.slope_margin_min;
    if (run.verdicts.holder && run.verdicts.holder->time.conclusive)
        m.holder_constant = run.verdicts.holder->time.constant;
    m.mass_drift = run.verdicts.mass_drift;
    m.energy_residual_max = run.verdicts.energy_residual_max;
    for (const auto& s : run.result.snapshots) {
        m.times.push_back(s.t);
        m.trajectory.push_back(s.c);
    }
    return m;
}

inline SweepReport run_sweep(const SweepSpec& spec, int jobs = 1) {
    spec.validate();
    SweepReport rep;
    rep.parameter = spec.parameter;
    rep.values = spec.values;

    const std::size_t count = spec.values.size();
    std::vector<std::optional<SweepMember>> slots(count);
    std::vector<std::string> errors(count);
    detail::parallel_for(count, jobs, [&](std::size_t k) {
        try {
            const RunOutput run = run_simulation(spec.member_config(spec.values[k]));
            slots[k] = summarize_member(spec.values[k], run);
        } catch (const std::exception& e) {
            errors[k] = e.what();
        }
    });

    for (std::size_t k = 0; k < count; ++k) {
        if (!slots[k]) {
            rep.complete = false;
            rep.error = std::string(to_string(spec.parameter)) + " = " + format_double(spec.values[k]) + ": " + errors[k];
            break;
        }
        rep.members.push_back(std::move(*slots[k]));
    }

    for (std::size_t k = 1; k < rep.members.size(); ++k)
        rep.cauchy.push_back(trajectory_l2_difference(rep.members[k].times, rep.members[k - 1].trajectory,
                                                      rep.members[k].trajectory));
    rep.cauchy_decreasing = rep.cauchy.size() >= 2;
    for (std::size_t k = 1; k < rep.cauchy.size(); ++k)
        if (!(rep.cauchy[k] < rep.cauchy[k - 1])) rep.cauchy_decreasing = false;

    auto series = [&](auto get) {
        std::vector<double> s;
        for (const auto& m : rep.members) s.push_back(get(m));
        return s;
    };
    rep.plateaus.push_back(detail::plateau("energy_max", series([](const SweepMember& m) { return m.energy_max; })));
    if (std::all_of(rep.members.begin(), rep.members.end(), [](const auto& m) { return m.entropy_max.has_value(); }))
        rep.plateaus.push_back(
            detail::plateau("entropy_max", series([](const SweepMember& m) { return *m.entropy_max; })));
    rep.plateaus.push_back(detail::plateau("h2_max", series([](const SweepMember& m) { return m.h2_max; })));
    rep.plateaus.push_back(detail::plateau("max_abs_u", series([](const SweepMember& m) {
        double s = 0.0;
        for (const auto& c : m.trajectory) s = std::max(s, std::abs(c[0]));
        return s;
    })));

    if (spec.parameter == SweepParameter::delta && rep.members.size() >= 3) {
        bool y_ok = true;
        for (std::size_t k = rep.members.size() - 3; k < rep.members.size(); ++k)
            y_ok = y_ok && rep.members[k].y_max < 1.0 - 0.02;
        const auto h2 = std::find_if(rep.plateaus.begin(), rep.plateaus.end(),
                                     [](const PlateauVerdict& p) { return p.quantity == "h2_max"; });
        rep.delta_uniform = y_ok && h2->bounded;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Curvature profile comparison
// ---------------------------------------------------------------------------

struct CoreStatistic {
    double cov = 0.0;  ///< std / |mean| over the core set
    double mean = 0.0;
    bool degenerate = false;  ///< mean indistinguishable from zero
};

/// Coefficient of variation of `values` on {u > 0.1 max u}.
inline CoreStatistic core_statistic(const Vector& u, const Vector& values, const Vector& weights) {
    const double cut = 0.1 * u.maxCoeff();
    double w = 0.0, s = 0.0, s2 = 0.0, scale = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (!(u[i] > cut)) continue;
        w += weights[i];
        s += weights[i] * values[i];
        scale = std::max(scale, std::abs(values[i]));
    }
    if (w == 0.0) throw ValidationError("profile study: core set {u > 0.1 max u} is empty");
    CoreStatistic st;
    st.mean = s / w;
    for (Eigen::Index i = 0; i < u.size(); ++i)
        if (u[i] > cut) s2 += weights[i] * (values[i] - st.mean) * (values[i] - st.mean);
    const double sd = std::sqrt(s2 / w);
    st.degenerate = std::abs(st.mean) <= 1e-12 * std::max(1.0, scale);
    st.cov = st.degenerate ? std::numeric_limits<double>::quiet_NaN() : sd / std::abs(st.mean);
    return st;
}

struct ProfileState {
    double t = 0.0;
    CollocationField field;
    Vector kappa;  ///< u_xx / Q^3
    CoreStatistic cov_kappa;
    CoreStatistic cov_uxx;
};

struct ProfileRun {
    PressureMode mode = PressureMode::nonlinear;
    SimulationConfig config;
    ProfileState initial;
    ProfileState final;
};

struct ProfileReport {
    ProfileRun nonlinear;
    ProfileRun linear;
    bool degenerate = false;
    bool nonlinear_kappa_decreases = false;
    bool linear_uxx_decreases = false;
    bool curvature_equilibrates = false;  ///< nonlinear run: CoV(kappa) < CoV(u_xx) at T
};

inline ProfileState profile_state(double t, const SpectralField& c, const SpectralBasis& basis) {
    ProfileState s;
    s.t = t;
    s.field = basis.synthesize(c, 2);
    ModelParams p;
    pressure(s.field, p);
    const Vector& q = *s.field.Q;
    s.kappa = s.field.uxx.cwiseQuotient(q.cwiseProduct(q).cwiseProduct(q));
    s.cov_kappa = core_statistic(s.field.u, s.kappa, basis.weights());
    s.cov_uxx = core_statistic(s.field.u, s.field.uxx, basis.weights());
    return s;
}

inline ProfileReport curvature_profile_study(const SimulationConfig& config, int jobs = 1) {
    ProfileReport rep;
    SimulationConfig cfgs[2] = {config, config};
    cfgs[0].model.pressure_mode = PressureMode::nonlinear;
    cfgs[1].model.pressure_mode = PressureMode::linear;
    std::optional<RunOutput> runs[2];
    std::exception_ptr failures[2];
    detail::parallel_for(2, jobs, [&](std::size_t k) {
        try {
            runs[k] = run_simulation(cfgs[k]);
        } catch (...) {
            failures[k] = std::current_exception();
        }
    });
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);

    ProfileRun* targets[2] = {&rep.nonlinear, &rep.linear};
    for (int k = 0; k < 2; ++k) {
        const RunOutput& run = *runs[k];
        ProfileRun& pr = *targets[k];
        pr.mode = cfgs[k].model.pressure_mode;
        pr.config = run.config;
        const auto& snaps = run.result.snapshots;
        pr.initial = profile_state(snaps.front().t, snaps.front().c, *run.basis);
        pr.final = profile_state(snaps.back().t, snaps.back().c, *run.basis);
    }
    const auto& nl = rep.nonlinear;
    const auto& li = rep.linear;
    rep.degenerate = nl.initial.cov_kappa.degenerate || nl.final.cov_kappa.degenerate ||
                     li.initial.cov_uxx.degenerate || li.final.cov_uxx.degenerate || nl.final.cov_uxx.degenerate;
    if (!rep.degenerate) {
        rep.nonlinear_kappa_decreases = nl.final.cov_kappa.cov < nl.initial.cov_kappa.cov;
        rep.linear_uxx_decreases = li.final.cov_uxx.cov < li.initial.cov_uxx.cov;
        rep.curvature_equilibrates = nl.final.cov_kappa.cov < nl.final.cov_uxx.cov;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Degeneracy thresholds
// ---------------------------------------------------------------------------

struct ThresholdRow {
    double n = 0.0;
    bool skipped = false;
    std::string reason;
    SimulationConfig config;
    double initial_entropy = std::numeric_limits<double>::quiet_NaN();  ///< limiting entropy of u0
    PositivityReport positivity;
};

struct ThresholdReport {
    double epsilon = 0.0;
    std::vector<ThresholdRow> rows;
};

inline ThresholdReport threshold_study(const std::vector<double>& n_values, const SimulationConfig& config,
                                       int jobs = 1) {
    if (n_values.empty()) throw ValidationError("thresholds: no n values given");
    ThresholdReport rep;
    rep.epsilon = config.model.epsilon;
    rep.rows.resize(n_values.size());
    detail::parallel_for(n_values.size(), jobs, [&](std::size_t k) {
        ThresholdRow& row = rep.rows[k];
        row.n = n_values[k];
        row.config = config;
        row.config.model.n = n_values[k];
        try {
            row.config.model.validate();
            const RunOutput run = run_simulation(row.config);
            row.config = run.config;
            row.initial_entropy = run.validation.limit_entropy;
            row.positivity = run.verdicts.positivity;
        } catch (const ValidationError& e) {
            row.skipped = true;
            row.reason = e.what();
        }
    });
    return rep;
}

}  // namespace capillary1d

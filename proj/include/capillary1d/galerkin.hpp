#pragma once

/// Faedo-Galerkin reduction dc/dt = f(c) and its explicit time integration.
///
/// The right-hand side is assembled on the collocation grid instead of through
/// the (N+1)x(N+1) mobility Gram matrix:
///
///   d_k = (phi(u_x), e_k')                 pressure coefficients
///   p_x = sum_k d_k e_k'                   on the grid
///   dc_j/dt = -(m(u) p_x, e_j')            j = 0..N
///
/// Alongside c the integrator carries the running time integrals of the flux
/// dissipation, the entropy dissipation and the r-weighted dissipations, so
/// those accumulate under the same Runge-Kutta rule as the solution.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "capillary1d/error.hpp"
#include "capillary1d/model.hpp"
#include "capillary1d/spectral_basis.hpp"

namespace capillary1d {

enum class IntegratorMethod { rk4_fixed, rkf45_adaptive };

inline const char* to_string(IntegratorMethod m) {
    return m == IntegratorMethod::rk4_fixed ? "rk4-fixed" : "rkf45-adaptive";
}

inline IntegratorMethod integrator_method_from_string(const std::string& s) {
    if (s == "rk4-fixed") return IntegratorMethod::rk4_fixed;
    if (s == "rkf45-adaptive") return IntegratorMethod::rkf45_adaptive;
    throw ValidationError("unknown integrator method '" + s + "'");
}

struct IntegratorSpec {
    IntegratorMethod method = IntegratorMethod::rkf45_adaptive;
    double dt = 1e-5;  ///< fixed step for rk4, initial guess for rkf45 (0 = automatic)
    double rtol = 1e-8;
    double atol = 1e-10;
    double t_end = 1.0;
    std::vector<double> snapshot_times;  ///< sorted, inside [0, t_end]
    double dt_min = 1e-12;
    long max_steps = 50'000'000;

    void validate() const {
        if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ValidationError("integrator: T must be >= 0");
        if (method == IntegratorMethod::rk4_fixed && !(dt > 0.0))
            throw ValidationError("integrator: rk4-fixed needs dt > 0");
        if (method == IntegratorMethod::rkf45_adaptive && (!(rtol > 0.0) || !(atol > 0.0)))
            throw ValidationError("integrator: rkf45-adaptive needs rtol, atol > 0");
        if (!std::is_sorted(snapshot_times.begin(), snapshot_times.end()))
            throw ValidationError("integrator: snapshot times must be sorted");
        for (double t : snapshot_times)
            if (t < 0.0 || t > t_end) throw ValidationError("integrator: snapshot time outside [0, T]");
    }
};

/// Evenly spaced snapshot times k T / count, k = 0..count.
inline std::vector<double> uniform_snapshots(double t_end, int count) {
    std::vector<double> out;
    for (int k = 0; k < count; ++k) out.push_back(t_end * k / count);
    out.push_back(t_end);  // t_end * count / count can round past t_end
    return out;
}

struct StepStats {
    long accepted = 0;
    long rejected = 0;
    double last_dt = 0.0;
    double last_error = 1e-4;  ///< scaled error of the last accepted step (PI controller memory)
};

/// Settings for the auxiliary integrands carried by the integrator.
struct RhsOptions {
    std::vector<double> r_values{1.5, 2.0};
    double tol_zero = 1e-7;  ///< positivity-set threshold for the weighted dissipation
};

/// Layout of the auxiliary block appended to the coefficient vector.
struct AuxLayout {
    static constexpr int kDissipation = 0;
    static constexpr int kEntropyDissipation = 1;
    static constexpr int kWeightedBegin = 2;
    static int size(const RhsOptions& o) { return kWeightedBegin + static_cast<int>(o.r_values.size()); }
};

struct OdeState {
    double t = 0.0;
    SpectralField c;
    Vector aux;  ///< running integrals, see AuxLayout
    StepStats stats;
};

/// Everything a single right-hand-side evaluation produces.
struct RhsResult {
    Vector dcdt;
    double dissipation = 0.0;          ///< int m |p_x|^2
    double entropy_dissipation = 0.0;  ///< int p (-u_xx)
    Vector weighted;                   ///< int_{u > tol} |u|^{n r} |p_x|^2 per r
};

/// Owns the scratch space for repeated evaluations of f(c).
class GalerkinRhs {
public:
    GalerkinRhs(const SpectralBasis& basis, ModelParams params, RhsOptions options = {})
        : basis_(&basis), params_(std::move(params)), options_(std::move(options)) {
        const auto g = basis.grid_size();
        u_.resize(g);
        ux_.resize(g);
        uxx_.resize(g);
        phi_.resize(g);
        px_.resize(g);
        flux_.resize(g);
    }

    const SpectralBasis& basis() const { return *basis_; }
    const ModelParams& params() const { return params_; }
    const RhsOptions& options() const { return options_; }
    int aux_size() const { return AuxLayout::size(options_); }

    /// dc/dt only.
    Vector operator()(const Vector& c) {
        RhsResult r;
        evaluate(c, r, false);
        return r.dcdt;
    }

    void evaluate(const Vector& c, RhsResult& out, bool with_aux = true) {
        const SpectralBasis& b = *basis_;
        if (c.size() != b.modes() + 1)
            throw std::invalid_argument("assemble_rhs: coefficient vector has the wrong length");
        u_.noalias() = b.values() * c;
        ux_.noalias() = b.derivatives() * c;
        for (Eigen::Index i = 0; i < ux_.size(); ++i) phi_[i] = curvature_flux(ux_[i], params_);
        Vector d = b.project_against_derivatives(phi_);
        d[0] = 0.0;
        if (!d.allFinite()) throw IntegratorError("pressure", "non-finite pressure coefficients");

        px_.noalias() = b.derivatives() * d;
        for (Eigen::Index i = 0; i < u_.size(); ++i) flux_[i] = mobility(u_[i], params_) * px_[i];
        if (!flux_.allFinite()) throw IntegratorError("flux", "non-finite flux m(u) p_x");

        out.dcdt = -b.project_against_derivatives(flux_);
        out.dcdt[0] = 0.0;
        if (!out.dcdt.allFinite()) throw IntegratorError("rhs", "non-finite dc/dt");

        if (!with_aux) return;
        uxx_.noalias() = b.second_derivatives() * c;
        const Vector& w = b.weights();
        double diss = 0.0, ent = 0.0;
        out.weighted.setZero(static_cast<Eigen::Index>(options_.r_values.size()));
        for (Eigen::Index i = 0; i < u_.size(); ++i) {
            const double px2 = px_[i] * px_[i];
            diss += w[i] * flux_[i] * px_[i];
            ent += w[i] * pressure_at(ux_[i], uxx_[i], params_) * (-uxx_[i]);
            if (u_[i] > options_.tol_zero) {
                const double m = power(u_[i], params_.n);
                for (std::size_t k = 0; k < options_.r_values.size(); ++k)
                    out.weighted[static_cast<Eigen::Index>(k)] += w[i] * power(m, options_.r_values[k]) * px2;
            }
        }
        out.dissipation = diss;
        out.entropy_dissipation = ent;
    }

    /// Rate of the full augmented state [c; aux].
    Vector augmented(const Vector& y) {
        const int n = basis_->modes() + 1;
        RhsResult r;
        evaluate(y.head(n), r, true);
        Vector dy(y.size());
        dy.head(n) = r.dcdt;
        dy[n + AuxLayout::kDissipation] = r.dissipation;
        dy[n + AuxLayout::kEntropyDissipation] = r.entropy_dissipation;
        dy.segment(n + AuxLayout::kWeightedBegin, r.weighted.size()) = r.weighted;
        return dy;
    }

private:
    const SpectralBasis* basis_;
    ModelParams params_;
    RhsOptions options_;
    Vector u_, ux_, uxx_, phi_, px_, flux_;
};

inline SpectralField assemble_rhs(const SpectralField& c, const ModelParams& params,
                                  const SpectralBasis& basis) {
    GalerkinRhs rhs(basis, params);
    return SpectralField(rhs(c.coeffs));
}

// ---------------------------------------------------------------------------
// Runge-Kutta steppers
// ---------------------------------------------------------------------------

namespace detail {

inline Vector pack(const OdeState& s) {
    Vector y(s.c.coeffs.size() + s.aux.size());
    y << s.c.coeffs, s.aux;
    return y;
}

inline void unpack(const Vector& y, OdeState& s) {
    const auto n = s.c.coeffs.size();
    s.c.coeffs = y.head(n);
    s.aux = y.tail(y.size() - n);
}

inline Vector rk4(GalerkinRhs& f, const Vector& y, double h) {
    const Vector k1 = f.augmented(y);
    const Vector k2 = f.augmented(y + 0.5 * h * k1);
    const Vector k3 = f.augmented(y + 0.5 * h * k2);
    const Vector k4 = f.augmented(y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Runge-Kutta-Fehlberg 4(5). Returns the fourth-order solution and writes
/// the embedded error estimate.
inline Vector rkf45(GalerkinRhs& f, const Vector& y, double h, Vector& err) {
    const Vector k1 = f.augmented(y);
    const Vector k2 = f.augmented(y + h * (1.0 / 4.0) * k1);
    const Vector k3 = f.augmented(y + h * ((3.0 / 32.0) * k1 + (9.0 / 32.0) * k2));
    const Vector k4 = f.augmented(
        y + h * ((1932.0 / 2197.0) * k1 - (7200.0 / 2197.0) * k2 + (7296.0 / 2197.0) * k3));
    const Vector k5 = f.augmented(y + h * ((439.0 / 216.0) * k1 - 8.0 * k2 + (3680.0 / 513.0) * k3 -
                                           (845.0 / 4104.0) * k4));
    const Vector k6 =
        f.augmented(y + h * (-(8.0 / 27.0) * k1 + 2.0 * k2 - (3544.0 / 2565.0) * k3 +
                             (1859.0 / 4104.0) * k4 - (11.0 / 40.0) * k5));
    const Vector y4 = y + h * ((25.0 / 216.0) * k1 + (1408.0 / 2565.0) * k3 +
                               (2197.0 / 4104.0) * k4 - (1.0 / 5.0) * k5);
    err = h * ((1.0 / 360.0) * k1 - (128.0 / 4275.0) * k3 - (2197.0 / 75240.0) * k4 +
               (1.0 / 50.0) * k5 + (2.0 / 55.0) * k6);
    return y4;
}

inline double error_norm(const Vector& err, const Vector& y0, const Vector& y1, double rtol,
                         double atol) {
    double e = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        e = std::max(e, std::abs(err[i]) / sc);
    }
    return e;
}

}  // namespace detail

/// Advances `state` by one step of at most `dt`. For rkf45-adaptive the step
/// may be rejected and retried internally; the accepted size is returned in
/// stats.last_dt and the suggested next size is written to `dt_next`.
inline OdeState step(const OdeState& state, const IntegratorSpec& spec, GalerkinRhs& rhs,
                     double dt, double* dt_next = nullptr) {
    constexpr double kBeta = 0.08;
    constexpr double kAlpha = 0.2 - 0.75 * kBeta;
    OdeState out = state;
    const Vector y = detail::pack(state);
    if (spec.method == IntegratorMethod::rk4_fixed) {
        const Vector y1 = detail::rk4(rhs, y, dt);
        if (!y1.allFinite()) throw IntegratorError("step", "rk4 produced a non-finite state (dt too large?)");
        detail::unpack(y1, out);
        out.t = state.t + dt;
        out.stats.accepted += 1;
        out.stats.last_dt = dt;
        if (dt_next) *dt_next = dt;
        return out;
    }

    double h = dt;
    Vector err(y.size());
    while (true) {
        if (h < spec.dt_min)
            throw IntegratorError("step", "step size " + std::to_string(h) + " fell below dt_min at t = " +
                                              std::to_string(state.t) +
                                              "; the system is too stiff for the explicit integrator");
        Vector y1;
        double e = std::numeric_limits<double>::infinity();
        try {
            y1 = detail::rkf45(rhs, y, h, err);
            if (y1.allFinite() && err.allFinite()) e = detail::error_norm(err, y, y1, spec.rtol, spec.atol);
        } catch (const IntegratorError&) {
            // non-finite stage: treat like a failed error test
        }
        if (e <= 1.0) {
            detail::unpack(y1, out);
            out.t = state.t + h;
            out.stats.accepted += 1;
            out.stats.last_dt = h;
            if (dt_next) {
                // PI control damps the accept/reject cycling at the stability boundary
                const double en = std::max(e, 1e-10);
                const double fac = 0.9 * std::pow(en, -kAlpha) * std::pow(state.stats.last_error, kBeta);
                *dt_next = h * std::clamp(fac, 0.2, 5.0);
            }
            out.stats.last_error = std::max(e, 1e-10);
            return out;
        }
        out.stats.rejected += 1;
        const double fac = std::isfinite(e) ? 0.9 * std::pow(e, -0.25) : 0.1;
        h *= std::clamp(fac, 0.1, 0.5);
    }
}

// ---------------------------------------------------------------------------
// Simulation driver
// ---------------------------------------------------------------------------

struct Snapshot {
    double t = 0.0;
    SpectralField c;
    Vector aux;
};

struct SimulationResult {
    std::vector<Snapshot> snapshots;
    StepStats stats;
    bool unbounded_mobility = false;  ///< eta = 0: runs outside the discrete existence theory
};

struct Observers {
    std::function<void(const Snapshot&)> on_snapshot;
    /// Called after every accepted step with the new state.
    std::function<void(const OdeState&)> on_step;
};

struct SimulationOptions {
    RhsOptions rhs;
    /// When set, sup|u| must stay below this value at every snapshot.
    std::optional<double> entropy_anchor;
};

inline void check_anchor(const SpectralBasis& basis, const SpectralField& c, double anchor) {
    const double sup = basis.evaluate(c).cwiseAbs().maxCoeff();
    if (sup >= anchor) throw AnchorViolation(sup, anchor);
}

/// Integrates u0 (already in V_N) to spec.t_end. Steps are clipped so that
/// every snapshot time is hit exactly.
inline SimulationResult simulate(const SpectralField& u0, const IntegratorSpec& spec,
                                 const ModelParams& params, const SpectralBasis& basis,
                                 const SimulationOptions& options = {}, const Observers& observers = {}) {
    spec.validate();
    params.validate();
    if (u0.modes() != basis.modes()) throw ValidationError("simulate: u0 and basis disagree on N");
    if (!u0.coeffs.allFinite()) throw ValidationError("simulate: non-finite initial coefficients");

    GalerkinRhs rhs(basis, params, options.rhs);
    SimulationResult result;
    result.unbounded_mobility = params.eta == 0.0 && !params.constant_mobility;

    OdeState state;
    state.c = u0;
    state.aux = Vector::Zero(rhs.aux_size());

    auto record = [&](const OdeState& s) {
        if (options.entropy_anchor) check_anchor(basis, s.c, *options.entropy_anchor);
        Snapshot snap{s.t, s.c, s.aux};
        if (observers.on_snapshot) observers.on_snapshot(snap);
        result.snapshots.push_back(std::move(snap));
    };

    std::size_t next = 0;
    while (next < spec.snapshot_times.size() && spec.snapshot_times[next] <= 0.0) {
        record(state);
        ++next;
    }

    double dt = spec.dt;
    if (spec.method == IntegratorMethod::rkf45_adaptive && !(dt > 0.0)) {
        const double lam = basis.eigenvalues()[basis.modes()];
        dt = 1.0 / (1.0 + lam * lam);
    }

    while (state.t < spec.t_end) {
        if (state.stats.accepted + state.stats.rejected > spec.max_steps)
            throw IntegratorError("simulate", "step budget exhausted at t = " + std::to_string(state.t));
        double target = spec.t_end;
        if (next < spec.snapshot_times.size()) target = std::min(target, spec.snapshot_times[next]);
        double h = std::min(dt, target - state.t);
        // absorb a sliver rather than taking a roundoff-sized follow-up step
        if (target - state.t - h < 1e-3 * h) h = target - state.t;
        const bool hits_target = h == target - state.t;

        double dt_next = dt;
        OdeState stepped = step(state, spec, rhs, h, &dt_next);
        const bool clipped_short = hits_target && stepped.stats.last_dt == h;
        if (clipped_short) stepped.t = target;
        state = std::move(stepped);
        if (spec.method == IntegratorMethod::rkf45_adaptive) {
            // a step shortened to land on a snapshot must not shrink the controller's guess
            dt = (hits_target && state.stats.last_dt < dt) ? std::max(dt, dt_next) : dt_next;
        }
        if (observers.on_step) observers.on_step(state);

        while (next < spec.snapshot_times.size() && spec.snapshot_times[next] <= state.t) {
            record(state);
            ++next;
        }
    }
    result.stats = state.stats;
    return result;
}

}  // namespace capillary1d

#pragma once

/// Per-snapshot and per-trajectory quantities behind the a-priori estimates:
/// mass, energy and its dissipation, entropy and its dissipation, the
/// Galerkin weak residual, the slope bound chain y_max <= M(c1, c2), Hoelder
/// probes and positivity verdicts.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "capillary1d/galerkin.hpp"
#include "capillary1d/model.hpp"
#include "capillary1d/spectral_basis.hpp"

namespace capillary1d {

struct DiagnosticsSettings {
    std::vector<double> r_values{1.5, 2.0};
    double tol_zero = 1e-7;
    double tol_neg = 1e-8;
};

/// tol_zero = 1e-7 max(1, |u0|_inf) and tol_neg = 1e-8 |u0|_inf.
inline DiagnosticsSettings default_tolerances(double u0_sup, std::vector<double> r_values = {1.5, 2.0}) {
    DiagnosticsSettings s;
    s.r_values = std::move(r_values);
    s.tol_zero = 1e-7 * std::max(1.0, u0_sup);
    s.tol_neg = 1e-8 * u0_sup;
    return s;
}

struct DiagnosticsRecord {
    double t = 0.0;
    double mass = 0.0;
    double energy_surface = 0.0;  ///< int Q (linear mode: int 1 + u_x^2 / 2)
    double energy_delta = 0.0;    ///< delta/2 |u_x|^2
    double dissipation_cum = 0.0;
    double entropy = std::numeric_limits<double>::quiet_NaN();  ///< NaN when not tracked
    double entropy_dissipation_cum = 0.0;
    std::vector<double> weighted_dissipation_cum;  ///< one per r value
    double curvature_dissipation = 0.0;            ///< c2 = int u_xx^2 / Q^3 at this instant
    double min_u = 0.0;
    double max_u = 0.0;
    double zero_frac = 0.0;
    double y_max = 0.0;    ///< max |u_x| / Q
    double ux_linf = 0.0;
    double h1 = 0.0;
    double h2 = 0.0;
    double weak_residual = 0.0;  ///< max_{j<=N} |r_j| / scale

    double energy() const { return energy_surface + energy_delta; }
};

/// Weak-form residual r_j = (u_t, e_j) + (J, e_j') with J = m(u) p_x on
/// {u > tol_zero} and 0 elsewhere. Test modes beyond N measure truncation.
struct WeakResidual {
    std::vector<int> modes;
    std::vector<double> residual;
    /// |u_t|_{L2} + |J|_{L2} sqrt(lambda_j): Cauchy-Schwarz bounds on the two terms.
    std::vector<double> scale;

    double max_relative(int up_to_mode) const {
        double r = 0.0;
        for (std::size_t k = 0; k < modes.size(); ++k) {
            if (modes[k] > up_to_mode) continue;
            r = std::max(r, scale[k] > 0.0 ? std::abs(residual[k]) / scale[k] : std::abs(residual[k]));
        }
        return r;
    }
};

inline WeakResidual flux_and_weak_residual(const SpectralField& c, const ModelParams& params,
                                           const SpectralBasis& basis, const std::vector<int>& test_modes,
                                           const SpectralField& u_t, double tol_zero) {
    const Vector u = basis.evaluate(c);
    const SpectralField d = galerkin_pressure_coeffs(c, params, basis);
    const Vector px = basis.evaluate_derivative(d);
    Vector j(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i)
        j[i] = u[i] > tol_zero ? mobility(u[i], params) * px[i] : 0.0;

    WeakResidual out;
    const double j_norm = std::sqrt(basis.quadrature(j.cwiseAbs2()));
    const Vector ut = basis.evaluate(u_t);
    const double ut_norm = std::sqrt(basis.quadrature(ut.cwiseAbs2()));
    const Vector& x = basis.nodes();
    for (int mode : test_modes) {
        const Eigenpair e(mode, basis.domain().half_length);
        Vector ej(x.size()), ejx(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            ej[i] = e(x[i]);
            ejx[i] = e.derivative(x[i]);
        }
        out.modes.push_back(mode);
        out.residual.push_back(basis.quadrature(ut.cwiseProduct(ej)) + basis.quadrature(j.cwiseProduct(ejx)));
        out.scale.push_back(ut_norm + j_norm * std::sqrt(e.eigenvalue()));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Slope bound chain
// ---------------------------------------------------------------------------

/// Constant C with |g|_{C^{0,1/2}} <= C |g|_{H^1} on (-l, l):
/// sup|g| <= |g|_{L2} / sqrt(2l) + sqrt(2l) |g_x|_{L2} and the Hoelder
/// seminorm is at most |g_x|_{L2}; Cauchy-Schwarz merges the two weights.
inline double holder_embedding_constant(double half_length) {
    const double len = 2.0 * half_length;
    const double a = 1.0 / std::sqrt(len);
    const double b = 1.0 + std::sqrt(len);
    return std::sqrt(a * a + b * b);
}

/// Left side of the threshold inequality,
/// (1/2) int_{-l}^{l} dx / (K^2 |x - l| + sqrt(1 - y^2)), written in terms of
/// b = sqrt(1 - y^2).
inline double slope_threshold_integral(double b, double k, double half_length) {
    const double k2 = k * k;
    if (k2 == 0.0) return half_length / b;
    return std::log1p(2.0 * half_length * k2 / b) / (2.0 * k2);
}

/// Largest y in [0, 1) compatible with the threshold inequality <= c1,
/// found by bisection on log b.
inline double slope_threshold(double c1, double k, double half_length) {
    double lo = -745.0, hi = 0.0;  // log b
    if (slope_threshold_integral(1.0, k, half_length) >= c1) return 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (slope_threshold_integral(std::exp(mid), k, half_length) > c1) lo = mid;
        else hi = mid;
    }
    const double b = std::exp(hi);
    return std::sqrt((1.0 - b) * (1.0 + b));
}

struct SlopeBoundReport {
    double y_max = 0.0;
    double g_min = 1.0;  ///< min Q^{-1/2}
    double g_h1 = 0.0;   ///< |Q^{-1/2}|_{H^1}
    double u_h2 = 0.0;
    double c1 = 0.0;     ///< int Q
    double c2 = 0.0;     ///< int u_xx^2 / Q^3
    double k = 0.0;      ///< Hoelder constant of g
    double threshold = 1.0;  ///< M(c1, c2)
    bool holds = true;       ///< y_max <= M
};

inline SlopeBoundReport slope_bound_quantities(const SpectralField& c, const SpectralBasis& basis) {
    const CollocationField f = basis.synthesize(c, 2);
    SlopeBoundReport r;
    Vector q(f.size()), g(f.size()), gx(f.size()), k2(f.size());
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        q[i] = std::sqrt(1.0 + f.ux[i] * f.ux[i]);
        const double fi = f.ux[i] / q[i];
        g[i] = 1.0 / std::sqrt(q[i]);
        gx[i] = -0.5 * fi * f.uxx[i] / std::pow(q[i], 1.5);
        k2[i] = f.uxx[i] * f.uxx[i] / (q[i] * q[i] * q[i]);
        r.y_max = std::max(r.y_max, std::abs(fi));
        r.g_min = std::min(r.g_min, g[i]);
    }
    r.c1 = basis.quadrature(q);
    r.c2 = basis.quadrature(k2);
    r.g_h1 = std::sqrt(basis.quadrature(g.cwiseAbs2()) + basis.quadrature(gx.cwiseAbs2()));
    r.u_h2 = basis.sobolev_norms(c).h2;
    const double l = basis.domain().half_length;
    r.k = holder_embedding_constant(l) * r.g_h1;
    r.threshold = slope_threshold(r.c1, r.k, l);
    r.holds = r.y_max <= r.threshold;
    return r;
}

// ---------------------------------------------------------------------------
// Snapshot diagnostics
// ---------------------------------------------------------------------------

inline DiagnosticsRecord snapshot_diagnostics(const Snapshot& snap, const ModelParams& params,
                                              const EntropyEval* entropy, const SpectralBasis& basis,
                                              const DiagnosticsSettings& settings) {
    CollocationField f = basis.synthesize(snap.c, 2);
    pressure(f, params);
    const Vector& q = *f.Q;
    const Eigen::Index g = f.size();

    DiagnosticsRecord r;
    r.t = snap.t;
    r.mass = basis.quadrature(f.u);
    if (params.pressure_mode == PressureMode::nonlinear) {
        r.energy_surface = basis.quadrature(q);
    } else {
        r.energy_surface = basis.quadrature((Vector::Ones(g) + 0.5 * f.ux.cwiseAbs2()));
    }
    r.energy_delta = 0.5 * params.delta * basis.quadrature(f.ux.cwiseAbs2());

    const Vector& aux = snap.aux;
    if (aux.size() >= AuxLayout::kWeightedBegin) {
        r.dissipation_cum = aux[AuxLayout::kDissipation];
        r.entropy_dissipation_cum = aux[AuxLayout::kEntropyDissipation];
        for (Eigen::Index k = AuxLayout::kWeightedBegin; k < aux.size(); ++k)
            r.weighted_dissipation_cum.push_back(aux[k]);
    }

    Vector k2(g);
    Eigen::Index zeros = 0;
    for (Eigen::Index i = 0; i < g; ++i) {
        k2[i] = f.uxx[i] * f.uxx[i] / (q[i] * q[i] * q[i]);
        r.y_max = std::max(r.y_max, std::abs(f.ux[i]) / q[i]);
        if (f.u[i] < settings.tol_zero) ++zeros;
    }
    r.curvature_dissipation = basis.quadrature(k2);
    r.min_u = f.u.minCoeff();
    r.max_u = f.u.maxCoeff();
    r.zero_frac = static_cast<double>(zeros) / static_cast<double>(g);
    r.ux_linf = f.ux.cwiseAbs().maxCoeff();
    const SobolevNorms norms = basis.sobolev_norms(snap.c);
    r.h1 = norms.h1;
    r.h2 = norms.h2;

    if (entropy) {
        const double sup = f.u.cwiseAbs().maxCoeff();
        if (sup >= entropy->anchor()) throw AnchorViolation(sup, entropy->anchor());
        r.entropy = entropy->integral(f.u, basis);
    }

    const SpectralField ut = assemble_rhs(snap.c, params, basis);
    std::vector<int> modes(static_cast<std::size_t>(basis.modes()) + 1);
    for (int j = 0; j <= basis.modes(); ++j) modes[static_cast<std::size_t>(j)] = j;
    const WeakResidual wr = flux_and_weak_residual(snap.c, params, basis, modes, ut, settings.tol_zero);
    r.weak_residual = wr.max_relative(basis.modes());
    return r;
}

// ---------------------------------------------------------------------------
// Trajectory-level checks
// ---------------------------------------------------------------------------

struct ResidualSeries {
    std::vector<double> t;
    std::vector<double> residual;
    double max = 0.0;
};

/// |E(t) + int_0^t D - E(0)| per record.
inline ResidualSeries energy_identity_residual(const std::vector<DiagnosticsRecord>& records) {
    ResidualSeries s;
    if (records.empty()) return s;
    const double e0 = records.front().energy() + records.front().dissipation_cum;
    for (const auto& r : records) {
        const double res = std::abs(r.energy() + r.dissipation_cum - e0);
        s.t.push_back(r.t);
        s.residual.push_back(res);
        s.max = std::max(s.max, res);
    }
    return s;
}

/// |int G(u(t)) - int G(u0) + int_0^t int p (-u_xx)| per record. Exact for the
/// PDE; for the Galerkin system it is a truncation measure that must shrink
/// as N grows.
inline ResidualSeries entropy_identity_residual(const std::vector<DiagnosticsRecord>& records) {
    ResidualSeries s;
    if (records.empty()) return s;
    const double g0 = records.front().entropy + records.front().entropy_dissipation_cum;
    if (!std::isfinite(g0)) throw ValidationError("entropy residual: initial entropy is not finite");
    for (const auto& r : records) {
        const double res = std::abs(r.entropy + r.entropy_dissipation_cum - g0);
        s.t.push_back(r.t);
        s.residual.push_back(res);
        s.max = std::max(s.max, res);
    }
    return s;
}

/// Energy never increases beyond `tol` between consecutive records.
inline bool energy_monotone(const std::vector<DiagnosticsRecord>& records, double tol) {
    for (std::size_t k = 1; k < records.size(); ++k)
        if (records[k].energy() > records[k - 1].energy() + tol) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Hoelder probes
// ---------------------------------------------------------------------------

struct HolderFit {
    double exponent = std::numeric_limits<double>::quiet_NaN();
    double constant = std::numeric_limits<double>::quiet_NaN();
    double resolution = 0.0;  ///< smallest increment sampled
    int samples = 0;
    bool conclusive = false;
};

struct HolderProbe {
    HolderFit time;
    HolderFit space;
};

namespace detail {

inline HolderFit loglog_fit(const std::vector<std::pair<double, double>>& pts, double floor) {
    HolderFit fit;
    std::vector<std::pair<double, double>> logs;
    double res = std::numeric_limits<double>::infinity();
    for (auto [d, du] : pts) {
        if (d <= 0.0 || du <= floor) continue;
        logs.emplace_back(std::log(d), std::log(du));
        res = std::min(res, d);
    }
    fit.samples = static_cast<int>(logs.size());
    if (logs.size() < 2) return fit;
    double mx = 0.0, my = 0.0;
    for (auto [x, y] : logs) {
        mx += x;
        my += y;
    }
    mx /= logs.size();
    my /= logs.size();
    double sxx = 0.0, sxy = 0.0;
    for (auto [x, y] : logs) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (sxx <= 0.0) return fit;
    fit.exponent = sxy / sxx;
    fit.constant = std::exp(my - fit.exponent * mx);
    fit.resolution = res;
    fit.conclusive = true;
    return fit;
}

}  // namespace detail

/// Log-log least-squares fits of sup_x |u(t2,x) - u(t1,x)| against |t2 - t1|
/// over all snapshot pairs, and of max_i |u(x_{i+k}) - u(x_i)| against the
/// node separation over all snapshots.
inline HolderProbe holder_probe(const std::vector<Snapshot>& snaps, const SpectralBasis& basis) {
    HolderProbe probe;
    if (snaps.size() < 3) return probe;
    std::vector<Vector> u;
    u.reserve(snaps.size());
    double scale = 0.0;
    for (const auto& s : snaps) {
        u.push_back(basis.evaluate(s.c));
        scale = std::max(scale, u.back().cwiseAbs().maxCoeff());
    }
    const double floor = 1e-13 * std::max(1.0, scale);

    std::vector<std::pair<double, double>> tp;
    for (std::size_t a = 0; a < snaps.size(); ++a)
        for (std::size_t b = a + 1; b < snaps.size(); ++b)
            tp.emplace_back(snaps[b].t - snaps[a].t, (u[b] - u[a]).cwiseAbs().maxCoeff());
    probe.time = detail::loglog_fit(tp, floor);

    const Vector& x = basis.nodes();
    std::vector<std::pair<double, double>> xp;
    for (Eigen::Index k = 1; k < x.size() / 2; k *= 2) {
        double dx = 0.0, du = 0.0;
        for (const auto& ui : u)
            for (Eigen::Index i = 0; i + k < x.size(); ++i) {
                const double d = std::abs(ui[i + k] - ui[i]);
                if (d > du) {
                    du = d;
                    dx = x[i + k] - x[i];
                }
            }
        xp.emplace_back(dx, du);
    }
    probe.space = detail::loglog_fit(xp, floor);
    return probe;
}

// ---------------------------------------------------------------------------
// Positivity
// ---------------------------------------------------------------------------

struct PositivityReport {
    double min_u = std::numeric_limits<double>::infinity();
    double max_zero_frac = 0.0;
    double grid_resolution = 0.0;  ///< 1 / grid size
    std::vector<double> min_u_series;
    std::vector<double> zero_frac_series;
    bool nonnegative = true;                 ///< min u >= -tol_neg
    std::optional<bool> zero_set_negligible;  ///< n >= 2: zero_frac <= grid resolution
    std::optional<bool> stays_positive;       ///< n >= 8/3 and u0 > 0: min u >= floor
};

inline PositivityReport positivity_report(const std::vector<DiagnosticsRecord>& records, double n,
                                          const DiagnosticsSettings& settings, std::size_t grid_size,
                                          double pos_floor) {
    PositivityReport rep;
    rep.grid_resolution = 1.0 / static_cast<double>(grid_size);
    for (const auto& r : records) {
        rep.min_u = std::min(rep.min_u, r.min_u);
        rep.max_zero_frac = std::max(rep.max_zero_frac, r.zero_frac);
        rep.min_u_series.push_back(r.min_u);
        rep.zero_frac_series.push_back(r.zero_frac);
    }
    rep.nonnegative = rep.min_u >= -settings.tol_neg;
    if (n >= 2.0) rep.zero_set_negligible = rep.max_zero_frac <= rep.grid_resolution;
    const bool u0_positive = !records.empty() && records.front().min_u > settings.tol_zero;
    if (n >= 8.0 / 3.0 && u0_positive) rep.stays_positive = rep.min_u >= pos_floor;
    return rep;
}

}  // namespace capillary1d

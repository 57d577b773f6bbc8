#pragma once

/// Physics of the regularized thin-film system
///
///   u_t = (m_{eps,eta}(u) p_x)_x,   p = -(u_x / Q + delta u_x)_x,   Q = sqrt(1 + u_x^2)
///
/// with m(s) = |s|^n and m_{eps,eta}(s) = m(s) / (1 + eta m(s)) + eps.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "capillary1d/adaptive_simpson.hpp"
#include "capillary1d/error.hpp"
#include "capillary1d/spectral_basis.hpp"

namespace capillary1d {

enum class PressureMode { nonlinear, linear };

inline const char* to_string(PressureMode m) {
    return m == PressureMode::nonlinear ? "nonlinear" : "linear";
}

inline PressureMode pressure_mode_from_string(const std::string& s) {
    if (s == "nonlinear") return PressureMode::nonlinear;
    if (s == "linear") return PressureMode::linear;
    throw ValidationError("unknown pressure_mode '" + s + "'");
}

struct ModelParams {
    double n = 2.0;        ///< mobility growth exponent
    double delta = 0.1;    ///< elliptic augmentation of the curvature operator
    double epsilon = 0.1;  ///< mobility lift
    double eta = 0.0;      ///< mobility cap, 0 disables it
    PressureMode pressure_mode = PressureMode::nonlinear;
    std::optional<double> entropy_anchor;  ///< a; unset means "auto"
    /// Replaces m_{eps,eta} by a constant. Test hook for the decoupled linear problem.
    std::optional<double> constant_mobility;

    void validate() const {
        if (!(n >= 1.0) || !std::isfinite(n)) throw ValidationError("model: n must be >= 1");
        auto unit = [](double v, const char* name) {
            if (!(v >= 0.0 && v <= 1.0))
                throw ValidationError(std::string("model: ") + name + " must lie in [0, 1]");
        };
        unit(delta, "delta");
        unit(epsilon, "epsilon");
        unit(eta, "eta");
        if (entropy_anchor && (!std::isfinite(*entropy_anchor) || *entropy_anchor <= 0.0))
            throw ValidationError("model: entropy_anchor must be positive and finite");
        if (constant_mobility && !(*constant_mobility > 0.0))
            throw ValidationError("model: constant_mobility must be positive");
    }
};

/// x^e for x >= 0 with shortcuts for the exponents that dominate in practice.
inline double power(double x, double e) {
    if (e == 1.0) return x;
    if (e == 2.0) return x * x;
    if (e == 3.0) return x * x * x;
    if (e == 1.5) return x * std::sqrt(x);
    if (e == 0.5) return std::sqrt(x);
    return std::pow(x, e);
}

inline double mobility(double s, const ModelParams& params) {
    if (params.constant_mobility) return *params.constant_mobility;
    const double m = power(std::abs(s), params.n);
    if (params.eta > 0.0) {
        if (std::isinf(m)) return 1.0 / params.eta + params.epsilon;
        return m / (1.0 + params.eta * m) + params.epsilon;
    }
    return m + params.epsilon;
}

/// Flux function phi(u_x) of A_delta: <A_delta(u), v> = int phi(u_x) v_x.
inline double curvature_flux(double ux, const ModelParams& params) {
    if (params.pressure_mode == PressureMode::linear) return (1.0 + params.delta) * ux;
    return ux / std::sqrt(1.0 + ux * ux) + params.delta * ux;
}

/// Pointwise pressure -(phi(u_x))_x.
inline double pressure_at(double ux, double uxx, const ModelParams& params) {
    if (params.pressure_mode == PressureMode::linear) return -(1.0 + params.delta) * uxx;
    const double q = std::sqrt(1.0 + ux * ux);
    return -uxx / (q * q * q) - params.delta * uxx;
}

/// Pressure on the grid; also stores Q and p into the field.
inline Vector pressure(CollocationField& field, const ModelParams& params) {
    const auto g = field.size();
    if (field.ux.size() != g || field.uxx.size() != g)
        throw std::invalid_argument("pressure: field needs u_x and u_xx on the grid");
    Vector p(g), q(g);
    for (Eigen::Index i = 0; i < g; ++i) {
        q[i] = std::sqrt(1.0 + field.ux[i] * field.ux[i]);
        p[i] = pressure_at(field.ux[i], field.uxx[i], params);
    }
    field.Q = q;
    field.p = p;
    return p;
}

inline Vector pressure(const CollocationField& field, const ModelParams& params) {
    CollocationField copy = field;
    return pressure(copy, params);
}

inline Vector curvature_flux(const Vector& ux, const ModelParams& params) {
    Vector out(ux.size());
    for (Eigen::Index i = 0; i < ux.size(); ++i) out[i] = curvature_flux(ux[i], params);
    return out;
}

/// <A_delta(u), v> by quadrature.
inline double a_delta_apply(const SpectralField& u, const SpectralField& v,
                            const ModelParams& params, const SpectralBasis& basis) {
    if (u.modes() != basis.modes() || v.modes() != basis.modes())
        throw std::invalid_argument("a_delta_apply: field and basis disagree on the mode count");
    const Vector phi = curvature_flux(basis.evaluate_derivative(u), params);
    return basis.quadrature(phi.cwiseProduct(basis.evaluate_derivative(v)));
}

/// d_k = <A_delta(u), e_k>; d_0 is pinned to zero (e_0' = 0).
inline SpectralField galerkin_pressure_coeffs(const SpectralField& u, const ModelParams& params,
                                              const SpectralBasis& basis) {
    const Vector phi = curvature_flux(basis.evaluate_derivative(u), params);
    SpectralField d(basis.project_against_derivatives(phi));
    d[0] = 0.0;
    return d;
}

// ---------------------------------------------------------------------------
// Entropy functions
// ---------------------------------------------------------------------------

/// g(s) = -int_s^a dr / m(r) and G(s) = -int_s^a g(r) dr = int_s^a (r - s) / m(r) dr,
/// both built on the run's mobility. Closed forms are used for eps = 0 and
/// n in {1, 2, 3}; other cases fall back to adaptive Simpson.
class EntropyEval {
public:
    static constexpr double kInfinity = std::numeric_limits<double>::infinity();

    EntropyEval(const ModelParams& params, double anchor) : params_(params), a_(anchor) {
        if (!std::isfinite(anchor) || anchor <= 0.0)
            throw ValidationError("entropy: anchor a must be positive and finite");
        closed_form_ = params_.constant_mobility.has_value() ||
                       (params_.epsilon == 0.0 &&
                        (params_.n == 1.0 || params_.n == 2.0 || params_.n == 3.0));
    }

    double anchor() const { return a_; }
    bool closed_form() const { return closed_form_; }
    const ModelParams& params() const { return params_; }

    double g(double s) const {
        if (s == a_) return 0.0;
        if (params_.constant_mobility) return -(a_ - s) / *params_.constant_mobility;
        if (params_.epsilon == 0.0) {
            if (s <= 0.0) return -kInfinity;
            if (closed_form_) return g_closed(s);
        }
        return -integrate(s, [this](double r) { return 1.0 / mobility(r, params_); });
    }

    double G(double s) const {
        if (s == a_) return 0.0;
        if (params_.constant_mobility) {
            const double d = a_ - s;
            return 0.5 * d * d / *params_.constant_mobility;
        }
        if (params_.epsilon == 0.0) {
            if (s < 0.0) return kInfinity;
            if (s == 0.0) return G_at_zero();
            if (closed_form_) return G_closed(s);
        }
        return integrate(s, [this, s](double r) { return (r - s) / mobility(r, params_); });
    }

    /// int_Omega G(u) over grid samples; +inf as soon as one sample is infinite.
    double integral(const Vector& u, const SpectralBasis& basis) const {
        Vector vals(u.size());
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            vals[i] = G(u[i]);
            if (std::isinf(vals[i])) return kInfinity;
        }
        return basis.quadrature(vals);
    }

private:
    static constexpr double kAbsTol = 1e-10;

    // int_s^a f(r) dr. For s > 0 the substitution r = s e^t resolves the
    // endpoint layer of 1/m near small s; otherwise split at r = 0 where
    // |r|^n may have a kink.
    template <class F>
    double integrate(double s, const F& f) const {
        double lo = s, hi = a_, sign = 1.0;
        if (lo > hi) {
            std::swap(lo, hi);
            sign = -1.0;
        }
        double total = 0.0;
        if (lo > 0.0) {
            const double span = std::log(hi / lo);
            total = adaptive_simpson([&](double t) {
                const double r = lo * std::exp(t);
                return f(r) * r;
            }, 0.0, span, kAbsTol);
        } else if (hi <= 0.0) {
            total = adaptive_simpson(f, lo, hi, kAbsTol);
        } else {
            total = adaptive_simpson(f, lo, 0.0, 0.5 * kAbsTol) +
                    adaptive_simpson(f, 0.0, hi, 0.5 * kAbsTol);
        }
        return sign * total;
    }

    // eps = 0: 1/m_{0,eta}(r) = r^-n + eta.
    double g_closed(double s) const {
        const double a = a_, eta = params_.eta;
        double base = 0.0;
        if (params_.n == 1.0) base = std::log(s / a);
        else if (params_.n == 2.0) base = 1.0 / a - 1.0 / s;
        else base = -0.5 * (1.0 / (s * s) - 1.0 / (a * a));
        return base - eta * (a - s);
    }

    double G_closed(double s) const {
        const double a = a_, eta = params_.eta;
        double base = 0.0;
        if (params_.n == 1.0) base = a - s + s * std::log(s / a);
        else if (params_.n == 2.0) base = std::log(a / s) - 1.0 + s / a;
        else base = 0.5 / s - 1.0 / a + 0.5 * s / (a * a);
        return base + 0.5 * eta * (a - s) * (a - s);
    }

    // G(0) = int_0^a r^{1-n} dr + eta a^2 / 2, finite iff n < 2.
    double G_at_zero() const {
        const double n = params_.n;
        if (n >= 2.0) return kInfinity;
        return std::pow(a_, 2.0 - n) / (2.0 - n) + 0.5 * params_.eta * a_ * a_;
    }

    ModelParams params_;
    double a_;
    bool closed_form_ = false;
};

inline EntropyEval entropy_functions(const ModelParams& params) {
    if (!params.entropy_anchor) throw ValidationError("entropy: anchor a is not set");
    return EntropyEval(params, *params.entropy_anchor);
}

/// Default anchor: sup of u0 on the grid plus one.
inline double auto_entropy_anchor(const Vector& u0_grid) {
    return u0_grid.cwiseAbs().maxCoeff() + 1.0;
}

// ---------------------------------------------------------------------------
// Initial data
// ---------------------------------------------------------------------------

struct InitialDataReport {
    bool valid = true;
    double min_value = 0.0;
    double max_value = 0.0;
    double zero_fraction = 0.0;      ///< nodes with u0 <= tol_zero
    double limit_entropy = 0.0;      ///< int G(u0) with the eps -> 0 entropy
    bool entropy_finite = true;
    std::vector<std::string> warnings;
    std::vector<std::string> errors;
};

struct ValidationTolerances {
    double tol_zero = 1e-7;
    double tol_neg = 1e-8;
};

/// Checks u0 >= 0 on the grid and int G(u0) < inf for the limiting entropy
/// (eps = 0). Touching zero makes that entropy infinite once n >= 2; this is a
/// hard error when entropy tracking is requested and a warning otherwise.
inline InitialDataReport validate_initial_data(const SpectralField& u0, const ModelParams& params,
                                               const SpectralBasis& basis,
                                               const ValidationTolerances& tol,
                                               bool entropy_mode) {
    InitialDataReport rep;
    const Vector u = basis.evaluate(u0);
    if (!u.allFinite()) {
        rep.valid = false;
        rep.errors.push_back("initial data has non-finite values");
        return rep;
    }
    rep.min_value = u.minCoeff();
    rep.max_value = u.maxCoeff();
    if (rep.min_value < -tol.tol_neg) {
        rep.valid = false;
        rep.errors.push_back("initial data is negative (min " + std::to_string(rep.min_value) + ")");
        return rep;
    }

    Eigen::Index zeros = 0;
    Vector clipped(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (u[i] <= tol.tol_zero) {
            ++zeros;
            clipped[i] = 0.0;
        } else {
            clipped[i] = u[i];
        }
    }
    rep.zero_fraction = static_cast<double>(zeros) / static_cast<double>(u.size());

    ModelParams limit = params;
    limit.epsilon = 0.0;
    limit.eta = 0.0;
    limit.constant_mobility.reset();
    const double a = params.entropy_anchor.value_or(auto_entropy_anchor(u));
    rep.limit_entropy = EntropyEval(limit, a).integral(clipped, basis);
    rep.entropy_finite = std::isfinite(rep.limit_entropy);

    if (!rep.entropy_finite) {
        const std::string msg =
            "initial data touches zero on " + std::to_string(zeros) +
            " grid nodes with n >= 2; the limiting entropy int G(u0) is infinite";
        if (entropy_mode) {
            rep.valid = false;
            rep.errors.push_back(msg);
        } else {
            rep.warnings.push_back(msg);
        }
    } else if (zeros > 0 && params.n >= 2.0) {
        rep.warnings.push_back("initial data touches zero with n >= 2");
    }
    return rep;
}

}  // namespace capillary1d

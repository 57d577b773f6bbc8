#pragma once

/// Neumann cosine eigenbasis of -d²/dx² on (-l, l).
///
/// e_0 = 1/sqrt(2l), e_j(x) = cos(sqrt(lambda_j) x + j pi/2) / sqrt(l) with
/// lambda_j = (j pi / 2l)². The collocation grid is the node set of a
/// composite Gauss-Legendre rule, so synthesized fields live exactly on the
/// quadrature nodes and every integral in the library is a weighted sum.

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "capillary1d/error.hpp"

namespace capillary1d {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Points per Gauss-Legendre panel.
inline constexpr int kPanelPoints = 8;

struct DomainSpec {
    double half_length = 1.0;  ///< l, Omega = (-l, l)
    int modes = 16;            ///< N, basis is e_0 .. e_N
    int oversample = 8;        ///< q, grid holds about q (N+1) nodes

    void validate() const {
        if (!(half_length > 0.0) || !std::isfinite(half_length))
            throw ValidationError("domain: half_length must be positive and finite");
        if (modes < 1) throw ValidationError("domain: modes must be >= 1");
        if (oversample < 4) throw ValidationError("domain: oversample must be >= 4");
    }

    int panels() const {
        const int target = oversample * (modes + 1);
        return (target + kPanelPoints - 1) / kPanelPoints;
    }
    int grid_size() const { return panels() * kPanelPoints; }
    double measure() const { return 2.0 * half_length; }

    bool operator==(const DomainSpec&) const = default;
};

/// Coefficients (c_0 .. c_N) of u = sum c_j e_j.
struct SpectralField {
    Vector coeffs;

    SpectralField() = default;
    explicit SpectralField(Vector c) : coeffs(std::move(c)) {}
    static SpectralField zeros(int modes) { return SpectralField(Vector::Zero(modes + 1)); }

    int modes() const { return static_cast<int>(coeffs.size()) - 1; }
    double operator[](int j) const { return coeffs[j]; }
    double& operator[](int j) { return coeffs[j]; }
};

/// Sampled u and its derivatives on the collocation grid; p and Q are filled
/// in by the model when needed.
struct CollocationField {
    Vector x;
    Vector u;
    Vector ux;
    Vector uxx;
    std::optional<Vector> p;
    std::optional<Vector> Q;

    Eigen::Index size() const { return x.size(); }
};

/// Closed-form eigenfunction e_j with its eigenvalue.
class Eigenpair {
public:
    Eigenpair(int index, double half_length)
        : index_(index), l_(half_length),
          wavenumber_(index * std::numbers::pi / (2.0 * half_length)),
          amplitude_(index == 0 ? 1.0 / std::sqrt(2.0 * half_length) : 1.0 / std::sqrt(half_length)) {}

    int index() const { return index_; }
    double eigenvalue() const { return wavenumber_ * wavenumber_; }

    double operator()(double x) const {
        return index_ == 0 ? amplitude_ : amplitude_ * std::cos(phase(x));
    }
    double derivative(double x) const {
        return index_ == 0 ? 0.0 : -amplitude_ * wavenumber_ * std::sin(phase(x));
    }
    double second_derivative(double x) const { return -eigenvalue() * (*this)(x); }

private:
    // sqrt(lambda_j) x + j pi/2, written so that x = +-l lands on multiples of pi.
    double phase(double x) const { return wavenumber_ * (x + l_); }

    int index_;
    double l_;
    double wavenumber_;
    double amplitude_;
};

inline Eigenpair eigenpair(int j, const DomainSpec& domain) {
    if (j < 0 || j > domain.modes)
        throw std::out_of_range("eigenpair: index " + std::to_string(j) + " outside 0.." +
                                std::to_string(domain.modes));
    return Eigenpair(j, domain.half_length);
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    std::vector<double> nodes(n), weights(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return {nodes, weights};
}

struct SobolevNorms {
    double l2 = 0.0;
    double h1 = 0.0;
    double h2 = 0.0;
    double grad_l2 = 0.0;     ///< ||u_x||
    double hessian_l2 = 0.0;  ///< ||u_xx||
};

/// Basis tables on the collocation grid. Immutable after construction, so a
/// single instance can be shared by concurrent simulations.
class SpectralBasis {
public:
    explicit SpectralBasis(const DomainSpec& domain) : domain_(domain) {
        domain_.validate();
        const int n_modes = domain_.modes + 1;
        const int panels = domain_.panels();
        const int g = domain_.grid_size();
        const double l = domain_.half_length;
        const auto [ref_nodes, ref_weights] = gauss_legendre(kPanelPoints);

        x_.resize(g);
        w_.resize(g);
        const double h = 2.0 * l / panels;
        for (int p = 0; p < panels; ++p) {
            const double mid = -l + (p + 0.5) * h;
            for (int k = 0; k < kPanelPoints; ++k) {
                x_[p * kPanelPoints + k] = mid + 0.5 * h * ref_nodes[k];
                w_[p * kPanelPoints + k] = 0.5 * h * ref_weights[k];
            }
        }

        lambda_.resize(n_modes);
        e_.resize(g, n_modes);
        ex_.resize(g, n_modes);
        exx_.resize(g, n_modes);
        for (int j = 0; j < n_modes; ++j) {
            const Eigenpair ej(j, l);
            lambda_[j] = ej.eigenvalue();
            for (int i = 0; i < g; ++i) {
                e_(i, j) = ej(x_[i]);
                ex_(i, j) = ej.derivative(x_[i]);
                exx_(i, j) = ej.second_derivative(x_[i]);
            }
        }
        we_ = w_.asDiagonal() * e_;
        wex_ = w_.asDiagonal() * ex_;
    }

    const DomainSpec& domain() const { return domain_; }
    int modes() const { return domain_.modes; }
    Eigen::Index grid_size() const { return x_.size(); }

    const Vector& nodes() const { return x_; }
    const Vector& weights() const { return w_; }
    const Vector& eigenvalues() const { return lambda_; }

    /// Tables [i, j] = e_j(x_i), e_j'(x_i), e_j''(x_i).
    const Matrix& values() const { return e_; }
    const Matrix& derivatives() const { return ex_; }
    const Matrix& second_derivatives() const { return exx_; }

    double quadrature(const Vector& values) const {
        if (values.size() != w_.size())
            throw std::invalid_argument("quadrature: got " + std::to_string(values.size()) +
                                        " values for a grid of " + std::to_string(w_.size()));
        return w_.dot(values);
    }

    /// (v, e_j) for j = 0..N from grid samples.
    SpectralField project(const Vector& samples) const {
        if (samples.size() != w_.size())
            throw std::invalid_argument("project: sample count does not match the grid");
        if (!samples.allFinite()) throw ValidationError("project: non-finite samples");
        return SpectralField(we_.transpose() * samples);
    }

    SpectralField project(const std::function<double(double)>& v) const {
        Vector samples(x_.size());
        for (Eigen::Index i = 0; i < x_.size(); ++i) samples[i] = v(x_[i]);
        return project(samples);
    }

    /// (v, e_j') for j = 0..N; the weak-derivative pairing used for fluxes.
    Vector project_against_derivatives(const Vector& samples) const {
        return wex_.transpose() * samples;
    }

    Vector evaluate(const SpectralField& f) const { return e_ * checked(f).coeffs; }
    Vector evaluate_derivative(const SpectralField& f) const { return ex_ * checked(f).coeffs; }
    Vector evaluate_second_derivative(const SpectralField& f) const {
        return exx_ * checked(f).coeffs;
    }

    CollocationField synthesize(const SpectralField& f, int order = 2) const {
        if (order < 0 || order > 2) throw std::invalid_argument("synthesize: order must be 0, 1 or 2");
        checked(f);
        if (!f.coeffs.allFinite()) throw ValidationError("synthesize: non-finite coefficients");
        CollocationField out;
        out.x = x_;
        out.u = e_ * f.coeffs;
        out.ux = order >= 1 ? Vector(ex_ * f.coeffs) : Vector::Zero(x_.size());
        out.uxx = order >= 2 ? Vector(exx_ * f.coeffs) : Vector::Zero(x_.size());
        return out;
    }

    /// u(x) at an arbitrary point, straight from the closed form.
    double evaluate_at(const SpectralField& f, double x) const {
        double s = 0.0;
        for (int j = 0; j <= f.modes(); ++j) s += f[j] * Eigenpair(j, domain_.half_length)(x);
        return s;
    }

    SobolevNorms sobolev_norms(const SpectralField& f) const {
        checked(f);
        double l2 = 0.0, g2 = 0.0, h2 = 0.0;
        for (int j = 0; j <= f.modes(); ++j) {
            const double c2 = f[j] * f[j];
            l2 += c2;
            g2 += lambda_[j] * c2;
            h2 += lambda_[j] * lambda_[j] * c2;
        }
        SobolevNorms n;
        n.l2 = std::sqrt(l2);
        n.grad_l2 = std::sqrt(g2);
        n.hessian_l2 = std::sqrt(h2);
        n.h1 = std::sqrt(l2 + g2);
        n.h2 = std::sqrt(l2 + g2 + h2);
        return n;
    }

private:
    const SpectralField& checked(const SpectralField& f) const {
        if (f.modes() != domain_.modes)
            throw std::invalid_argument("spectral field has " + std::to_string(f.modes()) +
                                        " modes, basis has " + std::to_string(domain_.modes));
        return f;
    }

    DomainSpec domain_;
    Vector x_, w_, lambda_;
    Matrix e_, ex_, exx_;
    Matrix we_, wex_;
};

/// Zero-pad or truncate coefficients to a different mode count.
inline SpectralField resize_modes(const SpectralField& f, int modes) {
    Vector c = Vector::Zero(modes + 1);
    const int n = std::min(modes, f.modes()) + 1;
    c.head(n) = f.coeffs.head(n);
    return SpectralField(std::move(c));
}

}  // namespace capillary1d

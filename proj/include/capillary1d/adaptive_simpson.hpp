#pragma once

#include <cmath>

namespace capillary1d {

namespace detail {

template <class F>
double simpson_recurse(const F& f, double a, double b, double fa, double fm, double fb,
                       double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson with Richardson correction. Splits [a, b] into `pieces`
/// equal parts first so that narrow features are not missed by the initial
/// five-point sample.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 48,
                        int pieces = 8) {
    if (a == b) return 0.0;
    const double h = (b - a) / pieces;
    double total = 0.0;
    for (int k = 0; k < pieces; ++k) {
        const double lo = a + k * h;
        const double hi = (k + 1 == pieces) ? b : lo + h;
        const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
        const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        total += detail::simpson_recurse(f, lo, hi, fa, fm, fb, whole, tol / pieces, max_depth);
    }
    return total;
}

}  // namespace capillary1d
